"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``UCSADDLE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("UCSADDLE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

fgm_power = _impl.fgm_power
project_simplex = _impl.project_simplex
fgm_loop = _pykernels.fgm_loop

__all__ = ["BACKEND", "fgm_power", "fgm_loop", "project_simplex"]
