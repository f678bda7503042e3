"""Complexity predictions and the scaling-law fits used to check them."""

from __future__ import annotations

import numpy as np

from .oracle import GHolderConstants
from .problem import ProblemError


def predicted_outer_complexity(constants: GHolderConstants, delta_g: float,
                               epsilon: float) -> float:
    """``L^(1/nu) * Delta / eps^((1+nu)/(2 nu))`` without the hidden constant.

    Reporting only; solvers never terminate on it.
    """
    if not (constants.l_nu_g > 0 and delta_g > 0 and epsilon > 0):
        raise ProblemError("predicted_outer_complexity needs positive inputs")
    nu = constants.nu_g
    return constants.l_nu_g ** (1.0 / nu) * delta_g / epsilon ** ((1.0 + nu) / (2.0 * nu))


def fit_line(x, y) -> dict:
    """Least-squares ``y = slope * x + intercept`` with the coefficient of determination."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ProblemError("need at least two points to fit a line")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


def loglog_fit(inv_eps, counts) -> dict:
    return fit_line(np.log10(inv_eps), np.log10(counts))


def affine_log_fit(inv_eps, counts) -> dict:
    return fit_line(np.log2(inv_eps), counts)
