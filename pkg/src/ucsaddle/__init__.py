"""Two-level solvers for non-convex uniformly-concave saddle point problems.

The outer problem ``min_x g(x) + r(x)`` is solved by an adaptive gradient
method driven by an inexact oracle; each oracle call solves the inner
uniformly convex problem with a restarted accelerated method.
"""

from .agm import AgmConfig, IterationRecord, SolverTrace, agm_solve
from .complexity import predicted_outer_complexity
from .inner import (FastGradientBase, InnerSolution, RateCertificate, RestartSchedule,
                    certify_gap, compute_schedule, fast_gradient_base, make_synthetic_base,
                    restarted_solve)
from .kernels import BACKEND
from .oracle import (GHolderConstants, InexactOracle, InexactOracleResponse,
                     holder_constant_g, l_of_delta, oracle_call)
from .problem import (Ball, Box, CompositeTerm, HolderSpec, SaddleProblem, Simplex,
                      SmoothField, UniformConvexitySpec, eval_shat, make_bilinear_coupling,
                      spread_spectrum_problem,
                      validate_holder, validate_uniform_convexity)
from .prox import bregman_divergence, composite_prox, project

__version__ = "0.1.0"
