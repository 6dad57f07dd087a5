"""Documented defaults. Every value here can be overridden from the CLI."""

import os
from dataclasses import dataclass

DEFAULT_SEED = 20170001

# Probabilities must sum to 1 within this unless renormalization is requested.
NORMALIZATION_TOL = 1e-9

SOLVER_TOL = 1e-10
SOLVER_MAX_ITER = 200

# Slack on the |m/M - p_1| >= epsilon boundary so decimal inputs such as
# M=100, p_1=0.3, epsilon=0.1 include m=20.
BOUNDARY_SLACK = 1e-12

# Replicas per RNG substream in Monte Carlo loops.
MC_BLOCK_SIZE = 8192

LOG_LEVEL_ENV = "MIMLAB_LOG_LEVEL"


@dataclass(frozen=True)
class FigureDefaults:
    binomial_trials: int = 10
    binomial_theta: float = 0.3
    poisson_rate: float = 2.0
    poisson_support: int = 11
    geometric_q: float = 0.3
    geometric_support: int = 11
    uniform_n: int = 11
    g_p_min: float = 0.01
    g_p_max: float = 0.49
    g_p_step: float = 0.01
    g_omega_max: float = 25.0
    g_omega_step: float = 0.05


FIGURES = FigureDefaults()


def default_log_level() -> str:
    return os.environ.get(LOG_LEVEL_ENV, "WARNING").upper()
