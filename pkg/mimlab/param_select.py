"""
Importance-coefficient selection for a binary distribution (p, 1 - p).

The selected coefficient w* is the root in w of the stationarity function

    g(p, w) = (1 - p w) e^{w (1 - p)} - (1 - (1 - p) w) e^{w p}.

For 0 < p < 1/2, g(p, 1/p) = (1/p - 2) e > 0 and g(p, 2/p) < 0, so w* is
found by bisection on [1/p, 2/p]. The solver works on the rescaled
g_scaled = g e^{-w (1 - p)}, which has the same sign and roots but stays
O(1); the raw g changes by ~p e^{1/p} per unit of w, so an absolute residual
on g is not attainable in double precision for small p.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from mimlab.config import SOLVER_MAX_ITER, SOLVER_TOL
from mimlab.errors import NumericalError, ValidationError

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class PriorInterval:
    p_lo: float
    p_hi: float

    def __post_init__(self):
        if not 0.0 < self.p_lo < self.p_hi < 0.5:
            raise ValidationError(
                f"need 0 < p_lo < p_hi < 1/2, got [{self.p_lo}, {self.p_hi}]",
                field="interval",
            )


@dataclass(frozen=True)
class RootSolveResult:
    p: float
    omega_star: float
    residual: float
    raw_residual: float
    bracket_lo: float
    bracket_hi: float
    iterations: int


@dataclass(frozen=True)
class MonotonicityReport:
    grid: List[float]
    exact: List[float]
    taylor: List[float]
    exact_decreasing: bool
    taylor_decreasing: bool


def _check_p(p: float, upper: float = 1.0, closed: bool = False) -> float:
    p = float(p)
    inside = 0.0 < p <= upper if closed else 0.0 < p < upper
    if not inside:
        bound = "]" if closed else ")"
        raise ValidationError(f"must lie in (0, {upper}{bound}, got {p}", field="p")
    return p


def _check_omega(omega: float) -> float:
    omega = float(omega)
    if not math.isfinite(omega) or omega < 0:
        raise ValidationError(f"must be finite and >= 0, got {omega}", field="omega")
    return omega


def _g_scaled(p, omega):
    return (1.0 - p * omega) - (1.0 - (1.0 - p) * omega) * np.exp(
        omega * (2.0 * p - 1.0)
    )


def g(p: float, omega: float) -> float:
    p, omega = _check_p(p), _check_omega(omega)
    try:
        return (1.0 - p * omega) * math.exp(omega * (1.0 - p)) - (
            1.0 - (1.0 - p) * omega
        ) * math.exp(omega * p)
    except OverflowError:
        raise NumericalError(f"g overflows at p={p}, w={omega}") from None


def g_scaled(p: float, omega: float) -> float:
    """g(p, w) e^{-w (1 - p)}."""
    p, omega = _check_p(p), _check_omega(omega)
    return float(_g_scaled(p, omega))


def g_taylor(p: float, omega: float) -> float:
    """Quadratic approximation of g, coefficients as published."""
    p, omega = _check_p(p), _check_omega(omega)
    return (
        (2.0 * p + 2.0)
        + (p**2 - p + 0.5) * omega
        + (-0.5 * p + 0.5 * p**2 - p**3) * omega**2
    )


def taylor_coefficient(p: float) -> float:
    """Closed-form w* from the quadratic approximation (its positive root)."""
    p = _check_p(p, upper=0.5)
    denominator = 2.0 * p**3 - p**2 + p
    if denominator <= 0:
        raise NumericalError(f"non-positive denominator at p={p}")
    numerator = p**2 - p + 0.5 + math.sqrt(
        9.0 * p**4 + 2.0 * p**3 + 2.0 * p**2 + 3.0 * p + 0.25
    )
    return numerator / denominator


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = SOLVER_TOL,
    max_iter: int = SOLVER_MAX_ITER,
) -> Tuple[float, float, float, int]:
    """
    Bisection for a root of f with f(lo) > 0 > f(hi).

    Returns:
            (midpoint, final lo, final hi, iterations)

    Raises:
            NumericalError: no strict sign change or iteration cap reached
    """
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo > 0.0 > f_hi):
        raise NumericalError(
            f"no sign change on [{lo}, {hi}]: f(lo)={f_lo!r}, f(hi)={f_hi!r}"
        )
    for iteration in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            return 0.5 * (lo + hi), lo, hi, iteration
    raise NumericalError(f"bisection did not converge in {max_iter} iterations")


def solve_coefficient_exact(
    p: float,
    tol: float = SOLVER_TOL,
    residual_tol: float = RESIDUAL_TOL,
    max_iter: int = SOLVER_MAX_ITER,
) -> RootSolveResult:
    """Root of g(p, .) on [1/p, 2/p]; p >= 1/2 has no isolated root."""
    p = _check_p(p)
    if tol <= 0:
        raise ValidationError(f"must be > 0, got {tol}", field="tol")
    if p == 0.5:
        raise NumericalError("p = 1/2 is degenerate: g vanishes for every w")

    def f(omega: float) -> float:
        return float(_g_scaled(p, omega))

    omega, lo, hi, iterations = bisect(f, 1.0 / p, 2.0 / p, tol, max_iter)
    residual = abs(f(omega))
    if residual > residual_tol:
        raise NumericalError(
            f"residual {residual:.3g} above {residual_tol:.3g} at p={p}"
        )
    try:
        raw = abs(g(p, omega))
    except NumericalError:
        raw = math.inf
    logger.debug(
        "p=%r w*=%r bracket=[%r, %r] iterations=%d", p, omega, lo, hi, iterations
    )
    return RootSolveResult(
        p=p,
        omega_star=omega,
        residual=residual,
        raw_residual=raw,
        bracket_lo=lo,
        bracket_hi=hi,
        iterations=iterations,
    )


def coefficient_with_prior(
    interval: PriorInterval, tol: float = SOLVER_TOL
) -> RootSolveResult:
    # w* decreases in p, so the lower endpoint gives the largest coefficient.
    return solve_coefficient_exact(interval.p_lo, tol)


def coefficient_bounds(interval: PriorInterval) -> Tuple[float, float]:
    return 2.0 / interval.p_hi, 2.0 / interval.p_lo


def dominance_margin(p: float, omega: float) -> float:
    """z = p e^{w (1 - p)} - (1 - p) e^{w p}."""
    p, omega = _check_p(p, upper=0.5, closed=True), _check_omega(omega)
    try:
        return p * math.exp(omega * (1.0 - p)) - (1.0 - p) * math.exp(omega * p)
    except OverflowError:
        raise NumericalError(f"z overflows at p={p}, w={omega}") from None


def stationarity_derivative(
    p: float, omega: float, step: Optional[float] = None
) -> Tuple[float, float]:
    """
    T(p) and a central difference of T at p, both scaled by e^{-w (1 - p)},
    where T(q) = q e^{w (1 - q)} + (1 - q) e^{w q}.

    T'(q) = g(q, w) analytically, so a small |T'(p)| / T(p) confirms that p
    is a stationary point at w = w*(p).
    """
    p, omega = _check_p(p), _check_omega(omega)
    h = 1e-5 * min(p, 1.0 - p) if step is None else step

    def scaled_t(q: float) -> float:
        return q * math.exp(omega * (p - q)) + (1.0 - q) * math.exp(
            omega * (q - 1.0 + p)
        )

    derivative = (scaled_t(p + h) - scaled_t(p - h)) / (2.0 * h)
    return scaled_t(p), derivative


def coefficient_monotonicity_check(
    grid: Sequence[float], tol: float = SOLVER_TOL
) -> MonotonicityReport:
    """Solve w* on an increasing grid in (0, 1/2) and report whether it decreases."""
    grid = [float(p) for p in grid]
    if not grid:
        raise ValidationError("grid is empty", field="grid")
    if any(not 0.0 < p < 0.5 for p in grid):
        raise ValidationError("grid points must lie in (0, 1/2)", field="grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("grid must be strictly increasing", field="grid")
    exact = [solve_coefficient_exact(p, tol).omega_star for p in grid]
    taylor = [taylor_coefficient(p) for p in grid]
    return MonotonicityReport(
        grid=grid,
        exact=exact,
        taylor=taylor,
        exact_decreasing=_strictly_decreasing(exact),
        taylor_decreasing=_strictly_decreasing(taylor),
    )


def _strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def g_grid(ps: Sequence[float], omegas: Sequence[float]) -> np.ndarray:
    """Matrix of g(p, w) with one row per p."""
    p = np.asarray(ps, dtype=float)[:, None]
    w = np.asarray(omegas, dtype=float)[None, :]
    return (1.0 - p * w) * np.exp(w * (1.0 - p)) - (1.0 - (1.0 - p) * w) * np.exp(
        w * p
    )


def crossing_curve(
    ps: Sequence[float], omegas: Sequence[float], tol: float = SOLVER_TOL
) -> List[Tuple[float, Optional[float]]]:
    """
    Zero-crossing of g(p, .) for each p, located on the w grid and refined by
    bisection. None where the grid holds no sign change.
    """
    w = np.asarray(omegas, dtype=float)
    curve: List[Tuple[float, Optional[float]]] = []
    for p in ps:
        p = float(p)
        values = _g_scaled(p, w)
        crossing = None
        for k in range(len(w) - 1):
            if values[k] > 0.0 and values[k + 1] <= 0.0:
                if values[k + 1] == 0.0:
                    crossing = float(w[k + 1])
                else:
                    crossing = bisect(
                        lambda x: float(_g_scaled(p, x)), w[k], w[k + 1], tol
                    )[0]
                break
        curve.append((p, crossing))
    return curve
