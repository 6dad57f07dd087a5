"""Data tables for the three MIM figures, plus checks of what each one shows."""

import logging
import os
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from mimlab import mim_core, param_select
from mimlab.config import FIGURES, FigureDefaults
from mimlab.distributions import FiniteDistribution, GeneratorSpec, generate, uniform
from mimlab.input_manager import ensure_directory, write_table
from mimlab.verification import CheckResult

logger = logging.getLogger(__name__)

FIGURE_NAMES = ("fig1", "fig2", "fig3", "all")

# Probability gap below which two entries count as tied
TIE_TOL = 1e-12


def builtin_distributions(
    defaults: FigureDefaults = FIGURES,
) -> Dict[str, FiniteDistribution]:
    specs = {
        "binomial": GeneratorSpec(
            "binomial",
            {"n": defaults.binomial_trials, "theta": defaults.binomial_theta},
        ),
        "truncated-poisson": GeneratorSpec(
            "truncated-poisson",
            {"rate": defaults.poisson_rate, "K": defaults.poisson_support},
        ),
        "truncated-geometric": GeneratorSpec(
            "truncated-geometric",
            {"q": defaults.geometric_q, "K": defaults.geometric_support},
        ),
        "uniform": GeneratorSpec("uniform", {"n": defaults.uniform_n}),
    }
    return {name: generate(spec) for name, spec in specs.items()}


def fig1_table(defaults: FigureDefaults = FIGURES) -> pd.DataFrame:
    """Focused MIM L_j at w_j = 1/p_j for every element of every distribution."""
    rows = []
    for name, dist in builtin_distributions(defaults).items():
        for j, p_j in enumerate(dist.probs):
            rows.append([name, j, p_j, 1.0 / p_j, mim_core.focused_mim(dist, j)])
    return pd.DataFrame(rows, columns=["distribution", "j", "p_j", "omega_j", "L_j"])


def fig2_table(defaults: FigureDefaults = FIGURES) -> pd.DataFrame:
    """L_0 at w_0 = 1/p_min next to the uniform baseline at the same w_0."""
    rows = []
    for name, dist in builtin_distributions(defaults).items():
        p_min = min(dist.probs)
        omega0 = 1.0 / p_min
        level = mim_core.evaluate(dist, omega0)
        baseline = mim_core.evaluate(uniform(dist.n), omega0)
        rows.append([name, dist.n, p_min, omega0, level, baseline, level - baseline])
    return pd.DataFrame(
        rows,
        columns=["distribution", "n", "p_min", "omega_0", "L_0", "uniform_L_0", "gap"],
    )


def fig3_axes(defaults: FigureDefaults = FIGURES):
    stop = defaults.g_p_max + defaults.g_p_step / 2
    ps = np.round(np.arange(defaults.g_p_min, stop, defaults.g_p_step), 12)
    count = int(round(defaults.g_omega_max / defaults.g_omega_step))
    omegas = np.round(defaults.g_omega_step * np.arange(1, count + 1), 12)
    return ps, omegas


def fig3_tables(defaults: FigureDefaults = FIGURES) -> Dict[str, pd.DataFrame]:
    """
    g(p, w) over the (p, w) grid in long format, and the zero-crossing curve
    with an empty omega_star where the root lies beyond the w grid.
    """
    ps, omegas = fig3_axes(defaults)
    values = param_select.g_grid(ps, omegas)
    grid = pd.DataFrame(
        {
            "p": np.repeat(ps, len(omegas)),
            "omega": np.tile(omegas, len(ps)),
            "g": values.ravel(),
        }
    )
    curve = param_select.crossing_curve(ps, omegas)
    crossing = pd.DataFrame(curve, columns=["p", "omega_star"])
    crossing["omega_star"] = crossing["omega_star"].astype(float)
    return {"fig3_grid": grid, "fig3_crossing": crossing}


def build_tables(
    which: str, defaults: FigureDefaults = FIGURES
) -> Dict[str, pd.DataFrame]:
    tables: Dict[str, pd.DataFrame] = {}
    if which in ("fig1", "all"):
        tables["fig1"] = fig1_table(defaults)
    if which in ("fig2", "all"):
        tables["fig2"] = fig2_table(defaults)
    if which in ("fig3", "all"):
        tables.update(fig3_tables(defaults))
    return tables


def write_tables(tables: Dict[str, pd.DataFrame], out_dir: str) -> List[str]:
    ensure_directory(out_dir)
    paths = []
    for name, table in tables.items():
        path = os.path.join(out_dir, f"{name}.csv")
        write_table(table, path)
        logger.info("wrote %s (%d rows)", path, len(table))
        paths.append(path)
    return paths


# ============================================================================
# Claims
# ============================================================================


def check_fig1(table: pd.DataFrame) -> CheckResult:
    """Within each non-uniform distribution, L_j decreases as p_j increases."""
    check = CheckResult("fig1_decreasing_in_p")
    for name, group in table.groupby("distribution", sort=False):
        if name == "uniform":
            continue
        rows = list(group.sort_values("p_j", kind="mergesort").itertuples())
        for a, b in zip(rows, rows[1:]):
            if b.p_j - a.p_j > TIE_TOL:
                ok = b.L_j < a.L_j
            else:
                ok = abs(b.L_j - a.L_j) <= 1e-9 * max(1.0, abs(a.L_j))
            check.record(ok, distribution=name, p=[a.p_j, b.p_j], L=[a.L_j, b.L_j])
    return check


def check_fig2(table: pd.DataFrame) -> CheckResult:
    check = CheckResult("fig2_above_uniform")
    for row in table.itertuples():
        if row.distribution == "uniform":
            continue
        check.record(
            row.L_0 >= row.uniform_L_0,
            distribution=row.distribution,
            L_0=row.L_0,
            uniform_L_0=row.uniform_L_0,
        )
    return check


def check_fig3(crossing: pd.DataFrame, samples: int = 10) -> CheckResult:
    """Crossing curve against the exact solver at evenly spaced defined points."""
    check = CheckResult("fig3_matches_solver")
    defined = crossing.dropna(subset=["omega_star"])
    if defined.empty:
        return check
    picks = np.unique(np.linspace(0, len(defined) - 1, samples).round().astype(int))
    for row in defined.iloc[picks].itertuples():
        exact = param_select.solve_coefficient_exact(row.p).omega_star
        check.record(
            abs(row.omega_star - exact) <= 1e-6,
            p=row.p,
            crossing=row.omega_star,
            exact=exact,
        )
    return check


def check_claims(tables: Dict[str, pd.DataFrame]) -> List[CheckResult]:
    checks: List[Optional[CheckResult]] = [
        check_fig1(tables["fig1"]) if "fig1" in tables else None,
        check_fig2(tables["fig2"]) if "fig2" in tables else None,
        check_fig3(tables["fig3_crossing"]) if "fig3_crossing" in tables else None,
    ]
    return [check for check in checks if check is not None]
