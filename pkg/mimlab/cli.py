import logging
import math
import os
from contextlib import contextmanager
from dataclasses import asdict
from typing import Any, Dict, Iterator, Optional, Tuple

import typer
from rich.console import Console
from rich.table import Table

try:
    import tomllib
except ImportError:
    import toml as tomllib

from mimlab import figures, mim_core, param_select, stream_model, verification
from mimlab.config import DEFAULT_SEED, FIGURES, FigureDefaults
from mimlab.distributions import load_distribution, make_distribution
from mimlab.errors import InvariantViolation, MimlabError, ValidationError
from mimlab.input_manager import (
    dumps_json,
    read_counts,
    table_to_csv,
    write_json,
    write_table,
)
from mimlab.utils import (
    configure_logging,
    format_number,
    parse_batches,
    parse_grid,
    space_indent,
)

logger = logging.getLogger("mimlab.cli")


def get_version() -> str:
    pyproject_path = os.path.join(
        os.path.dirname(os.path.dirname(__file__)), "pyproject.toml"
    )
    try:
        with open(pyproject_path, "rb") as f:
            data = tomllib.loads(f.read().decode("utf-8"))
        version = data.get("project", {}).get("version")
        if version:
            return version
    except Exception:  # noqa: S110
        pass  # Intentionally silent - version detection is optional
    return "unknown"


def version_callback(value: bool):
    if value:
        typer.echo(f"mimlab version {get_version()}")
        raise typer.Exit()


app = typer.Typer(no_args_is_help=True)


@contextmanager
def reporting_errors() -> Iterator[None]:
    """Turn library errors into 'Error: ...' on stderr and the matching exit code."""
    try:
        yield
    except MimlabError as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(e.exit_code)
    except OSError as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(ValidationError.exit_code)


def _terms_table(dist, omega: float) -> Table:
    table = Table(title=f"Summands at w = {format_number(omega)}")
    for name in ("i", "p_i", "ln term", "term", "share", "dominant"):
        table.add_column(name, justify="right")
    for row in mim_core.term_breakdown(dist, omega):
        table.add_row(
            str(row.index),
            format_number(row.prob),
            format_number(row.log_term),
            format_number(row.term),
            format_number(row.share),
            "*" if row.dominant else "",
        )
    return table


@app.command()
def compute(
    dist: str = typer.Option(..., help="Distribution as inline JSON or a JSON file"),
    omega: Optional[float] = typer.Option(None, help="Importance coefficient w >= 0"),
    focus: Optional[int] = typer.Option(
        None, help="Focus on element j, i.e. use w = 1/p_j"
    ),
    terms: bool = typer.Option(False, help="Also print every summand"),
):
    """Compute the MIM L(p, w) in nats."""
    with reporting_errors():
        if (omega is None) == (focus is None):
            raise ValidationError("give exactly one of --omega and --focus", "omega")
        distribution = load_distribution(dist)
        if focus is not None:
            omega = mim_core.coefficient_for_element(distribution, focus)
        value = mim_core.evaluate(distribution, omega)
        typer.echo(format_number(value))
        if terms:
            Console().print(_terms_table(distribution, omega))


@app.command()
def select(
    p: Optional[float] = typer.Option(None, help="Event probability in (0, 1/2)"),
    interval: Tuple[float, float] = typer.Option(
        (None, None), help="Prior interval: two probabilities LO HI"
    ),
    tol: float = typer.Option(param_select.SOLVER_TOL, help="Bracket width tolerance"),
    output: str = typer.Option("text", help="Output type: text or json"),
):
    """Select the importance coefficient w* for a binary distribution."""
    with reporting_errors():
        has_interval = interval[0] is not None
        if (p is None) == (not has_interval):
            raise ValidationError("give exactly one of --p and --interval", "p")
        if output not in ("text", "json"):
            raise ValidationError(f"expected text or json, got {output!r}", "output")
        if has_interval:
            prior = param_select.PriorInterval(*interval)
            result = param_select.coefficient_with_prior(prior, tol)
            low, high = param_select.coefficient_bounds(prior)
        else:
            result = param_select.solve_coefficient_exact(p, tol)
            low, high = 4.0, 2.0 / result.p
        summary = {
            "p": result.p,
            "omega_star": result.omega_star,
            "residual": result.residual,
            "raw_residual": result.raw_residual,
            "iterations": result.iterations,
            "taylor": param_select.taylor_coefficient(result.p),
            "bounds": [low, high],
            "in_bounds": low < result.omega_star < high,
        }
        if output == "json":
            typer.echo(dumps_json(summary))
        else:
            for key, value in summary.items():
                if isinstance(value, list):
                    value = " ".join(format_number(v) for v in value)
                elif isinstance(value, bool):
                    value = str(value).lower()
                elif isinstance(value, float):
                    value = format_number(value)
                typer.echo(f"{key}: {value}")
        if not summary["in_bounds"]:
            raise InvariantViolation(
                f"w*={result.omega_star!r} outside ({low!r}, {high!r})"
            )


def _tracker_summary(
    tracker: stream_model.EmpiricalTracker,
) -> Dict[str, Any]:
    report = stream_model.tracker_sandwich_check(tracker)
    return {
        "final": {
            "n": tracker.n,
            "N": tracker.N,
            "p_hat": tracker.p_hat,
            "L_hat": tracker.l_hat,
        },
        "sandwich": {
            "checked": report.checked,
            "ok": report.ok,
            "violations": [asdict(v) for v in report.violations],
        },
    }


def _write_outputs(
    tracker: stream_model.EmpiricalTracker,
    summary: Dict[str, Any],
    out: Optional[str],
    summary_path: Optional[str],
) -> None:
    """
    Tracker CSV to --out (or stdout). Summary JSON to --summary, else to stdout
    when --out took the CSV, else to stderr.
    """
    if out:
        write_table(tracker.to_frame(), out)
    else:
        typer.echo(table_to_csv(tracker.to_frame()), nl=False)
    if summary_path:
        write_json(summary, summary_path)
    else:
        typer.echo(dumps_json(summary), err=not out)


@app.command()
def simulate(
    model: Optional[str] = typer.Option(
        None, help='Model as JSON {"probs": [...], "M": int, "epsilon": real}'
    ),
    M: Optional[int] = typer.Option(None, "--M", help="Sequence length"),
    eps: Optional[float] = typer.Option(None, help="Deviation threshold epsilon"),
    p1: Optional[float] = typer.Option(None, help="Probability of category a_1"),
    batches: str = typer.Option("1000x10", help="Batch sizes: 500,1000 or 1000x10"),
    seed: int = typer.Option(DEFAULT_SEED, help="Random seed"),
    cheb_eps: float = typer.Option(1.0, help="Deviation for the Chebyshev report"),
    out: Optional[str] = typer.Option(None, help="Tracker CSV path (default stdout)"),
    summary: Optional[str] = typer.Option(None, help="Summary JSON path"),
    progress: bool = typer.Option(False, help="Show a progress bar on stderr"),
):
    """Simulate batches of minority-event trials and track the empirical MIM."""
    with reporting_errors():
        if model is not None:
            minority = stream_model.load_model(model)
        elif None in (M, eps, p1):
            raise ValidationError("give --model or all of --M, --eps, --p1", "model")
        else:
            if not 0.0 <= p1 <= 1.0:
                raise ValidationError(f"must lie in [0, 1], got {p1}", field="p1")
            minority = stream_model.MinorityModel(
                category_probs=make_distribution([p1, 1.0 - p1]), M=M, epsilon=eps
            )
        sizes = parse_batches(batches)
        logger.info("simulating %d batches with seed %d", len(sizes), seed)
        typer.echo(f"seed: {seed}", err=True)
        tracker = stream_model.simulate_batches(minority, sizes, seed, progress)

        exact = stream_model.minority_event_probability(minority)
        result: Dict[str, Any] = {
            "seed": seed,
            "model": {
                "probs": list(minority.category_probs.probs),
                "M": minority.M,
                "epsilon": minority.epsilon,
            },
            "batches": sizes,
        }
        result.update(_tracker_summary(tracker))
        standard_error = math.sqrt(exact * (1.0 - exact) / tracker.N)
        result["event"] = {
            "exact_probability": exact,
            "standard_error": standard_error,
            "within_3se": abs(tracker.p_hat - exact) <= 3.0 * standard_error,
        }
        if 0.0 < exact < 0.5:
            moments = stream_model.delta_moments(exact, tracker.N)
            result["delta_moments"] = asdict(moments)
            result["chebyshev"] = asdict(
                stream_model.chebyshev_report(moments, cheb_eps)
            )
        else:
            result["delta_moments"] = None
            result["chebyshev"] = None
        _write_outputs(tracker, result, out, summary)


@app.command()
def track(
    counts: str = typer.Option(..., help="CSV with delta_n and delta_N columns"),
    out: Optional[str] = typer.Option(None, help="Tracker CSV path (default stdout)"),
    summary: Optional[str] = typer.Option(None, help="Summary JSON path"),
):
    """Track the empirical MIM over observed batch counts."""
    with reporting_errors():
        tracker = stream_model.EmpiricalTracker()
        for delta_n, delta_N in read_counts(counts):
            tracker.observe(delta_n, delta_N)
        if not tracker.records:
            raise ValidationError("no batches in file", field="counts")
        _write_outputs(tracker, _tracker_summary(tracker), out, summary)


def _check_line(check: verification.CheckResult) -> str:
    if check.passed:
        status = "PASS"
    else:
        status = "FAIL" if check.hard else "WARN"
    line = f"{status} {check.name}: {check.cases - check.failures}/{check.cases}"
    if check.stats:
        stats = ", ".join(
            f"{k}={format_number(v) if isinstance(v, float) else v}"
            for k, v in check.stats.items()
        )
        line += f" ({stats})"
    return line


def _print_checks(checks) -> None:
    for check in checks:
        typer.echo(_check_line(check))
        if not check.passed and check.example is not None:
            typer.echo(space_indent(dumps_json(check.example)))


@app.command()
def verify(
    suite: str = typer.Argument("all", help="properties, select, stream or all"),
    samples: int = typer.Option(
        verification.DEFAULT_SAMPLES, help="Random distributions for properties"
    ),
    grid: str = typer.Option(verification.DEFAULT_GRID, help="p grid start:stop:step"),
    replicas: int = typer.Option(
        verification.DEFAULT_REPLICAS, help="Monte Carlo replicas"
    ),
    runs: int = typer.Option(verification.DEFAULT_RUNS, help="Seeded simulate runs"),
    seed: int = typer.Option(DEFAULT_SEED, help="Random seed"),
    workers: int = typer.Option(1, help="Threads for Monte Carlo blocks"),
    out: Optional[str] = typer.Option(None, help="Write the JSON report here"),
    progress: bool = typer.Option(False, help="Show progress bars on stderr"),
):
    """Run the invariant suites; exit 1 when a hard check fails."""
    with reporting_errors():
        logger.info("verify %s with seed %d", suite, seed)
        report = verification.run_suite(
            suite,
            seed=seed,
            samples=samples,
            grid=parse_grid(grid),
            replicas=replicas,
            runs=runs,
            workers=workers,
            progress=progress,
        )
        typer.echo(f"suite: {suite}")
        typer.echo(f"seed: {seed}")
        _print_checks(report.checks)
        if out:
            write_json(report.to_dict(), out)
        typer.echo("OK" if report.ok else "FAILED")
        if not report.ok:
            names = ", ".join(c.name for c in report.hard_failures())
            raise InvariantViolation(f"failed checks: {names}")


@app.command(name="figures")
def figures_command(
    which: str = typer.Argument("all", help="fig1, fig2, fig3 or all"),
    out: str = typer.Option("figures", help="Output directory for CSV tables"),
    binomial_n: int = typer.Option(FIGURES.binomial_trials, help="Binomial trials"),
    binomial_theta: float = typer.Option(FIGURES.binomial_theta, help="Binomial theta"),
    poisson_rate: float = typer.Option(FIGURES.poisson_rate, help="Poisson rate"),
    poisson_k: int = typer.Option(FIGURES.poisson_support, help="Poisson support K"),
    geometric_q: float = typer.Option(FIGURES.geometric_q, help="Geometric q"),
    geometric_k: int = typer.Option(
        FIGURES.geometric_support, help="Geometric support K"
    ),
    uniform_n: int = typer.Option(FIGURES.uniform_n, help="Uniform alphabet size"),
):
    """Write the data tables behind the three figures."""
    with reporting_errors():
        if which not in figures.FIGURE_NAMES:
            raise ValidationError(
                f"expected one of {', '.join(figures.FIGURE_NAMES)}", field="which"
            )
        defaults = FigureDefaults(
            binomial_trials=binomial_n,
            binomial_theta=binomial_theta,
            poisson_rate=poisson_rate,
            poisson_support=poisson_k,
            geometric_q=geometric_q,
            geometric_support=geometric_k,
            uniform_n=uniform_n,
        )
        tables = figures.build_tables(which, defaults)
        for path in figures.write_tables(tables, out):
            typer.echo(f"wrote {path}")
        _print_checks(figures.check_claims(tables))


@app.callback()
def main(
    version: bool = typer.Option(
        None,
        "--version",
        help="Show the version and exit.",
        callback=version_callback,
        is_eager=True,
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
):
    """
    mimlab CLI

    USAGE:
      python -m mimlab.cli <command> [OPTIONS]

    Stochastic commands default to seed 20170001.
    """
    configure_logging("DEBUG" if verbose else None)


if __name__ == "__main__":
    app()
