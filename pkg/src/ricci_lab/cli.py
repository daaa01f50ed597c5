"""Command-line interface for ricci-lab.

Exit codes: 0 success, 1 failed verification, 2 configuration or parameter
errors, 3 numerical blow-up (partial artifacts are still written).
"""

import functools
import logging
import math
import sys
from pathlib import Path
from typing import Any, Callable, List, Optional, Sequence, Tuple

import click
import numpy as np
import pandas as pd
import yaml
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from ricci_lab.__about__ import __version__
from ricci_lab.config import ConfigManager, FlowConfig, GeometryConfig, NormQueryConfig, RunConfig, ScanConfig
from ricci_lab.constants.ledger import build_ledger, croke_constants
from ricci_lab.errors import (
    ConfigError,
    InvalidParameterError,
    InvalidProfileError,
    NotApplicableError,
    NumericalBlowupError,
    OutOfRangeError,
    ResolutionError,
)
from ricci_lab.export import (
    NORMS_NAME,
    classification_table,
    read_profile,
    read_trajectory,
    scan_table,
    sup_track_table,
    trajectory_summary,
    write_ledger,
    write_table,
    write_trajectory,
)
from ricci_lab.flow import run_flow
from ricci_lab.geometry import make_round_sphere
from ricci_lab.models import FlowTrajectory, MetricState, Region
from ricci_lab.norms import NormQuery, ScanResult, alpha_threshold_scan, spacetime_norm, sup_norm_track
from ricci_lab.rescaling import RescaleSpec, critical_integral_invariance, parabolic_rescale
from ricci_lab.verify import run_suite, suite_names

console = Console()
logger = logging.getLogger(__name__)

EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

USAGE_ERRORS = (
    ConfigError,
    InvalidParameterError,
    InvalidProfileError,
    NotApplicableError,
    OutOfRangeError,
    ResolutionError,
    ValidationError,
)


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def handle_errors(func: Callable[..., Any]) -> Callable[..., Any]:
    """Map library errors to exit codes."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except USAGE_ERRORS as e:
            console.print(f"[red]Error:[/red] {escape(str(e))}")
            sys.exit(EXIT_USAGE)

    return wrapper


def _parse_floats(text: Optional[str]) -> List[float]:
    """Parse a comma-separated list; 'inf' is accepted."""
    if text is None or not text.strip():
        return []
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise InvalidParameterError(f"cannot parse number list {text!r}") from e


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.6g}"


@click.group()
@click.version_option(version=__version__, prog_name="ricci-lab")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging.")
@click.option("--quiet", "-q", is_flag=True, help="Warnings and errors only.")
def main(verbose: bool, quiet: bool) -> None:
    """Ricci flow singularity laboratory."""
    _configure_logging(verbose, quiet)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def configured_norms(traj: FlowTrajectory, queries: Sequence[NormQueryConfig]) -> pd.DataFrame:
    """Evaluate each configured norm query on ``traj``, one row per query."""
    rows = []
    for query in queries:
        interval = query.interval or (traj.t_start, traj.t_last)
        region = Region(center=query.center, radius=query.radius)
        value = spacetime_norm(
            traj, NormQuery(quantity=query.quantity, alpha=query.alpha, region=region, interval=interval)
        )
        rows.append(
            {
                "quantity": query.quantity,
                "alpha": query.alpha,
                "t_a": interval[0],
                "t_b": interval[1],
                "center": query.center,
                "radius": math.inf if query.radius is None else query.radius,
                "value": value,
            }
        )
    return pd.DataFrame(rows, columns=["quantity", "alpha", "t_a", "t_b", "center", "radius", "value"])


def _initial_state(geometry: GeometryConfig) -> MetricState:
    if geometry.kind == "sphere":
        return make_round_sphere(geometry.n, geometry.c0)
    assert geometry.profile is not None
    return read_profile(geometry.profile, geometry.n)


@main.command()
@click.option("--config", "config_path", type=click.Path(path_type=Path), help="Run configuration (YAML).")
@click.option("--n", "n", type=int, help="Dimension.")
@click.option("--c0", type=float, help="Initial scale of the round sphere.")
@click.option("--profile", type=click.Path(path_type=Path), help="Warped profile file (x psi phi).")
@click.option("--t-max", type=float, help="Final time.")
@click.option("--dt", "dt_initial", type=float, help="Initial and maximal time step.")
@click.option("--ceiling", type=float, help="Curvature ceiling.")
@click.option("--stride", type=int, help="Store every stride-th accepted step.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), help="Output directory.")
@handle_errors
def simulate(
    config_path: Optional[Path],
    n: Optional[int],
    c0: Optional[float],
    profile: Optional[Path],
    t_max: Optional[float],
    dt_initial: Optional[float],
    ceiling: Optional[float],
    stride: Optional[int],
    out_dir: Optional[Path],
) -> None:
    """Run a flow and write its manifest and snapshots."""
    config = ConfigManager().load_config(config_path)
    geometry = config.geometry.model_dump()
    if n is not None:
        geometry["n"] = n
    if c0 is not None:
        geometry["c0"] = c0
    if profile is not None:
        geometry.update(kind="warped", profile=profile)
    flow = config.flow.model_dump()
    overrides = {"t_max": t_max, "dt_initial": dt_initial, "curvature_ceiling": ceiling, "output_stride": stride}
    flow.update({key: value for key, value in overrides.items() if value is not None})
    config = config.model_copy(
        update={
            "geometry": GeometryConfig(**geometry),
            "flow": FlowConfig(**flow),
            "output_dir": out_dir if out_dir is not None else config.output_dir,
        }
    )

    initial = _initial_state(config.geometry)
    try:
        traj = run_flow(initial, config.flow)
    except NumericalBlowupError as e:
        console.print(f"[red]Numerical blow-up:[/red] {escape(str(e))}")
        if isinstance(e.partial, FlowTrajectory):
            write_trajectory(e.partial, config.output_dir, run_config=config)
            console.print(f"Partial trajectory written to {config.output_dir}")
        sys.exit(EXIT_NUMERICAL)

    write_trajectory(traj, config.output_dir, run_config=config)
    console.print(f"T_hat: {_fmt(traj.T_hat)}")
    console.print(f"t_last: {traj.t_last:.6g}")
    console.print(f"singular: {traj.singular}")
    console.print(f"termination: {traj.termination}")
    console.print(f"Wrote {len(traj)} snapshots to {config.output_dir}")
    if config.norms:
        path = write_table(configured_norms(traj, config.norms), config.output_dir / NORMS_NAME)
        console.print(f"Wrote {len(config.norms)} norms to {path}")
    for index, experiment in enumerate(config.rescale):
        spec = RescaleSpec(Q=experiment.Q, t_center=experiment.t_center)
        _rescale_and_report(traj, spec, experiment.interval, config.output_dir / f"rescaled_{index}")


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def _nonsingular_rows(traj: FlowTrajectory, quantity: str, alphas: List[float]) -> List[ScanResult]:
    rows = []
    for alpha in alphas:
        value = spacetime_norm(traj, NormQuery(quantity=quantity, alpha=alpha))
        rows.append(
            ScanResult(alpha=alpha, eps=(0.0,), partial_norms=(value,), exponent=math.nan, classification="finite")
        )
    return rows


@main.command()
@click.argument("traj_dir", type=click.Path(path_type=Path))
@click.option("--config", "config_path", type=click.Path(path_type=Path), help="Run configuration supplying the scan defaults.")
@click.option("--alpha", "alphas_text", default=None, help="Comma-separated exponents; 'inf' for the sup. [default: scan.alphas]")
@click.option("--eps-seq", "eps_text", default=None, help="Comma-separated decreasing cut-offs. [default: scan.eps_sequence]")
@click.option("--quantity", default=None, help="Curvature quantity. [default: scan.quantity]")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None, help="Directory for CSV tables.")
@handle_errors
def norms(
    traj_dir: Path,
    config_path: Optional[Path],
    alphas_text: Optional[str],
    eps_text: Optional[str],
    quantity: Optional[str],
    out_dir: Optional[Path],
) -> None:
    """Classify space-time norms of a stored trajectory."""
    scan_data = ConfigManager().load_config(config_path).scan.model_dump()
    if alphas_text is not None:
        scan_data["alphas"] = _parse_floats(alphas_text)
    if eps_text is not None:
        scan_data["eps_sequence"] = _parse_floats(eps_text) or None
    if quantity is not None:
        scan_data["quantity"] = quantity
    scan = ScanConfig(**scan_data)
    traj = read_trajectory(traj_dir)
    out = out_dir or traj_dir
    finite = [a for a in scan.alphas if not math.isinf(a)]

    if traj.singular and traj.T_hat is not None:
        results = alpha_threshold_scan(traj, scan.quantity, finite, scan.eps_sequence) if finite else []
    else:
        results = _nonsingular_rows(traj, scan.quantity, finite)
    write_table(scan_table(results), out / "scan.csv")
    write_table(classification_table(results), out / "classification.csv")
    if any(math.isinf(a) for a in scan.alphas):
        write_table(sup_track_table(traj, sup_norm_track(traj, scan.quantity), scan.quantity), out / "sup_track.csv")

    table = Table(title=f"Norms of {scan.quantity}")
    table.add_column("alpha", style="cyan")
    table.add_column("exponent")
    table.add_column("classification", style="green")
    for result in results:
        table.add_row(f"{result.alpha:g}", _fmt(result.exponent), result.classification)
    console.print(table)
    console.print(f"Wrote tables to {out}")


# ---------------------------------------------------------------------------
# rescale
# ---------------------------------------------------------------------------


@main.command()
@click.argument("traj_dir", type=click.Path(path_type=Path))
@click.option("--q", "Q", type=float, required=True, help="Curvature scale factor Q.")
@click.option("--t-center", type=float, default=0.0, show_default=True, help="Source time mapped to 0.")
@click.option("--interval", type=(float, float), required=True, help="Rescaled interval A B.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True, help="Output directory.")
@handle_errors
def rescale(traj_dir: Path, Q: float, t_center: float, interval: tuple, out_dir: Path) -> None:
    """Parabolically rescale a stored trajectory."""
    traj = read_trajectory(traj_dir)
    _rescale_and_report(traj, RescaleSpec(Q=Q, t_center=t_center), interval, out_dir)


def _rescale_and_report(
    traj: FlowTrajectory, spec: RescaleSpec, interval: Tuple[float, float], out_dir: Path
) -> None:
    rescaled = parabolic_rescale(traj, spec, interval)
    write_trajectory(rescaled, out_dir)
    window = (spec.to_source(interval[0]), spec.to_source(interval[1]))
    report = critical_integral_invariance(traj, spec, window=window)
    console.print(f"critical integral before: {report.before:.10g}")
    console.print(f"critical integral after:  {report.after:.10g}")
    console.print(f"relative difference: {report.relative_diff:.3e}")
    console.print(f"Wrote {len(rescaled)} snapshots to {out_dir}")


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


@main.command()
@click.option("--n", "n", type=int, default=3, show_default=True, help="Dimension.")
@click.option("--kappa", type=float, required=True, help="Non-collapsing constant.")
@click.option("--r", "r", type=float, required=True, help="Ball radius.")
@click.option("--q", "q", type=float, default=None, help="Integrability exponent (default (n+2)^2/(2n)).")
@click.option("--beta", type=float, default=None, help="Iteration exponent (default (n+2)/2).")
@click.option("--B", "B", type=float, default=1.0, show_default=True, help="Ricci lower-bound magnitude.")
@click.option("--C0", "C0", type=float, default=None, help="Coefficient bound (default from delta_b, C_b).")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None, help="YAML ledger report.")
@handle_errors
def constants(
    n: int,
    kappa: float,
    r: float,
    q: Optional[float],
    beta: Optional[float],
    B: float,
    C0: Optional[float],
    out_path: Optional[Path],
) -> None:
    """Evaluate and export the constant ledger."""
    if not kappa > 0:
        raise InvalidParameterError(f"kappa must be positive, got {kappa}")
    if not r > 0:
        raise InvalidParameterError(f"r must be positive, got {r}")
    try:
        ledger = build_ledger(n, kappa, r, q=q, beta=beta, B=B, C0=C0)
    except NotApplicableError as e:
        croke = croke_constants(n)
        console.print(f"C1 = {croke['C1']:.12g}, C2 = {croke['C2']:.12g}")
        console.print(f"[yellow]Not applicable:[/yellow] {escape(str(e))}")
        return

    table = Table(title=f"Constant ledger, n = {n}")
    table.add_column("name", style="cyan")
    table.add_column("value")
    table.add_column("log")
    table.add_column("formula", style="white")
    for entry in ledger.entries.values():
        table.add_row(entry.name, f"{entry.value:.6g}", f"{entry.log_value:.6g}", entry.formula)
    console.print(table)
    console.print(f"q = {ledger.inputs['q']:.6g}")
    if out_path is not None:
        write_ledger(ledger, out_path)
        console.print(f"Wrote ledger to {out_path}")


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


@main.command()
@click.argument("suite", default="all")
@click.option("--seed", type=int, default=None, help="Seed for randomized checks. [default: seed from the configuration, 0]")
@click.option("--config", "config_path", type=click.Path(path_type=Path), help="Run configuration supplying the seed.")
@handle_errors
def verify(suite: str, seed: Optional[int], config_path: Optional[Path]) -> None:
    """Run an acceptance suite ('all' runs every suite)."""
    if suite not in suite_names():
        console.print(f"[red]Error:[/red] unknown suite {suite!r}; choose from {', '.join(suite_names())}")
        sys.exit(EXIT_USAGE)
    if seed is None:
        seed = ConfigManager().load_config(config_path).seed
    console.print(f"seed: {seed}")
    outcome = run_suite(suite, seed=seed)
    table = Table(title=f"Suite {suite}")
    table.add_column("suite", style="cyan")
    table.add_column("check")
    table.add_column("result")
    table.add_column("detail", style="white")
    for check in outcome.checks:
        result = "[green]pass[/green]" if check.passed else "[red]FAIL[/red]"
        table.add_row(check.suite, check.name, result, check.detail)
    console.print(table)
    failed = sum(not check.passed for check in outcome.checks)
    console.print(f"{len(outcome.checks) - failed} passed, {failed} failed")
    if failed:
        sys.exit(EXIT_VERIFY_FAILED)


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


@main.command()
@click.argument("traj_dir", type=click.Path(path_type=Path))
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None, help="CSV summary path.")
@handle_errors
def report(traj_dir: Path, out_path: Optional[Path]) -> None:
    """Summarize a stored trajectory snapshot by snapshot."""
    traj = read_trajectory(traj_dir)
    summary = trajectory_summary(traj)
    write_table(summary, out_path or traj_dir / "summary.csv")

    table = Table(title=f"Trajectory {traj_dir}")
    table.add_column("field", style="cyan")
    table.add_column("value")
    table.add_row("n", str(traj.n))
    table.add_row("snapshots", str(len(traj)))
    table.add_row("t_last", f"{traj.t_last:.6g}")
    table.add_row("T_hat", _fmt(traj.T_hat))
    table.add_row("singular", str(traj.singular))
    table.add_row("termination", traj.termination)
    table.add_row("max R", f"{float(np.max(summary['R_max'])):.6g}")
    console.print(table)


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


@main.group()
def config() -> None:
    """Manage run configuration files."""


@config.command("init")
@click.option("--path", type=click.Path(path_type=Path), default=Path("ricci-lab.yaml"), show_default=True)
@click.option("--force", is_flag=True, help="Overwrite an existing file.")
@handle_errors
def config_init(path: Path, force: bool) -> None:
    """Write a default configuration file."""
    if path.exists() and not force:
        console.print(f"[yellow]{path} exists; use --force to overwrite[/yellow]")
        sys.exit(EXIT_USAGE)
    manager = ConfigManager()
    written = manager.save_config(manager.create_default_config(), path)
    console.print(f"Wrote {written}")


@config.command("show")
@click.option("--path", type=click.Path(path_type=Path), default=None)
@handle_errors
def config_show(path: Optional[Path]) -> None:
    """Print the effective configuration."""
    loaded: RunConfig = ConfigManager().load_config(path)
    console.print(yaml.safe_dump(loaded.model_dump(mode="json"), sort_keys=False), markup=False)


@config.command("validate")
@click.argument("path", type=click.Path(path_type=Path))
def config_validate(path: Path) -> None:
    """Validate a configuration file."""
    ok, message = ConfigManager().validate_file(path)
    if ok:
        console.print(f"[green]{message}[/green]")
        return
    console.print(f"[red]{escape(message)}[/red]")
    sys.exit(EXIT_USAGE)


if __name__ == "__main__":
    main()
