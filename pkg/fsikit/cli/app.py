"""
Command-line front end.

    fsikit alpha --d 0.36 --p 0.18
    fsikit analyze configs/example1_unstable.yaml
    fsikit sweep --scheme acmc_type2 --k 1.3 --out out/
    fsikit simulate configs/example2_p018.yaml --periods 300 --out trace.csv
    fsikit sda configs/example2_p018.yaml
    fsikit report configs/example1_unstable.yaml

Exit status: 0 when the command ran, 2 on a configuration or domain error,
3 on a numerical failure.
"""
import functools
import logging
import math
from pathlib import Path
from typing import Callable, List, Optional

import typer
from rich.console import Console
from rich.table import Table

from fsikit.core.config import settings
from fsikit.core.exceptions import DomainError, FsiError
from fsikit.core.logging_config import configure_logging
from fsikit.schemas.common import ErrorResponse
from fsikit.schemas.converter import ConverterConfig, Scheme, Topology, VoltageLoop
from fsikit.services.alpha_service import AlphaService
from fsikit.services.config_service import ConfigService
from fsikit.services.export_service import ExportService, fmt
from fsikit.services.loopgain_service import LoopGainService
from fsikit.services.report_service import ReportService
from fsikit.services.sda_service import SdaService
from fsikit.services.stability_service import StabilityService, parse_range
from fsikit.services.switchsim_service import SwitchSimService

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="fsikit",
    help="Fast-scale instability analysis of current-mode controlled DC-DC converters.",
    no_args_is_help=True,
    add_completion=False,
)
console = Console()
err_console = Console(stderr=True)

_options = {"json": False}


def _verdict_text(stable: Optional[bool]) -> str:
    if stable is None:
        return "[yellow]n/a[/yellow]"
    return "[green]stable[/green]" if stable else "[red]UNSTABLE[/red]"


def handle_errors(func: Callable) -> Callable:
    """Turn library exceptions into the documented exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except FsiError as exc:
            if _options["json"]:
                console.print_json(ErrorResponse.from_exception(exc).model_dump_json())
            else:
                err_console.print(f"[bold red]{exc.error_code}[/bold red]: {exc.detail}")
                for message in getattr(exc, "errors", None) or []:
                    err_console.print(f"  - {message}")
            raise typer.Exit(code=exc.exit_code)

    return wrapper


@app.callback()
def main(
    verbose: int = typer.Option(0, "--verbose", "-v", count=True, help="-v for INFO, -vv for DEBUG"),
    json_errors: bool = typer.Option(False, "--json", help="Print errors as JSON records"),
) -> None:
    level = {0: None, 1: "INFO"}.get(verbose, "DEBUG")
    configure_logging(level)
    _options["json"] = json_errors


def _echo_config(cfg: ConverterConfig) -> Table:
    point = LoopGainService.duty_and_va(cfg)
    table = Table(title="Configuration", show_header=False)
    table.add_row("topology / scheme", f"{cfg.topology.value} / {cfg.scheme.value}")
    table.add_row("D", f"{point.duty:.6g}")
    table.add_row("v_a (V)", f"{point.v_a:.6g}")
    table.add_row("m_a (V/s)", f"{cfg.m_a:.6g}")
    if cfg.omega_p is not None:
        table.add_row("p", f"{cfg.p:.6g}")
    if cfg.omega_z is not None:
        table.add_row("z", f"{cfg.z:.6g}")
    table.add_row("r", "ABSENT" if cfg.r is None else f"{cfg.r:.6g}")
    if cfg.scheme is not Scheme.PCMC:
        name = "K" if cfg.scheme is Scheme.ACMC_TYPE2 else "K~"
        table.add_row(name, f"{StabilityService.normalized_gain(cfg, point):.6g}")
    return table


@app.command()
@handle_errors
def alpha(
    d: float = typer.Option(..., "--d", help="Duty ratio D in [0, 1]"),
    p: float = typer.Option(..., "--p", help="Pole ratio w_p/w_s"),
    terms: int = typer.Option(0, "--terms", help="Also evaluate the series with this many terms"),
) -> None:
    """Evaluate alpha(D, p) and its leading terms."""
    result = AlphaService.alpha_terms(d, p)
    table = Table(title=f"alpha(D={d:g}, p={p:g})")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    table.add_row("alpha0", fmt(result.alpha0))
    table.add_row("alpha1", fmt(result.alpha1))
    table.add_row("alpha", fmt(result.closed))
    table.add_row("higher-order correction", fmt(result.correction))
    if terms:
        table.add_row(f"series ({terms} terms)", fmt(AlphaService.alpha_series(d, p, terms)))
    table.add_row("K_max", fmt(StabilityService.kmax(d, p)))
    console.print(table)


@app.command()
@handle_errors
def analyze(config: Path = typer.Argument(..., help="Converter config (YAML)")) -> None:
    """Closed-form (HBA) verdict and the averaged-model (SSAA) margins."""
    cfg = ConfigService.load_config(config)
    console.print(_echo_config(cfg))
    point = LoopGainService.operating_point(cfg)
    nominal = StabilityService.verdict(cfg)
    table = Table(title="HBA")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    table.add_row("operating duty D", f"{point.duty:.6g}")
    if cfg.voltage_loop is not VoltageLoop.OPEN:
        vl = StabilityService.voltage_loop_mv(cfg, point)
        table.add_row("method", f"pcmc_voltage_loop_{cfg.voltage_loop.value}")
        table.add_row("index (m_i + m_v)/m_a", f"{vl.index:.6g}")
        table.add_row("m_i, m_v (V/s)", f"{vl.m_i:.6g}, {vl.m_v:.6g}")
        table.add_row("verdict", _verdict_text(vl.stable))
    else:
        verdict = StabilityService.verdict(cfg, point, general=True)
        table.add_row("method", verdict.method)
        table.add_row("index S/m_a", f"{verdict.index:.6g}")
        table.add_row("required ramp S (V/s)", f"{verdict.required_ramp_slope:.6g}")
        table.add_row("verdict", _verdict_text(verdict.stable))
    table.add_row(
        f"nominal {nominal.method} index (D={cfg.nominal_duty:.4g})",
        f"{nominal.index:.6g} ({'stable' if nominal.stable else 'unstable'})",
    )
    if nominal.bound is not None:
        table.add_row("gain bound", fmt(nominal.bound))
    checks = StabilityService.conservative_checks(cfg, point)
    for name, value in checks.model_dump().items():
        if value is not None:
            table.add_row(name, str(value))
    console.print(table)
    ssaa = ReportService.ssaa_leg(cfg)
    console.print(f"[bold]SSAA[/bold]: {ssaa.summary}")


@app.command()
@handle_errors
def sweep(
    scheme: Scheme = typer.Option(Scheme.ACMC_TYPE2, "--scheme", help="acmc_type2 (D, p) or acmc_pi (D, z)"),
    k: float = typer.Option(..., "--k", help="K for type-II, K~ for PI"),
    d_range: Optional[str] = typer.Option(None, "--d-range", help="lo:hi:n"),
    p_range: Optional[str] = typer.Option(None, "--p-range", help="lo:hi:n over p (type-II) or z (PI)"),
    topology: Topology = typer.Option(Topology.BOOST, "--topology"),
    curves: Optional[List[float]] = typer.Option(None, "--curves", help="Axis values for bound curves"),
    out: Path = typer.Option(Path("out"), "--out", help="Output directory"),
    workers: int = typer.Option(0, "--workers", help="Worker processes; 0 uses every CPU"),
) -> None:
    """Stability region, gain-bound curves and phase-margin map as CSV files."""
    n = settings.GRID_RESOLUTION
    d_values = parse_range(d_range or f"0.01:0.99:{n}")
    default_axis = f"0.05:5:{n}" if scheme is Scheme.ACMC_TYPE2 else f"0.005:0.1:{n}"
    axis_values = parse_range(p_range or default_axis)
    if k <= 0 or not math.isfinite(k):
        raise DomainError("--k must be positive", field="k")
    grid = StabilityService.sweep_stability(
        scheme, k, d_values, axis_values, topology=topology, workers=workers or settings.sweep_workers
    )
    written = [ExportService.write_atomic(out / "sweep.csv", ExportService.sweep_csv(grid))]
    if grid.overlay is not None:
        written.append(ExportService.write_atomic(out / "overlay.csv", ExportService.overlay_csv(d_values, grid.overlay)))

    bound_name = "kmax" if scheme is Scheme.ACMC_TYPE2 else "ktildemax"
    for value in curves or []:
        curve = StabilityService.bound_curve(scheme, value, d_values)
        name = f"{bound_name}_curve_{grid.axis_name}_{value:g}.csv"
        written.append(ExportService.write_atomic(out / name, ExportService.curve_csv(d_values, curve, bound_name)))
        if scheme is Scheme.ACMC_TYPE2 and topology is Topology.BUCK:
            dk = StabilityService.dkmax_curve(value, d_values)
            written.append(ExportService.write_atomic(
                out / f"dkmax_curve_p_{value:g}.csv", ExportService.curve_csv(d_values, dk, "dkmax")
            ))
    if scheme is Scheme.ACMC_TYPE2:
        pm = StabilityService.pm_region(k, d_values, axis_values)
        written.append(ExportService.write_atomic(
            out / "pm_region.csv", ExportService.pm_region_csv(d_values, axis_values, pm)
        ))

    stable_share = float(grid.stable.mean())
    console.print(f"{grid.stable.size} cells, {stable_share:.1%} stable, {int(grid.straddle.sum())} straddling")
    for path in written:
        console.print(f"  wrote {path}")


@app.command()
@handle_errors
def simulate(
    config: Path = typer.Argument(..., help="Converter config (YAML)"),
    periods: int = typer.Option(300, "--periods", help="Clock periods to simulate"),
    out: Optional[Path] = typer.Option(None, "--out", help="Trace CSV"),
    samples: Optional[int] = typer.Option(None, "--samples", help="Samples per period in the trace"),
) -> None:
    """Switched-model simulation and period-1 / subharmonic classification."""
    cfg = ConfigService.load_config(config)
    trace = SwitchSimService.simulate(cfg, periods, samples_per_period=samples)
    if out is not None:
        ExportService.write_atomic(out, ExportService.trace_csv(trace))
        console.print(f"wrote {out}")
    tail = trace.duty_sequence[-4:]
    console.print(f"classification: [bold]{trace.classification.value}[/bold]")
    console.print("last duty ratios: " + ", ".join(f"{v:.5f}" for v in tail))


@app.command()
@handle_errors
def sda(
    config: Path = typer.Argument(..., help="Converter config (YAML)"),
    out: Optional[Path] = typer.Option(None, "--out", help="Eigenvalue CSV"),
) -> None:
    """Periodic orbit and Jacobian eigenvalues of the clock-to-clock map."""
    cfg = ConfigService.load_config(config)
    result = SdaService.sda_verdict(cfg)
    table = Table(title="SDA")
    table.add_column("k", justify="right")
    table.add_column("re", justify="right")
    table.add_column("im", justify="right")
    table.add_column("|lambda|", justify="right")
    rows = []
    for i, value in enumerate(result.eigenvalues):
        z = complex(value)
        rows.append([str(i), fmt(z.real), fmt(z.imag), fmt(abs(z))])
        table.add_row(*rows[-1])
    console.print("fixed point: " + ", ".join(f"{v:.6g}" for v in result.orbit.state))
    console.print(f"duty: {result.orbit.duty:.6g} after {result.orbit.iterations} Newton steps")
    console.print(table)
    for warning in result.warnings:
        err_console.print(f"[yellow]warning[/yellow]: {warning}")
    console.print("verdict: " + ("[yellow]MARGINAL[/yellow]" if result.marginal else _verdict_text(result.stable)))
    if out is not None:
        ExportService.write_atomic(out, ExportService.to_csv(["k", "re", "im", "modulus"], rows))


@app.command()
@handle_errors
def report(
    config: Path = typer.Argument(..., help="Converter config (YAML)"),
    periods: Optional[int] = typer.Option(None, "--periods", help="Simulation length"),
    out: Optional[Path] = typer.Option(None, "--out", help="Report CSV"),
) -> None:
    """Run HBA, SDA, simulation and SSAA side by side."""
    cfg = ConfigService.load_config(config)
    result = ReportService.run_report(cfg, name=config.stem, n_periods=periods)
    table = Table(title=f"Stability report: {result.config_name}")
    table.add_column("method")
    table.add_column("verdict")
    table.add_column("details")
    for leg in result.legs:
        table.add_row(leg.name, _verdict_text(leg.stable) if leg.error is None else "[red]error[/red]",
                      leg.error or leg.summary)
    console.print(table)
    console.print("HBA/SDA/SIM agree: " + ("[green]yes[/green]" if result.agree else "[red]no[/red]"))
    if out is not None:
        rows = [[leg.name, "" if leg.stable is None else str(leg.stable).lower(), leg.summary, leg.error or ""]
                for leg in result.legs]
        rows.append(["agree", str(result.agree).lower(), "", ""])
        ExportService.write_atomic(out, ExportService.to_csv(["method", "stable", "summary", "error"], rows))
