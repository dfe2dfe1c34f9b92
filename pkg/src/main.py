import argparse
import sys
from pathlib import Path
from typing import List, Optional

from rich.console import Console
from rich.table import Table

from src.comparators.resolution_sweep import resolution_sweep
from src.config.settings import load_config
from src.models.errors import BlowUpError, ConfigError
from src.models.schema import SweepReport, Verdict
from src.pipeline import EXIT_BLOW_UP, EXIT_CHECK_FAILED, EXIT_CONFIG_ERROR, EXIT_OK, SETUP_ERRORS, run_case
from src.storage.reports import write_sweep
from src.utils.logger import configure_logging_from_config, setup_logger
from src.validators.identity_fuzz import fuzz_identities

console = Console()


def _format(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.4g}"


def print_verdicts(verdicts: List[Verdict], title: str = "Verdicts") -> None:
    """Render verdicts as a rich table."""
    table = Table(title=title)
    table.add_column("check")
    table.add_column("statement")
    table.add_column("worst", justify="right")
    table.add_column("threshold", justify="right")
    table.add_column("t", justify="right")
    table.add_column("result")
    for v in verdicts:
        table.add_row(
            v.check, v.statement, _format(v.worst_value), _format(v.threshold), _format(v.worst_t),
            "[green]pass[/green]" if v.passed else "[red]FAIL[/red]",
        )
    console.print(table)


def print_sweep(report: SweepReport) -> None:
    table = Table(title="Convergence")
    table.add_column("quantity")
    table.add_column("parameter", justify="right")
    table.add_column("value", justify="right")
    table.add_column("order", justify="right")
    for entry in report.entries + report.dt_entries:
        orders = [None] + list(entry.orders)
        for parameter, value, order in zip(entry.parameters, entry.values, orders):
            table.add_row(entry.quantity, f"{parameter:.4g}", _format(value), _format(order))
    console.print(table)


def _load(config_path: str):
    try:
        return load_config(config_path)
    except FileNotFoundError as exc:
        console.print(f"[red]{exc}[/red]")
    except ConfigError as exc:
        console.print(f"[red]Invalid configuration {config_path}:[/red]")
        for message in exc.errors:
            console.print(f"  - {message}")
    return None


def cmd_run(args) -> int:
    cfg = _load(args.config)
    if cfg is None:
        return EXIT_CONFIG_ERROR
    configure_logging_from_config(cfg)

    result = run_case(cfg, args.output)
    if result.report is None:
        console.print(f"[red]{result.error}[/red]")
        return result.exit_code

    print_verdicts(result.report.verdicts)
    if result.report.blow_up:
        console.print(f"[red]Blow-up:[/red] {result.report.blow_up}")
    return result.exit_code


def cmd_sweep(args) -> int:
    cfg = _load(args.config)
    if cfg is None:
        return EXIT_CONFIG_ERROR
    configure_logging_from_config(cfg)

    try:
        resolutions = [int(n) for n in args.resolutions.split(",") if n.strip()]
        report = resolution_sweep(cfg, resolutions)
    except ValueError as exc:
        console.print(f"[red]{exc}[/red]")
        return EXIT_CONFIG_ERROR
    except BlowUpError as exc:
        console.print(f"[red]Blow-up during sweep:[/red] {exc}")
        return EXIT_BLOW_UP

    out = Path(args.output or cfg.output.directory)
    path = write_sweep(report, out / "sweep.csv")
    print_sweep(report)
    console.print(f"Sweep table written to {path}")
    return EXIT_OK


def cmd_check_identities(args) -> int:
    setup_logger(level=args.log_level)
    result = fuzz_identities(samples=args.samples, seed=args.seed)
    print_verdicts(result.verdicts(), title=f"Identity fuzzing ({args.samples} samples, seed {args.seed})")
    return EXIT_OK if result.passed else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmcf",
        description="Graphical mean curvature flow laboratory for maps between flat tori",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Evolve a configured map and check the decay estimates
  python -m src.main run --config configs/area_decreasing.cfg

  # Write outputs somewhere else
  python -m src.main run --config configs/affine.cfg --output results/affine

  # Convergence study over three grids
  python -m src.main sweep --config configs/area_decreasing.cfg --resolutions 32,64,128

  # Flow-free fuzzing of the pointwise identities
  python -m src.main check-identities --samples 1000000 --seed 7

Exit codes: 0 all checks passed, 1 a check failed, 2 configuration error, 3 blow-up.
        """
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Evolve a configured map and monitor the estimates")
    run.add_argument('--config', type=str, required=True, help='Path to key=value run configuration')
    run.add_argument('--output', type=str, default=None,
                     help='Output directory (default: output.directory from the config)')
    run.set_defaults(handler=cmd_run)

    sweep = subparsers.add_parser("sweep", help="Run one setup at several resolutions")
    sweep.add_argument('--config', type=str, required=True, help='Path to key=value run configuration')
    sweep.add_argument('--resolutions', type=str, default="32,64,128",
                       help='Comma separated grid sizes (default: 32,64,128)')
    sweep.add_argument('--output', type=str, default=None,
                       help='Output directory for sweep.csv (default: output.directory from the config)')
    sweep.set_defaults(handler=cmd_sweep)

    identities = subparsers.add_parser("check-identities", help="Fuzz the algebraic identities without a flow")
    identities.add_argument('--samples', type=int, default=1_000_000, help='Number of random tuples (default: 1000000)')
    identities.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    identities.add_argument('--log-level', type=str, default="INFO", help='Log level (default: INFO)')
    identities.set_defaults(handler=cmd_check_identities)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point."""
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except SETUP_ERRORS as exc:
        console.print(f"[red]{exc}[/red]")
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
