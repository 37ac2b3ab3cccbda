"""Command-line interface of the attitude control simulator.

::

    python run.py simulate --config configs/pointing_flip.conf --out results/
    python run.py simulate --scenario uncertain-inertia --duration 20
    python run.py compare --configs a.conf b.conf --out results/ --workers 2
    python run.py verify --json
    python run.py scenarios

Exit codes: 0 success, 1 I/O failure, 2 configuration error,
3 divergence or invalid estimate, 4 verification failure.
"""

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from app import __version__
from app.config import settings
from app.schemas.results import Metrics, RunLog
from app.schemas.scenario import ScenarioConfig
from app.sim.config_file import load_scenario_file, resolve_scenario
from app.sim.metrics import compute_metrics
from app.sim.output import emit_csv, emit_metrics_csv
from app.sim.runner import run_scenario
from app.sim.scenarios import list_scenarios
from app.sim.verify import verify
from app.utils.exceptions import (
    ConfigError,
    DivergenceError,
    DomainError,
    EstimateInvalidError,
    InvalidArgumentError,
    SingularityError,
)
from app.utils.logger import app_logger

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_VERIFY = 4

METRICS_FILE = "metrics.csv"


# ── argument parsing ─────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attitude-sim",
        description="Quaternion sliding-variable attitude control simulator",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=None, help="Override the scenario seed")
    parser.add_argument("--dt", type=float, default=None, help="Override the RK4 step (s)")
    parser.add_argument("--duration", type=float, default=None, help="Override the run duration (s)")

    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="Run one scenario")
    source = simulate.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", type=Path, help="Scenario file")
    source.add_argument("--scenario", help="Built-in scenario name")
    simulate.add_argument("--out", type=Path, default=None, help="Output directory")

    compare = sub.add_parser("compare", help="Run several scenarios and tabulate metrics")
    compare.add_argument("--configs", type=Path, nargs="*", default=[], help="Scenario files")
    compare.add_argument("--scenarios", nargs="*", default=[], help="Built-in scenario names")
    compare.add_argument("--out", type=Path, default=None, help="Output directory")
    compare.add_argument("--workers", type=int, default=None, help="Worker processes")

    check = sub.add_parser("verify", help="Run the oracle verification suite")
    check.add_argument("--json", action="store_true", help="Print the report as JSON")

    sub.add_parser("scenarios", help="List built-in scenarios")
    return parser


def cli_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Global options that take precedence over file and preset values."""
    overrides: Dict[str, Any] = {}
    for key in ("seed", "dt", "duration"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return overrides


# ── scenario execution ───────────────────────────────────────────────────────

def load_from_args(
    config: Optional[Path], scenario: Optional[str], overrides: Dict[str, Any]
) -> ScenarioConfig:
    if config is not None:
        return load_scenario_file(config, overrides)
    return resolve_scenario({"scenario": scenario}, overrides, default_name=scenario)


def execute(scenario: ScenarioConfig) -> Tuple[RunLog, Metrics]:
    """Run one scenario and summarize it; module-level so worker processes can pickle it."""
    log = run_scenario(scenario)
    return log, compute_metrics(log)


def execute_all(scenarios: Sequence[ScenarioConfig], workers: int) -> List[Tuple[RunLog, Metrics]]:
    """Results in input order regardless of scheduling."""
    if workers <= 1 or len(scenarios) <= 1:
        return [execute(sc) for sc in scenarios]
    app_logger.info(f"Running {len(scenarios)} scenarios on {workers} worker processes")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(execute, scenarios))


def _unique_names(scenarios: Sequence[ScenarioConfig]) -> None:
    names = [sc.name for sc in scenarios]
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise ConfigError(f"Scenario names must be unique within a comparison: {', '.join(duplicates)}")


# ── subcommands ──────────────────────────────────────────────────────────────

def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_from_args(args.config, args.scenario, cli_overrides(args))
    out = args.out or settings.output_dir
    log, metrics = execute(scenario)
    emit_csv(log, out / f"{scenario.name}.csv")
    emit_metrics_csv([metrics], out / METRICS_FILE)
    print(
        f"{scenario.name}: settling={metrics.settling_time:.4g}s "
        f"final_error={metrics.final_error:.3e} peak_effort={metrics.peak_effort:.4g}"
    )
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    overrides = cli_overrides(args)
    scenarios = [load_scenario_file(path, overrides) for path in args.configs]
    scenarios += [load_from_args(None, name, overrides) for name in args.scenarios]
    if not scenarios:
        raise ConfigError("compare needs at least one --configs file or --scenarios name")
    _unique_names(scenarios)

    out = args.out or settings.output_dir
    workers = args.workers or settings.compare_workers
    results = execute_all(scenarios, workers)
    for log, _ in results:
        emit_csv(log, out / f"{log.scenario.name}.csv")
    emit_metrics_csv([m for _, m in results], out / METRICS_FILE)

    width = max(len(sc.name) for sc in scenarios)
    for _, m in results:
        print(
            f"{m.name:<{width}}  {m.controller:<15} {m.sliding:<12} "
            f"settling={m.settling_time:<8.4g} peak={m.peak_effort:<8.4g} "
            f"unwinding={m.unwinding_ratio:<6.3g} switches={m.manifold_switches}"
        )
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else settings.default_seed
    report = verify(seed=seed)
    if args.json:
        print(report.model_dump_json(indent=2))
    else:
        for check in report.checks:
            status = "PASS" if check.passed else "FAIL"
            print(f"[{status}] {check.name:<24} residual={check.max_residual:.3e} threshold={check.threshold:.1e}")
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_scenarios(args: argparse.Namespace) -> int:
    for name, description in list_scenarios():
        print(f"{name:<20} {description}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "verify": cmd_verify,
    "scenarios": cmd_scenarios,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, dispatch the subcommand and map failures to exit codes."""
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValidationError, InvalidArgumentError, DomainError) as e:
        app_logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except (DivergenceError, EstimateInvalidError, SingularityError) as e:
        app_logger.error(f"Run failed: {e}")
        return EXIT_DIVERGENCE
    except OSError as e:
        app_logger.error(f"I/O failure: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
