#!/usr/bin/env python3
import argparse
import logging
import sys
from typing import Optional, Sequence

import pydantic

from config import settings
from cvteleport.common import gaussian
from cvteleport.version import __version__
from services.analysis_service import AnalysisService
from services.report_service import emit, log_dict_as_table, render_csv, render_json
from services.run_spec import Command, OutputFormat, RunSpec
from services.simulation_service import SimulationService
from services.state_service import PresetError, resolve_input, resolve_resource
from utils.logging import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

# argparse destination -> RunSpec field
_SPEC_FIELDS = {
    "input": "input_state",
    "resource": "resource_state",
    "cutoff": "cutoff",
    "max_deficit": "max_deficit",
    "samples": "n_samples",
    "seed": "seed",
    "threshold": "threshold",
    "workers": "workers",
    "outcomes": "outcomes",
    "r_min": "r_min",
    "r_max": "r_max",
    "steps": "steps",
    "metrics": "metrics",
    "out": "out",
    "format": "format",
}


def _metric_list(value: str):
    return [name.strip() for name in value.split(",") if name.strip()]


def _add_output(parser: argparse.ArgumentParser, formats=("json",)):
    parser.add_argument("--out", help="Write the report here instead of stdout")
    parser.add_argument("--format", choices=formats, help="Report format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teleporter",
        description="Continuous-variable teleportation of Gaussian states",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    state_help = ("Preset (vacuum, coherent:1+0.5i, thermal:0.3, svs:0.8, "
                  "tmst:0.8,0.1) or path of a JSON state file")

    epr_stats = commands.add_parser("epr-stats", help="EPR moments of a resource")
    epr_stats.add_argument("--resource", required=True, help=state_help)
    _add_output(epr_stats)

    distort = commands.add_parser(
        "distort", help="Distorting field, photon statistics and G(s)")
    distort.add_argument("--resource", required=True, help=state_help)
    distort.add_argument("--cutoff", type=int, help="Largest photon number")
    distort.add_argument("--max-deficit", type=float,
                         help="Largest accepted Fock truncation deficit")
    _add_output(distort)

    teleport = commands.add_parser("teleport", help="Analytic output state")
    teleport.add_argument("--input", required=True, help=state_help)
    teleport.add_argument("--resource", required=True, help=state_help)
    _add_output(teleport)

    fidelity = commands.add_parser("fidelity", help="Coherent-state fidelity")
    fidelity.add_argument("--resource", required=True, help=state_help)
    _add_output(fidelity)

    simulate = commands.add_parser(
        "simulate", help="Monte Carlo protocol checked against the analytic channel")
    simulate.add_argument("--input", required=True, help=state_help)
    simulate.add_argument("--resource", required=True, help=state_help)
    simulate.add_argument("--samples", type=int, help="Number of protocol runs")
    simulate.add_argument("--seed", type=int, help="Unsigned 64-bit seed")
    simulate.add_argument("--threshold", type=float, help="Largest accepted |z|")
    simulate.add_argument("--workers", type=int, help="Sampling threads")
    simulate.add_argument("--outcomes", help="Write sampled outcomes as CSV here")
    _add_output(simulate)

    sweep = commands.add_parser("sweep", help="Channel figures over squeezing r")
    sweep.add_argument("--resource", default="svs",
                       help="Resource family: svs or tmst:<nbar>")
    sweep.add_argument("--r-min", type=float, help="First r")
    sweep.add_argument("--r-max", type=float, help="Last r")
    sweep.add_argument("--steps", type=int, help="Number of grid points")
    sweep.add_argument("--metrics", type=_metric_list,
                       help="Comma-separated columns after r: epr_uncertainty, "
                            "added_noise, fidelity_coherent (default: all)")
    _add_output(sweep, formats=("json", "csv"))
    return parser


def spec_from_args(args: argparse.Namespace) -> RunSpec:
    values = {"command": args.command}
    for dest, field in _SPEC_FIELDS.items():
        value = getattr(args, dest, None)
        if value is not None:
            values[field] = value
    return RunSpec(**values)


def run(spec: RunSpec) -> int:
    """Execute a validated spec and emit its report"""
    analysis = AnalysisService(max_deficit=spec.max_deficit)
    passed = True

    if spec.command == Command.EPR_STATS:
        report = analysis.epr_stats(resolve_resource(spec.resource_state))
    elif spec.command == Command.DISTORT:
        report = analysis.distort(resolve_resource(spec.resource_state), spec.cutoff)
    elif spec.command == Command.TELEPORT:
        report = analysis.teleport(
            resolve_input(spec.input_state), resolve_resource(spec.resource_state))
    elif spec.command == Command.FIDELITY:
        report = analysis.fidelity(resolve_resource(spec.resource_state))
    elif spec.command == Command.SIMULATE:
        service = SimulationService(
            shard_size=settings.SHARD_SIZE,
            num_workers=spec.workers,
            show_progress=settings.SHOW_PROGRESS,
        )
        report, passed = service.simulate(
            resolve_input(spec.input_state),
            resolve_resource(spec.resource_state),
            n_samples=spec.n_samples,
            seed=spec.seed,
            threshold=spec.threshold,
            outcomes_path=spec.outcomes,
        )
    else:
        columns, rows = analysis.sweep(
            spec.resource_state or "svs", spec.r_min, spec.r_max, spec.steps,
            metrics=spec.metrics)
        if spec.format == OutputFormat.CSV:
            emit(render_csv(columns, rows), spec.out)
        else:
            emit(render_json(analysis.sweep_as_records(columns, rows)), spec.out)
        return EXIT_OK

    log_dict_as_table(report)
    emit(render_json(report), spec.out)
    return EXIT_OK if passed else EXIT_FAILURE


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    setup_logging(settings.LOG_LEVEL)
    settings.apply_simulator_config()

    try:
        spec = spec_from_args(args)
    except pydantic.ValidationError as e:
        for error in e.errors():
            location = ".".join(str(part) for part in error["loc"]) or "arguments"
            logger.error(f"Invalid {location}: {error['msg']}")
        return EXIT_USAGE

    try:
        return run(spec)
    except gaussian.Error as e:
        logger.error(f"Computation failed: {e}")
        return EXIT_FAILURE
    except PresetError as e:
        logger.error(f"Invalid state: {e}")
        return EXIT_USAGE
    except ValueError as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"Cannot write output: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
