"""nvhet command-line entry point: simulate, analyze, sweep, report, schema and replay."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from ..physics.constants import ENSEMBLE_PRESETS, PhysicalConstants, ensemble_preset
from ..sensing.operating_point import OperatingPoint
from ..repository.artifact_store import TRACE_FORMATS, write_text
from ..monitoring.logger import get_simulation_logger
from ..pipeline.config import config
from ..pipeline.errors import PipelineError
from ..pipeline.scenario_config import load_scenario, load_analysis, scenario_json_schema
from ..pipeline.orchestrator import (
    RunOrchestrator,
    build_run_inputs,
    operating_point_from_scenario,
    translate_error,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvhet",
        description="Digital twin of an NV-ensemble heterodyne microwave magnetometer.",
    )
    parser.add_argument("--log-level", default=None, help="Console log level (default NVHET_LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="Synthesize a photovoltage trace")
    simulate.add_argument("--config", required=True, help="Scenario file or preset name")
    simulate.add_argument("--out", type=Path, default=None, help="Output directory (default NVHET_OUTPUT_DIR/<command>)")
    simulate.add_argument("--seed", type=int, default=None, help="Overrides run.seed")
    simulate.add_argument("--format", choices=TRACE_FORMATS, default="csv", dest="fmt")

    analyze = commands.add_parser("analyze", help="Spectrum, peaks, fits and disambiguation of a trace")
    analyze.add_argument("trace", type=Path, help="Trace file (.csv or .bin)")
    analyze.add_argument("--config", type=Path, default=None,
                         help="Analysis section, or a scenario file carrying one")
    analyze.add_argument("--out", type=Path, default=None, help="Output directory (default NVHET_OUTPUT_DIR/<command>)")

    sweep = commands.add_parser("sweep", help="Simulate and analyze across one scenario parameter")
    sweep.add_argument("--config", required=True, help="Scenario file or preset name")
    sweep.add_argument("--parameter", required=True, help="Dotted key, e.g. tones.1.b_tesla")
    sweep.add_argument("--values", type=_float_list, default=None, help="Comma-separated values")
    sweep.add_argument("--start", type=float, default=None)
    sweep.add_argument("--stop", type=float, default=None)
    sweep.add_argument("--points", type=int, default=None)
    sweep.add_argument("--log", action="store_true", help="Logarithmic spacing between start and stop")
    sweep.add_argument("--out", type=Path, default=None, help="Output directory (default NVHET_OUTPUT_DIR/<command>)")
    sweep.add_argument("--seed", type=int, default=None, help="Base seed; point i uses seed + i")
    sweep.add_argument("--threads", type=int, default=None, help="Worker threads (default NVHET_THREADS)")

    report = commands.add_parser("report", help="Analytic sensitivity report for an operating point")
    report.add_argument("--config", default=None, help="Scenario whose tones define the operating point")
    report.add_argument("--ensemble", choices=sorted(ENSEMBLE_PRESETS), default="linewidth")
    report.add_argument("--laser-power", type=float, default=None, help="W")
    report.add_argument("--reference-b", type=float, default=None, help="T")
    report.add_argument("--delta", type=float, default=None, help="Beat frequency, Hz")
    report.add_argument("--channels", type=int, default=None)
    report.add_argument("--total-time", type=float, default=None, help="s")
    report.add_argument("--signal-b", type=float, default=None, help="T")
    report.add_argument("--band", type=float, default=None, help="Plan a reference grid for this band, Hz")
    report.add_argument("--m-max", type=int, default=240)
    report.add_argument("--spacing", type=float, default=2000.0, help="Grid spacing, Hz")
    report.add_argument("--out", type=Path, default=None, help="Also write the report to this file")

    schema = commands.add_parser("schema", help="Print the scenario JSON schema")
    schema.add_argument("--out", type=Path, default=None)

    replay = commands.add_parser("replay", help="Re-run a manifest and compare output digests")
    replay.add_argument("manifest", type=Path, help="manifest.json or its run directory")
    replay.add_argument("--out", type=Path, default=None, help="Output directory (default NVHET_OUTPUT_DIR/<command>)")
    return parser


def _out_dir(args: argparse.Namespace) -> Path:
    return args.out if args.out is not None else Path(config.paths.output_dir) / args.command


def _sweep_values(args: argparse.Namespace) -> List[float]:
    if args.values is not None:
        return args.values
    if args.start is None or args.stop is None or args.points is None:
        raise ValueError("sweep needs --values or all of --start, --stop and --points")
    if args.points < 2 or args.start == args.stop:
        raise ValueError(f"degenerate sweep range: start={args.start}, stop={args.stop}, points={args.points}")
    if args.log:
        if args.start <= 0 or args.stop <= 0:
            raise ValueError("--log needs positive --start and --stop")
        return np.geomspace(args.start, args.stop, args.points).tolist()
    return np.linspace(args.start, args.stop, args.points).tolist()


def _cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.config)
    result = RunOrchestrator().simulate(scenario, _out_dir(args), seed=args.seed, fmt=args.fmt)
    print(f"trace={result.outputs[0]}")
    print(f"manifest={result.manifest_path}")
    return EXIT_OK


def _cmd_analyze(args: argparse.Namespace) -> int:
    analysis = load_analysis(args.config) if args.config is not None else None
    result = RunOrchestrator().analyze(args.trace, analysis, _out_dir(args))
    sys.stdout.write(result.analysis.report_text())
    print(f"manifest={result.manifest_path}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.config)
    values = _sweep_values(args)
    orchestrator = RunOrchestrator(threads=args.threads)
    result = orchestrator.sweep(scenario, args.parameter, values, _out_dir(args), seed=args.seed)
    print(f"table={result.table_path}")
    print(f"manifest={result.manifest_path}")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    detector = None
    if args.config is not None:
        scenario = load_scenario(args.config)
        inputs = build_run_inputs(scenario)
        params, constants, detector = inputs.params, inputs.constants, inputs.detector
        op_point, signal_b = operating_point_from_scenario(scenario)
    else:
        params, constants = ensemble_preset(args.ensemble), PhysicalConstants()
        op_point, signal_b = OperatingPoint(laser_power=0.8, reference_b=220e-9, delta=0.0), 1e-12
    overrides = {
        'laser_power': args.laser_power,
        'reference_b': args.reference_b,
        'delta': args.delta,
        'channels': args.channels,
        'total_time': args.total_time,
    }
    op_point = op_point.with_changes(**{k: v for k, v in overrides.items() if v is not None})
    if args.signal_b is not None:
        signal_b = args.signal_b
    text = RunOrchestrator().report(
        params, op_point, constants, signal_b=signal_b, detector=detector,
        band=args.band, m_max=args.m_max, spacing=args.spacing,
    )
    sys.stdout.write(text)
    if args.out is not None:
        write_text(args.out, text)
    return EXIT_OK


def _cmd_schema(args: argparse.Namespace) -> int:
    text = json.dumps(scenario_json_schema(), indent=2, sort_keys=True) + "\n"
    if args.out is not None:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_replay(args: argparse.Namespace) -> int:
    result = RunOrchestrator().replay(args.manifest, _out_dir(args))
    if result.matches:
        print("replay=identical")
        return EXIT_OK
    print("replay=different")
    for name in result.mismatched:
        print(f"mismatch={name}")
    return 3


COMMANDS = {
    'simulate': _cmd_simulate,
    'analyze': _cmd_analyze,
    'sweep': _cmd_sweep,
    'report': _cmd_report,
    'schema': _cmd_schema,
    'replay': _cmd_replay,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one nvhet command.

    Returns:
        Exit code: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error
    """
    args = build_parser().parse_args(argv)
    get_simulation_logger(config.logging.log_file, args.log_level or config.logging.level)
    try:
        return COMMANDS[args.command](args)
    except Exception as e:
        error = translate_error(e)
        print(f"nvhet {args.command}: {error}", file=sys.stderr)
        if not isinstance(e, PipelineError):
            logger.debug("Command failed", exc_info=True)
        return error.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
