"""
osc2cr - Main Entry Point

Converts OpenSCENARIO scenarios (with their OpenDRIVE maps) into CommonRoad
benchmark scenarios.

    python main.py convert scenarios/SimpleOvertake.xosc --render
    python main.py batch scenarios --report out/report.json --jobs 4
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

# Add project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from src.errors import ConversionError  # noqa: E402
from src.pipeline.converter import EXIT_OK, EXIT_USAGE  # noqa: E402


def _parameters(values: Optional[List[str]]) -> Optional[Dict[str, str]]:
    if not values:
        return None
    out = {}
    for item in values:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise argparse.ArgumentTypeError(f"--param expects NAME=VALUE, got '{item}'")
        out[name.lstrip("$")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON settings file (default: $OSC2CR_CONFIG)")
    common.add_argument("--dt-sim", type=float, help="simulation step in seconds (default 0.01)")
    common.add_argument("--dt-cr", type=float, help="CommonRoad time step in seconds (default 0.1)")
    common.add_argument("--t-max", type=float, help="simulation horizon in seconds (default 60)")
    common.add_argument("--ego", dest="ego_name", help="entity to use as the planning problem's ego")
    common.add_argument("--param", action="append", metavar="NAME=VALUE",
                        help="override a ParameterDeclaration (repeatable)")
    common.add_argument("--render", action="store_true", default=None, help="also write <stem>.svg")
    common.add_argument("--trace-csv", action="store_true", default=None, help="also write <stem>.trace.csv")
    common.add_argument("--output-dir", type=Path, help="output directory (default: next to each input)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(prog="osc2cr", description="OpenSCENARIO to CommonRoad converter")
    modes = parser.add_subparsers(dest="mode", required=True)

    convert = modes.add_parser("convert", parents=[common], help="convert one .xosc file")
    convert.add_argument("input", type=Path)

    batch = modes.add_parser("batch", parents=[common], help="convert directories / manifests")
    batch.add_argument("inputs", type=Path, nargs="+")
    batch.add_argument("--report", type=Path, help="write the JSON run report here")
    batch.add_argument("--jobs", type=int, help="worker processes (default: all CPUs)")
    return parser


def load_cli_settings(args: argparse.Namespace):
    from src.settings import load_settings

    return load_settings(
        args.config,
        dt_sim=args.dt_sim,
        dt_cr=args.dt_cr,
        t_max=args.t_max,
        ego_name=args.ego_name,
        parameters=_parameters(args.param),
        render=args.render,
        trace_csv=args.trace_csv,
    )


def run_convert(args: argparse.Namespace, settings) -> int:
    from src.pipeline.converter import convert_file

    print("=" * 60)
    print(f"Converting {args.input}")
    print("=" * 60)

    result = convert_file(args.input, args.output_dir, settings)
    for diagnostic in result.diagnostics:
        if diagnostic["level"] != "info":
            print(f"  [{diagnostic['level']}] {diagnostic['message']}")
    if result.success:
        for kind, path in result.outputs.items():
            print(f"  {kind:<11} {path}")
        print(f"  duration    {result.scenario_duration:.2f} s ({result.termination_reason})")
        print(f"  took        {result.conversion_time:.2f} s, {result.warnings} warning(s)")
    else:
        print(f"  error: {result.error}", file=sys.stderr)
    return result.exit_code


def run_batch_mode(args: argparse.Namespace, settings) -> int:
    from src.monitoring.run_report import summary_lines, write_report
    from src.pipeline.batch import run_batch

    if args.jobs is not None and args.jobs < 1:
        print("--jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE

    print("=" * 60)
    print("Batch conversion")
    print("=" * 60)

    stats = run_batch(args.inputs, args.output_dir, settings, args.jobs)
    if args.report:
        write_report(stats, args.report)
    for line in summary_lines(stats):
        print(f"  {line}")
    return stats.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        settings = load_cli_settings(args)
        if args.mode == "convert":
            return run_convert(args, settings)
        return run_batch_mode(args, settings)
    except argparse.ArgumentTypeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConversionError as e:
        # settings / input collection problems
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
