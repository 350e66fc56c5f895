"""
apsim command-line entry point.

    python main.py validate <scenario.yaml>
    python main.py run <scenario.yaml> [--seed N] [--out DIR] [--trace] [--no-jammer] [--window S]
    python main.py compare <scenario.yaml> --antennas iso,dir,cone [--seed N] [--node ID] [--jobs N]
    python main.py version
"""

import sys
import logging
import argparse
from typing import List, Optional

from app.cli.commands import (
    EXIT_USAGE,
    cmd_compare,
    cmd_run,
    cmd_validate,
    cmd_version,
    format_error,
    report_error,
)


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors reduced to one diagnostic line."""

    def error(self, message):
        print(format_error("usage", message), file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = ArgumentParser(prog="apsim", description="Discrete-event VANET antenna and jamming simulator.")
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level.")
    verbs = parser.add_subparsers(dest="command", parser_class=ArgumentParser)
    verbs.required = True

    validate = verbs.add_parser("validate", help="Check a scenario file.")
    validate.add_argument("scenario", help="Path to the scenario YAML file.")
    validate.set_defaults(handler=cmd_validate)

    run = verbs.add_parser("run", help="Run a scenario and write CSV results.")
    run.add_argument("scenario", help="Path to the scenario YAML file.")
    run.add_argument("--seed", type=int, default=None, help="Override the scenario seed.")
    run.add_argument("--out", default=None, help="Output directory (default: $APSIM_RESULTS_DIR or ./results).")
    run.add_argument("--trace", action="store_true", help="Write the per-stage pipeline trace.")
    run.add_argument("--no-jammer", action="store_true", help="Remove every jammer before running.")
    run.add_argument("--window", type=float, default=None, help="Throughput window in seconds.")
    run.set_defaults(handler=cmd_run)

    compare = verbs.add_parser("compare", help="Compare antenna presets on one node.")
    compare.add_argument("scenario", help="Path to the scenario YAML file.")
    compare.add_argument("--antennas", required=True, help="Comma-separated presets, e.g. iso,dir,cone.")
    compare.add_argument("--seed", type=int, default=None, help="Override the scenario seed.")
    compare.add_argument("--node", default=None, help="Node whose antenna is swapped (default: first receiver).")
    compare.add_argument("--jobs", type=int, default=1, help="Variants run concurrently.")
    compare.add_argument("--out", default=None, help="Output directory (default: $APSIM_RESULTS_DIR or ./results).")
    compare.set_defaults(handler=cmd_compare)

    version = verbs.add_parser("version", help="Print the version.")
    version.set_defaults(handler=cmd_version)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    logger = logging.getLogger(__name__)
    try:
        return args.handler(args)
    except Exception as e:
        logger.debug("Command failed", exc_info=True)
        return report_error(e)


if __name__ == "__main__":
    sys.exit(main())
