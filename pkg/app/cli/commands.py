"""
Handlers for the command-line verbs.

Each handler takes the parsed argparse namespace and returns an exit
status. Failures are raised; ``report_error`` turns them into the single
diagnostic line printed by ``main``.
"""

import sys
import logging
from typing import List, Optional, TextIO

from app import __version__
from app.core import engine
from app.core.errors import ScenarioError, SimulationError
from app.core.experiment import compare_antennas, default_compare_node, run_scenario, write_comparison
from app.core.reporting import emit_summary
from app.core.scenario_io import load_scenario, preset_antennas

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SCENARIO = 3
EXIT_SIMULATION = 4
EXIT_IO = 5

ERROR_PREFIX = "apsim-error"


def classify_error(error: BaseException) -> tuple:
    """(kind, exit status) for an exception raised by a command."""
    if isinstance(error, ScenarioError):
        return "scenario", EXIT_SCENARIO
    if isinstance(error, SimulationError):
        return error.kind, EXIT_SIMULATION
    if isinstance(error, OSError):
        return "io", EXIT_IO
    if isinstance(error, (ValueError, KeyError)):
        return "usage", EXIT_USAGE
    return "internal", EXIT_SIMULATION


def format_error(kind: str, message: str) -> str:
    single_line = " ".join(str(message).split())
    return f"{ERROR_PREFIX}[{kind}]: {single_line}"


def report_error(error: BaseException, stream: Optional[TextIO] = None) -> int:
    kind, status = classify_error(error)
    message = error.args[0] if isinstance(error, KeyError) and error.args else str(error)
    print(format_error(kind, message), file=stream or sys.stderr)
    return status


def _parse_names(text: str) -> List[str]:
    names = [n.strip() for n in text.split(",") if n.strip()]
    if not names:
        raise ValueError("--antennas needs at least one preset name")
    return names


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    violations = engine.validate(scenario)
    if violations:
        for violation in violations:
            print(f"violation: {violation}")
        raise ScenarioError(f"scenario '{scenario.name}' has {len(violations)} violation(s)", key="nodes")
    print(f"ok: scenario '{scenario.name}' is valid")
    return EXIT_OK


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    outputs = run_scenario(
        scenario,
        seed=args.seed,
        out_dir=args.out,
        trace=args.trace,
        no_jammer=args.no_jammer,
        window_s=args.window,
    )
    print(outputs.summary, end="")
    for rx_id, path in outputs.csv_paths.items():
        print(f"csv[{rx_id}]: {path}")
    if outputs.trace_path:
        print(f"trace: {outputs.trace_path}")
    print(f"summary: {outputs.summary_path}")
    if outputs.scenario_path:
        print(f"scenario: {outputs.scenario_path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario = load_scenario(args.scenario)
    node_id = args.node or default_compare_node(scenario)
    try:
        node = scenario.node(node_id)
    except KeyError:
        raise ScenarioError(f"no node '{node_id}' to compare antennas on", key="nodes")
    variants = preset_antennas(_parse_names(args.antennas), node.antenna)
    if args.jobs < 1:
        raise ValueError(f"--jobs must be at least 1, got {args.jobs}")

    comparison = compare_antennas(scenario, variants, seed=args.seed, node_id=node_id, jobs=args.jobs)
    paths = write_comparison(comparison, args.out)
    print(emit_summary(comparison), end="")
    for name, path in paths.items():
        print(f"{name}: {path}")
    return EXIT_OK


def cmd_version(args) -> int:
    print(f"apsim {__version__}")
    return EXIT_OK
