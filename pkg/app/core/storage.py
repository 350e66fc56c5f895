import os
import re
import logging
from typing import Optional

logger = logging.getLogger(__name__)

# Base directory for run outputs; APSIM_RESULTS_DIR overrides it, --out overrides both.
RESULTS_ENV_VAR = "APSIM_RESULTS_DIR"
DEFAULT_RESULTS_DIR = "results"


def get_results_dir(out_dir: Optional[str] = None) -> str:
    """Returns the output directory for a run, creating it if needed."""
    results_dir = out_dir or os.environ.get(RESULTS_ENV_VAR) or DEFAULT_RESULTS_DIR
    os.makedirs(results_dir, exist_ok=True)
    return results_dir


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name)


def get_csv_path(results_dir: str, scenario_name: str, node_id: str) -> str:
    """Returns the CSV path for one receiver of a run."""
    return os.path.join(results_dir, f"{_safe_name(scenario_name)}_{_safe_name(node_id)}.csv")


def get_summary_path(results_dir: str, scenario_name: str) -> str:
    return os.path.join(results_dir, f"{_safe_name(scenario_name)}_summary.txt")


def get_trace_path(results_dir: str, scenario_name: str) -> str:
    """Returns the pipeline trace CSV path for a run."""
    return os.path.join(results_dir, f"{_safe_name(scenario_name)}_trace.csv")


def get_scenario_path(results_dir: str, scenario_name: str) -> str:
    """Returns the path of the effective scenario a run was made with."""
    return os.path.join(results_dir, f"{_safe_name(scenario_name)}_scenario.yaml")


def write_text(path: str, text: str) -> str:
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    logger.info(f"Wrote {path}")
    return path
