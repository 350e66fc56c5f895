"""
This module contains pytest fixtures that can be reused across multiple test files.
"""

import sys
from pathlib import Path

# Add the project root to sys.path
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

import pytest

from app.core import engine
from app.core.scenario_io import SCENARIO_DIR, load_scenario

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def scenario_dir():
    return SCENARIO_DIR


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def baseline_scenario():
    """The shipped baseline, one broadcast per minute."""
    return load_scenario(SCENARIO_DIR / "baseline.yaml")


@pytest.fixture(scope="session")
def dense_scenario():
    """The shipped dense variant, one broadcast per second."""
    return load_scenario(SCENARIO_DIR / "dense.yaml")


@pytest.fixture(scope="session")
def linear_scenario():
    return load_scenario(SCENARIO_DIR / "linear_track.yaml")


@pytest.fixture(scope="session")
def dense_run(dense_scenario):
    """A dense jammed run, shared by every test that only reads it."""
    return engine.run(dense_scenario, seed=7)


@pytest.fixture(scope="session")
def minimal_scenario_text():
    with open(DATA_DIR / "minimal_scenario.yaml", "r", encoding="utf-8") as f:
        return f.read()


@pytest.fixture
def results_dir(tmp_path, monkeypatch):
    """A throwaway output directory, also exported as APSIM_RESULTS_DIR."""
    out = tmp_path / "results"
    monkeypatch.setenv("APSIM_RESULTS_DIR", str(out))
    return out
