"""
Exception types raised by the simulator.

All of them derive from ValueError so callers that only care about
"bad input" can keep catching ValueError.
"""

from typing import List, Optional


class SimulationError(ValueError):
    """Base class for simulator failures."""

    kind = "simulation"


class GeometryError(SimulationError):
    kind = "geometry"


class PointingError(SimulationError):
    kind = "pointing"


class ChannelError(SimulationError):
    kind = "channel"


class ScenarioError(ValueError):
    """A scenario file could not be turned into a configuration."""

    kind = "scenario"

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        location = ""
        if key is not None:
            location += f" (key '{key}'"
            location += f", line {line})" if line is not None else ")"
        super().__init__(f"{message}{location}")


class InvalidScenarioError(ScenarioError):
    """Raised when a run is requested for a scenario that fails validation."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__(f"scenario has {len(violations)} violation(s): " + "; ".join(violations))
