"""
Reading and writing scenario files.

Scenario files are YAML. Validation errors are reported with the dotted
key path and the line it sits on, and a key whose stem matches a known
key under a different unit suffix is called out as a unit mistake.
"""

import os
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Set, Tuple, Union

import yaml
from pydantic import BaseModel, TypeAdapter, ValidationError

from app.core.antenna import AntennaSystem, Pattern
from app.core.errors import ScenarioError
from app.models.scenario import ScenarioConfig

logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"
SCENARIO_DIR = CONFIG_DIR / "scenarios"
BASELINE_SCENARIO = SCENARIO_DIR / "baseline.yaml"
ANTENNA_PRESETS = CONFIG_DIR / "antennas.yaml"

UNIT_SUFFIXES = (
    "s", "ms", "min", "m", "km", "mps", "kmh", "kph", "hz", "khz", "mhz", "ghz",
    "bps", "kbps", "mbps", "w", "mw", "kw", "db", "dbm", "dbi", "rad", "deg", "bits", "bytes", "linear",
)

_PATTERN_ADAPTER = TypeAdapter(Pattern)

PathLike = Union[str, os.PathLike]


def _known_keys(model: type, seen: Optional[Set[type]] = None) -> Set[str]:
    """Every field name reachable from ``model``."""
    seen = set() if seen is None else seen
    if model in seen:
        return set()
    seen.add(model)
    keys: Set[str] = set()
    for name, info in model.model_fields.items():
        keys.add(name)
        for candidate in _nested_models(info.annotation):
            keys |= _known_keys(candidate, seen)
    return keys


def _nested_models(annotation) -> Iterable[type]:
    if isinstance(annotation, type) and issubclass(annotation, BaseModel):
        yield annotation
        return
    for arg in getattr(annotation, "__args__", ()) or ():
        yield from _nested_models(arg)
    for extra in getattr(annotation, "__metadata__", ()) or ():
        yield from _nested_models(extra)


_KNOWN_KEYS = _known_keys(ScenarioConfig)


def _stem(key: str) -> str:
    head, _, suffix = key.rpartition("_")
    return head if head and suffix in UNIT_SUFFIXES else key


def unit_suffix_hint(key: str) -> Optional[str]:
    """The known key that ``key`` most likely meant, if only its unit suffix is off."""
    if key in _KNOWN_KEYS:
        return None
    stem = _stem(key)
    matches = sorted(k for k in _KNOWN_KEYS if k != key and _stem(k) == stem and k != stem)
    return matches[0] if matches else None


def _key_lines(text: str) -> Dict[Tuple, int]:
    """Map each key path (and sequence index path) to its 1-based line."""
    root = yaml.compose(text, Loader=yaml.SafeLoader)
    lines: Dict[Tuple, int] = {}

    def walk(node, path: Tuple):
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                child = path + (key_node.value,)
                lines[child] = key_node.start_mark.line + 1
                walk(value_node, child)
        elif isinstance(node, yaml.SequenceNode):
            for index, item in enumerate(node.value):
                child = path + (index,)
                lines[child] = item.start_mark.line + 1
                walk(item, child)

    if root is not None:
        walk(root, ())
    return lines


def _dotted(path: Iterable) -> str:
    text = ""
    for part in path:
        if isinstance(part, int):
            text += f"[{part}]"
        else:
            text += f".{part}" if text else str(part)
    return text


def _locate(loc: Tuple, lines: Dict[Tuple, int]) -> Tuple[str, Optional[int]]:
    """Resolve a pydantic error location against the file's key paths.

    Union tags in the location (e.g. 'linear') have no counterpart in the
    file and are skipped; a missing key is reported on its parent's line.
    """
    path: Tuple = ()
    line = None
    for part in loc:
        candidate = path + (part,)
        if candidate in lines:
            path = candidate
            line = lines[candidate]
    shown = list(path)
    if loc and (not path or path[-1] != loc[-1]) and isinstance(loc[-1], str):
        shown.append(loc[-1])
    return _dotted(shown), line


def _describe(error: dict) -> Tuple[int, str]:
    key = error["loc"][-1] if error["loc"] else ""
    if error["type"] == "extra_forbidden":
        hint = unit_suffix_hint(str(key))
        if hint is not None:
            return 0, f"wrong or missing unit suffix on '{key}', expected '{hint}'"
        return 1, f"unknown key '{key}'"
    if error["type"] == "missing":
        return 1, f"missing required key '{key}'"
    return 1, error["msg"]


def parse_scenario(text: str) -> ScenarioConfig:
    """
    Parse scenario file contents into a ScenarioConfig.

    Raises:
        ScenarioError: naming the offending key and its line
    """
    try:
        data = yaml.safe_load(text)
        lines = _key_lines(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ScenarioError(f"malformed YAML: {getattr(e, 'problem', None) or e}", key="<file>", line=line) from e

    if not isinstance(data, dict):
        raise ScenarioError("a scenario file must hold a mapping at the top level", key="<file>", line=1)

    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        problems = []
        for error in e.errors():
            priority, message = _describe(error)
            key, line = _locate(error["loc"], lines)
            problems.append((priority, message, key, line))
        problems.sort(key=lambda p: p[0])
        _, message, key, line = problems[0]
        if len(problems) > 1:
            message += f"; {len(problems) - 1} more problem(s)"
        logger.debug(f"Scenario validation failed: {e}")
        raise ScenarioError(message, key=key, line=line) from e


def serialize_scenario(config: ScenarioConfig) -> str:
    """YAML text that parses back to an equal configuration."""
    data = config.model_dump(mode="json", exclude_none=True)
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)


def load_scenario(path: Optional[PathLike] = None) -> ScenarioConfig:
    """Load a scenario file; without a path, the shipped baseline."""
    if path is None:
        logger.warning(f"No scenario file given, using the shipped baseline at {BASELINE_SCENARIO}")
        path = BASELINE_SCENARIO
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Scenario file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    config = parse_scenario(text)
    logger.info(f"Loaded scenario '{config.name}' from {path}")
    return config


def save_scenario(config: ScenarioConfig, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(serialize_scenario(config))
    return path


def load_antenna_presets(path: Optional[PathLike] = None) -> Dict[str, Pattern]:
    """Named antenna patterns (iso, dir, cone, ...) used by comparisons."""
    path = Path(path) if path is not None else ANTENNA_PRESETS
    if not path.exists():
        raise FileNotFoundError(f"Antenna preset file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    presets = {}
    for name, entry in data.get("presets", {}).items():
        try:
            presets[name] = _PATTERN_ADAPTER.validate_python(entry)
        except ValidationError as e:
            raise ScenarioError(f"invalid antenna preset: {e.errors()[0]['msg']}", key=f"presets.{name}") from e
    return presets


def preset_antennas(
    names: List[str],
    base: AntennaSystem,
    presets: Optional[Dict[str, Pattern]] = None,
) -> Dict[str, AntennaSystem]:
    """One antenna per preset name, each keeping ``base``'s pointing."""
    presets = load_antenna_presets() if presets is None else presets
    unknown = [n for n in names if n not in presets]
    if unknown:
        raise ScenarioError(
            f"unknown antenna preset(s) {', '.join(unknown)}; available: {', '.join(sorted(presets))}",
            key="antennas",
        )
    return {name: base.model_copy(update={"pattern": presets[name]}) for name in names}
