"""Flat ``key = value`` scenario files.

::

    # comment
    scenario = pointing          # optional built-in preset to start from
    controller = robust
    gains.K = 5, 5, 5
    inertia.offset = 3, -2, 4

Dotted keys address sections, comma-separated values are vectors, and a single
value for a vector field is broadcast to every axis. Unknown keys fail
validation.
"""

import re
from pathlib import Path
from typing import Any, Dict, Optional, Union

from app.schemas.scenario import ScenarioConfig
from app.sim.scenarios import deep_merge, preset, validate_scenario
from app.utils.exceptions import ConfigError
from app.utils.logger import app_logger

_KEY_PART = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")
_TEXT_KEYS = {"name", "description", "scenario"}


def parse_text(text: str, source: str = "<string>") -> Dict[str, Any]:
    """Parse scenario text into a nested dict of raw string values."""
    tree: Dict[str, Any] = {}
    seen = set()

    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got '{line}'")

        key, value = (part.strip() for part in line.split("=", 1))
        parts = key.split(".")
        if not value or not all(_KEY_PART.match(p) for p in parts):
            raise ConfigError(f"{where}: malformed entry '{line}'")
        if key in seen:
            raise ConfigError(f"{where}: duplicate key '{key}'")
        seen.add(key)

        if key in _TEXT_KEYS or "," not in value:
            parsed: Any = value
        else:
            parsed = [item.strip() for item in value.split(",")]
            if any(not item for item in parsed):
                raise ConfigError(f"{where}: empty vector component in '{value}'")

        node = tree
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"{where}: '{part}' is a value, not a section")
            node = child
        if isinstance(node.get(parts[-1]), dict):
            raise ConfigError(f"{where}: '{key}' is a section, not a value")
        node[parts[-1]] = parsed

    return tree


def resolve_scenario(
    raw: Dict[str, Any],
    overrides: Optional[Dict[str, Any]] = None,
    default_name: str = "custom",
) -> ScenarioConfig:
    """Apply preset, file values and overrides (in that order) and validate."""
    raw = dict(raw)
    base_name = raw.pop("scenario", None)
    if base_name is not None:
        if not isinstance(base_name, str):
            raise ConfigError("'scenario' must name a single built-in preset")
        raw = deep_merge(preset(base_name), raw)
    raw.setdefault("name", default_name)
    if overrides:
        raw = deep_merge(raw, overrides)
    return validate_scenario(raw)


def load_scenario_file(
    path: Union[str, Path],
    overrides: Optional[Dict[str, Any]] = None,
) -> ScenarioConfig:
    """Read, merge and validate a scenario file.

    I/O failures propagate as ``OSError``; everything else is a ``ConfigError``.
    """
    path = Path(path)
    app_logger.info(f"Loading scenario file: {path}")
    text = path.read_text(encoding="utf-8")
    scenario = resolve_scenario(parse_text(text, source=str(path)), overrides, default_name=path.stem)
    app_logger.info(f"Scenario '{scenario.name}' loaded ({scenario.controller}, {scenario.sliding.kind})")
    return scenario
