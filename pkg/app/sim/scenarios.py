"""Built-in scenario presets.

Presets are stored as plain nested dicts so scenario files and CLI overrides can
be deep-merged on top of them before validation.
"""

import copy
from typing import Any, Dict, List, Tuple

from pydantic import ValidationError

from app.schemas.scenario import ScenarioConfig
from app.utils.exceptions import ConfigError
from app.utils.logger import app_logger

POINTING_Q0 = [0.0, 1.0, 0.0, 0.0]
POINTING_QD = [0.707, 0.0, -0.707, 0.0]

BUILTIN_SCENARIOS: Dict[str, Dict[str, Any]] = {
    "pointing": {
        "description": "Pointing maneuver from q=(0,1,0,0) to q_d=(0.707,0,-0.707,0) "
                       "under a constant disturbance, nonlinear PD",
        "controller": "pd",
        "initial": {"q": POINTING_Q0},
        "trajectory": {"kind": "constant", "q_d": POINTING_QD},
        "sliding": {"kind": "proposed", "lam": 2.0},
        "gains": {"K": [5.0, 5.0, 5.0]},
        "inertia": {"nominal": [10.0, 10.0, 10.0]},
        "disturbance": {"kind": "constant", "value": [0.2, -0.2, 0.2]},
        "duration": 10.0,
        "settling_threshold": 0.05,
    },
    "pointing-flip": {
        "description": "Pointing maneuver in which the attitude representation "
                       "flips sign at t = 3 s",
        "base": "pointing",
        "events": {"sign_flip_time": 3.0},
    },
    "uncertain-inertia": {
        "description": "Pointing maneuver with J = Ĵ + diag(3,-2,4) and bound diag(3,2,4); "
                       "robust gains sized offline, log-det adaptation",
        "controller": "robust",
        "initial": {"q": POINTING_Q0},
        "trajectory": {"kind": "constant", "q_d": POINTING_QD},
        "sliding": {"kind": "proposed", "lam": 2.0},
        "gains": {"K": [5.0, 5.0, 5.0], "Phi": [0.1, 0.1, 0.1], "eta": [0.1, 0.1, 0.1], "auto_size": True},
        "inertia": {"nominal": [10.0, 10.0, 10.0], "offset": [3.0, -2.0, 4.0], "bound": [3.0, 2.0, 4.0]},
        "adaptation": {"potential": "logdet", "weight": 0.002},
        "duration": 20.0,
    },
    "equator-crossing": {
        "description": "Spin through the q_e° = 0 equator: 170° about x with 1.5 rad/s, "
                       "quaternion PD baseline",
        "controller": "baseline",
        "initial": {"q": [0.0871557427476582, 0.9961946980917455, 0.0, 0.0], "omega": [1.5, 0.0, 0.0]},
        "trajectory": {"kind": "constant", "q_d": [1.0, 0.0, 0.0, 0.0]},
        "gains": {"Kp": [5.0, 5.0, 5.0], "Kd": [2.0, 2.0, 2.0]},
        "inertia": {"nominal": [10.0, 10.0, 10.0]},
        "duration": 1.5,
    },
    "tracking-slew": {
        "description": "Constant-rate slew tracked by the robust law with viscous damping "
                       "and a seeded random disturbance",
        "controller": "robust",
        "initial": {"q": [1.0, 0.0, 0.0, 0.0]},
        "trajectory": {"kind": "slew", "q_d": [1.0, 0.0, 0.0, 0.0], "rate": [0.0, 0.0, 0.2]},
        "sliding": {"kind": "proposed", "lam": 2.0},
        "gains": {"Phi": [0.1, 0.1, 0.1], "eta": [0.1, 0.1, 0.1], "auto_size": True},
        "inertia": {"nominal": [10.0, 12.0, 8.0], "offset": [1.0, -1.0, 0.5], "bound": [1.0, 1.0, 1.0]},
        "disturbance": {"kind": "random", "bound": [0.05, 0.05, 0.05]},
        "dynamics": {"kind": "viscous", "c_true": [0.3, 0.3, 0.3], "c_nom": [0.2, 0.2, 0.2], "c_bound": [0.2, 0.2, 0.2]},
        "duration": 10.0,
    },
}


def deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge ``overrides`` into a copy of ``base``."""
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def preset(name: str) -> Dict[str, Any]:
    """Raw nested dict of a built-in scenario, with its base resolved."""
    if name not in BUILTIN_SCENARIOS:
        raise ConfigError(
            f"Unknown built-in scenario '{name}'. Available: {', '.join(sorted(BUILTIN_SCENARIOS))}"
        )
    raw = copy.deepcopy(BUILTIN_SCENARIOS[name])
    base = raw.pop("base", None)
    if base is not None:
        raw = deep_merge(preset(base), raw)
    raw["name"] = name
    return raw


def validate_scenario(raw: Dict[str, Any]) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(raw)
    except ValidationError as e:
        app_logger.error(f"Invalid scenario: {e}")
        raise ConfigError(f"Invalid scenario: {e}")


def builtin_scenario(preset_name: str, /, **overrides: Any) -> ScenarioConfig:
    """Validated built-in scenario with optional nested overrides.

    ``name`` among the overrides renames the run.
    """
    return validate_scenario(deep_merge(preset(preset_name), overrides))


def list_scenarios() -> List[Tuple[str, str]]:
    return [(name, BUILTIN_SCENARIOS[name]["description"]) for name in sorted(BUILTIN_SCENARIOS)]
