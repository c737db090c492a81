"""JSON configuration of the simulation study.

Example (all keys optional; the defaults regenerate the full
40-scenario grid):

    {
      "designs": ["A", "B", "C", "D"],
      "sample_sizes": [150, 250],
      "true_models": ["linear", "quadratic", "emax", "sigemax", "anova"],
      "include_anova_candidate": false,
      "n_sim": 1000,
      "boot_reps": 500,
      "delta": -1.3,
      "sd": 2.1213203435596424,
      "seed": 0,
      "theta_overrides": {"emax": [0.0, -1.81, 0.79]}
    }

Validation errors carry the JSON pointer of the offending field.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..models import MODEL_KINDS
from .scenarios import DESIGNS, DEFAULT_DELTA, DEFAULT_SD, TRUE_THETA, Scenario, build_grid

__all__ = ["ConfigError", "load_config", "scenarios_from_config"]


class ConfigError(ValueError):
    """Invalid simulation configuration; ``pointer`` locates the field."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer


def load_config(path) -> dict:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"not valid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise ConfigError("", "the configuration must be a JSON object")
    return obj


def _expect(obj, key, kinds, default, pointer, check=None):
    if key not in obj:
        return default
    value = obj[key]
    if not isinstance(value, kinds) or isinstance(value, bool) and bool not in (
        kinds if isinstance(kinds, tuple) else (kinds,)
    ):
        raise ConfigError(f"{pointer}/{key}", f"expected {kinds}, got {type(value).__name__}")
    if check is not None:
        check(value, f"{pointer}/{key}")
    return value


def _check_str_list(allowed, what):
    def check(value, pointer):
        if not isinstance(value, list) or not value:
            raise ConfigError(pointer, f"expected a nonempty list of {what}")
        for i, item in enumerate(value):
            if not isinstance(item, str) or item not in allowed:
                raise ConfigError(f"{pointer}/{i}",
                                  f"expected one of {sorted(allowed)}, got {item!r}")

    return check


def _check_int_list(value, pointer):
    if not isinstance(value, list) or not value:
        raise ConfigError(pointer, "expected a nonempty list of integers")
    for i, item in enumerate(value):
        if not isinstance(item, int) or isinstance(item, bool) or item < 2:
            raise ConfigError(f"{pointer}/{i}", f"expected an integer >= 2, got {item!r}")


def _check_nonneg_int(value, pointer):
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ConfigError(pointer, f"expected a nonnegative integer, got {value!r}")


def _check_pos_int(value, pointer):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(pointer, f"expected a positive integer, got {value!r}")


def scenarios_from_config(obj: dict) -> list[Scenario]:
    """Validate a configuration object and expand it into scenarios."""
    known = {
        "designs", "sample_sizes", "true_models", "include_anova_candidate",
        "n_sim", "boot_reps", "delta", "sd", "seed", "theta_overrides",
    }
    for key in obj:
        if key not in known:
            raise ConfigError(f"/{key}", "unknown configuration field")

    designs = _expect(obj, "designs", list, list(DESIGNS), "",
                      check=_check_str_list(set(DESIGNS), "design names"))
    sizes = _expect(obj, "sample_sizes", list, [150, 250], "", check=_check_int_list)
    models = _expect(obj, "true_models", list, list(TRUE_THETA), "",
                     check=_check_str_list(set(MODEL_KINDS), "model names"))
    include_anova = _expect(obj, "include_anova_candidate", bool, False, "")
    n_sim = _expect(obj, "n_sim", int, 1000, "", check=_check_pos_int)
    boot_reps = _expect(obj, "boot_reps", int, 500, "", check=_check_nonneg_int)
    seed = _expect(obj, "seed", int, 0, "", check=_check_nonneg_int)
    delta = _expect(obj, "delta", (int, float), DEFAULT_DELTA, "")
    if delta == 0:
        raise ConfigError("/delta", "delta must be nonzero")
    sd = _expect(obj, "sd", (int, float), DEFAULT_SD, "")
    if sd < 0:
        raise ConfigError("/sd", "sd must be nonnegative")

    overrides = {}
    raw_overrides = _expect(obj, "theta_overrides", dict, {}, "")
    for kind, theta in raw_overrides.items():
        if kind not in TRUE_THETA:
            raise ConfigError(f"/theta_overrides/{kind}", "unknown model name")
        if not isinstance(theta, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in theta
        ):
            raise ConfigError(f"/theta_overrides/{kind}", "expected a list of numbers")
        if len(theta) != len(TRUE_THETA[kind]):
            raise ConfigError(
                f"/theta_overrides/{kind}",
                f"expected {len(TRUE_THETA[kind])} parameters, got {len(theta)}",
            )
        overrides[kind] = tuple(float(x) for x in theta)

    return build_grid(
        designs=tuple(designs),
        sample_sizes=tuple(sizes),
        true_models=tuple(models),
        include_anova_candidate=bool(include_anova),
        n_sim=n_sim,
        boot_reps=boot_reps,
        sd=float(sd),
        delta=float(delta),
        seed=seed,
        theta_overrides=overrides,
    )
