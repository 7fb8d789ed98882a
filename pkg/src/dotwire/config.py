"""INI configuration for the command-line interface.

A config file provides per-command defaults; command-line flags override it.
Sections are command names, keys are the underscored option names. Unknown
sections or keys are rejected rather than ignored, so typos fail loudly:

    [spectrum]
    kd = 0.7853981633974483, 1.1780972450961724
    n_points = 601

    [storage]
    pulse_ratio = 5, 10, 20, 50
"""

from __future__ import annotations

import configparser
from collections.abc import Callable
from pathlib import Path

from .errors import ConfigError

__all__ = ["CONFIG_SCHEMA", "load_config"]


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"expected a number, got {text!r}") from exc


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"expected an integer, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    items = [p for chunk in text.split(",") for p in chunk.split()]
    if not items:
        raise ConfigError("expected at least one number")
    return [_float(p) for p in items]


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _choice(*allowed: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in allowed:
            raise ConfigError(
                f"expected one of {', '.join(allowed)}, got {text!r}"
            )
        return text

    return parse


CONFIG_SCHEMA: dict[str, dict[str, Callable[[str], object]]] = {
    "spectrum": {
        "kd": _float_list,
        "gamma0": _float,
        "gamma_nr": _float_list,
        "sr": _choice("off", "on", "both"),
        "single_dot": _bool,
        "gamma_prime": _float,
        "delta_min": _float,
        "delta_max": _float,
        "n_points": _int,
    },
    "peaks": {
        "kd_min": _float,
        "kd_max": _float,
        "n_kd": _int,
        "gamma0": _float,
        "gamma_nr": _float,
        "bracket_lo": _float,
        "bracket_hi": _float,
    },
    "concurrence-map": {
        "kd_min": _float,
        "kd_max": _float,
        "n_kd": _int,
        "delta_min": _float,
        "delta_max": _float,
        "n_delta": _int,
        "gamma0": _float,
        "gamma_nr": _float,
    },
    "phase": {
        "gamma_prime": _float_list,
        "delta_min": _float,
        "delta_max": _float,
        "n_points": _int,
        "kd_policy": _choice("even", "odd"),
    },
    "oracle-verify": {
        "mode": _choice("full", "coarse", "quick"),
        "tolerance": _float,
        "sigma_k": _float,
    },
    "storage": {
        "pulse_ratio": _float_list,
        "parity": _choice("even", "odd"),
        "sigma_t": _float,
    },
}


def load_config(path: str | Path) -> dict[str, dict[str, object]]:
    """Parse an INI config file against the schema.

    Returns {section: {key: parsed value}}. Raises ConfigError for a
    missing file, unknown section, unknown key, or malformed value.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(
        default_section="\x00disabled\x00", interpolation=None
    )
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    result: dict[str, dict[str, object]] = {}
    for section in parser.sections():
        if section not in CONFIG_SCHEMA:
            raise ConfigError(
                f"unknown config section [{section}] (known: "
                f"{', '.join(sorted(CONFIG_SCHEMA))})"
            )
        schema = CONFIG_SCHEMA[section]
        parsed: dict[str, object] = {}
        for key, raw in parser.items(section):
            if key not in schema:
                raise ConfigError(
                    f"unknown key {key!r} in [{section}] (known: "
                    f"{', '.join(sorted(schema))})"
                )
            try:
                parsed[key] = schema[key](raw)
            except ConfigError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from exc
        result[section] = parsed
    return result
