"""Experiment configuration: a flat key-value file with sections.

The format is INI (diff friendly, language agnostic):

    [torus]
    dim = 2
    resolution = 64

    [run]
    steps = 200
    seed = 0
    tolerance = 1e-6

    [scenario]
    pair_count = 200
    shear_amplitude = 1.0
    translation = 1.0, 0.0
    iterate_count = 10
    sequence_length = 6
    hamiltonian_amplitude = 0.12
    sample_count = 100

Unknown keys or sections are rejected.  Command-line flags override file
values.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields, replace
from pathlib import Path


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    dim: int = 2
    resolution: int = 64
    steps: int = 200
    seed: int = 0
    tolerance: float | None = None  # override for flow-coupled checks
    experiment: str = "verify"
    pair_count: int = 200
    cocycle_pairs: int = 50
    shear_amplitude: float = 1.0
    translation: tuple[float, float] = (1.0, 0.0)
    hamiltonian_amplitude: float = 0.12
    iterate_count: int = 10
    sequence_length: int = 6
    sample_count: int = 100

    def validate(self) -> "ExperimentConfig":
        if self.dim < 2:
            raise ConfigError(f"dim must be >= 2, got {self.dim}")
        if self.resolution < 8 or self.resolution % 2:
            raise ConfigError(
                f"resolution must be even and >= 8, got {self.resolution}"
            )
        if self.steps < 50:
            raise ConfigError(f"steps must be >= 50, got {self.steps}")
        if self.tolerance is not None and self.tolerance <= 0:
            raise ConfigError("tolerance must be positive")
        for name in ("pair_count", "cocycle_pairs", "iterate_count",
                     "sequence_length", "sample_count"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        return self

    def flow_tol(self, scale: float = 1.0) -> float:
        if self.tolerance is not None:
            return self.tolerance
        return max(1e-8, scale * float(self.resolution) ** -4)


_SECTION_KEYS = {
    "torus": {"dim", "resolution"},
    "run": {"steps", "seed", "tolerance"},
    "scenario": {
        "pair_count", "cocycle_pairs", "shear_amplitude", "translation",
        "hamiltonian_amplitude", "iterate_count", "sequence_length",
        "sample_count", "experiment",
    },
}

_INT_KEYS = {"dim", "resolution", "steps", "seed", "pair_count",
             "cocycle_pairs", "iterate_count", "sequence_length",
             "sample_count"}
_FLOAT_KEYS = {"tolerance", "shear_amplitude", "hamiltonian_amplitude"}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key == "translation":
        parts = [float(p) for p in raw.replace(",", " ").split()]
        if len(parts) != 2:
            raise ConfigError(f"translation needs two components, got {raw!r}")
        return tuple(parts)
    return raw


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate an experiment configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    values: dict = {}
    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SECTION_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            try:
                values[key] = _parse_value(key, raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    return ExperimentConfig(**values).validate()


def apply_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Override config fields with non-None values."""
    known = {f.name for f in fields(ExperimentConfig)}
    clean = {}
    for key, value in overrides.items():
        if key not in known:
            raise ConfigError(f"unknown config field {key!r}")
        if value is not None:
            clean[key] = value
    return replace(config, **clean).validate()
