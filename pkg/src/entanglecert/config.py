"""Run configuration: YAML documents, defaults and validation."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .certify import CertTest
from .errors import ParseError, ValidationError

COMMANDS = ("certify", "sweep", "recover", "tradeoff", "monitor", "tomography")
SEED_ENV = "ENTANGLECERT_SEED"
ALL_TESTS = tuple(t.value for t in CertTest)


@dataclass
class RunConfig:
    command: str = "certify"
    state: str = "ideal"  # ideal | mixed:<gamma> | path to a JSON file of Pauli expectations
    tests: tuple[str, ...] = ALL_TESTS
    pa: float = 0.7
    pb: float = 0.7
    grid: str = "0:1:21"
    points: int | None = None  # overrides the grid count when set
    shots: int = 10_000
    exact: bool = True
    seed: int = 0
    policy: str = "all"
    plan: str = "witness"
    threshold: float = -0.4
    windows: int = 500
    ou_mu: float = 0.3
    ou_theta: float = 0.05
    ou_sigma: float = 0.05
    format: str = "csv"
    out: str | None = field(default=None, metadata={"echo": False})

    def strengths(self) -> list[float]:
        return parse_grid(self.grid, self.points)

    def echo(self) -> dict[str, Any]:
        """Config fields that determine the table, in a YAML-safe form."""
        out = {}
        for f in dataclasses.fields(self):
            if f.metadata.get("echo", True):
                v = getattr(self, f.name)
                out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


FIELD_NAMES = {f.name for f in dataclasses.fields(RunConfig)}


def parse_grid(spec: str, points: int | None = None) -> list[float]:
    """``"start:stop:count"`` -> evenly spaced values; a bare number is a single value."""
    parts = str(spec).split(":")
    try:
        if len(parts) == 1:
            values = [float(parts[0])]
        elif len(parts) == 3:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if points is not None:
                count = points
            if count < 1:
                raise ValidationError("grid", "grid needs at least one point")
            values = [float(v) for v in np.linspace(start, stop, count)]
        else:
            raise ValueError
    except ValueError:
        raise ValidationError("grid", f"grid spec {spec!r} is not 'start:stop:count'") from None
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise ValidationError("grid", f"grid value {v} out of [0,1]")
    return values


def _coerce(name: str, value: Any, default: Any) -> Any:
    if name == "tests":
        items = value.split(",") if isinstance(value, str) else list(value)
        return tuple(str(t).strip() for t in items if str(t).strip())
    if name in ("points", "out") and value is None:
        return None
    kind = type(default) if default is not None else (int if name == "points" else str)
    if kind is bool:
        if not isinstance(value, bool):
            raise ValidationError(name, f"{name} must be true or false")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ValidationError(name, f"{name} must be an integer")
        try:
            as_float = float(value)
        except ValueError:
            raise ValidationError(name, f"{name} must be an integer, got {value!r}") from None
        if as_float != int(as_float):
            raise ValidationError(name, f"{name} must be an integer, got {value!r}")
        return int(as_float)
    if kind is float:
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ValidationError(name, f"{name} must be a number, got {value!r}") from None
    return str(value)


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.command not in COMMANDS:
        raise ValidationError("command", f"unknown command {cfg.command!r}; expected one of {', '.join(COMMANDS)}")
    for name, label in (("pa", "p_A"), ("pb", "p_B")):
        if not 0.0 <= getattr(cfg, name) <= 1.0:
            raise ValidationError(name, f"{label} out of [0,1]")
    if not cfg.tests:
        raise ValidationError("tests", "at least one test is required")
    for t in cfg.tests:
        if t not in ALL_TESTS:
            raise ValidationError("tests", f"unknown test {t!r}; expected one of {', '.join(ALL_TESTS)}")
    if cfg.shots <= 0:
        raise ValidationError("shots", "shots must be positive")
    if cfg.points is not None and cfg.points < 1:
        raise ValidationError("points", "points must be positive")
    if cfg.policy not in ("all", "plus"):
        raise ValidationError("policy", "policy must be 'all' or 'plus'")
    if cfg.plan not in ("witness", "steering", "chsh"):
        raise ValidationError("plan", "plan must be 'witness', 'steering' or 'chsh'")
    if not cfg.threshold < 0:
        raise ValidationError("threshold", "threshold must be negative")
    if cfg.windows <= 0:
        raise ValidationError("windows", "windows must be positive")
    if not 0.0 <= cfg.ou_mu <= 1.0:
        raise ValidationError("ou_mu", "ou_mu out of [0,1]")
    if cfg.ou_theta < 0 or cfg.ou_sigma < 0:
        raise ValidationError("ou_theta" if cfg.ou_theta < 0 else "ou_sigma", "OU rates must be non-negative")
    if cfg.format not in ("csv", "jsonl"):
        raise ValidationError("format", "format must be 'csv' or 'jsonl'")
    if cfg.seed < 0:
        raise ValidationError("seed", "seed must be non-negative")
    cfg.strengths()
    return cfg


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValidationError("seed", f"{SEED_ENV}={raw!r} is not an integer") from None


def build_config(values: dict[str, Any]) -> RunConfig:
    """RunConfig from a flat mapping; missing keys take their defaults."""
    unknown = sorted(set(values) - FIELD_NAMES)
    if unknown:
        raise ValidationError(unknown[0], f"unknown configuration key {unknown[0]!r}")
    base = RunConfig(seed=default_seed())
    kwargs = {}
    for f in dataclasses.fields(RunConfig):
        if f.name in values:
            kwargs[f.name] = _coerce(f.name, values[f.name], getattr(base, f.name))
    return validate(dataclasses.replace(base, **kwargs))


def _load_mapping(text: str) -> dict[str, Any]:
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark is not None else None
        raise ParseError(str(exc.problem or exc), line=line) from None
    except yaml.YAMLError as exc:
        raise ParseError(str(exc)) from None
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ParseError("configuration must be a key-value mapping", line=1)
    for key in doc:
        if not isinstance(key, str):
            raise ParseError(f"configuration keys must be strings, got {key!r}", field=str(key))
    return doc


def parse_config(text: str) -> RunConfig:
    """Parse a YAML key-value document into a validated RunConfig."""
    return build_config(_load_mapping(text))


def config_values_from_file(path: str | Path) -> dict[str, Any]:
    """Raw config values from a YAML file or from the metadata of an emitted table."""
    path = Path(path)
    text = path.read_text()
    first = text.lstrip()[:1]
    if first == "#":
        meta_lines = [ln[2:] if ln.startswith("# ") else ln[1:] for ln in text.splitlines() if ln.startswith("#")]
        meta = _load_mapping("\n".join(meta_lines))
        return dict(meta.get("config", {}))
    if first == "{":
        import json

        try:
            meta = json.loads(text.splitlines()[0])
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=1) from None
        return dict(meta.get("metadata", {}).get("config", {}))
    return _load_mapping(text)
