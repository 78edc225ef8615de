"""Experiment configuration, validation, hashing, and run manifests.

Configurations live in JSON files with the flat field names of
:class:`ExperimentConfig`; command-line flags override file values.  All
defaults are the reference parameter set used throughout the bundled
experiments (M=256, L=60, dt=0.001, snapshot step 0.5, 20000 training
snapshots, threshold 1e-2, error tolerance 0.1, J=8).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass, field

from .errors import FormatError, ValidationError

ENV_OUTPUT_DIR = "GKSROM_OUTPUT_DIR"


@dataclass
class ExperimentConfig:
    # equation
    gamma: float = 0.0
    length: float = 60.0
    num_points: int = 256
    # solver
    dt: float = 0.001
    dt_snap: float = 0.5
    total_time: float = 100.0
    # training plan
    strategy: str = "single"
    gammas: tuple[float, ...] | None = None
    training_set: str | None = None
    num_trajectories: int = 1
    total_snapshots: int = 20000
    ic_modes: int = 8
    base_seed: int = 0
    # reduced model
    pod_threshold: float = 1e-2
    rank_criterion: str = "amplitude"
    use_deim: bool = True
    deim_dim: int | None = None
    # metrics / studies
    error_tol: float = 0.1
    study_modes: tuple[int, ...] = (3, 8, 22)
    num_ics: int = 3
    study_gammas: tuple[float, ...] = (0.0, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0)
    study_roms: tuple[str, ...] = ("rom1", "rom2", "rom3")
    # io
    ic_name: str | None = None
    ic_seed: int | None = None
    output_dir: str | None = None


_TUPLE_FIELDS = {
    "gammas": float,
    "study_modes": int,
    "study_gammas": float,
    "study_roms": str,
}
_OPTIONAL_FIELDS = {"gammas", "training_set", "deim_dim", "ic_name", "ic_seed",
                    "output_dir"}


def _coerce(name: str, value, target_type):
    try:
        if target_type is float:
            coerced = float(value)
            if isinstance(value, bool) or not math.isfinite(coerced):
                raise ValueError
            return coerced
        if target_type is int:
            if isinstance(value, bool) or int(value) != value:
                raise ValueError
            return int(value)
        if target_type is bool:
            if not isinstance(value, bool):
                raise ValueError
            return value
        if target_type is str:
            if not isinstance(value, str):
                raise ValueError
            return value
    except (TypeError, ValueError):
        pass
    raise ValidationError(
        f"config.{name}: expected {target_type.__name__}, got {value!r}")


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build and validate a config, reporting errors with their field path."""
    if not isinstance(raw, dict):
        raise ValidationError("config: expected a JSON object")
    fields = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    values = {}
    for name, value in raw.items():
        if name not in fields:
            raise ValidationError(f"config.{name}: unknown field")
        if value is None:
            if name in _OPTIONAL_FIELDS:
                values[name] = None
                continue
            raise ValidationError(f"config.{name}: null is not allowed")
        if name in _TUPLE_FIELDS:
            if not isinstance(value, (list, tuple)):
                raise ValidationError(f"config.{name}: expected a list")
            element = _TUPLE_FIELDS[name]
            values[name] = tuple(
                _coerce(f"{name}[{i}]", item, element) for i, item in enumerate(value))
            continue
        default = getattr(ExperimentConfig, name, None)
        if name in _OPTIONAL_FIELDS:
            target = {"gammas": float, "training_set": str, "deim_dim": int,
                      "ic_name": str, "ic_seed": int, "output_dir": str}[name]
        else:
            target = type(default)
        values[name] = _coerce(name, value, target)
    config = ExperimentConfig(**values)
    validate_config(config)
    return config


def config_to_dict(config: ExperimentConfig) -> dict:
    out = dataclasses.asdict(config)
    for name in _TUPLE_FIELDS:
        if out[name] is not None:
            out[name] = list(out[name])
    return out


def validate_config(config: ExperimentConfig) -> None:
    def fail(name, message):
        raise ValidationError(f"config.{name}: {message}")

    if config.gamma < 0 or not math.isfinite(config.gamma):
        fail("gamma", "must be nonnegative and finite")
    if config.length <= 0:
        fail("length", "must be positive")
    if config.num_points < 5:
        fail("num_points", "must be at least 5")
    if config.dt <= 0:
        fail("dt", "must be positive")
    if config.dt_snap <= 0:
        fail("dt_snap", "must be positive")
    ratio = config.dt_snap / config.dt
    if abs(round(ratio) - ratio) > 1e-12 * ratio or round(ratio) < 1:
        fail("dt_snap", f"must be an integer multiple of dt ({config.dt})")
    if config.total_time < 0:
        fail("total_time", "must be nonnegative")
    if config.strategy not in ("single", "multi-trajectory", "multi-parameter"):
        fail("strategy", f"unknown strategy {config.strategy!r}")
    if config.total_snapshots < 1:
        fail("total_snapshots", "must be >= 1")
    if config.num_trajectories < 1:
        fail("num_trajectories", "must be >= 1")
    if config.ic_modes < 1:
        fail("ic_modes", "must be >= 1")
    if config.base_seed < 0:
        fail("base_seed", "must be nonnegative")
    if config.pod_threshold <= 0:
        fail("pod_threshold", "must be positive")
    if config.rank_criterion not in ("amplitude", "energy"):
        fail("rank_criterion", f"unknown criterion {config.rank_criterion!r}")
    if config.deim_dim is not None and config.deim_dim < 1:
        fail("deim_dim", "must be >= 1")
    if config.error_tol <= 0:
        fail("error_tol", "must be positive")
    if config.num_ics < 1:
        fail("num_ics", "must be >= 1")
    if config.ic_seed is not None and config.ic_seed < 0:
        fail("ic_seed", "must be nonnegative")
    if config.gammas is not None and any(g < 0 for g in config.gammas):
        fail("gammas", "must be nonnegative")


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def config_hash(config: ExperimentConfig) -> str:
    canonical = json.dumps(config_to_dict(config), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def resolve_output_dir(config: ExperimentConfig) -> str:
    """Explicit config value, else the environment default, else the cwd."""
    return config.output_dir or os.environ.get(ENV_OUTPUT_DIR) or "."


# -- run manifests ------------------------------------------------------------

@dataclass
class RunManifest:
    """Everything needed to re-run a command bit-identically: the effective
    config, the seeds it consumed, and digests of what it produced."""

    command: str
    config: dict
    config_hash: str
    seeds: list[int] = field(default_factory=list)
    outputs: list[dict] = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    version: str = ""


def file_digest(path: str | os.PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(manifest: RunManifest, path: str | os.PathLike) -> None:
    from .storage import atomic_write

    payload = json.dumps(dataclasses.asdict(manifest), indent=2,
                         sort_keys=True).encode()
    atomic_write(path, lambda fh: fh.write(payload + b"\n"))


def load_manifest(path: str | os.PathLike) -> RunManifest:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return RunManifest(**raw)
