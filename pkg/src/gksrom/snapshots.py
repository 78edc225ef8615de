"""Snapshot campaigns implementing the training strategies.

A campaign turns a :class:`TrainingPlan` into aligned matrices of solution
snapshots and nonlinear-term snapshots, each column tagged with its
(gamma, trajectory, time) provenance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IntegrationFailureError, ValidationError
from .initial import evaluate_initial_condition, sample_initial_condition
from .integrate import integrate_batch
from .operators import flux_divergence
from .pde import GksParams

SINGLE = "single"
MULTI_TRAJECTORY = "multi-trajectory"
MULTI_PARAMETER = "multi-parameter"
STRATEGIES = (SINGLE, MULTI_TRAJECTORY, MULTI_PARAMETER)


def derive_seed(*keys: int) -> int:
    """Deterministic 32-bit seed from a tuple of nonnegative integer keys."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


@dataclass(frozen=True)
class TrainingPlan:
    """Which trajectories to run and how to sample snapshots from them.

    Strategies: ``single`` (one gamma, one trajectory), ``multi-trajectory``
    (one gamma, W trajectories from fresh initial conditions), and
    ``multi-parameter`` (K gammas, one trajectory each).  All strategies
    collect exactly ``total_snapshots`` columns; per-trajectory length is
    total_snapshots / (K * W).
    """

    strategy: str
    gammas: tuple[float, ...]
    num_trajectories: int = 1
    total_snapshots: int = 20000
    dt_snap: float = 0.5
    dt: float = 0.001
    ic_modes: int = 8
    base_seed: int = 0

    def __post_init__(self) -> None:
        gammas = tuple(float(g) for g in self.gammas)
        object.__setattr__(self, "gammas", gammas)
        if self.strategy not in STRATEGIES:
            raise ValidationError(
                f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if len(gammas) == 0 or not all(np.isfinite(gammas)):
            raise ValidationError("gammas must be a non-empty tuple of finite values")
        if any(g < 0 for g in gammas):
            raise ValidationError("gammas must be nonnegative")
        if self.total_snapshots < 1:
            raise ValidationError("total_snapshots must be >= 1")
        if self.num_trajectories < 1:
            raise ValidationError("num_trajectories must be >= 1")
        if self.ic_modes < 1:
            raise ValidationError("ic_modes must be >= 1")
        if self.base_seed < 0:
            raise ValidationError("base_seed must be nonnegative")
        if self.strategy in (SINGLE, MULTI_PARAMETER) and self.num_trajectories != 1:
            raise ValidationError(
                f"{self.strategy} plans use exactly one trajectory per gamma")
        if self.strategy in (SINGLE, MULTI_TRAJECTORY) and len(gammas) != 1:
            raise ValidationError(f"{self.strategy} plans take exactly one gamma")
        group = len(gammas) * self.num_trajectories
        if self.total_snapshots % group != 0:
            raise ValidationError(
                f"total_snapshots ({self.total_snapshots}) must be divisible by "
                f"K * W = {group}")

    @classmethod
    def single(cls, gamma: float = 0.0, **kwargs) -> "TrainingPlan":
        return cls(SINGLE, (gamma,), **kwargs)

    @classmethod
    def multi_trajectory(cls, gamma: float, num_trajectories: int, **kwargs) -> "TrainingPlan":
        return cls(MULTI_TRAJECTORY, (gamma,), num_trajectories=num_trajectories, **kwargs)

    @classmethod
    def multi_parameter(cls, gammas, **kwargs) -> "TrainingPlan":
        return cls(MULTI_PARAMETER, tuple(gammas), **kwargs)

    @property
    def num_parameters(self) -> int:
        return len(self.gammas)

    @property
    def snapshots_per_trajectory(self) -> int:
        return self.total_snapshots // (self.num_parameters * self.num_trajectories)

    @property
    def trajectory_time(self) -> float:
        return self.snapshots_per_trajectory * self.dt_snap

    def trajectory_specs(self) -> list[tuple[int, int, float, int]]:
        """All (parameter index, trajectory index, gamma, ic seed) tuples,
        in the fixed (k, w) lexicographic campaign order."""
        specs = []
        for k, gamma in enumerate(self.gammas):
            for w in range(self.num_trajectories):
                specs.append((k, w, gamma, derive_seed(self.base_seed, k, w)))
        return specs


@dataclass(eq=False)
class SnapshotMatrix:
    """Snapshot columns with per-column provenance.

    ``kind`` is "u" for solution snapshots or "f" for nonlinear-term
    snapshots; ``data`` is M x cols with one snapshot per column.
    """

    kind: str
    data: np.ndarray
    col_gamma: np.ndarray
    col_trajectory: np.ndarray
    col_time: np.ndarray

    def __post_init__(self) -> None:
        if self.kind not in ("u", "f"):
            raise ValidationError(f"kind must be 'u' or 'f', got {self.kind!r}")
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2:
            raise ValidationError(f"data must be 2D, got shape {self.data.shape}")
        cols = self.data.shape[1]
        self.col_gamma = np.asarray(self.col_gamma, dtype=float)
        self.col_trajectory = np.asarray(self.col_trajectory, dtype=np.uint32)
        self.col_time = np.asarray(self.col_time, dtype=float)
        for name, arr in (("col_gamma", self.col_gamma),
                          ("col_trajectory", self.col_trajectory),
                          ("col_time", self.col_time)):
            if arr.shape != (cols,):
                raise ValidationError(
                    f"{name} must have one entry per column ({cols}), got {arr.shape}")
        for traj in np.unique(self.col_trajectory):
            times = self.col_time[self.col_trajectory == traj]
            if np.any(np.diff(times) <= 0):
                raise ValidationError(
                    f"times within trajectory {traj} must be strictly increasing")

    @property
    def num_points(self) -> int:
        return self.data.shape[0]

    @property
    def num_columns(self) -> int:
        return self.data.shape[1]


def builtin_training_sets() -> dict[str, tuple[float, ...]]:
    """The four bundled multi-parameter training sets."""
    return {
        "G1": (3.0, 4.0, 5.0, 7.0, 10.0),
        "G2": (0.0, 4.0, 5.0, 7.0, 10.0),
        "G3": (0.0, 0.3, 1.0, 5.0, 10.0),
        "G4": (0.0, 0.2, 0.5, 0.7, 0.9),
    }


def training_set(name: str) -> tuple[float, ...]:
    sets = builtin_training_sets()
    if name not in sets:
        raise ValidationError(
            f"unknown training set {name!r}; expected one of {sorted(sets)}")
    return sets[name]


def _to_columns(states: np.ndarray) -> np.ndarray:
    """(num_records, B, M) -> (M, B * num_records), trajectory-major columns."""
    num_records, num_rows, m = states.shape
    return states.transpose(2, 1, 0).reshape(m, num_rows * num_records)


def run_campaign(plan: TrainingPlan,
                 params_template: GksParams) -> tuple[SnapshotMatrix, SnapshotMatrix]:
    """Run every trajectory of the plan and assemble the snapshot matrices.

    Each trajectory starts from a fresh initial condition drawn with a seed
    derived from (base_seed, parameter index, trajectory index).  The f-matrix
    column j is the nonlinear term evaluated at the u-matrix column j, exactly.
    The gamma on ``params_template`` is ignored; the plan's gammas rule.
    """
    grid = params_template.grid
    specs = plan.trajectory_specs()
    gammas = np.array([gamma for _, _, gamma, _ in specs])
    ics = np.stack([
        evaluate_initial_condition(
            sample_initial_condition(plan.ic_modes, seed), grid).values
        for _, _, _, seed in specs])

    try:
        times, states = integrate_batch(
            ics, gammas, grid, total_time=plan.trajectory_time,
            dt=plan.dt, record_every=plan.dt_snap)
    except IntegrationFailureError as exc:
        rows = exc.rows or []
        detail = ", ".join(
            f"(gamma={specs[r][2]}, trajectory={r}, time={exc.time})" for r in rows)
        raise IntegrationFailureError(
            f"campaign trajectory failed: {detail}",
            time=exc.time, rows=exc.rows) from exc

    f_states = flux_divergence(states, grid.dx)
    num_per_traj = plan.snapshots_per_trajectory
    col_gamma = np.repeat(gammas, num_per_traj)
    col_trajectory = np.repeat(np.arange(len(specs), dtype=np.uint32), num_per_traj)
    col_time = np.tile(times, len(specs))
    u_matrix = SnapshotMatrix("u", _to_columns(states),
                              col_gamma, col_trajectory, col_time)
    f_matrix = SnapshotMatrix("f", _to_columns(f_states),
                              col_gamma, col_trajectory, col_time)
    return u_matrix, f_matrix
