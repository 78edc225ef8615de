"""Problem setup: periodic grid, equation parameters, solution states.

The model is the 1D generalized Kuramoto-Sivashinsky equation

    u_t + (u^2/2)_x + u_xx + gamma * u_xxx + u_xxxx = 0

on [0, L] with periodic boundary conditions; gamma = 0 is the classical KS
equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, L): M nodes at x_i = i * L / M."""

    num_points: int
    length: float

    def __post_init__(self) -> None:
        if int(self.num_points) != self.num_points or self.num_points < 1:
            raise ValidationError(
                f"num_points must be a positive integer, got {self.num_points}")
        if not (math.isfinite(self.length) and self.length > 0):
            raise ValidationError(
                f"length must be positive and finite, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.num_points

    def nodes(self) -> np.ndarray:
        return np.arange(self.num_points) * self.dx


@dataclass(frozen=True)
class GksParams:
    """Dispersion coefficient gamma and the spatial grid."""

    gamma: float
    grid: Grid

    def __post_init__(self) -> None:
        if not math.isfinite(self.gamma):
            raise ValidationError(f"gamma must be finite, got {self.gamma}")
        if self.gamma < 0:
            raise ValidationError(f"gamma must be nonnegative, got {self.gamma}")


@dataclass(frozen=True, eq=False)
class State:
    """Grid-sampled solution u at a single time instant.

    Entries must be finite; a NaN/Inf anywhere is treated as a hard
    integration failure upstream, never stored.
    """

    values: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValidationError(f"state must be a 1D vector, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("state contains non-finite entries")
        if not (math.isfinite(self.time) and self.time >= 0):
            raise ValidationError(f"time must be nonnegative and finite, got {self.time}")
        object.__setattr__(self, "values", values)

    @property
    def num_points(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class StabilityInfo:
    """Linear stability summary of the flat state on a given domain."""

    num_unstable: int
    most_unstable: float


def stability_info(params: GksParams) -> StabilityInfo:
    """Count the linearly unstable Fourier modes and locate the fastest one.

    The growth rate of wavenumber q = 2*pi*k/L is q^2 - q^4, so modes with
    0 < q < 1 are unstable: floor(L / 2 pi) of them, with the peak at
    q = 1/sqrt(2), i.e. mode index L / (2 sqrt(2) pi).
    """
    length = params.grid.length
    num_unstable = int(math.floor(length / TWO_PI))
    most_unstable = length / (2.0 * math.sqrt(2.0) * math.pi)
    return StabilityInfo(num_unstable=num_unstable, most_unstable=most_unstable)
