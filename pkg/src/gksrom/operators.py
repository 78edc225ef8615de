"""Periodic finite-difference operators for the right-hand side u_t = A u + f(u).

The linear part bundles second-order central differences for the second,
third, and fourth derivatives, A = -D2 - gamma*D3 - D4, a circulant matrix.
The nonlinear part discretizes -(u^2/2)_x in conservative flux-difference
form with the three-point product average at cell interfaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ValidationError
from .pde import Grid, GksParams, State

#: Stencil offsets, in node units, shared by the three difference operators.
OFFSETS = (-2, -1, 0, 1, 2)

_D2 = np.array([0.0, 1.0, -2.0, 1.0, 0.0])
_D3 = np.array([-0.5, 1.0, 0.0, -1.0, 0.5])
_D4 = np.array([1.0, -4.0, 6.0, -4.0, 1.0])


def combined_stencil(gamma: float, dx: float) -> np.ndarray:
    """Coefficients of A = -D2 - gamma*D3 - D4 over OFFSETS."""
    return -_D2 / dx**2 - gamma * _D3 / dx**3 - _D4 / dx**4


def gks_symbol(gamma: float, grid: Grid) -> np.ndarray:
    """Eigenvalues of the circulant operator on the rfft modes m = 0..M/2.

    Evaluated in closed form per difference operator (D2, D4 symmetric hence
    real; D3 antisymmetric hence imaginary), which annihilates the zero mode
    exactly and keeps the solver's spectral division free of spurious mean
    drift.
    """
    m = np.arange(grid.num_points // 2 + 1)
    theta = (2.0 * math.pi / grid.num_points) * m
    dx = grid.dx
    d2 = (2.0 * np.cos(theta) - 2.0) / dx**2
    d3 = (np.sin(2.0 * theta) - 2.0 * np.sin(theta)) / dx**3
    d4 = (2.0 * np.cos(2.0 * theta) - 8.0 * np.cos(theta) + 6.0) / dx**4
    return -d2 - d4 - 1j * gamma * d3


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """Circulant discretization of the linear derivatives, A = -D2 - g*D3 - D4.

    ``stencil`` must equal ``combined_stencil(gamma, grid.dx)``; ``apply`` and
    ``symbol`` evaluate the operator from its difference structure, so an
    inconsistent stencil is rejected at construction.
    """

    stencil: np.ndarray
    gamma: float
    grid: Grid

    def __post_init__(self) -> None:
        expected = combined_stencil(self.gamma, self.grid.dx)
        stencil = np.asarray(self.stencil, dtype=float)
        if stencil.shape != (5,) or not np.array_equal(stencil, expected):
            raise ValidationError(
                "stencil is inconsistent with (gamma, grid); "
                "use build_linear_operator")

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Apply A along the last axis with periodic wraparound.

        Each difference is grouped so that constant input cancels exactly in
        floating point (neighbor differences are exactly zero; D4 is written
        as a combination of such differences since its canonical form rounds
        through a non-representable 3u partial sum).
        """
        um2 = np.roll(u, 2, axis=-1)
        um1 = np.roll(u, 1, axis=-1)
        up1 = np.roll(u, -1, axis=-1)
        up2 = np.roll(u, -2, axis=-1)
        dx = self.grid.dx
        d2 = (um1 - 2.0 * u + up1) / dx**2
        d3 = (-0.5 * um2 + um1 - up1 + 0.5 * up2) / dx**3
        d4 = ((um2 - um1) - 3.0 * (um1 - u) + 3.0 * (u - up1) - (up1 - up2)) / dx**4
        return -d2 - self.gamma * d3 - d4

    def first_column(self) -> np.ndarray:
        col = np.zeros(self.grid.num_points)
        for offset, coeff in zip(OFFSETS, self.stencil):
            col[(-offset) % self.grid.num_points] += coeff
        return col

    def dense(self) -> np.ndarray:
        """Full M x M circulant matrix; row i is row 0 rotated right by i."""
        return scipy.linalg.circulant(self.first_column())

    def symbol(self) -> np.ndarray:
        return gks_symbol(self.gamma, self.grid)


def build_linear_operator(params: GksParams) -> LinearOperator:
    """Assemble A(gamma) for the given grid.

    The widest stencil spans five nodes, so grids with fewer than five points
    are rejected rather than special-cased.
    """
    if params.grid.num_points < 5:
        raise ValidationError(
            f"grid must have at least 5 points, got {params.grid.num_points}")
    stencil = combined_stencil(params.gamma, params.grid.dx)
    stencil.setflags(write=False)
    return LinearOperator(stencil=stencil, gamma=params.gamma, grid=params.grid)


def flux_midpoint(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Interface flux between neighboring node values for F(u) = -u^2/2."""
    return -(left * left + left * right + right * right) / 6.0


def flux_divergence(u: np.ndarray, dx: float) -> np.ndarray:
    """Conservative discretization of -(u^2/2)_x along the last axis.

    f_i = (F_{i+1/2} - F_{i-1/2}) / dx with periodic interfaces, so that
    u_t = A u + f(u) carries the transport term of the model equation with
    the correct sign.  The periodic flux differences telescope: the entries
    sum to zero (exactly so for constant input).
    """
    up1 = np.roll(u, -1, axis=-1)
    flux = flux_midpoint(u, up1)  # flux[i] sits between nodes i and i+1
    return (flux - np.roll(flux, 1, axis=-1)) / dx


def nonlinear_term(state: State, grid: Grid) -> np.ndarray:
    """Discrete nonlinear term f(u) evaluated at a state."""
    if state.num_points != grid.num_points:
        raise ValidationError(
            f"state has {state.num_points} points, grid has {grid.num_points}")
    return flux_divergence(state.values, grid.dx)
