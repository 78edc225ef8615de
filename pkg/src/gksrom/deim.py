"""Greedy interpolation-point selection for nonlinear-term hyper-reduction."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError, ValidationError
from .pod import ZERO_SIGMA_RTOL, compute_svd_spectrum
from .snapshots import SnapshotMatrix

#: Relative cutoff for the interpolation-basis rank.  Spectra from the Gram
#: route resolve singular values only to sqrt(machine eps) * sigma_1; below
#: this floor they are numerical noise and interpolating on them is
#: meaningless (the sampled system's conditioning degrades long before).
INTERP_RANK_RTOL = 1e-7


def deim_indices(basis: np.ndarray) -> np.ndarray:
    """Greedy interpolation indices for an independent-column basis.

    The first index is the largest-magnitude entry of the first column; each
    further index is the largest-magnitude entry of the residual of the next
    column after interpolating it at the indices chosen so far.  Ties break
    to the lowest row index.
    """
    y = np.asarray(basis, dtype=float)
    if y.ndim != 2 or y.shape[1] == 0:
        raise ValidationError(f"basis must be a non-empty 2D matrix, got {y.shape}")
    num_rows, num_cols = y.shape
    if num_cols > num_rows:
        raise ValidationError("basis cannot have more columns than rows")

    indices = np.empty(num_cols, dtype=np.intp)
    indices[0] = np.argmax(np.abs(y[:, 0]))
    if np.abs(y[indices[0], 0]) == 0:
        raise NumericalError("first basis column is identically zero")
    for k in range(1, num_cols):
        sub = y[indices[:k], :k]
        try:
            coef = np.linalg.solve(sub, y[indices[:k], k])
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"interpolation system singular at step {k}; "
                "basis columns are linearly dependent") from exc
        residual = y[:, k] - y[:, :k] @ coef
        pivot = np.argmax(np.abs(residual))
        if np.abs(residual[pivot]) <= ZERO_SIGMA_RTOL * np.linalg.norm(y[:, k]):
            raise NumericalError(
                f"column {k} is numerically dependent on the previous columns")
        indices[k] = pivot
    if np.unique(indices).size != num_cols:
        raise NumericalError("greedy selection produced duplicate indices")
    return indices


@dataclass(eq=False)
class DeimOperator:
    """Interpolation basis, sample indices, and the factored (P^T Y) system."""

    basis: np.ndarray    # (M, n)
    indices: np.ndarray  # (n,), distinct rows of the basis
    factor: tuple        # scipy LU factorization of basis[indices]

    @property
    def num_points(self) -> int:
        return self.indices.shape[0]

    def reconstruct(self, values: np.ndarray) -> np.ndarray:
        """Interpolate a full vector from its entries at the sample indices:
        Y (P^T Y)^{-1} P^T values.  Exact for anything in span(Y)."""
        return self.basis @ scipy.linalg.lu_solve(self.factor, values[..., self.indices].T).T

    def condition_number(self) -> float:
        return float(np.linalg.cond(self.basis[self.indices]))


def deim_from_basis(basis: np.ndarray) -> DeimOperator:
    """Build the operator directly from an independent-column basis."""
    y = np.ascontiguousarray(np.asarray(basis, dtype=float))
    indices = deim_indices(y)
    factor = scipy.linalg.lu_factor(y[indices])
    return DeimOperator(basis=y, indices=indices, factor=factor)


def build_deim_operator(f_snapshots: SnapshotMatrix | np.ndarray,
                        num_points: int) -> DeimOperator:
    """Interpolation operator from nonlinear-term snapshots.

    The basis is the leading left singular vectors of the snapshot matrix.
    ``num_points`` is clamped to the numerical rank of the snapshots, with a
    warning (see :data:`INTERP_RANK_RTOL` for the cutoff).
    """
    if num_points < 1:
        raise ValidationError(f"num_points must be >= 1, got {num_points}")
    sigma, vectors = compute_svd_spectrum(f_snapshots)
    numerical_rank = int(np.count_nonzero(sigma > INTERP_RANK_RTOL * sigma[0]))
    if numerical_rank == 0:
        raise NumericalError("nonlinear-term snapshots are numerically zero")
    if num_points > numerical_rank:
        warnings.warn(
            f"requested {num_points} interpolation points but the snapshots "
            f"have numerical rank {numerical_rank}; clamping", UserWarning)
        num_points = numerical_rank
    return deim_from_basis(vectors[:, :num_points])
