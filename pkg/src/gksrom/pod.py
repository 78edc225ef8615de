"""POD basis construction: singular spectra, rank selection, truncation."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .snapshots import SnapshotMatrix

#: Criterion names for :class:`RankRule`.
AMPLITUDE = "amplitude"
ENERGY = "energy"

#: Singular values below this fraction of sigma_1 are treated as zero for
#: rank and independence decisions.
ZERO_SIGMA_RTOL = 1e-12


class RankSelectionWarning(UserWarning):
    """No index satisfied the rank criterion; the full spectrum length is used."""


@dataclass(frozen=True)
class RankRule:
    """Truncation rule for the singular spectrum.

    The default "amplitude" criterion uses tail sums of the singular values:
    with S_i = sum_{j >= i} sigma_j and C_i = S_i / S_1, the rank is the
    smallest i with C_i < threshold.  The alternative "energy" criterion uses
    squared singular values instead: the smallest n with
    sum_{j > n} sigma_j^2 <= threshold * sum_j sigma_j^2.
    """

    threshold: float = 1e-2
    criterion: str = AMPLITUDE

    def __post_init__(self) -> None:
        if not (math.isfinite(self.threshold) and self.threshold > 0):
            raise ValidationError(
                f"threshold must be positive and finite, got {self.threshold}")
        if self.criterion not in (AMPLITUDE, ENERGY):
            raise ValidationError(
                f"criterion must be {AMPLITUDE!r} or {ENERGY!r}, got {self.criterion!r}")


@dataclass(frozen=True, eq=False)
class PodBasis:
    """Truncated left singular vectors with the full singular spectrum."""

    vectors: np.ndarray          # (M, rank), orthonormal columns
    singular_values: np.ndarray  # full nonincreasing spectrum
    rank: int
    threshold: float

    def __post_init__(self) -> None:
        vectors = np.asarray(self.vectors, dtype=float)
        if vectors.ndim != 2 or vectors.shape[1] != self.rank:
            raise ValidationError(
                f"vectors must be (M, {self.rank}), got {vectors.shape}")
        gram = vectors.T @ vectors
        if np.abs(gram - np.eye(self.rank)).max() > 1e-12:
            raise NumericalError("basis columns are not orthonormal to 1e-12")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "singular_values",
                           np.asarray(self.singular_values, dtype=float))

    @property
    def num_points(self) -> int:
        return self.vectors.shape[0]


def _orient_columns(vectors: np.ndarray) -> np.ndarray:
    """Fix the sign of each column: its largest-magnitude entry is positive.

    Removes the sign ambiguity of eigensolvers so results are deterministic
    across linear-algebra backends.  Ties resolve to the lowest row index.
    """
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def compute_svd_spectrum(snapshots: SnapshotMatrix | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All min(M, cols) singular values and left singular vectors.

    When there are at least as many columns as rows the spectrum comes from
    the method of snapshots: an eigendecomposition of the M x M Gram matrix
    m m^T, with sigma = sqrt(eigenvalues).  Otherwise a thin dense SVD is
    used.  Columns are sign-oriented (see :func:`_orient_columns`).
    """
    data = snapshots.data if isinstance(snapshots, SnapshotMatrix) \
        else np.asarray(snapshots, dtype=float)
    if data.ndim != 2 or data.size == 0:
        raise ValidationError(f"snapshot matrix must be non-empty 2D, got {data.shape}")
    num_rows, num_cols = data.shape

    if num_cols >= num_rows:
        gram = data @ data.T
        scale = np.abs(gram).max()
        asym = np.abs(gram - gram.T).max()
        if scale > 0 and asym > 1e-8 * scale:
            raise NumericalError(
                f"Gram matrix is not numerically symmetric (deviation {asym:.3e})")
        gram = 0.5 * (gram + gram.T)
        eigvals, eigvecs = np.linalg.eigh(gram)
        eigvals = eigvals[::-1]
        eigvecs = eigvecs[:, ::-1]
        if eigvals[0] > 0 and eigvals[-1] < -1e-10 * eigvals[0]:
            raise NumericalError(
                f"Gram matrix is not positive semidefinite "
                f"(min eigenvalue {eigvals[-1]:.3e})")
        sigma = np.sqrt(np.clip(eigvals, 0.0, None))
        vectors = eigvecs
    else:
        vectors, sigma, _ = np.linalg.svd(data, full_matrices=False)

    return sigma, np.ascontiguousarray(_orient_columns(vectors))


def cumulative_ratio(singular_values: np.ndarray) -> np.ndarray:
    """C_i = S_i / S_1 with S_i the tail sum of singular values from i on."""
    sigma = np.asarray(singular_values, dtype=float)
    tails = np.cumsum(sigma[::-1])[::-1]
    return tails / tails[0]


def select_rank(singular_values: np.ndarray, rule: RankRule | float = RankRule()) -> int:
    """Reduced dimension from the spectrum, r = min{i : C_i < threshold}.

    If no index satisfies the criterion the full spectrum length is returned
    and a :class:`RankSelectionWarning` is emitted.
    """
    if isinstance(rule, (int, float)):
        rule = RankRule(threshold=float(rule))
    sigma = np.asarray(singular_values, dtype=float)
    if sigma.ndim != 1 or sigma.size == 0:
        raise ValidationError("spectrum must be a non-empty vector")
    if not np.all(np.isfinite(sigma)) or sigma[0] <= 0:
        raise ValidationError("spectrum must be finite with sigma_1 > 0 "
                              "(all-zero spectra are rejected)")
    if np.any(np.diff(sigma) > ZERO_SIGMA_RTOL * sigma[0]):
        raise ValidationError("spectrum must be nonincreasing")

    if rule.criterion == AMPLITUDE:
        ratios = cumulative_ratio(sigma)
        hits = np.nonzero(ratios < rule.threshold)[0]
        if hits.size == 0:
            warnings.warn(
                f"no index reached C_i < {rule.threshold}; using the full "
                f"spectrum length {sigma.size}", RankSelectionWarning)
            return int(sigma.size)
        return int(hits[0]) + 1

    squares = sigma * sigma
    total = squares.sum()
    tail = total - np.cumsum(squares)  # tail[n-1] = sum_{j > n} sigma_j^2
    hits = np.nonzero(tail <= rule.threshold * total)[0]
    return int(hits[0]) + 1


def compute_pod_basis(snapshots: SnapshotMatrix | np.ndarray,
                      rule: RankRule | float = RankRule()) -> PodBasis:
    """Spectrum, rank selection, and truncation in one call."""
    if isinstance(rule, (int, float)):
        rule = RankRule(threshold=float(rule))
    sigma, vectors = compute_svd_spectrum(snapshots)
    rank = select_rank(sigma, rule)
    return PodBasis(vectors=np.ascontiguousarray(vectors[:, :rank]),
                    singular_values=sigma, rank=rank, threshold=rule.threshold)
