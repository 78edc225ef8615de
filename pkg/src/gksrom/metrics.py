"""ROM quality assessment: error series, prediction time, power spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ClockMismatchError, ValidationError
from .integrate import Trajectory

#: Relative L2 threshold defining the prediction horizon.
DEFAULT_ERROR_TOL = 0.1

_CLOCK_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class ErrorSeries:
    """Pointwise relative L2 distance between two trajectories over time."""

    times: np.ndarray
    rel_l2: np.ndarray


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    """Time-averaged energy per wavenumber, E_k = mean_t |u_hat_k(t)|^2.

    The DFT is normalized as u_hat_k = (1/M) sum_i u_i exp(-2 pi i k i / M),
    reported for k = 0..M/2.
    """

    wavenumbers: np.ndarray
    energy: np.ndarray
    averaging_window: tuple[float, float]


def relative_error_series(rom: Trajectory, fom: Trajectory) -> ErrorSeries:
    """||u_rom - u_fom||_2 / ||u_fom||_2 at each shared recording instant.

    The grid quadrature weight cancels in the ratio.  Both trajectories must
    share the recording clock and the grid size.
    """
    if rom.states.shape[1] != fom.states.shape[1]:
        raise ValidationError(
            f"trajectories live on different grids "
            f"({rom.states.shape[1]} vs {fom.states.shape[1]} points)")
    if rom.num_snapshots != fom.num_snapshots or \
            not np.allclose(rom.times, fom.times, rtol=0.0, atol=_CLOCK_ATOL):
        raise ClockMismatchError("trajectories were recorded on different clocks")
    diff = np.linalg.norm(rom.states - fom.states, axis=1)
    ref = np.linalg.norm(fom.states, axis=1)
    rel = np.zeros_like(diff)
    nonzero = ref > 0
    rel[nonzero] = diff[nonzero] / ref[nonzero]
    rel[~nonzero & (diff > 0)] = np.inf
    return ErrorSeries(times=fom.times.copy(), rel_l2=rel)


def prediction_time_flagged(err: ErrorSeries,
                            tol: float = DEFAULT_ERROR_TOL) -> tuple[float, bool]:
    """Prediction horizon plus a survived flag.

    The horizon is the largest recorded time up to which the *running
    supremum* of the relative error stays <= tol; a later dip below tol does
    not recover the horizon.  Returns (0, False) when the first sample
    already exceeds tol and (final time, True) when the tolerance never
    trips.
    """
    if err.times.size == 0:
        raise ValidationError("error series is empty")
    if not (math.isfinite(tol) and tol > 0):
        raise ValidationError(f"tol must be positive, got {tol}")
    running_sup = np.maximum.accumulate(err.rel_l2)
    within = int(np.count_nonzero(running_sup <= tol))
    if within == 0:
        return 0.0, False
    return float(err.times[within - 1]), within == err.times.size


def prediction_time(err: ErrorSeries, tol: float = DEFAULT_ERROR_TOL) -> float:
    return prediction_time_flagged(err, tol)[0]


def averaged_prediction_time(run_pair: Callable[..., tuple[Trajectory, Trajectory]],
                             gamma: float, ic_modes: int, num_ics: int = 3,
                             seeds: Sequence[int] | None = None,
                             tol: float = DEFAULT_ERROR_TOL) -> float:
    """Mean prediction time over several fresh initial conditions.

    ``run_pair(gamma=..., ic_modes=..., seed=...)`` must return the (rom, fom)
    trajectory pair for one initial condition.
    """
    if num_ics < 1:
        raise ValidationError(f"num_ics must be >= 1, got {num_ics}")
    if seeds is None:
        seeds = range(num_ics)
    else:
        seeds = list(seeds)[:num_ics]
        if len(seeds) < num_ics:
            raise ValidationError("fewer seeds than num_ics")
    horizons = []
    for seed in seeds:
        rom, fom = run_pair(gamma=gamma, ic_modes=ic_modes, seed=seed)
        horizons.append(prediction_time(relative_error_series(rom, fom), tol))
    return float(np.mean(horizons))


def power_spectrum(traj: Trajectory, window: tuple[float, float]) -> PowerSpectrum:
    """Snapshot-averaged DFT energy over a time window.

    Snapshots with t_start <= t <= t_end enter the average with equal weight
    (they are equispaced); at least two are required.
    """
    t_start, t_end = float(window[0]), float(window[1])
    if not (t_start <= t_end):
        raise ValidationError(f"empty window ({t_start}, {t_end})")
    mask = (traj.times >= t_start - _CLOCK_ATOL) & (traj.times <= t_end + _CLOCK_ATOL)
    if np.count_nonzero(mask) < 2:
        raise ValidationError(
            f"window ({t_start}, {t_end}) contains fewer than 2 snapshots")
    m = traj.states.shape[1]
    coeffs = np.fft.rfft(traj.states[mask], axis=1) / m
    energy = np.mean(np.abs(coeffs) ** 2, axis=0)
    return PowerSpectrum(wavenumbers=np.arange(m // 2 + 1),
                         energy=energy, averaging_window=(t_start, t_end))
