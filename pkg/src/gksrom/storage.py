"""Binary artifact formats and CSV emission.

All binary formats are little-endian with fixed magics:

* trajectory  ``GKSTRAJ1``: M u32, snapshot count u32, dt_snap f64, gamma f64,
  L f64, initial-condition block (J u32, J amplitudes f64, J phases f64; J=0
  when unknown), then the snapshots as consecutive length-M f64 vectors.
* snapshots   ``GKSSNAP1``: kind u8 (0 = u, 1 = f), M u32, cols u64, a
  per-column metadata block (gamma f64, trajectory u32, time f64), then the
  M x cols payload column-major f64.
* basis       ``GKSBAS1``: M u32, r u32, n u32 (0 = no DEIM block),
  spectrum length u32, threshold f64, the full singular spectrum f64, the
  M x r basis column-major f64, and when n > 0 the DEIM block (indices u32,
  M x n interpolation basis column-major f64, the n x n sampled system
  column-major f64, refactored on load).

Writes go through a temporary file in the destination directory followed by
an atomic rename.
"""

from __future__ import annotations

import csv
import os
import struct
import tempfile
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg

from .deim import DeimOperator
from .errors import FormatError, ValidationError
from .initial import InitialConditionSpec
from .integrate import Trajectory
from .pde import Grid
from .pod import PodBasis
from .snapshots import SnapshotMatrix

MAGIC_TRAJECTORY = b"GKSTRAJ1"
MAGIC_SNAPSHOTS = b"GKSSNAP1"
MAGIC_BASIS = b"GKSBAS1"

_KIND_CODES = {"u": 0, "f": 1}
_KIND_NAMES = {code: kind for kind, code in _KIND_CODES.items()}

_COLUMN_META_DTYPE = np.dtype([("gamma", "<f8"), ("trajectory", "<u4"), ("time", "<f8")])


def atomic_write(path: str | os.PathLike, writer: Callable) -> None:
    """Write via a sibling temp file and rename into place."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-",
                                    suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            writer(fh)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _read_exact(fh, count: int, what: str) -> bytes:
    buf = fh.read(count)
    if len(buf) != count:
        raise FormatError(f"truncated file while reading {what}")
    return buf


def _expect_magic(fh, magic: bytes) -> None:
    found = _read_exact(fh, len(magic), "magic")
    if found != magic:
        raise FormatError(f"bad magic {found!r}; expected {magic!r}")


def _expect_eof(fh) -> None:
    if fh.read(1):
        raise FormatError("trailing bytes after payload")


def _as_le(array: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(array, dtype="<f8")


# -- trajectories -------------------------------------------------------------

def save_trajectory(traj: Trajectory, path: str | os.PathLike) -> None:
    num_snaps = traj.num_snapshots
    expected = traj.dt_snap * np.arange(1, num_snaps + 1)
    if num_snaps and not np.allclose(traj.times, expected, rtol=0.0, atol=1e-9):
        raise ValidationError(
            "trajectory format stores clocks starting at zero; "
            "times must be dt_snap * (1..N)")

    def write(fh):
        fh.write(MAGIC_TRAJECTORY)
        fh.write(struct.pack("<II", traj.states.shape[1], num_snaps))
        fh.write(struct.pack("<ddd", traj.dt_snap, traj.gamma, traj.grid.length))
        if traj.ic is None:
            fh.write(struct.pack("<I", 0))
        else:
            fh.write(struct.pack("<I", traj.ic.num_modes))
            fh.write(_as_le(np.asarray(traj.ic.amplitudes)).tobytes())
            fh.write(_as_le(np.asarray(traj.ic.phases)).tobytes())
        fh.write(_as_le(traj.states).tobytes())

    atomic_write(path, write)


def load_trajectory(path: str | os.PathLike) -> Trajectory:
    with open(path, "rb") as fh:
        _expect_magic(fh, MAGIC_TRAJECTORY)
        num_points, num_snaps = struct.unpack("<II", _read_exact(fh, 8, "dimensions"))
        dt_snap, gamma, length = struct.unpack("<ddd", _read_exact(fh, 24, "parameters"))
        (num_modes,) = struct.unpack("<I", _read_exact(fh, 4, "ic header"))
        ic = None
        if num_modes:
            amps = np.frombuffer(
                _read_exact(fh, 8 * num_modes, "ic amplitudes"), dtype="<f8")
            phases = np.frombuffer(
                _read_exact(fh, 8 * num_modes, "ic phases"), dtype="<f8")
            ic = InitialConditionSpec(amplitudes=tuple(amps), phases=tuple(phases))
        payload = _read_exact(fh, 8 * num_points * num_snaps, "snapshot payload")
        _expect_eof(fh)
    states = np.frombuffer(payload, dtype="<f8").reshape(num_snaps, num_points).copy()
    grid = Grid(num_points=num_points, length=length)
    times = dt_snap * np.arange(1, num_snaps + 1)
    return Trajectory(states=states, times=times, gamma=gamma, grid=grid,
                      dt=float("nan"), dt_snap=dt_snap, ic=ic)


# -- snapshot matrices --------------------------------------------------------

def save_snapshots(matrix: SnapshotMatrix, path: str | os.PathLike) -> None:
    meta = np.empty(matrix.num_columns, dtype=_COLUMN_META_DTYPE)
    meta["gamma"] = matrix.col_gamma
    meta["trajectory"] = matrix.col_trajectory
    meta["time"] = matrix.col_time

    def write(fh):
        fh.write(MAGIC_SNAPSHOTS)
        fh.write(struct.pack("<BIQ", _KIND_CODES[matrix.kind],
                             matrix.num_points, matrix.num_columns))
        fh.write(meta.tobytes())
        fh.write(np.asarray(matrix.data, dtype="<f8").ravel(order="F").tobytes())

    atomic_write(path, write)


def load_snapshots(path: str | os.PathLike) -> SnapshotMatrix:
    with open(path, "rb") as fh:
        _expect_magic(fh, MAGIC_SNAPSHOTS)
        kind_code, num_points, num_cols = struct.unpack(
            "<BIQ", _read_exact(fh, 13, "header"))
        if kind_code not in _KIND_NAMES:
            raise FormatError(f"unknown snapshot kind code {kind_code}")
        meta = np.frombuffer(
            _read_exact(fh, _COLUMN_META_DTYPE.itemsize * num_cols, "column metadata"),
            dtype=_COLUMN_META_DTYPE)
        payload = _read_exact(fh, 8 * num_points * num_cols, "snapshot payload")
        _expect_eof(fh)
    data = np.frombuffer(payload, dtype="<f8").reshape(
        (num_points, num_cols), order="F").copy()
    return SnapshotMatrix(kind=_KIND_NAMES[kind_code], data=data,
                          col_gamma=meta["gamma"].copy(),
                          col_trajectory=meta["trajectory"].copy(),
                          col_time=meta["time"].copy())


# -- bases --------------------------------------------------------------------

def save_basis(basis: PodBasis, path: str | os.PathLike,
               deim: DeimOperator | None = None) -> None:
    num_points = basis.num_points
    num_interp = 0 if deim is None else deim.num_points

    def write(fh):
        fh.write(MAGIC_BASIS)
        fh.write(struct.pack("<IIII", num_points, basis.rank, num_interp,
                             basis.singular_values.size))
        fh.write(struct.pack("<d", basis.threshold))
        fh.write(_as_le(basis.singular_values).tobytes())
        fh.write(_as_le(basis.vectors).ravel(order="F").tobytes())
        if deim is not None:
            fh.write(np.ascontiguousarray(deim.indices, dtype="<u4").tobytes())
            fh.write(_as_le(deim.basis).ravel(order="F").tobytes())
            fh.write(_as_le(deim.basis[deim.indices]).ravel(order="F").tobytes())

    atomic_write(path, write)


def load_basis(path: str | os.PathLike) -> tuple[PodBasis, DeimOperator | None]:
    with open(path, "rb") as fh:
        _expect_magic(fh, MAGIC_BASIS)
        num_points, rank, num_interp, spectrum_len = struct.unpack(
            "<IIII", _read_exact(fh, 16, "header"))
        (threshold,) = struct.unpack("<d", _read_exact(fh, 8, "threshold"))
        sigma = np.frombuffer(
            _read_exact(fh, 8 * spectrum_len, "spectrum"), dtype="<f8").copy()
        vectors = np.frombuffer(
            _read_exact(fh, 8 * num_points * rank, "basis payload"),
            dtype="<f8").reshape((num_points, rank), order="F").copy()
        deim = None
        if num_interp:
            indices = np.frombuffer(
                _read_exact(fh, 4 * num_interp, "interpolation indices"),
                dtype="<u4").astype(np.intp)
            interp_basis = np.frombuffer(
                _read_exact(fh, 8 * num_points * num_interp, "interpolation basis"),
                dtype="<f8").reshape((num_points, num_interp), order="F").copy()
            sampled = np.frombuffer(
                _read_exact(fh, 8 * num_interp * num_interp, "sampled system"),
                dtype="<f8").reshape((num_interp, num_interp), order="F").copy()
            deim = DeimOperator(basis=interp_basis, indices=indices,
                                factor=scipy.linalg.lu_factor(sampled))
        _expect_eof(fh)
    pod = PodBasis(vectors=vectors, singular_values=sigma, rank=rank,
                   threshold=threshold)
    return pod, deim


# -- CSV ----------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{value:.12g}"
    return str(value)


def write_csv(path: str | os.PathLike, fieldnames: Sequence[str],
              rows: Iterable[Sequence], comments: Sequence[str] = ()) -> None:
    """CSV with optional ``#`` comment header lines and 12-significant-digit
    float formatting."""

    def write(fh):
        import io
        text = io.TextIOWrapper(fh, encoding="utf-8", newline="")
        for comment in comments:
            text.write(f"# {comment}\n")
        writer = csv.writer(text)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        text.flush()
        text.detach()

    atomic_write(path, write)


def read_csv_rows(path: str | os.PathLike) -> tuple[list[str], list[str], list[list[str]]]:
    """(comments, header, rows) of a CSV written by :func:`write_csv`."""
    comments: list[str] = []
    rows: list[list[str]] = []
    header: list[str] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line[1:].strip())
                continue
            rest = [line] + list(fh)
            reader = csv.reader(rest)
            parsed = list(reader)
            header = parsed[0]
            rows = parsed[1:]
            break
    return comments, header, rows
