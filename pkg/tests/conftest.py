import numpy as np
import pytest

from gksrom import Grid, GksParams, build_linear_operator


@pytest.fixture
def grid():
    return Grid(256, 60.0)


@pytest.fixture
def params(grid):
    return GksParams(0.0, grid)


def dense_imex_step(u, dt, op, f):
    """Independent reference step: dense linear solve of (I - dt*A) x = u + dt*f."""
    m = u.shape[0]
    return np.linalg.solve(np.eye(m) - dt * op.dense(), u + dt * f)
