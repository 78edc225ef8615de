"""Cosine-series initial conditions and their sampling distribution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .pde import TWO_PI, Grid, State


@dataclass(frozen=True)
class InitialConditionSpec:
    """Coefficients of u(x, 0) = sum_j A_j cos(2 pi j x / L + phi_j), j = 1..J.

    ``seed`` records the generator seed when the spec was drawn randomly;
    explicitly supplied coefficient lists leave it None.
    """

    amplitudes: tuple[float, ...]
    phases: tuple[float, ...]
    seed: int | None = None

    def __post_init__(self) -> None:
        amplitudes = tuple(float(a) for a in self.amplitudes)
        phases = tuple(float(p) for p in self.phases)
        if len(amplitudes) == 0 or len(amplitudes) != len(phases):
            raise ValidationError(
                "amplitudes and phases must be equal-length, non-empty sequences")
        if not all(np.isfinite(amplitudes)) or not all(np.isfinite(phases)):
            raise ValidationError("initial-condition coefficients must be finite")
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "phases", phases)

    @property
    def num_modes(self) -> int:
        return len(self.amplitudes)


def sample_initial_condition(num_modes: int,
                             rng: int | np.random.Generator) -> InitialConditionSpec:
    """Draw a random spec: A_j ~ 0.1 * Unif[-1, 1], phi_j ~ Unif[0, 2 pi).

    ``rng`` may be an integer seed (recorded on the spec) or an existing
    generator (seed left unrecorded).  The same seed always reproduces the
    same spec.
    """
    if num_modes < 1:
        raise ValidationError(f"num_modes must be >= 1, got {num_modes}")
    if isinstance(rng, (int, np.integer)):
        seed: int | None = int(rng)
        generator = np.random.default_rng(seed)
    else:
        seed = None
        generator = rng
    amplitudes = 0.1 * generator.uniform(-1.0, 1.0, num_modes)
    phases = generator.uniform(0.0, TWO_PI, num_modes)
    return InitialConditionSpec(amplitudes=tuple(amplitudes),
                                phases=tuple(phases), seed=seed)


def evaluate_initial_condition(spec: InitialConditionSpec, grid: Grid) -> State:
    """Sample the cosine series on the grid nodes at time zero."""
    x = grid.nodes()
    j = np.arange(1, spec.num_modes + 1, dtype=float)
    phases = np.asarray(spec.phases)
    arg = (TWO_PI / grid.length) * np.outer(j, x) + phases[:, None]
    u = np.asarray(spec.amplitudes) @ np.cos(arg)
    return State(values=u, time=0.0)


#: Fixed initial conditions used by the bundled experiment recipes.  "ic1" and
#: "ic2" drive the transitional / quasi-periodic comparisons; "ic3" is the
#: chaotic-regime demonstration start.  All use J = 8 modes.
BUILTIN_INITIAL_CONDITIONS: dict[str, InitialConditionSpec] = {
    "ic1": InitialConditionSpec(
        amplitudes=(0.001593, -0.084911, 0.056365, 0.054644,
                    -0.018904, 0.062566, 0.017180, -0.021826),
        phases=(3.5963, 2.1939, 4.1857, 5.4722, 5.5467, 4.5229, 1.2151, 0.16661),
    ),
    "ic2": InitialConditionSpec(
        amplitudes=(-0.015013, 0.07649, 0.01891, 0.085255,
                    0.05531, 0.024718, 0.065647, 0.096781),
        phases=(3.3396, 3.6174, 1.7775, 5.3945, 2.7183, 0.1965, 5.1264, 4.5449),
    ),
    "ic3": InitialConditionSpec(
        amplitudes=(0.030233, 0.035171, -0.073354, -0.096221,
                    -0.019993, 0.053954, -0.067118, -0.045122),
        phases=(6.08, 3.0139, 6.2266, 3.1967, 4.983, 3.0123, 3.6808, 2.2941),
    ),
}


def builtin_initial_condition(name: str) -> InitialConditionSpec:
    if name not in BUILTIN_INITIAL_CONDITIONS:
        raise ValidationError(
            f"unknown initial condition {name!r}; "
            f"expected one of {sorted(BUILTIN_INITIAL_CONDITIONS)}")
    return BUILTIN_INITIAL_CONDITIONS[name]
