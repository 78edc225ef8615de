"""Prebuilt experiment recipes: named ROM variants and study protocols.

The three named reduced models used throughout the bundled studies:

* ``rom1`` - single trajectory at gamma = 0;
* ``rom2`` - 250 trajectories at gamma = 5;
* ``rom3`` - multi-parameter set G4 = {0, 0.2, 0.5, 0.7, 0.9}.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .deim import DeimOperator, build_deim_operator
from .errors import ValidationError
from .initial import evaluate_initial_condition, sample_initial_condition
from .integrate import Trajectory, simulate
from .metrics import prediction_time_flagged, relative_error_series
from .operators import build_linear_operator
from .pde import GksParams, Grid
from .pod import PodBasis, RankRule, compute_pod_basis, compute_svd_spectrum
from .rom import DEIM, GALERKIN, RomSystem, assemble_rom, integrate_rom
from .snapshots import TrainingPlan, derive_seed, run_campaign, training_set

#: Seed-derivation namespace tag separating evaluation ICs from training ICs.
EVAL_SEED_TAG = 104729


def named_plan(name: str, *, total_snapshots: int = 20000, dt_snap: float = 0.5,
               dt: float = 0.001, ic_modes: int = 8, base_seed: int = 0) -> TrainingPlan:
    common = dict(total_snapshots=total_snapshots, dt_snap=dt_snap, dt=dt,
                  ic_modes=ic_modes, base_seed=base_seed)
    if name == "rom1":
        return TrainingPlan.single(0.0, **common)
    if name == "rom2":
        return TrainingPlan.multi_trajectory(5.0, 250, **common)
    if name == "rom3":
        return TrainingPlan.multi_parameter(training_set("G4"), **common)
    raise ValidationError(f"unknown named plan {name!r}")


def parse_rom_spec(spec: str, **plan_kwargs) -> tuple[str, TrainingPlan]:
    """Parse a ROM variant spec string into (rom_id, plan).

    Recognized forms: ``rom1`` / ``rom2`` / ``rom3``, ``single:<gamma>``,
    ``multi:<gamma>:<W>``, and ``set:<name>`` for the bundled training sets.
    """
    if spec in ("rom1", "rom2", "rom3"):
        return spec, named_plan(spec, **plan_kwargs)
    if match := re.fullmatch(r"single:([0-9.eE+-]+)", spec):
        return spec, TrainingPlan.single(float(match.group(1)), **plan_kwargs)
    if match := re.fullmatch(r"multi:([0-9.eE+-]+):(\d+)", spec):
        return spec, TrainingPlan.multi_trajectory(
            float(match.group(1)), int(match.group(2)), **plan_kwargs)
    if match := re.fullmatch(r"set:(\w+)", spec):
        return spec, TrainingPlan.multi_parameter(
            training_set(match.group(1)), **plan_kwargs)
    raise ValidationError(
        f"cannot parse ROM spec {spec!r}; expected rom1|rom2|rom3, "
        "single:<gamma>, multi:<gamma>:<W>, or set:<name>")


@dataclass(eq=False)
class RomAssets:
    """Offline products of one training plan: basis, DEIM operator, spectra."""

    rom_id: str
    plan: TrainingPlan
    basis: PodBasis
    deim: DeimOperator | None
    sigma_u: np.ndarray
    sigma_f: np.ndarray | None

    @property
    def rank(self) -> int:
        return self.basis.rank


def build_rom_assets(plan: TrainingPlan, grid: Grid,
                     rule: RankRule = RankRule(), *, use_deim: bool = True,
                     deim_dim: int | None = None,
                     rom_id: str = "rom") -> RomAssets:
    """Run the campaign and build all offline operators; snapshots are
    discarded once the basis and interpolation factors exist."""
    template = GksParams(gamma=plan.gammas[0], grid=grid)
    u_matrix, f_matrix = run_campaign(plan, template)
    basis = compute_pod_basis(u_matrix, rule)
    deim = None
    sigma_f = None
    if use_deim:
        sigma_f, _ = compute_svd_spectrum(f_matrix)
        deim = build_deim_operator(f_matrix, deim_dim or basis.rank)
    return RomAssets(rom_id=rom_id, plan=plan, basis=basis, deim=deim,
                     sigma_u=basis.singular_values, sigma_f=sigma_f)


def rom_for_gamma(assets: RomAssets, gamma: float, grid: Grid,
                  mode: str = GALERKIN) -> RomSystem:
    """Assemble the reduced system at an evaluation gamma.

    Only the projected linear operator depends on gamma; the basis and the
    DEIM factors are reused unchanged.
    """
    op = build_linear_operator(GksParams(gamma=gamma, grid=grid))
    if mode == DEIM:
        if assets.deim is None:
            raise ValidationError(f"{assets.rom_id} was built without DEIM factors")
        return assemble_rom(op, assets.basis, assets.deim)
    return assemble_rom(op, assets.basis, None)


def evaluation_seed(base_seed: int, gamma_index: int, ic_modes: int,
                    sample: int) -> int:
    return derive_seed(base_seed, EVAL_SEED_TAG, gamma_index, ic_modes, sample)


def prediction_time_study(assets_list: list[RomAssets], grid: Grid, *,
                          gammas, ic_modes_list, num_ics: int, horizon: float,
                          dt: float, dt_snap: float, tol: float,
                          base_seed: int, mode: str = GALERKIN
                          ) -> tuple[list[dict], list[dict]]:
    """Averaged prediction times for each (ROM variant, gamma, J) cell.

    Full-order reference runs are shared across variants: for each
    (gamma, J, sample) a fresh initial condition is drawn from an evaluation
    seed namespace disjoint from the training seeds.  Returns (per-seed rows,
    averaged rows).
    """
    detail_rows: list[dict] = []
    averaged_rows: list[dict] = []
    systems = {(a.rom_id): None for a in assets_list}
    for gi, gamma in enumerate(gammas):
        for assets in assets_list:
            systems[assets.rom_id] = rom_for_gamma(assets, gamma, grid, mode)
        fom_runs: dict[tuple, tuple[Trajectory, object]] = {}
        for ic_modes in ic_modes_list:
            for sample in range(num_ics):
                seed = evaluation_seed(base_seed, gi, ic_modes, sample)
                spec = sample_initial_condition(ic_modes, seed)
                ic = evaluate_initial_condition(spec, grid)
                fom = simulate(GksParams(gamma=gamma, grid=grid), ic,
                               horizon, dt, dt_snap, ic_spec=spec)
                fom_runs[(ic_modes, sample)] = (fom, ic, seed)
            for assets in assets_list:
                horizons = []
                for sample in range(num_ics):
                    fom, ic, seed = fom_runs[(ic_modes, sample)]
                    rom_run = integrate_rom(systems[assets.rom_id], assets.basis,
                                            ic, horizon, dt, dt_snap)
                    t_pred, survived = prediction_time_flagged(
                        relative_error_series(rom_run.trajectory, fom), tol)
                    horizons.append(t_pred)
                    detail_rows.append(dict(rom_id=assets.rom_id, gamma=gamma,
                                            ic_modes=ic_modes, seed=seed,
                                            prediction_time=t_pred,
                                            survived=survived))
                averaged_rows.append(dict(rom_id=assets.rom_id, gamma=gamma,
                                          ic_modes=ic_modes,
                                          averaged_prediction_time=float(
                                              np.mean(horizons))))
    return detail_rows, averaged_rows
