"""Command-line workbench tying the pipeline together.

Verbs: simulate, campaign, build-rom, run-rom, compare, spectra,
predtime-study.  Every command writes its artifacts atomically, emits a run
manifest next to its primary output, and stamps CSVs with the effective
config hash.  Exit codes: 0 success, 2 validation error, 3 numerical
failure, 4 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time

from . import __version__
from .config import (ENV_OUTPUT_DIR, ExperimentConfig, RunManifest,
                     config_hash, config_to_dict, file_digest, load_config,
                     resolve_output_dir, validate_config, write_manifest)
from .errors import (FormatError, IntegrationFailureError, NumericalError,
                     ValidationError)
from .initial import (builtin_initial_condition, evaluate_initial_condition,
                      sample_initial_condition)
from .integrate import simulate
from .metrics import power_spectrum, prediction_time_flagged, relative_error_series
from .operators import build_linear_operator
from .pde import GksParams, Grid
from .pod import RankRule, cumulative_ratio
from .recipes import build_rom_assets, parse_rom_spec, prediction_time_study
from .rom import DEIM, GALERKIN, assemble_rom, integrate_rom
from .snapshots import TrainingPlan, training_set
from .storage import (load_basis, load_snapshots, load_trajectory, save_basis,
                      save_snapshots, save_trajectory, write_csv)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _load_base_config(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return ExperimentConfig()


_FLAG_FIELDS = [
    ("gamma", "gamma"),
    ("length", "length"),
    ("num_points", "num_points"),
    ("dt", "dt"),
    ("dt_snap", "dt_snap"),
    ("total_time", "total_time"),
    ("strategy", "strategy"),
    ("num_trajectories", "num_trajectories"),
    ("total_snapshots", "total_snapshots"),
    ("ic_modes", "ic_modes"),
    ("seed", "base_seed"),
    ("threshold", "pod_threshold"),
    ("criterion", "rank_criterion"),
    ("deim_dim", "deim_dim"),
    ("tol", "error_tol"),
    ("ic", "ic_name"),
    ("ic_seed", "ic_seed"),
    ("output_dir", "output_dir"),
]


def _effective_config(args) -> ExperimentConfig:
    """File config (or defaults) with command-line flags applied on top."""
    config = _load_base_config(args)
    updates = {}
    for flag, field in _FLAG_FIELDS:
        value = getattr(args, flag, None)
        if value is not None:
            updates[field] = value
    if getattr(args, "training_set", None):
        updates["training_set"] = args.training_set
        updates["gammas"] = training_set(args.training_set)
        updates.setdefault("strategy", "multi-parameter")
    if getattr(args, "deim", None) is not None:
        updates["use_deim"] = args.deim
    if updates:
        config = dataclasses.replace(config, **updates)
    validate_config(config)
    return config


def _out_path(config: ExperimentConfig, name: str) -> str:
    directory = resolve_output_dir(config)
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, name)


def _emit_manifest(command: str, config: ExperimentConfig, outputs: list[str],
                   seeds: list[int], timings: dict, manifest_path: str) -> None:
    manifest = RunManifest(
        command=command,
        config=config_to_dict(config),
        config_hash=config_hash(config),
        seeds=[int(s) for s in seeds],
        outputs=[{"path": os.path.basename(p), "sha256": file_digest(p),
                  "bytes": os.path.getsize(p)} for p in outputs],
        timings={k: round(v, 6) for k, v in timings.items()},
        version=__version__,
    )
    write_manifest(manifest, manifest_path)


def _resolve_ic(config: ExperimentConfig, grid: Grid):
    """(spec, state, seeds-consumed) for the configured initial condition."""
    if config.ic_name is not None:
        spec = builtin_initial_condition(config.ic_name)
        return spec, evaluate_initial_condition(spec, grid), []
    seed = config.ic_seed if config.ic_seed is not None else config.base_seed
    spec = sample_initial_condition(config.ic_modes, seed)
    return spec, evaluate_initial_condition(spec, grid), [seed]


def _plan_from_config(config: ExperimentConfig) -> TrainingPlan:
    if config.strategy == "multi-parameter":
        gammas = config.gammas
        if gammas is None and config.training_set is not None:
            gammas = training_set(config.training_set)
        if gammas is None:
            raise ValidationError(
                "config.gammas: multi-parameter plans need gammas or training_set")
        return TrainingPlan.multi_parameter(
            gammas, total_snapshots=config.total_snapshots,
            dt_snap=config.dt_snap, dt=config.dt, ic_modes=config.ic_modes,
            base_seed=config.base_seed)
    if config.strategy == "multi-trajectory":
        return TrainingPlan.multi_trajectory(
            config.gamma, config.num_trajectories,
            total_snapshots=config.total_snapshots, dt_snap=config.dt_snap,
            dt=config.dt, ic_modes=config.ic_modes, base_seed=config.base_seed)
    return TrainingPlan.single(
        config.gamma, total_snapshots=config.total_snapshots,
        dt_snap=config.dt_snap, dt=config.dt, ic_modes=config.ic_modes,
        base_seed=config.base_seed)


# -- commands -----------------------------------------------------------------

def cmd_simulate(args) -> int:
    config = _effective_config(args)
    grid = Grid(config.num_points, config.length)
    spec, ic, seeds = _resolve_ic(config, grid)
    started = time.perf_counter()
    trajectory = simulate(GksParams(config.gamma, grid), ic,
                          config.total_time, config.dt, config.dt_snap,
                          ic_spec=spec)
    elapsed = time.perf_counter() - started
    out = _out_path(config, args.output)
    save_trajectory(trajectory, out)
    _emit_manifest("simulate", config, [out], seeds,
                   {"integrate_s": elapsed}, out + ".manifest.json")
    print(f"wrote {out} ({trajectory.num_snapshots} snapshots, "
          f"gamma={config.gamma}, T={config.total_time})")
    return EXIT_OK


def cmd_campaign(args) -> int:
    config = _effective_config(args)
    grid = Grid(config.num_points, config.length)
    plan = _plan_from_config(config)
    started = time.perf_counter()
    u_matrix, f_matrix = run_campaign_with_plan(plan, grid)
    elapsed = time.perf_counter() - started
    u_path = _out_path(config, args.output_prefix + "_u.gkssnap")
    f_path = _out_path(config, args.output_prefix + "_f.gkssnap")
    save_snapshots(u_matrix, u_path)
    save_snapshots(f_matrix, f_path)
    seeds = [seed for _, _, _, seed in plan.trajectory_specs()]
    _emit_manifest("campaign", config, [u_path, f_path], seeds,
                   {"campaign_s": elapsed}, u_path + ".manifest.json")
    print(f"wrote {u_path} and {f_path} ({u_matrix.num_columns} columns, "
          f"strategy={plan.strategy})")
    return EXIT_OK


def run_campaign_with_plan(plan: TrainingPlan, grid: Grid):
    from .snapshots import run_campaign

    template = GksParams(gamma=plan.gammas[0], grid=grid)
    return run_campaign(plan, template)


def cmd_build_rom(args) -> int:
    config = _effective_config(args)
    u_matrix = load_snapshots(args.u_snapshots)
    rule = RankRule(threshold=config.pod_threshold, criterion=config.rank_criterion)
    from .deim import build_deim_operator
    from .pod import compute_pod_basis

    started = time.perf_counter()
    basis = compute_pod_basis(u_matrix, rule)
    deim = None
    if config.use_deim:
        if not args.f_snapshots:
            raise ValidationError(
                "building a DEIM operator needs --f-snapshots (or pass --no-deim)")
        f_matrix = load_snapshots(args.f_snapshots)
        deim = build_deim_operator(f_matrix, config.deim_dim or basis.rank)
    elapsed = time.perf_counter() - started

    out = _out_path(config, args.output)
    save_basis(basis, out, deim)
    report = _out_path(config, args.rank_report)
    sigma = basis.singular_values
    ratios = cumulative_ratio(sigma)
    write_csv(report, ["i", "sigma_i", "C_i"],
              [(i + 1, sigma[i], ratios[i]) for i in range(sigma.size)],
              comments=[f"config_hash={config_hash(config)}"])
    _emit_manifest("build-rom", config, [out, report], [],
                   {"build_s": elapsed}, out + ".manifest.json")
    interp = deim.num_points if deim is not None else 0
    print(f"wrote {out} (rank r={basis.rank}, interpolation points n={interp})")
    return EXIT_OK


def cmd_run_rom(args) -> int:
    config = _effective_config(args)
    grid = Grid(config.num_points, config.length)
    basis, deim = load_basis(args.basis)
    if basis.num_points != grid.num_points:
        raise ValidationError(
            f"basis has {basis.num_points} points, config grid has "
            f"{grid.num_points}")
    mode = args.mode
    if mode == DEIM and deim is None:
        raise ValidationError("basis file carries no DEIM block; use --mode galerkin")
    op = build_linear_operator(GksParams(config.gamma, grid))
    system = assemble_rom(op, basis, deim if mode == DEIM else None)
    spec, ic, seeds = _resolve_ic(config, grid)
    started = time.perf_counter()
    result = integrate_rom(system, basis, ic, config.total_time, config.dt,
                           config.dt_snap, ic_spec=spec)
    elapsed = time.perf_counter() - started
    out = _out_path(config, args.output)
    save_trajectory(result.trajectory, out)
    _emit_manifest(f"run-rom[{mode}]", config, [out], seeds,
                   {"integrate_s": elapsed}, out + ".manifest.json")
    print(f"wrote {out} (mode={mode}, r={basis.rank}, gamma={config.gamma})")
    return EXIT_OK


def cmd_compare(args) -> int:
    config = _effective_config(args)
    rom = load_trajectory(args.rom)
    fom = load_trajectory(args.fom)
    series = relative_error_series(rom, fom)
    t_pred, survived = prediction_time_flagged(series, config.error_tol)
    out = _out_path(config, args.output)
    write_csv(out, ["t", "rel_l2"],
              list(zip(series.times, series.rel_l2)),
              comments=[f"config_hash={config_hash(config)}",
                        f"prediction_time={t_pred:.12g}",
                        f"survived={survived}"])
    _emit_manifest("compare", config, [out], [], {}, out + ".manifest.json")
    print(f"prediction_time={t_pred:.12g} survived={survived} (tol={config.error_tol})")
    return EXIT_OK


def cmd_spectra(args) -> int:
    config = _effective_config(args)
    trajectory = load_trajectory(args.trajectory)
    t_end = args.t_end if args.t_end is not None else float(trajectory.times[-1])
    spectrum = power_spectrum(trajectory, (args.t_start, t_end))
    out = _out_path(config, args.output)
    write_csv(out, ["k", "E_k"],
              list(zip(spectrum.wavenumbers, spectrum.energy)),
              comments=[f"config_hash={config_hash(config)}",
                        f"window=({spectrum.averaging_window[0]:.12g},"
                        f"{spectrum.averaging_window[1]:.12g})"])
    _emit_manifest("spectra", config, [out], [], {}, out + ".manifest.json")
    print(f"wrote {out} ({spectrum.wavenumbers.size} wavenumbers)")
    return EXIT_OK


def cmd_predtime_study(args) -> int:
    config = _effective_config(args)
    grid = Grid(config.num_points, config.length)
    rule = RankRule(threshold=config.pod_threshold, criterion=config.rank_criterion)
    plan_kwargs = dict(total_snapshots=config.total_snapshots,
                       dt_snap=config.dt_snap, dt=config.dt,
                       ic_modes=config.ic_modes, base_seed=config.base_seed)
    started = time.perf_counter()
    assets_list = []
    for spec in config.study_roms:
        rom_id, plan = parse_rom_spec(spec, **plan_kwargs)
        assets = build_rom_assets(plan, grid, rule, use_deim=config.use_deim,
                                  deim_dim=config.deim_dim, rom_id=rom_id)
        assets_list.append(assets)
        print(f"built {rom_id}: rank r={assets.rank}")
    mode = DEIM if config.use_deim else GALERKIN
    detail, averaged = prediction_time_study(
        assets_list, grid, gammas=config.study_gammas,
        ic_modes_list=config.study_modes, num_ics=config.num_ics,
        horizon=config.total_time, dt=config.dt, dt_snap=config.dt_snap,
        tol=config.error_tol, base_seed=config.base_seed, mode=mode)
    elapsed = time.perf_counter() - started

    comments = [f"config_hash={config_hash(config)}", f"mode={mode}"]
    detail_path = _out_path(config, args.output_prefix + "_by_seed.csv")
    write_csv(detail_path,
              ["rom_id", "gamma", "J", "seed", "T_rom", "survived"],
              [(r["rom_id"], r["gamma"], r["ic_modes"], r["seed"],
                r["prediction_time"], int(r["survived"])) for r in detail],
              comments=comments)
    averaged_path = _out_path(config, args.output_prefix + "_averaged.csv")
    write_csv(averaged_path, ["rom_id", "gamma", "J", "averaged_T_rom"],
              [(r["rom_id"], r["gamma"], r["ic_modes"],
                r["averaged_prediction_time"]) for r in averaged],
              comments=comments)
    seeds = [r["seed"] for r in detail]
    _emit_manifest("predtime-study", config, [detail_path, averaged_path],
                   sorted(set(seeds)), {"study_s": elapsed},
                   averaged_path + ".manifest.json")
    print(f"wrote {averaged_path} ({len(averaged)} cells)")
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gksrom",
        description="Reduced-order modeling workbench for the generalized "
                    "Kuramoto-Sivashinsky equation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, clock=True, ic=False):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--output-dir", help=f"output directory "
                       f"(default: ${ENV_OUTPUT_DIR} or cwd)")
        p.add_argument("--gamma", type=float)
        p.add_argument("--length", type=float)
        p.add_argument("--num-points", dest="num_points", type=int)
        if clock:
            p.add_argument("--dt", type=float)
            p.add_argument("--dt-snap", dest="dt_snap", type=float)
            p.add_argument("--total-time", dest="total_time", type=float)
        if ic:
            p.add_argument("--ic", choices=["ic1", "ic2", "ic3"],
                           help="bundled fixed initial condition")
            p.add_argument("--ic-seed", dest="ic_seed", type=int,
                           help="seed for a random initial condition")
            p.add_argument("--ic-modes", dest="ic_modes", type=int)
        p.add_argument("--seed", type=int, help="base seed")

    p = sub.add_parser("simulate", help="run the full-order model")
    common(p, ic=True)
    p.add_argument("--output", default="fom.gkstraj")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("campaign", help="collect training snapshots")
    common(p)
    p.add_argument("--strategy",
                   choices=["single", "multi-trajectory", "multi-parameter"])
    p.add_argument("--set", dest="training_set",
                   help="bundled training set name (G1..G4)")
    p.add_argument("--num-trajectories", "-w", dest="num_trajectories", type=int)
    p.add_argument("--total-snapshots", dest="total_snapshots", type=int)
    p.add_argument("--ic-modes", dest="ic_modes", type=int)
    p.add_argument("--output-prefix", default="snapshots")
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("build-rom", help="POD basis and DEIM operator from snapshots")
    common(p, clock=False)
    p.add_argument("--u-snapshots", required=True)
    p.add_argument("--f-snapshots")
    p.add_argument("--threshold", type=float, help="rank-selection threshold V")
    p.add_argument("--criterion", choices=["amplitude", "energy"])
    p.add_argument("--deim", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--deim-dim", dest="deim_dim", type=int)
    p.add_argument("--output", default="rom.gksbas")
    p.add_argument("--rank-report", default="rank_report.csv")
    p.set_defaults(func=cmd_build_rom)

    p = sub.add_parser("run-rom", help="integrate a reduced model")
    common(p, ic=True)
    p.add_argument("--basis", required=True)
    p.add_argument("--mode", choices=[GALERKIN, DEIM], default=GALERKIN)
    p.add_argument("--output", default="rom.gkstraj")
    p.set_defaults(func=cmd_run_rom)

    p = sub.add_parser("compare", help="error series and prediction time")
    common(p, clock=False)
    p.add_argument("--rom", required=True)
    p.add_argument("--fom", required=True)
    p.add_argument("--tol", type=float)
    p.add_argument("--output", default="error.csv")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("spectra", help="time-averaged power spectrum")
    common(p, clock=False)
    p.add_argument("--trajectory", required=True)
    p.add_argument("--t-start", dest="t_start", type=float, default=0.0)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--output", default="spectrum.csv")
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("predtime-study",
                       help="averaged prediction times over a gamma grid")
    common(p)
    p.add_argument("--total-snapshots", dest="total_snapshots", type=int)
    p.add_argument("--deim", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--output-prefix", default="predtime")
    p.set_defaults(func=cmd_predtime_study)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (IntegrationFailureError, NumericalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
