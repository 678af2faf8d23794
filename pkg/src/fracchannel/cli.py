"""Command-line orchestration.

Five pipelines share one config schema: exponent bookkeeping, noise
sampling, the linear boundary convolution, the full split solve, and
after-the-fact diagnostics on a finished run directory. Each run lands
in its own directory with a manifest that pins the config hash and the
seed derivation, and a repeated invocation with the same config and
seed reproduces every CSV byte for byte.

Exit codes: 0 on success, 2 when a parameter or config is rejected,
3 when a solver aborts on numerical grounds.
"""

from __future__ import annotations

import argparse
import sys
import time as _time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, config_from_mapping, config_hash, load_config
from .convolution import (
    boundary_blowup_profile,
    evolve_convolution,
    holder_estimate,
    norm_trajectory,
)
from .diagnostics import interior_decay_probe, hurst_recovery_report, threshold_experiment
from .errors import NumericalAbort, ValidationError
from .fbm import (
    critical_noise_coefficients,
    default_noise_coefficients,
    sample_boundary_noise,
)
from .fields import VelocityField, grad_norm, l2_norm, standing_eddy_field
from .grid import ChannelGrid
from .runio import (
    read_manifest,
    read_noise_csv,
    read_snapshots,
    write_csv,
    write_json,
    write_manifest,
    write_noise_csv,
    write_snapshots,
)
from .solver import (
    FieldTrajectory,
    assemble,
    energy_residual,
    picard_remainder,
    solve_levels,
    solve_remainder,
    telescoping_residual,
)

__all__ = ["main", "run"]


def _grid(cfg: RunConfig) -> ChannelGrid:
    if cfg.grid.height is None:
        return ChannelGrid(cfg.grid.n_x, cfg.grid.n_z)
    return ChannelGrid(cfg.grid.n_x, cfg.grid.n_z, cfg.grid.height)


def _coefficients(cfg: RunConfig):
    if cfg.noise.decay == "critical":
        return critical_noise_coefficients(
            cfg.noise.n_modes, sigma0=cfg.noise.sigma0,
            sobolev_deficit=cfg.noise.sobolev_deficit)
    return default_noise_coefficients(cfg.noise.n_modes,
                                      sigma0=cfg.noise.sigma0)


def _noise(cfg: RunConfig, seed: int):
    return sample_boundary_noise(
        _coefficients(cfg), hurst=cfg.noise.hurst, horizon=cfg.time.horizon,
        n_steps=cfg.time.n_steps, master_seed=seed)


def _initial(cfg: RunConfig, grid: ChannelGrid) -> VelocityField:
    if cfg.initial.kind == "zero":
        return VelocityField.zero(grid)
    return standing_eddy_field(grid, amplitude=cfg.initial.amplitude)


def _jsonable(obj):
    """Recursively convert numpy scalars/arrays for json.dump."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _pipeline_exponents(cfg: RunConfig, seed: int, threads: int):
    ledger = cfg.ledger()
    payload = _jsonable(asdict(ledger))
    payload["hurst"] = cfg.noise.hurst
    payload["sobolev_deficit"] = cfg.noise.sobolev_deficit

    def emit(out: Path):
        write_json(out / "exponents.json", payload)
        return ["exponents.json"]

    return emit, {"n_levels": ledger.n_levels}


def _pipeline_sample_noise(cfg: RunConfig, seed: int, threads: int):
    noise = _noise(cfg, seed)

    def emit(out: Path):
        write_noise_csv(out / "noise.csv", noise)
        return ["noise.csv"]

    return emit, {"spawn_keys": _jsonable(noise.seed_info.get("spawn_keys", {}))}


def _resolution_check(traj) -> dict:
    """Pass/fail record for the convolution time-step admissibility."""
    flag = 1.0 if traj.under_resolved else 0.0
    return {"name": "time grid resolves the sampled mode cutoff",
            "statistic": flag, "tolerance": 0.0,
            "passed": not traj.under_resolved}


def _pipeline_run_linear(cfg: RunConfig, seed: int, threads: int):
    ledger = cfg.ledger()
    grid = _grid(cfg)
    noise = _noise(cfg, seed)
    traj = evolve_convolution(grid, noise, scheme=cfg.time.scheme,
                              store_every=cfg.time.store_every)
    p_crit = 2.0 * ledger.q_star
    l2 = norm_trajectory(traj, 2.0)
    lp = norm_trajectory(traj, p_crit)
    grads = np.array([grad_norm(traj.field_at(k)) for k in range(traj.n_times)])
    profile = boundary_blowup_profile(traj, p_crit)
    extra = {"critical_lebesgue_order": p_crit,
             "under_resolved": bool(traj.under_resolved),
             "checks": [_resolution_check(traj)]}
    if traj.n_times >= 8:
        extra["holder"] = _jsonable(holder_estimate(traj))

    def emit(out: Path):
        files = ["noise.csv", "norms.csv", "blowup_profile.csv"]
        write_noise_csv(out / "noise.csv", noise)
        write_csv(out / "norms.csv",
                  ["time", "l2", "lp_crit", "grad"],
                  [traj.times, l2, lp, grads])
        write_csv(out / "blowup_profile.csv",
                  ["z", "sup_lp_crit"],
                  [profile["z"], profile["profile"]])
        if cfg.output.fields:
            write_snapshots(out / "snapshots.bin", grid, traj.times,
                            traj.snapshots)
            files.append("snapshots.bin")
        return files

    return emit, extra


def _pipeline_run_full(cfg: RunConfig, seed: int, threads: int):
    ledger = cfg.ledger()
    grid = _grid(cfg)
    noise = _noise(cfg, seed)
    traj_w = evolve_convolution(grid, noise, scheme=cfg.time.scheme,
                                store_every=cfg.time.store_every)
    levels = solve_levels(traj_w, ledger.n_levels, form=cfg.solver.form,
                          scheme=cfg.time.scheme)
    init = _initial(cfg, grid)
    extra = {"n_levels": ledger.n_levels,
             "under_resolved": bool(traj_w.under_resolved)}
    if cfg.solver.method == "picard":
        remainder, info = picard_remainder(
            traj_w, levels, initial=init, form=cfg.solver.form,
            scheme=cfg.time.scheme, tol=cfg.solver.picard_tol,
            max_iter=cfg.solver.picard_max_iter,
            max_halvings=cfg.solver.picard_max_halvings)
        extra["picard"] = {"slabs": _jsonable(info["slabs"]),
                           "sweeps": _jsonable(info["sweeps"])}
    else:
        remainder = solve_remainder(traj_w, levels, initial=init,
                                    form=cfg.solver.form,
                                    scheme=cfg.time.scheme)
    total = assemble(traj_w, levels, remainder)

    n = traj_w.n_times
    conv_l2 = norm_trajectory(traj_w, 2.0)
    rem_l2 = np.array([l2_norm(remainder.field_at(k)) for k in range(n)])
    tot_l2 = np.array([l2_norm(total.field_at(k)) for k in range(n)])
    tot_grad = np.array([grad_norm(total.field_at(k)) for k in range(n)])
    lev_l2 = [np.array([l2_norm(lev.field_at(k)) for k in range(n)])
              for lev in levels]
    energy = energy_residual(traj_w, levels, remainder)
    tele_idx = sorted(set(np.linspace(0, n - 1, min(n, 9)).astype(int)))
    tele = [telescoping_residual(traj_w, levels, remainder, i,
                                 form=cfg.solver.form) for i in tele_idx]
    # The defect is absolute; measure it against the size of the
    # convection terms entering the identity at the same instant.
    scale = np.maximum(tot_l2[tele_idx] * tot_grad[tele_idx], 1e-300)
    tele_rel = float(np.max(np.abs(tele) / scale))
    extra["checks"] = [
        {"name": "split forcings telescope to the assembled field",
         "statistic": tele_rel, "tolerance": 1e-9,
         "passed": tele_rel <= 1e-9},
        _resolution_check(traj_w),
    ]

    def emit(out: Path):
        files = ["noise.csv", "norms.csv", "level_norms.csv",
                 "energy_residual.csv", "telescoping.csv"]
        write_noise_csv(out / "noise.csv", noise)
        write_csv(out / "norms.csv",
                  ["time", "convolution_l2", "remainder_l2", "total_l2",
                   "total_grad"],
                  [traj_w.times, conv_l2, rem_l2, tot_l2, tot_grad])
        write_csv(out / "level_norms.csv",
                  ["time"] + [f"level{i}_l2" for i in range(len(levels))],
                  [traj_w.times] + lev_l2)
        write_csv(out / "energy_residual.csv", ["time", "residual"],
                  [traj_w.times, energy])
        write_csv(out / "telescoping.csv", ["index", "time", "residual"],
                  [np.array(tele_idx, dtype=float),
                   traj_w.times[tele_idx], np.array(tele)])
        if cfg.output.fields:
            write_snapshots(out / "snapshots.bin", grid, total.times,
                            total.snapshots)
            files.append("snapshots.bin")
        return files

    return emit, extra


_PIPELINES = {
    "exponents": _pipeline_exponents,
    "sample-noise": _pipeline_sample_noise,
    "run-linear": _pipeline_run_linear,
    "run-full": _pipeline_run_full,
}


def _execute(cfg: RunConfig, pipeline: str, seed: int, out, threads: int) -> Path:
    """Compute a pipeline fully, then write its directory."""
    started = _time.monotonic()
    emit, extra = _PIPELINES[pipeline](cfg, seed, threads)
    out_dir = Path(out) if out is not None else Path(
        f"{pipeline}-{config_hash(cfg)[:8]}-seed{seed}")
    out_dir.mkdir(parents=True, exist_ok=True)
    files = emit(out_dir)
    write_manifest(out_dir, cfg, pipeline, seed, files,
                   wall_clock=_time.monotonic() - started,
                   version=__version__, extra=extra)
    return out_dir


def run(config_path, out=None, seed: int | None = None,
        threads: int = 1) -> Path:
    """Execute the pipeline named in a config file; returns the run dir.

    ``seed`` overrides the config's seed; the effective value lands in
    the manifest. Validation failures raise before any file is written.
    """
    cfg = load_config(config_path)
    pipeline = cfg.pipeline or "run-full"
    if pipeline == "diagnostics":
        raise ValidationError(
            "diagnostics consumes an existing run directory; "
            "invoke the diagnostics subcommand with one")
    effective = cfg.seed if seed is None else seed
    return _execute(cfg, pipeline, effective, out, threads)


def _diagnose(run_dir, out, seed: int | None, threads: int) -> Path:
    """Post-process a finished run directory."""
    src = Path(run_dir)
    manifest = read_manifest(src)
    cfg = config_from_mapping(manifest["config"])
    effective = int(manifest.get("master_seed", cfg.seed))
    if seed is not None:
        effective = seed
    noise_path = src / "noise.csv"
    snap_path = src / "snapshots.bin"
    if not noise_path.is_file():
        raise ValidationError(f"no noise.csv in {src}")
    if not snap_path.is_file():
        raise ValidationError(
            f"no snapshots.bin in {src}; rerun with output.fields = true")

    noise = read_noise_csv(noise_path, _coefficients(cfg), cfg.noise.hurst)
    grid, times, snaps = read_snapshots(snap_path)
    traj = FieldTrajectory(grid, times, snaps, label="loaded")

    height = grid.height
    d = cfg.diagnostics
    interior_box = (0.0, 2.0 * np.pi, d.interior[0] * height,
                    d.interior[1] * height)
    wall_box = (0.0, 2.0 * np.pi, d.near_wall[0] * height,
                d.near_wall[1] * height)
    idx = sorted(set(np.linspace(1, traj.n_times - 1,
                                 min(traj.n_times - 1, 17)).astype(int)))
    rows_t, rows_in, rows_wall = [], [], []
    for k in idx:
        f = traj.field_at(k)
        rows_t.append(times[k])
        rows_in.append(interior_decay_probe(f, interior_box))
        rows_wall.append(interior_decay_probe(f, wall_box))

    table = threshold_experiment(
        cfg.noise.params(), d.qs, resolutions=d.resolutions, seed=effective,
        replicas=d.replicas, horizon=d.horizon, sigma0=cfg.noise.sigma0,
        threads=threads)
    report = _jsonable(hurst_recovery_report(noise, traj))
    report["threshold_band"] = _jsonable(table.band)

    gap = float(report["hurst_gap"])
    order = np.argsort(table.q_list)
    grow = np.array([1.0 if table.classification[q] == "growing" else 0.0
                     for q in table.q_list])[order]
    inversions = int(np.sum(grow[:-1] > grow[1:]))
    checks = [
        {"name": "modal increments recover the boundary Hurst exponent",
         "statistic": gap, "tolerance": 0.25, "passed": gap <= 0.25},
        {"name": "growth classification is monotone in the Lebesgue order",
         "statistic": float(inversions), "tolerance": 0.0,
         "passed": inversions == 0},
    ]

    started = _time.monotonic()
    out_dir = Path(out) if out is not None else src / "diagnostics"
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "interior_decay.csv",
              ["time", "interior_rate", "near_wall_rate"],
              [rows_t, rows_in, rows_wall])
    n_levels = len(table.ladder)
    header = (["q"] + [f"sup{i}" for i in range(n_levels)]
              + [f"increment{i}" for i in range(n_levels - 1)] + ["growing"])
    cols = [list(table.q_list)]
    for i in range(n_levels):
        cols.append([table.sups[q][i] for q in table.q_list])
    for i in range(n_levels - 1):
        cols.append([table.increments[q][i] for q in table.q_list])
    cols.append([1.0 if table.classification[q] == "growing" else 0.0
                 for q in table.q_list])
    write_csv(out_dir / "threshold_table.csv", header, cols)
    write_json(out_dir / "hurst_report.json", report)
    write_manifest(out_dir, cfg, "diagnostics", effective,
                   ["interior_decay.csv", "threshold_table.csv",
                    "hurst_report.json"],
                   wall_clock=_time.monotonic() - started,
                   version=__version__,
                   extra={"source_run": str(src),
                          "source_config_sha256": manifest.get("config_sha256"),
                          "threshold_classification":
                              _jsonable(table.classification),
                          "checks": checks})
    return out_dir


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracchannel",
        description="Channel flow driven by fractional boundary noise")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True,
                           help="TOML or JSON run configuration")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed override (non-negative integer)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for replica-parallel stages")

    common(sub.add_parser("exponents",
                          help="write the exponent ledger for a config"))
    common(sub.add_parser("sample-noise",
                          help="sample the boundary noise paths"))
    common(sub.add_parser("run-linear",
                          help="march the boundary convolution"))
    common(sub.add_parser("run-full",
                          help="full split solve with remainder"))
    diag = sub.add_parser("diagnostics",
                          help="post-process a finished run directory")
    diag.add_argument("run_dir", help="directory produced by a run pipeline")
    common(diag, needs_config=False)
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.seed is not None and args.seed < 0:
            raise ValidationError("--seed must be non-negative")
        if args.threads < 1:
            raise ValidationError("--threads must be positive")
        if args.command == "diagnostics":
            out_dir = _diagnose(args.run_dir, args.out, args.seed,
                                args.threads)
        else:
            cfg = load_config(args.config)
            effective = cfg.seed if args.seed is None else args.seed
            out_dir = _execute(cfg, args.command, effective, args.out,
                               args.threads)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3
    print(out_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
