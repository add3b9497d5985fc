"""Monte-Carlo experiment driver: seeded trials, sweeps, CSV + manifest.

Every trial derives its RNG seed from (base_seed, sweep point, trial
index), so results are reproducible regardless of scheduling order; all
enabled methods inside a trial consume the identical (h, A, y) triple.
Aggregation (mean NMSE per point) is deliberately left to consumers of
the CSV.

Outputs of run_sweep:
  results.csv   one row per (point, trial, method), columns CSV_COLUMNS
  params.csv    per-path scatter rows (truth vs matched estimate)
  manifest.json resolved config, library version, per-point seed lists
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .demix import estimate_channel, nmse
from .errors import ConfigurationError
from .measurement import observe, random_combiner
from .model import ChannelSampling, SystemConfig, sample_hybrid_channel
from .omp import build_polar_dictionary, hybrid_omp, phi_to_theta_safe
from .params import EstimatedPath, extract_paths, match_paths, wrap_phi
from .solver import SolverOptions
from .subspace import build_default_subspace

CSV_COLUMNS = ("config_hash", "sweep_axis", "sweep_value", "trial", "seed",
               "method", "nmse", "angle_rmse_rad", "range_rel_err", "misses",
               "false_alarms", "solver_status", "iters", "wall_ms")

PARAMS_COLUMNS = ("config_hash", "sweep_axis", "sweep_value", "trial", "seed",
                  "method", "kind", "true_theta_rad", "true_r_m",
                  "est_theta_rad", "est_r_m", "matched")


# ---------------------------------------------------------------------------
# configuration (strict JSON mirror)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SystemSpec:
    n: int = 64
    n_rf: int = 4
    f_c: float = 30e9
    downsample: int = 1


@dataclass(frozen=True)
class ChannelSpec:
    k: int = 4
    theta_deg_range: tuple = (-60.0, 60.0)
    r_range_m: tuple = (10.0, 80.0)
    min_phi_sep: float | None = None     # None -> 1/N


@dataclass(frozen=True)
class SubspaceSpec:
    rank: int = 8
    grid_size: int = 4096
    r_min_m: float = 10.0


@dataclass(frozen=True)
class SolverSpec:
    tau: float = 1.0
    rho: float = 1.0
    eps_abs: float = 1e-4
    eps_rel: float = 1e-3
    max_iters: int = 1000
    delta_epsilon: float = 0.05
    delta_rule: str = "mean"     # 'mean' (sigma*sqrt(M)) | 'quantile' (chi-square bound)
    debias: str = "rescale"      # 'rescale' | 'none'


@dataclass(frozen=True)
class OmpSpec:
    far_grid_mult: int = 2
    num_ranges: int = 8


@dataclass(frozen=True)
class SweepSpec:
    axis: str = "snr_db"                 # 'snr_db' | 'k'
    values: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemSpec = field(default_factory=SystemSpec)
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    subspace: SubspaceSpec = field(default_factory=SubspaceSpec)
    solver: SolverSpec = field(default_factory=SolverSpec)
    omp: OmpSpec = field(default_factory=OmpSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    snr_db: float = 10.0                 # fixed SNR when sweeping k
    trials: int = 20
    base_seed: int = 20240811
    methods: tuple = ("anm", "omp")
    oracle_order: bool = True            # feed true path counts to extraction
    order_tol: float = 1e-2

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_SECTIONS = {"system": SystemSpec, "channel": ChannelSpec, "subspace": SubspaceSpec,
             "solver": SolverSpec, "omp": OmpSpec, "sweep": SweepSpec}


def _build_section(cls, data, path):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(f"unknown keys {sorted(unknown)} in '{path}'")
    kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
    return cls(**kwargs)


def config_from_dict(data: dict) -> ExperimentConfig:
    """Strict parse: any key not in the schema is rejected."""
    top_fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(data) - top_fields
    if unknown:
        raise ConfigurationError(f"unknown top-level keys {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if key in _SECTIONS:
            kwargs[key] = _build_section(_SECTIONS[key], value, key)
        elif isinstance(value, list):
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    return ExperimentConfig(**kwargs)


def overlay_config(base: ExperimentConfig, patch: dict) -> ExperimentConfig:
    """Apply a (possibly partial) JSON patch on top of a config."""
    merged = base.as_dict()
    top_fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(patch) - top_fields
    if unknown:
        raise ConfigurationError(f"unknown top-level keys {sorted(unknown)}")
    for key, value in patch.items():
        if key in _SECTIONS and isinstance(value, dict):
            merged[key].update(value)
        else:
            merged[key] = value
    return config_from_dict(merged)


PROFILES = {
    "desk": ExperimentConfig(),
    "paper": ExperimentConfig(
        system=SystemSpec(n=256, n_rf=4),
        channel=ChannelSpec(k=10),
        subspace=SubspaceSpec(rank=10),
        solver=SolverSpec(max_iters=3000),
        trials=50,
    ),
}


# ---------------------------------------------------------------------------
# per-trial machinery
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MethodResult:
    nmse: float
    angle_rmse_rad: float
    range_rel_err: float
    misses: int
    false_alarms: int
    solver_status: str
    iters: int
    wall_ms: float
    path_rows: tuple = ()   # (kind, true_theta, true_r, est_theta, est_r, matched)


@dataclass(frozen=True)
class TrialRecord:
    config_hash: str
    sweep_axis: str
    sweep_value: float
    trial: int
    seed: int
    inputs_hash: str            # fairness audit: hash of (h, A, y)
    results: dict               # method name -> MethodResult


def trial_seed(base_seed, axis, value, trial) -> int:
    key = f"{base_seed}:{axis}:{value!r}:{trial}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little")


def path_split(k: int) -> tuple:
    """Evenly distributed paths; odd K gives the extra one to the far field."""
    return (k + 1) // 2, k // 2


def _resolve_point(config: ExperimentConfig, value):
    if config.sweep.axis == "snr_db":
        return float(value), config.channel.k
    if config.sweep.axis == "k":
        return config.snr_db, int(value)
    raise ConfigurationError(f"unknown sweep axis '{config.sweep.axis}'")


_SHARED_CACHE = {}


def _shared_inputs(config: ExperimentConfig):
    """Subspace basis and OMP dictionary, cached per config inside a process."""
    key = (config.system, config.subspace, config.omp, config.channel.r_range_m)
    if key not in _SHARED_CACHE:
        cfg = SystemConfig.full_sampling(config.system.n, config.system.n_rf,
                                         config.system.f_c, config.system.downsample)
        basis = build_default_subspace(cfg, rank=config.subspace.rank,
                                       r_min=config.subspace.r_min_m,
                                       grid_size=config.subspace.grid_size)
        dictionary = build_polar_dictionary(
            cfg, far_grid_size=config.omp.far_grid_mult * cfg.n,
            num_ranges=config.omp.num_ranges, r_range=config.channel.r_range_m)
        _SHARED_CACHE[key] = (cfg, basis, dictionary)
    return _SHARED_CACHE[key]


def _evaluate_paths(est_paths, truth, cfg):
    """Match estimates to truth per field kind.

    Returns (theta RMSE over matches, mean relative range error,
    miss count, false-alarm count, per-path scatter rows).
    """
    theta_sqerrs, range_errs, rows = [], [], []
    misses = false_alarms = 0
    for kind in ("far", "near"):
        tpaths = [p for p in truth if p.kind == kind]
        epaths = [p for p in est_paths if p.kind == kind]
        matching = match_paths([p.phi for p in epaths], [p.phi(cfg) for p in tpaths])
        misses += len(matching.misses)
        false_alarms += len(matching.false_alarms)
        matched_truth = {}
        for ti, ei, _ in matching.pairs:
            matched_truth[ti] = ei
            t_true = tpaths[ti].theta
            t_est = epaths[ei].theta
            if np.isfinite(t_est):
                theta_sqerrs.append((t_est - t_true) ** 2)
            else:
                misses += 1
            if kind == "near":
                r_est = epaths[ei].r
                if np.isfinite(r_est):
                    range_errs.append(abs(r_est - tpaths[ti].r) / tpaths[ti].r)
                else:
                    range_errs.append(float("nan"))
        for ti, tp in enumerate(tpaths):
            if ti in matched_truth:
                ep = epaths[matched_truth[ti]]
                rows.append((kind, tp.theta, tp.r if kind == "near" else float("nan"),
                             ep.theta, ep.r, 1))
            else:
                rows.append((kind, tp.theta, tp.r if kind == "near" else float("nan"),
                             float("nan"), float("nan"), 0))
        for ei in matching.false_alarms:
            ep = epaths[ei]
            rows.append((kind, float("nan"), float("nan"), ep.theta, ep.r, 0))
    angle_rmse = float(np.sqrt(np.mean(theta_sqerrs))) if theta_sqerrs else float("nan")
    finite_rng = [e for e in range_errs if np.isfinite(e)]
    range_rel = float(np.mean(finite_rng)) if finite_rng else float("nan")
    return angle_rmse, range_rel, misses, false_alarms, tuple(rows)


def run_trial(config: ExperimentConfig, point_value, trial_idx,
              seed: int | None = None) -> TrialRecord:
    """One Monte-Carlo cell: draw, measure, run every method, record.

    Method exceptions are captured into the record (status 'error:<Type>')
    rather than aborting a sweep.
    """
    snr_db, k = _resolve_point(config, point_value)
    cfg, basis, dictionary = _shared_inputs(config)
    if seed is None:
        seed = trial_seed(config.base_seed, config.sweep.axis, point_value, trial_idx)
    rng = np.random.default_rng(seed)

    k_far, k_near = path_split(k)
    sampling = ChannelSampling(
        theta_range=tuple(np.deg2rad(config.channel.theta_deg_range)),
        r_range=config.channel.r_range_m,
        min_phi_sep=config.channel.min_phi_sep)
    channel = sample_hybrid_channel(k_far, k_near, cfg, rng, sampling)
    combiner = random_combiner(cfg, rng)
    ens = observe(combiner, channel.h, snr_db, rng, cfg,
                  epsilon=config.solver.delta_epsilon)

    inputs_hash = hashlib.sha256(
        channel.h.tobytes() + combiner.tobytes() + ens.y.tobytes()).hexdigest()[:16]

    results = {}
    for method in config.methods:
        t0 = time.perf_counter()
        try:
            if method == "anm":
                results[method] = _run_anm(config, cfg, basis, ens, channel, t0)
            elif method == "omp":
                results[method] = _run_omp(config, cfg, dictionary, ens, channel,
                                           k, k_far, t0)
            else:
                raise ConfigurationError(f"unknown method '{method}'")
        except Exception as exc:   # record failures, never abort the sweep
            results[method] = MethodResult(
                nmse=float("nan"), angle_rmse_rad=float("nan"),
                range_rel_err=float("nan"), misses=0, false_alarms=0,
                solver_status=f"error:{type(exc).__name__}", iters=0,
                wall_ms=(time.perf_counter() - t0) * 1e3)

    return TrialRecord(config_hash=config.config_hash(),
                       sweep_axis=config.sweep.axis,
                       sweep_value=float(point_value), trial=trial_idx,
                       seed=seed, inputs_hash=inputs_hash, results=results)


def _run_anm(config, cfg, basis, ens, channel, t0):
    spec = config.solver
    opts = SolverOptions(rho=spec.rho, eps_abs=spec.eps_abs, eps_rel=spec.eps_rel,
                         max_iters=spec.max_iters)
    if spec.delta_rule == "mean":
        delta = ens.noise_sigma * np.sqrt(ens.m)
    elif spec.delta_rule == "quantile":
        delta = ens.noise_bound
    else:
        raise ConfigurationError(f"unknown delta_rule '{spec.delta_rule}'")
    if spec.debias not in ("rescale", "none"):
        raise ConfigurationError(f"unknown debias '{spec.debias}'")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        est = estimate_channel(ens, basis, tau=spec.tau, delta=delta, opts=opts,
                               rescale_amplitude=spec.debias == "rescale")
    err = nmse(est.h_hat, channel.h)
    kf = channel.k_far if config.oracle_order else None
    kn = channel.k_near if config.oracle_order else None
    paths = extract_paths(est.x_mat_hat, est.solution.u_far, est.solution.u_near,
                          basis, cfg, order_tol=config.order_tol,
                          k_far=kf, k_near=kn)
    angle_rmse, range_rel, misses, fas, rows = _evaluate_paths(
        list(paths.far) + list(paths.near), channel.paths, cfg)
    return MethodResult(nmse=err, angle_rmse_rad=angle_rmse, range_rel_err=range_rel,
                        misses=misses, false_alarms=fas,
                        solver_status=est.solution.status,
                        iters=est.solution.iterations,
                        wall_ms=(time.perf_counter() - t0) * 1e3, path_rows=rows)


def _run_omp(config, cfg, dictionary, ens, channel, k, k_far, t0):
    gamma = k_far / k
    est = hybrid_omp(ens.y, ens.combiner, dictionary, k, gamma)
    err = nmse(est.h_hat, channel.h)

    paths = []
    for i in est.far_indices:
        phi = float(dictionary.far_phis[i])
        paths.append(EstimatedPath("far", phi, 1.0, phi_to_theta_safe(phi, cfg)))
    for i in est.near_indices:
        theta, r = dictionary.near_params[i]
        phi = float(wrap_phi(cfg.spacing / cfg.wavelength * np.sin(theta)))
        paths.append(EstimatedPath("near", phi, 1.0, float(theta), float(r)))
    angle_rmse, range_rel, misses, fas, rows = _evaluate_paths(
        paths, channel.paths, cfg)
    return MethodResult(nmse=err, angle_rmse_rad=angle_rmse, range_rel_err=range_rel,
                        misses=misses, false_alarms=fas, solver_status="ok",
                        iters=k, wall_ms=(time.perf_counter() - t0) * 1e3,
                        path_rows=rows)


# ---------------------------------------------------------------------------
# sweep execution and serialization
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def records_to_csv_rows(records) -> list:
    rows = [",".join(CSV_COLUMNS)]
    for rec in records:
        for method, res in rec.results.items():
            rows.append(",".join([
                rec.config_hash, rec.sweep_axis, _fmt(rec.sweep_value),
                str(rec.trial), str(rec.seed), method, _fmt(res.nmse),
                _fmt(res.angle_rmse_rad), _fmt(res.range_rel_err),
                str(res.misses), str(res.false_alarms), res.solver_status,
                str(res.iters), _fmt(res.wall_ms)]))
    return rows


def records_to_params_rows(records) -> list:
    rows = [",".join(PARAMS_COLUMNS)]
    for rec in records:
        for method, res in rec.results.items():
            for kind, tt, tr, et, er, matched in res.path_rows:
                rows.append(",".join([
                    rec.config_hash, rec.sweep_axis, _fmt(rec.sweep_value),
                    str(rec.trial), str(rec.seed), method, kind,
                    _fmt(float(tt)), _fmt(float(tr)), _fmt(float(et)),
                    _fmt(float(er)), str(matched)]))
    return rows


def _cell(args):
    config_dict, value, trial = args
    config = config_from_dict(config_dict)
    return (value, trial), run_trial(config, value, trial)


def run_sweep(config: ExperimentConfig, out_dir, jobs: int = 1):
    """Execute every (point x trial) cell and write the output files.

    Records are sorted by (point order, trial) before writing so the output
    does not depend on scheduling. Returns the path of results.csv.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = [(value, trial) for value in config.sweep.values
             for trial in range(config.trials)]

    results = {}
    if jobs > 1:
        args = [(config.as_dict(), value, trial) for value, trial in cells]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for key, rec in pool.map(_cell, args):
                results[key] = rec
    else:
        for value, trial in cells:
            results[(value, trial)] = run_trial(config, value, trial)

    order = {v: i for i, v in enumerate(config.sweep.values)}
    records = [results[key] for key in sorted(results, key=lambda k: (order[k[0]], k[1]))]

    csv_path = out_dir / "results.csv"
    csv_path.write_text("\n".join(records_to_csv_rows(records)) + "\n")
    (out_dir / "params.csv").write_text(
        "\n".join(records_to_params_rows(records)) + "\n")

    manifest = {
        "config": config.as_dict(),
        "config_hash": config.config_hash(),
        "version": __version__,
        "csv_columns": list(CSV_COLUMNS),
        "seeds": {_fmt(float(v)): [trial_seed(config.base_seed, config.sweep.axis,
                                              v, t) for t in range(config.trials)]
                  for v in config.sweep.values},
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return csv_path


def load_manifest_config(path) -> ExperimentConfig:
    data = json.loads(Path(path).read_text())
    return config_from_dict(data["config"])
