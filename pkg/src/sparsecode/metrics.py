"""Experiment procedures: approximation-rate sweeps over a geometric grid of
representation sizes, unit-usage probes, and log-log slope recovery.

Each (m, trial) job derives its generators from (master_seed, m, trial,
stage), so results are identical no matter how jobs are scheduled; a work
pool only changes wall time. Sup-error statistics aggregate by the median
across trials, which is robust to the heavy upper tail of sup statistics.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .approximator import all_good, learn_weights, reach_band, sup_error
from .config import ExperimentConfig
from .encoder import KWinners, build_expansion, calibrate_thresholds, iter_code_masks
from .errors import FitError, ParameterError
from .geometry import Manifold

# Stage tags for per-job seed derivation.
_STAGE_THETA = 1
_STAGE_CAL = 2
_STAGE_TRAIN = 3
_STAGE_TEST = 4
_STAGE_PROBE = 5

# A grid point whose median non-covered fraction exceeds this is excluded
# from slope fitting.
NON_COVERAGE_LIMIT = 0.2


def derive_seed(master_seed: int, *path: int) -> int:
    """Collapse (master_seed, *path) into one 64-bit stage seed."""
    ss = np.random.SeedSequence((int(master_seed),) + tuple(int(p) for p in path))
    lo, hi = ss.generate_state(2, np.uint32)
    return int(lo) | (int(hi) << 32)


@dataclass(frozen=True)
class GridPoint:
    m: int
    k: int
    sup_err: float
    mean_err: float
    non_covered_fraction: float
    used_unit_count: int
    max_cell_diam: float
    valid: bool


@dataclass(frozen=True)
class ScalingResult:
    grid: tuple
    fitted_slope: Optional[float]
    slope_stderr: Optional[float]
    seeds: dict
    monotone_ok: bool

    def to_dict(self) -> dict:
        return {
            "grid": [asdict(p) for p in self.grid],
            "fitted_slope": self.fitted_slope,
            "slope_stderr": self.slope_stderr,
            "seeds": self.seeds,
            "monotone_ok": self.monotone_ok,
        }


def fit_slope(points: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Ordinary least squares of log err on log m; returns (slope, stderr).

    Points with err <= 0 are dropped; fewer than 3 usable points is an error.
    """
    usable = [(m, e) for m, e in points if e > 0.0]
    if len(usable) < 3:
        raise FitError(f"need >= 3 points with positive error, got {len(usable)}")
    x = np.log([m for m, _ in usable])
    y = np.log([e for _, e in usable])
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise FitError("all points share the same m")
    slope = float(xc @ (y - y.mean())) / sxx
    resid = (y - y.mean()) - slope * xc
    dof = len(usable) - 2
    stderr = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else 0.0
    return slope, stderr


def _goodness_for(config: ExperimentConfig):
    if config.goodness == "reach_band":
        return reach_band(config.manifold)
    return all_good()


def _run_one_cell(config: ExperimentConfig, m: int, trial: int) -> dict:
    k = config.k_for(m)
    seed_theta = derive_seed(config.master_seed, m, trial, _STAGE_THETA)
    theta = build_expansion(config.dist, m, seed_theta)
    if config.scheme == "threshold":
        n_cal = config.n_cal_for(m, k)
        sparsifier = calibrate_thresholds(
            theta,
            config.manifold,
            k,
            n_cal,
            derive_seed(config.master_seed, m, trial, _STAGE_CAL),
        )
    else:
        sparsifier = KWinners(k)
    model = learn_weights(
        theta,
        sparsifier,
        config.target,
        config.manifold,
        config.n_train_for(m, k),
        derive_seed(config.master_seed, m, trial, _STAGE_TRAIN),
        _goodness_for(config),
    )
    res, diag = sup_error(
        model,
        config.target,
        config.manifold,
        config.n_test,
        derive_seed(config.master_seed, m, trial, _STAGE_TEST),
        diagnostics=True,
    )
    return {
        "m": m,
        "k": k,
        "trial": trial,
        "sup_err": res.sup_abs_err,
        "mean_err": res.mean_abs_err,
        "non_covered_fraction": res.non_covered_fraction,
        "used_unit_count": diag.used_unit_count,
        "max_cell_diam": diag.max_cell_diam,
    }


def _cell_job(args):
    return _run_one_cell(*args)


def run_rate_sweep(config: ExperimentConfig, threads: int = 1) -> ScalingResult:
    """Full pipeline per grid point and trial, median-aggregated, with a
    log-log slope fit over the valid grid points."""
    if len(config.m_grid) < 1:
        raise ParameterError("empty m grid")
    jobs = [(config, m, t) for m in config.m_grid for t in range(config.trials)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_cell_job, jobs))
    else:
        records = [_cell_job(j) for j in jobs]

    grid = []
    for m in config.m_grid:
        cell = [r for r in records if r["m"] == m]
        med = lambda key: float(np.median([r[key] for r in cell]))  # noqa: E731
        noncov = med("non_covered_fraction")
        grid.append(
            GridPoint(
                m=m,
                k=cell[0]["k"],
                sup_err=med("sup_err"),
                mean_err=med("mean_err"),
                non_covered_fraction=noncov,
                used_unit_count=int(np.median([r["used_unit_count"] for r in cell])),
                max_cell_diam=med("max_cell_diam"),
                valid=noncov <= NON_COVERAGE_LIMIT,
            )
        )

    try:
        slope, stderr = fit_slope([(p.m, p.sup_err) for p in grid if p.valid])
    except FitError:
        slope, stderr = None, None

    sups = [p.sup_err for p in grid]
    inversions = sum(1 for a, b in zip(sups, sups[1:]) if b > a)
    return ScalingResult(
        grid=tuple(grid),
        fitted_slope=slope,
        slope_stderr=stderr,
        seeds={"master_seed": config.master_seed, "stages": "(master, m, trial, stage)"},
        monotone_ok=inversions <= 1,
    )


# ---------------------------------------------------------------------------
# Unit usage
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UsageProfile:
    per_unit_fire_count: np.ndarray
    ever_used_count: int
    probe_size: int


def run_usage_probe(theta, sparsifier, manifold: Manifold, probe_size: int, seed: int) -> UsageProfile:
    """Count per-unit activations over probe_size manifold samples."""
    if probe_size < 10**4:
        raise ParameterError("probe_size must be >= 10**4")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    fire = np.zeros(theta.m, dtype=np.int64)
    chunk = 65536
    for lo in range(0, probe_size, chunk):
        X = manifold.sample(min(chunk, probe_size - lo), rng)
        for _, mask in iter_code_masks(theta, sparsifier, X):
            fire += mask.sum(axis=0)
    return UsageProfile(
        per_unit_fire_count=fire,
        ever_used_count=int(np.count_nonzero(fire)),
        probe_size=probe_size,
    )


@dataclass(frozen=True)
class UsageScalingResult:
    grid: tuple  # (m, k, ever_used_count, probe_size)
    fitted_slope: Optional[float]
    slope_stderr: Optional[float]
    seeds: dict

    def to_dict(self) -> dict:
        return {
            "grid": [
                {"m": m, "k": k, "ever_used_count": u, "probe_size": p}
                for (m, k, u, p) in self.grid
            ],
            "fitted_slope": self.fitted_slope,
            "slope_stderr": self.slope_stderr,
            "seeds": self.seeds,
        }


def usage_scaling(config: ExperimentConfig, threads: int = 1) -> UsageScalingResult:
    """Fit the growth exponent of the ever-used unit count against m."""
    grid = []
    for m in config.m_grid:
        k = config.k_for(m)
        theta = build_expansion(
            config.dist, m, derive_seed(config.master_seed, m, 0, _STAGE_THETA)
        )
        if config.scheme == "threshold":
            sparsifier = calibrate_thresholds(
                theta,
                config.manifold,
                k,
                config.n_cal_for(m, k),
                derive_seed(config.master_seed, m, 0, _STAGE_CAL),
            )
        else:
            sparsifier = KWinners(k)
        profile = run_usage_probe(
            theta,
            sparsifier,
            config.manifold,
            config.probe_size,
            derive_seed(config.master_seed, m, 0, _STAGE_PROBE),
        )
        grid.append((m, k, profile.ever_used_count, profile.probe_size))
    try:
        slope, stderr = fit_slope([(m, u) for m, _, u, _ in grid])
    except FitError:
        slope, stderr = None, None
    return UsageScalingResult(
        grid=tuple(grid),
        fitted_slope=slope,
        slope_stderr=stderr,
        seeds={"master_seed": config.master_seed},
    )


# ---------------------------------------------------------------------------
# Artifacts
# ---------------------------------------------------------------------------

SWEEP_CSV_FIELDS = [
    "m",
    "k",
    "sup_err",
    "mean_err",
    "non_covered_fraction",
    "used_unit_count",
    "max_cell_diam",
    "valid",
]

USAGE_CSV_FIELDS = ["m", "k", "ever_used_count", "probe_size"]


def write_sweep_csv(path, result: ScalingResult) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_CSV_FIELDS)
        for p in result.grid:
            writer.writerow(
                [
                    p.m,
                    p.k,
                    repr(p.sup_err),
                    repr(p.mean_err),
                    repr(p.non_covered_fraction),
                    p.used_unit_count,
                    repr(p.max_cell_diam),
                    int(p.valid),
                ]
            )


def write_usage_csv(path, result: UsageScalingResult) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(USAGE_CSV_FIELDS)
        for m, k, used, probe in result.grid:
            writer.writerow([m, k, used, probe])


def write_summary_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
