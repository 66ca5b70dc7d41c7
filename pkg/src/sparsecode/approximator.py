"""Cell-average linear readout over sparse codes.

Each unit j owns the response region ("cell") of inputs that activate it.
Learning sets the unit's weight to the running average of the target over
its cell, accumulated one training sample at a time, so a streaming
(Hebbian running-mean) learner reaches the same weights. Prediction averages
the weights of the units a point activates; under thresholding only units
flagged "good" (close to the data manifold, within half its reach)
contribute, and a point activating no good unit is reported as non-covered
rather than an error.

Weight accumulation uses index-ordered scatter adds, so results are
independent of the internal batch size and bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .encoder import (
    ExpansionMatrix,
    KWinners,
    Sparsifier,
    ThresholdVector,
    expand,
    iter_code_masks,
    sparsify_kwta,
)
from .errors import ParameterError, ShapeError
from .geometry import Manifold, TargetFunction

# Pairwise-diameter computation subsamples cells beyond this many members;
# the reported value is then still a lower bound on the true cell diameter.
_DIAM_MEMBER_CAP = 512


@dataclass(frozen=True)
class GoodnessCriterion:
    """Which units may carry weight.

    mode "all_good": every unit. mode "reach_band": only units whose distance
    to the manifold is below half its reach, where the response region is
    guaranteed to be a single local neighborhood.
    """

    mode: str
    manifold: Optional[Manifold] = None

    def __post_init__(self):
        if self.mode not in ("all_good", "reach_band"):
            raise ParameterError(f"unknown goodness mode {self.mode!r}")
        if self.mode == "reach_band" and self.manifold is None:
            raise ParameterError("reach_band goodness needs a manifold")


def all_good() -> GoodnessCriterion:
    return GoodnessCriterion("all_good")


def reach_band(manifold: Manifold) -> GoodnessCriterion:
    return GoodnessCriterion("reach_band", manifold=manifold)


def classify_good(theta: ExpansionMatrix, crit: GoodnessCriterion) -> np.ndarray:
    """Boolean mask of good units. Rows with an undefined projection (the
    excluded set of the nearest-point map) are marked not-good."""
    if crit.mode == "all_good":
        return np.ones(theta.m, dtype=bool)
    _, deltas, ok = crit.manifold.project_batch(theta.rows)
    half_reach = crit.manifold.reach / 2.0
    return ok & (deltas < half_reach)


@dataclass(frozen=True)
class ApproximatorModel:
    """Learned readout: per-unit weights, observation counts, goodness mask,
    and the encoder it reads from."""

    weights: np.ndarray
    counts: np.ndarray
    good_mask: np.ndarray
    scheme: str  # "wta" | "threshold"
    k: int
    theta: ExpansionMatrix
    tau: Optional[ThresholdVector] = None

    def __post_init__(self):
        if self.scheme not in ("wta", "threshold"):
            raise ParameterError(f"unknown scheme {self.scheme!r}")
        if self.scheme == "threshold" and self.tau is None:
            raise ParameterError("threshold scheme needs a ThresholdVector")
        for name in ("weights", "counts", "good_mask"):
            arr = np.asarray(getattr(self, name))
            if arr.shape != (self.theta.m,):
                raise ShapeError(f"{name} must have one entry per unit")

    @property
    def sparsifier(self) -> Sparsifier:
        return KWinners(self.k) if self.scheme == "wta" else self.tau

    @property
    def unused_units(self) -> int:
        """Units that never fired during training."""
        return int(np.count_nonzero(self.counts == 0))

    def predict(self, x) -> tuple[float, bool]:
        return predict(self, x)


def learn_weights(
    theta: ExpansionMatrix,
    sparsifier: Sparsifier,
    f: TargetFunction,
    manifold: Manifold,
    n_train: int,
    seed: int,
    crit: GoodnessCriterion,
) -> ApproximatorModel:
    """Average the target over each unit's cell from n_train manifold samples.

    weights[j] = mean of f(x_i) over training samples that activate unit j,
    for good units with at least one observation; all other weights are 0.
    Accumulation order is the training order regardless of batching.
    """
    if n_train < 1:
        raise ParameterError("n_train must be >= 1")
    if manifold.dim != theta.d:
        raise ShapeError("manifold dimension does not match expansion")
    good = classify_good(theta, crit)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    X = manifold.sample(n_train, rng)
    fvals = f.evaluate_batch(X)

    sums = np.zeros(theta.m)
    counts = np.zeros(theta.m, dtype=np.int64)
    for sl, mask in iter_code_masks(theta, sparsifier, X):
        rows_idx, unit_idx = np.nonzero(mask)  # row-major: training order
        np.add.at(sums, unit_idx, fvals[sl][rows_idx])
        counts += np.bincount(unit_idx, minlength=theta.m)

    populated = good & (counts > 0)
    weights = np.zeros(theta.m)
    weights[populated] = sums[populated] / counts[populated]

    if isinstance(sparsifier, KWinners):
        return ApproximatorModel(weights, counts, good, "wta", sparsifier.k, theta)
    k_expected = max(1, round(sparsifier.target_rate * theta.m))
    return ApproximatorModel(
        weights, counts, good, "threshold", k_expected, theta, tau=sparsifier
    )


def predict(model: ApproximatorModel, x) -> tuple[float, bool]:
    """Readout at a single point: (value, covered).

    WTA: value = (1/k) * sum of weights over the k active units; always
    covered. Threshold: value = mean weight over active good units; when a
    point activates none, returns (0.0, False).
    """
    y = expand(model.theta, x)
    if model.scheme == "wta":
        active = sparsify_kwta(y, model.k).active
        total = math.fsum(model.weights[j] for j in active)
        return total / model.k, True
    active = np.flatnonzero((y >= model.tau.tau) & model.good_mask)
    if active.size == 0:
        return 0.0, False
    total = math.fsum(model.weights[j] for j in active)
    return total / active.size, True


def predict_batch(model: ApproximatorModel, X: np.ndarray):
    """Vectorized readout: (values, covered) arrays over the rows of X."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    values = np.zeros(n)
    covered = np.zeros(n, dtype=bool)
    w = model.weights
    for sl, mask in iter_code_masks(model.theta, model.sparsifier, X):
        if model.scheme == "wta":
            values[sl] = (mask @ w) / model.k
            covered[sl] = True
        else:
            gm = mask & model.good_mask[None, :]
            cnt = gm.sum(axis=1)
            hit = cnt > 0
            values[sl] = np.where(hit, (gm @ w) / np.maximum(cnt, 1), 0.0)
            covered[sl] = hit
    return values, covered


class SupErrorResult(NamedTuple):
    sup_abs_err: float
    mean_abs_err: float
    non_covered_fraction: float


class CellDiagnostics(NamedTuple):
    fire_counts: np.ndarray     # per-unit activations over the probe
    used_unit_count: int
    max_cell_diam: float        # max over units of the empirical cell diameter


def sup_error(
    model: ApproximatorModel,
    f: TargetFunction,
    manifold: Manifold,
    n_test: int,
    seed: int,
    diagnostics: bool = False,
):
    """Estimate sup and mean of |prediction - f| over a dense random test set.

    Both statistics run over covered points only; the non-covered fraction is
    reported separately. With diagnostics=True also returns per-unit usage
    and the largest empirical cell diameter (max pairwise distance among the
    test points landing in a cell, subsampled beyond 512 members, hence a
    lower bound on the true diameter).
    """
    if n_test < 10**3:
        raise ParameterError("n_test must be >= 1000")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    X = manifold.sample(n_test, rng)
    fvals = f.evaluate_batch(X)

    sup_err = 0.0
    err_sum = 0.0
    n_cov = 0
    fire = np.zeros(model.theta.m, dtype=np.int64)
    member_units: list[np.ndarray] = []
    member_points: list[np.ndarray] = []
    w = model.weights
    for sl, mask in iter_code_masks(model.theta, model.sparsifier, X):
        if model.scheme == "wta":
            vals = (mask @ w) / model.k
            cov = np.ones(mask.shape[0], dtype=bool)
        else:
            gm = mask & model.good_mask[None, :]
            cnt = gm.sum(axis=1)
            cov = cnt > 0
            vals = np.where(cov, (gm @ w) / np.maximum(cnt, 1), 0.0)
        errs = np.abs(vals[cov] - fvals[sl][cov])
        if errs.size:
            sup_err = max(sup_err, float(errs.max()))
            err_sum += float(errs.sum())
        n_cov += int(cov.sum())
        if diagnostics:
            rows_idx, unit_idx = np.nonzero(mask)
            fire += np.bincount(unit_idx, minlength=model.theta.m)
            member_units.append(unit_idx.astype(np.int32))
            member_points.append((rows_idx + sl.start).astype(np.int32))

    result = SupErrorResult(
        sup_abs_err=sup_err,
        mean_abs_err=err_sum / n_cov if n_cov else 0.0,
        non_covered_fraction=1.0 - n_cov / n_test,
    )
    if not diagnostics:
        return result
    max_diam = _max_cell_diameter(
        X, np.concatenate(member_units), np.concatenate(member_points)
    )
    diag = CellDiagnostics(
        fire_counts=fire,
        used_unit_count=int(np.count_nonzero(fire)),
        max_cell_diam=max_diam,
    )
    return result, diag


def _max_cell_diameter(X, unit_idx, point_idx) -> float:
    if unit_idx.size == 0:
        return 0.0
    order = np.argsort(unit_idx, kind="stable")
    units = unit_idx[order]
    pts = point_idx[order]
    boundaries = np.flatnonzero(np.diff(units)) + 1
    best = 0.0
    for group in np.split(pts, boundaries):
        if group.size < 2:
            continue
        if group.size > _DIAM_MEMBER_CAP:
            sel = group[np.linspace(0, group.size - 1, _DIAM_MEMBER_CAP).astype(np.int64)]
        else:
            sel = group
        P = X[sel]
        sq = np.sum(P * P, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (P @ P.T)
        best = max(best, float(np.sqrt(max(d2.max(), 0.0))))
    return best
