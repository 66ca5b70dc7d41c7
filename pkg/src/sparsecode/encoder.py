"""The expand-and-sparsify transform.

Expansion: project the input onto the m rows of a random matrix (rows i.i.d.
from a chosen distribution). Sparsification: either k-winner-take-all (keep
the positions of the k largest projections; ties broken toward the lowest
index) or per-unit thresholding with thresholds calibrated so each unit
fires on a k/m fraction of inputs.

ExpansionMatrix and ThresholdVector are immutable after construction and
safe to share; encoding is pure. Batch helpers stream inputs in chunks so
peak memory stays bounded at large m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np
from numba import njit

from .errors import CalibrationError, ParameterError, ShapeError
from .geometry import DistributionSpec, Manifold

# Rows per streamed chunk; 2048 x 2^15 float64 is ~0.5 GiB, the budget ceiling.
_BATCH_ROWS = 2048
_UNIT_BLOCK_BUDGET = 32 * 2**20  # floats per calibration block


@dataclass(frozen=True)
class ExpansionMatrix:
    """An m x d random expansion with its provenance (distribution, seed)."""

    rows: np.ndarray
    dist: DistributionSpec
    seed: int

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.float64)  # own an immutable copy
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ParameterError("expansion matrix must be 2-d with m >= 1 rows")
        if rows.shape[1] != self.dist.dim:
            raise ShapeError("row dimension does not match the distribution")

    @property
    def m(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]


def build_expansion(dist: DistributionSpec, m: int, seed: int) -> ExpansionMatrix:
    """Draw the m rows from dist; reproducible from the seed."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return ExpansionMatrix(rows=dist.sample_rows(m, rng), dist=dist, seed=seed)


def expand(theta: ExpansionMatrix, x) -> np.ndarray:
    """Projections y, y_j = <row_j, x>."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (theta.d,):
        raise ShapeError(f"input has shape {x.shape}, expected ({theta.d},)")
    return theta.rows @ x


def expand_batch(theta: ExpansionMatrix, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != theta.d:
        raise ShapeError("batch shape does not match expansion dimension")
    return X @ theta.rows.T


# ---------------------------------------------------------------------------
# Sparse codes and sparsifiers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SparseCode:
    """Active unit indices (strictly increasing) out of m units."""

    active: tuple
    m: int

    def __post_init__(self):
        act = tuple(int(j) for j in self.active)
        object.__setattr__(self, "active", act)
        if any(b <= a for a, b in zip(act, act[1:])):
            raise ParameterError("active indices must be strictly increasing")
        if act and (act[0] < 0 or act[-1] >= self.m):
            raise ParameterError("active index out of range")

    def to_dense(self) -> np.ndarray:
        z = np.zeros(self.m, dtype=bool)
        z[list(self.active)] = True
        return z

    def __len__(self) -> int:
        return len(self.active)


@dataclass(frozen=True)
class KWinners:
    """k-winner-take-all sparsifier."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError("k must be >= 1")


@dataclass(frozen=True)
class ThresholdVector:
    """Per-unit thresholds tau calibrated to a target firing rate k/m."""

    tau: np.ndarray
    target_rate: float
    calibration_sample_size: int

    def __post_init__(self):
        tau = np.array(self.tau, dtype=np.float64)
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)
        if tau.ndim != 1:
            raise ParameterError("tau must be 1-d")
        if not (0.0 < self.target_rate <= 1.0):
            raise ParameterError("target rate must lie in (0, 1]")

    @property
    def m(self) -> int:
        return self.tau.shape[0]


Sparsifier = Union[KWinners, ThresholdVector]


@njit(cache=True)
def _row_kth_largest(Y, k, out):  # pragma: no cover - exercised via wrappers
    """out[i] = k-th largest value of row Y[i], via a size-k min-heap."""
    n, m = Y.shape
    heap = np.empty(k, np.float64)
    for i in range(n):
        for j in range(k):
            heap[j] = Y[i, j]
        for start in range(k // 2 - 1, -1, -1):
            root = start
            while True:
                child = 2 * root + 1
                if child >= k:
                    break
                if child + 1 < k and heap[child + 1] < heap[child]:
                    child += 1
                if heap[child] < heap[root]:
                    heap[root], heap[child] = heap[child], heap[root]
                    root = child
                else:
                    break
        for j in range(k, m):
            v = Y[i, j]
            if v > heap[0]:
                heap[0] = v
                root = 0
                while True:
                    child = 2 * root + 1
                    if child >= k:
                        break
                    if child + 1 < k and heap[child + 1] < heap[child]:
                        child += 1
                    if heap[child] < heap[root]:
                        heap[root], heap[child] = heap[child], heap[root]
                        root = child
                    else:
                        break
        out[i] = heap[0]


def _kwta_mask(Y: np.ndarray, k: int) -> np.ndarray:
    """Boolean (n, m) mask of the k winners per row, lowest index on ties.

    Strictly-above-threshold entries always win; entries equal to the k-th
    largest value fill the remaining slots in index order.
    """
    n, m = Y.shape
    if not 1 <= k <= m:
        raise ParameterError(f"k={k} out of range for m={m}")
    if k == m:
        return np.ones((n, m), dtype=bool)
    if k == 1:
        winners = np.argmax(Y, axis=1)  # first occurrence == lowest index
        mask = np.zeros((n, m), dtype=bool)
        mask[np.arange(n), winners] = True
        return mask
    thr = np.empty(n)
    _row_kth_largest(np.ascontiguousarray(Y), k, thr)
    mask = Y >= thr[:, None]
    counts = mask.sum(axis=1)
    for i in np.flatnonzero(counts > k):  # boundary ties, rare
        row = Y[i]
        above = row > thr[i]
        need = k - int(above.sum())
        tie_idx = np.flatnonzero(row == thr[i])[:need]
        mask[i] = above
        mask[i, tie_idx] = True
    return mask


def sparsify_kwta(y, k: int) -> SparseCode:
    """Positions of the k largest entries of y; lowest index wins ties."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ShapeError("y must be 1-d")
    mask = _kwta_mask(y[None, :], k)[0]
    return SparseCode(active=tuple(np.flatnonzero(mask)), m=y.shape[0])


def sparsify_threshold(y, tau: ThresholdVector) -> SparseCode:
    """Units with y_j >= tau_j; may be empty."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != tau.tau.shape:
        raise ShapeError("y and tau lengths differ")
    return SparseCode(active=tuple(np.flatnonzero(y >= tau.tau)), m=y.shape[0])


def encode(theta: ExpansionMatrix, sparsifier: Sparsifier, x) -> SparseCode:
    """Expand then sparsify a single input."""
    y = expand(theta, x)
    if isinstance(sparsifier, KWinners):
        return sparsify_kwta(y, sparsifier.k)
    if isinstance(sparsifier, ThresholdVector):
        return sparsify_threshold(y, sparsifier)
    raise ParameterError(f"unknown sparsifier {type(sparsifier).__name__}")


def iter_code_masks(
    theta: ExpansionMatrix,
    sparsifier: Sparsifier,
    X: np.ndarray,
    batch_rows: int = _BATCH_ROWS,
) -> Iterator[tuple[slice, np.ndarray]]:
    """Stream boolean code masks for the rows of X in chunks.

    Yields (row_slice, mask) pairs where mask[i, j] says unit j fires for
    X[row_slice][i]. Matches the per-vector encode() exactly, including the
    tie rule.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != theta.d:
        raise ShapeError("batch shape does not match expansion dimension")
    if isinstance(sparsifier, ThresholdVector) and sparsifier.m != theta.m:
        raise ShapeError("threshold length does not match unit count")
    # Keep Y under the memory budget at large m.
    rows = max(1, min(batch_rows, int(_UNIT_BLOCK_BUDGET // max(theta.m, 1))))
    for lo in range(0, X.shape[0], rows):
        sl = slice(lo, min(lo + rows, X.shape[0]))
        Y = X[sl] @ theta.rows.T
        if isinstance(sparsifier, KWinners):
            yield sl, _kwta_mask(Y, sparsifier.k)
        else:
            yield sl, Y >= sparsifier.tau[None, :]


# ---------------------------------------------------------------------------
# Threshold calibration
# ---------------------------------------------------------------------------

def calibrate_thresholds(
    theta: ExpansionMatrix,
    manifold: Manifold,
    k: int,
    n_cal: int,
    seed: int,
) -> ThresholdVector:
    """Set each unit's threshold to the empirical (1 - k/m) quantile of its
    projections over n_cal manifold samples.

    tau_j is the ceil((1 - k/m) * n_cal)-th ascending order statistic of
    {<row_j, x_i>}; for k = m that degenerates to the sample minimum, so
    every unit fires on the whole calibration sample. Requires
    n_cal >= 10 * m / k so the target quantile is resolvable.
    """
    m = theta.m
    if not 1 <= k <= m:
        raise ParameterError(f"k={k} out of range for m={m}")
    if n_cal < 10 * m / k:
        raise CalibrationError(
            f"n_cal={n_cal} too small to resolve rate {k}/{m}; need >= {math.ceil(10 * m / k)}"
        )
    if manifold.dim != theta.d:
        raise ShapeError("manifold dimension does not match expansion")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    X = manifold.sample(n_cal, rng)
    rate = k / m
    order_idx = max(1, math.ceil((1.0 - rate) * n_cal))  # ascending, 1-based
    kth_from_top = n_cal - order_idx + 1
    tau = np.empty(m)
    block = max(1, int(_UNIT_BLOCK_BUDGET // n_cal))
    Xt = X.T.copy()
    for lo in range(0, m, block):
        hi = min(lo + block, m)
        Yb = theta.rows[lo:hi] @ Xt  # units x samples
        _row_kth_largest(np.ascontiguousarray(Yb), kth_from_top, tau[lo:hi])
    return ThresholdVector(tau=tau, target_rate=rate, calibration_sample_size=n_cal)
