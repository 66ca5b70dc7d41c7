"""Input geometry: synthetic manifolds, row distributions, Lipschitz targets,
and closed-form sphere measures with Monte Carlo counterparts.

Everything here is pure given (inputs, seed). Manifolds, distributions and
targets are frozen dataclasses, safe to share across workers; Monte Carlo
helpers own their generator.

Conventions: inputs live on the unit sphere S^{d-1} (unit-norm vectors,
tolerance 1e-9), distances are Euclidean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import betainc, beta as beta_function

from .errors import (
    DegenerateProjectionError,
    DomainError,
    ParameterError,
)

UNIT_NORM_TOL = 1e-9


def as_unit_vector(x, d: Optional[int] = None) -> np.ndarray:
    """Validate a single input point: float64, 1-d, unit norm within 1e-9."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ParameterError(f"expected a 1-d vector, got shape {x.shape}")
    if d is not None and x.shape[0] != d:
        raise ParameterError(f"expected dimension {d}, got {x.shape[0]}")
    if abs(np.linalg.norm(x) - 1.0) > UNIT_NORM_TOL:
        raise ParameterError("input is not unit-norm (tolerance 1e-9)")
    return x


# ---------------------------------------------------------------------------
# Manifolds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Regularity:
    """Almost-uniformity and volume constants (c1, c2, c3) with their radius
    scale r_o. Documentation-grade: stored for provenance, never used in
    computation."""

    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    r_o: float = 1.0


@dataclass(frozen=True)
class Manifold:
    """A compact submanifold of the unit sphere with uniform sampling and an
    exact nearest-point projection.

    kind:
      "full_sphere"  all of S^{d-1}
      "circle"       the unit circle in coordinates (1, 2), rest zero (d >= 3)
      "sub_sphere"   unit d_o-sphere in the first d_o + 1 coords, rest zero

    All three have reach 1: every point within distance 1 has a unique
    nearest manifold point.
    """

    kind: str
    dim: int
    intrinsic_dim: int
    reach: float = 1.0
    regularity: Regularity = field(default_factory=Regularity)

    def __post_init__(self):
        if self.kind not in ("full_sphere", "circle", "sub_sphere"):
            raise ParameterError(f"unknown manifold kind {self.kind!r}")
        if self.dim < 2:
            raise ParameterError("ambient dimension must be >= 2")
        if self.kind == "circle" and self.dim < 3:
            raise ParameterError("circle manifold requires ambient d >= 3")
        if self.intrinsic_dim < 1 or self.intrinsic_dim >= self.dim:
            raise ParameterError(
                f"intrinsic dimension {self.intrinsic_dim} invalid for ambient {self.dim}"
            )

    # -- sampling ----------------------------------------------------------

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw n i.i.d. points from the uniform measure, shape (n, dim)."""
        if n < 1:
            raise ParameterError("n must be >= 1")
        d = self.dim
        if self.kind == "circle":
            phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
            out = np.zeros((n, d))
            out[:, 0] = np.cos(phi)
            out[:, 1] = np.sin(phi)
            return out
        head = self.intrinsic_dim + 1
        out = np.zeros((n, d))
        g = rng.standard_normal((n, head))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        out[:, :head] = g
        return out

    # -- projection ---------------------------------------------------------

    def project(self, point) -> tuple[np.ndarray, float]:
        """Nearest manifold point and its distance: (pi, delta).

        Raises DegenerateProjectionError when the leading block is zero and
        the nearest point is not unique.
        """
        theta = np.asarray(point, dtype=np.float64)
        if theta.shape != (self.dim,):
            raise ParameterError(f"expected shape ({self.dim},), got {theta.shape}")
        head = self.intrinsic_dim + 1 if self.kind != "circle" else 2
        lead = theta[:head]
        s = float(np.linalg.norm(lead))
        if s == 0.0:
            raise DegenerateProjectionError(
                "projection undefined: leading block is zero"
            )
        pi = np.zeros(self.dim)
        pi[:head] = lead / s
        delta = float(np.linalg.norm(theta - pi))
        return pi, delta

    def project_batch(self, points: np.ndarray):
        """Vectorized projection: (pis, deltas, ok). Degenerate rows get
        ok=False and NaN outputs instead of raising."""
        pts = np.asarray(points, dtype=np.float64)
        head = self.intrinsic_dim + 1 if self.kind != "circle" else 2
        lead = pts[:, :head]
        s = np.linalg.norm(lead, axis=1)
        ok = s > 0.0
        safe = np.where(ok, s, 1.0)
        pis = np.zeros_like(pts)
        pis[:, :head] = lead / safe[:, None]
        deltas = np.linalg.norm(pts - pis, axis=1)
        pis[~ok] = np.nan
        deltas = np.where(ok, deltas, np.nan)
        return pis, deltas, ok


def full_sphere(d: int) -> Manifold:
    return Manifold("full_sphere", dim=d, intrinsic_dim=d - 1)


def circle(d: int) -> Manifold:
    return Manifold("circle", dim=d, intrinsic_dim=1)


def sub_sphere(d: int, d_o: int) -> Manifold:
    return Manifold("sub_sphere", dim=d, intrinsic_dim=d_o)


def sample_input(manifold: Manifold, rng_seed: int, n: int) -> np.ndarray:
    """n i.i.d. uniform samples from the manifold, deterministic in the seed."""
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
    return manifold.sample(n, rng)


def project_to_manifold(manifold: Manifold, theta) -> tuple[np.ndarray, float]:
    """Nearest manifold point and its distance; see Manifold.project."""
    return manifold.project(theta)


# ---------------------------------------------------------------------------
# Row distributions for the expansion matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistributionSpec:
    """Distribution of expansion-matrix rows.

    kind "uniform_sphere": uniform over unit vectors (normalized Gaussians);
    kind "gaussian": isotropic N(0, sigma^2 I);
    kind "data_attuned": rows drawn from the uniform measure on a manifold,
    so they take values on the same set as the inputs.
    """

    kind: str
    dim: int
    sigma: float = 1.0
    manifold: Optional[Manifold] = None

    def __post_init__(self):
        if self.kind not in ("uniform_sphere", "gaussian", "data_attuned"):
            raise ParameterError(f"unknown distribution kind {self.kind!r}")
        if self.dim < 2:
            raise ParameterError("row dimension must be >= 2")
        if self.kind == "gaussian" and not self.sigma > 0:
            raise ParameterError("gaussian sigma must be > 0")
        if self.kind == "data_attuned":
            if self.manifold is None:
                raise ParameterError("data_attuned distribution needs a manifold")
            if self.manifold.dim != self.dim:
                raise ParameterError("manifold dimension does not match rows")

    def sample_rows(self, m: int, rng: np.random.Generator) -> np.ndarray:
        if m < 1:
            raise ParameterError("m must be >= 1")
        if self.kind == "uniform_sphere":
            g = rng.standard_normal((m, self.dim))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            return g
        if self.kind == "gaussian":
            return rng.standard_normal((m, self.dim)) * self.sigma
        return self.manifold.sample(m, rng)


def uniform_sphere(d: int) -> DistributionSpec:
    return DistributionSpec("uniform_sphere", dim=d)


def gaussian(d: int, sigma: float = 1.0) -> DistributionSpec:
    return DistributionSpec("gaussian", dim=d, sigma=sigma)


def data_attuned(manifold: Manifold) -> DistributionSpec:
    return DistributionSpec("data_attuned", dim=manifold.dim, manifold=manifold)


def sample_expansion_rows(dist: DistributionSpec, m: int, rng_seed: int) -> np.ndarray:
    """m i.i.d. rows from the distribution, deterministic in the seed."""
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
    return dist.sample_rows(m, rng)


# ---------------------------------------------------------------------------
# Target functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TargetFunction:
    """A real-valued target on the input space with a known Lipschitz
    constant (w.r.t. the Euclidean norm).

    kind "triangular": tent function of the angle on the circle manifold;
    rises linearly from 0 to 2*lam over angles (0, pi], falls back to 0 over
    (pi, 2*pi]. Slope 2*lam/pi in arc length, hence lam-Lipschitz in chord
    distance. Angles come from atan2 on the first two coordinates, mapped
    to (0, 2*pi].

    kind "coordinate": one ambient coordinate (Lipschitz 1).
    kind "cosine_to_point": lam * <x, p> for a fixed unit point p.
    kind "constant": constant value, Lipschitz 0.
    """

    kind: str
    lipschitz: float
    value: float = 0.0       # constant target
    axis: int = 0            # coordinate target
    point: Optional[tuple] = None  # cosine target; None means first basis vector

    def __post_init__(self):
        if self.kind not in ("triangular", "coordinate", "cosine_to_point", "constant"):
            raise ParameterError(f"unknown target kind {self.kind!r}")
        if self.kind == "constant":
            if self.lipschitz != 0.0:
                raise ParameterError("constant target has Lipschitz constant 0")
        elif not self.lipschitz > 0:
            raise ParameterError("Lipschitz constant must be > 0")

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.kind == "constant":
            return np.full(X.shape[0], self.value)
        if self.kind == "coordinate":
            return X[:, self.axis].copy()
        if self.kind == "cosine_to_point":
            p = self._point_vector(X.shape[1])
            return self.lipschitz * (X @ p)
        # triangular: defined on the circle manifold only
        if X.shape[1] > 2 and np.max(np.abs(X[:, 2:])) > UNIT_NORM_TOL:
            raise DomainError("triangular target evaluated off the circle")
        if np.max(np.abs(np.hypot(X[:, 0], X[:, 1]) - 1.0)) > UNIT_NORM_TOL:
            raise DomainError("triangular target evaluated off the circle")
        ang = np.arctan2(X[:, 1], X[:, 0])
        ang = np.where(ang <= 0.0, ang + 2.0 * np.pi, ang)  # (0, 2*pi]
        lam = self.lipschitz
        return np.where(
            ang <= np.pi,
            2.0 * lam * ang / np.pi,
            2.0 * lam * (2.0 * np.pi - ang) / np.pi,
        )

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        return float(self.evaluate_batch(x[None, :])[0])

    def _point_vector(self, d: int) -> np.ndarray:
        if self.point is None:
            p = np.zeros(d)
            p[0] = 1.0
            return p
        p = np.asarray(self.point, dtype=np.float64)
        if p.shape != (d,):
            raise ParameterError("fixed point dimension mismatch")
        return p


def triangular(lam: float = 1.0) -> TargetFunction:
    return TargetFunction("triangular", lipschitz=lam)


def coordinate(axis: int = 0) -> TargetFunction:
    return TargetFunction("coordinate", lipschitz=1.0, axis=axis)


def cosine_to_point(lam: float = 1.0, point=None) -> TargetFunction:
    pt = None if point is None else tuple(float(v) for v in point)
    return TargetFunction("cosine_to_point", lipschitz=lam, point=pt)


def constant(c: float) -> TargetFunction:
    return TargetFunction("constant", lipschitz=0.0, value=c)


def evaluate_target(f: TargetFunction, x) -> float:
    return f.evaluate(x)


# ---------------------------------------------------------------------------
# Closed-form measures on the sphere
# ---------------------------------------------------------------------------

class CapMeasure(NamedTuple):
    exact: float
    lower_bound: float


def cap_measure_exact(d: int, r: float) -> CapMeasure:
    """Uniform-measure mass of a ball B(x, r) around a point x on S^{d-1}.

    For theta uniform on the sphere, theta_1^2 is Beta(1/2, (d-1)/2); the cap
    {theta: ||theta - x|| <= r} is {theta_1 >= 1 - r^2/2}, so with
    eps = r^2 (1 - r^2/4) the exact mass is

        1/2 * I_eps((d-1)/2, 1/2)

    (I is the regularized incomplete beta function, evaluated by scipy to
    well below 1e-10 relative error). Also returns the algebraic lower bound
    r^{d-1} (1 - r^2/4)^{(d-1)/2} / (3 sqrt(d)) for comparison.
    """
    if d < 2:
        raise ParameterError("cap measure requires d >= 2")
    if not (0.0 < r < math.sqrt(2.0)):
        raise ParameterError("cap radius must lie in (0, sqrt(2))")
    eps = r * r * (1.0 - r * r / 4.0)
    exact = 0.5 * float(betainc((d - 1) / 2.0, 0.5, eps))
    lower = (r ** (d - 1)) * (1.0 - r * r / 4.0) ** ((d - 1) / 2.0) / (3.0 * math.sqrt(d))
    return CapMeasure(exact=exact, lower_bound=lower)


def circle_tube_measure(d: int, r: float) -> float:
    """Uniform-measure mass of the set of sphere points within distance r of
    the circle manifold, for d > 3.

    A sphere point theta is within r of the circle iff its in-plane radius
    s = sqrt(theta_1^2 + theta_2^2) satisfies s >= 1 - r^2/2 (the squared
    distance is 2 - 2s). Since s^2 is Beta(1, (d-2)/2), whose upper tail is
    exact, the mass is

        eps^{(d-2)/2},  eps = r^2 (1 - r^2/4).

    Cross-checked against direct Monte Carlo (see mc_circle_tube_measure).
    """
    if d <= 3:
        raise ParameterError("tube measure requires d > 3")
    if not (0.0 < r < 1.0):
        raise ParameterError("tube radius must lie in (0, 1)")
    eps = r * r * (1.0 - r * r / 4.0)
    return eps ** ((d - 2) / 2.0)


class BetaTail(NamedTuple):
    lower: float
    upper: float
    exact: Optional[float]


def beta_tail(alpha: float, beta: float, eps: float) -> BetaTail:
    """Bounds on Pr(Z >= 1 - eps) for Z ~ Beta(alpha, beta), alpha <= 1 <= beta.

    lower = eps^beta / (beta * B(alpha, beta)); upper multiplies by
    (1 - eps)^{alpha - 1}, capped at 1 since it bounds a probability.
    For alpha = 1 both collapse to the exact value eps^beta.
    """
    if not (0.0 < alpha <= 1.0):
        raise ParameterError("alpha must lie in (0, 1]")
    if beta < 1.0:
        raise ParameterError("beta must be >= 1")
    if not (0.0 < eps < 1.0):
        raise ParameterError("eps must lie in (0, 1)")
    b = float(beta_function(alpha, beta))
    lower = eps ** beta / (beta * b)
    upper = min(1.0, lower * (1.0 - eps) ** (alpha - 1.0))
    exact = eps ** beta if alpha == 1.0 else None
    return BetaTail(lower=lower, upper=upper, exact=exact)


# ---------------------------------------------------------------------------
# Monte Carlo oracles
# ---------------------------------------------------------------------------

class MonteCarloEstimate(NamedTuple):
    estimate: float
    stderr: float
    n_samples: int
    seed: int


def _sphere_batch(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g


def _estimate(hits: int, n: int, seed: int) -> MonteCarloEstimate:
    p = hits / n
    return MonteCarloEstimate(p, math.sqrt(max(p * (1.0 - p), 1e-300) / n), n, seed)


def mc_cap_measure(d: int, r: float, n: int = 10**6, seed: int = 0) -> MonteCarloEstimate:
    """Monte Carlo mass of B(e_1, r) on S^{d-1}, by direct distance check."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, d)))
    hits = 0
    e1 = np.zeros(d)
    e1[0] = 1.0
    for lo in range(0, n, 250_000):
        batch = _sphere_batch(d, min(250_000, n - lo), rng)
        hits += int(np.count_nonzero(np.linalg.norm(batch - e1, axis=1) < r))
    return _estimate(hits, n, seed)


def mc_circle_tube_measure(d: int, r: float, n: int = 10**6, seed: int = 0) -> MonteCarloEstimate:
    """Monte Carlo mass of the radius-r neighborhood of the circle, by
    projecting each sample and measuring the actual distance."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, d, 1)))
    hits = 0
    for lo in range(0, n, 250_000):
        batch = _sphere_batch(d, min(250_000, n - lo), rng)
        s = np.hypot(batch[:, 0], batch[:, 1])
        proj = np.zeros_like(batch)
        nz = s > 0
        proj[nz, 0] = batch[nz, 0] / s[nz]
        proj[nz, 1] = batch[nz, 1] / s[nz]
        dist = np.linalg.norm(batch - proj, axis=1)
        hits += int(np.count_nonzero(nz & (dist <= r)))
    return _estimate(hits, n, seed)


def mc_beta_tail(alpha: float, beta: float, eps: float, n: int = 10**6, seed: int = 0) -> MonteCarloEstimate:
    """Monte Carlo estimate of Pr(Z >= 1 - eps) from raw Beta draws."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 2)))
    hits = int(np.count_nonzero(rng.beta(alpha, beta, size=n) >= 1.0 - eps))
    return _estimate(hits, n, seed)
