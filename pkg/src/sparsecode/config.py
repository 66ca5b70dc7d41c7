"""Experiment configuration: a single YAML file with nested sections, parsed
into a validated, immutable ExperimentConfig.

A file describes either one run (flat keys) or several named runs under a
top-level `runs:` mapping sharing one master seed. Command-line flags
override file values; the master seed is always explicit, never wall-clock.

Sample-size knobs: `n_train`/`n_cal` of 0 (or omitted) select the default
rules 200*m/k and 100*m/k, sizing both so every unit expects a fixed number
of hits; a positive integer pins the count for every grid point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import yaml

from .errors import ConfigError
from .geometry import (
    DistributionSpec,
    Manifold,
    TargetFunction,
    circle,
    constant,
    coordinate,
    cosine_to_point,
    data_attuned,
    full_sphere,
    gaussian,
    sub_sphere,
    triangular,
    uniform_sphere,
)

DEFAULT_TRAIN_HITS = 200
DEFAULT_CAL_HITS = 100


@dataclass(frozen=True)
class KRule:
    """Sparsity schedule across the m grid.

    kind "fixed": k is a constant.
    kind "dlog2": k = ceil(c * d * log2(m)), the dimension-scaled schedule
      used for winner-take-all runs on full-dimensional inputs.
    kind "ln": k = ceil(c * ln(m)), the logarithmic schedule used for
      thresholding runs.
    kind "half_intrinsic": k = max(1, ceil(d_o / 2)), matched to the
      intrinsic dimension for data-attuned runs.
    """

    kind: str
    k: int = 0
    c: float = 1.0

    def __post_init__(self):
        if self.kind not in ("fixed", "dlog2", "ln", "half_intrinsic"):
            raise ConfigError(f"unknown k rule {self.kind!r}")
        if self.kind == "fixed" and self.k < 1:
            raise ConfigError("fixed k rule needs k >= 1")
        if self.kind in ("dlog2", "ln") and not self.c > 0:
            raise ConfigError("log k rules need c > 0")


@dataclass(frozen=True)
class ExperimentConfig:
    manifold: Manifold
    dist: DistributionSpec
    scheme: str                      # "wta" | "threshold"
    goodness: str                    # "all_good" | "reach_band"
    target: TargetFunction
    m_grid: tuple
    k_rule: KRule
    master_seed: int
    n_train: int = 0                 # 0 -> 200 * m / k
    n_test: int = 20000
    n_cal: int = 0                   # 0 -> 100 * m / k
    trials: int = 5
    probe_size: int = 100000
    name: str = "run"

    def __post_init__(self):
        if self.scheme not in ("wta", "threshold"):
            raise ConfigError(f"scheme must be wta or threshold, got {self.scheme!r}")
        if self.goodness not in ("all_good", "reach_band"):
            raise ConfigError(f"unknown goodness {self.goodness!r}")
        if self.master_seed is None:
            raise ConfigError("master_seed is mandatory")
        if not self.m_grid:
            raise ConfigError("m_grid must be non-empty")
        # results and slope fits assume an ascending grid
        grid = tuple(sorted(int(m) for m in self.m_grid))
        object.__setattr__(self, "m_grid", grid)
        for key in ("n_train", "n_test", "n_cal", "trials", "probe_size"):
            if getattr(self, key) < 0:
                raise ConfigError(f"{key} must be non-negative")
        if self.n_test < 1 or self.trials < 1:
            raise ConfigError("n_test and trials must be positive")
        if self.dist.dim != self.manifold.dim:
            raise ConfigError("dist dimension must match the manifold")
        for m in grid:
            if m < 1:
                raise ConfigError("grid sizes must be positive")
            k = self.k_for(m)
            if not 1 <= k <= m:
                raise ConfigError(f"k rule yields k={k} outside [1, {m}] at m={m}")

    # -- schedules ----------------------------------------------------------

    def k_for(self, m: int) -> int:
        rule = self.k_rule
        if rule.kind == "fixed":
            return rule.k
        if rule.kind == "dlog2":
            return math.ceil(rule.c * self.manifold.dim * math.log2(m))
        if rule.kind == "ln":
            return math.ceil(rule.c * math.log(m))
        return max(1, math.ceil(self.manifold.intrinsic_dim / 2))

    def n_train_for(self, m: int, k: int) -> int:
        if self.n_train > 0:
            return self.n_train
        return DEFAULT_TRAIN_HITS * m // k

    def n_cal_for(self, m: int, k: int) -> int:
        if self.n_cal > 0:
            return self.n_cal
        return DEFAULT_CAL_HITS * m // k

    # -- (de)serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        man = {"kind": self.manifold.kind, "d": self.manifold.dim}
        if self.manifold.kind == "sub_sphere":
            man["d_o"] = self.manifold.intrinsic_dim
        dist = {"kind": self.dist.kind}
        if self.dist.kind == "gaussian":
            dist["sigma"] = self.dist.sigma
        target = {"kind": self.target.kind}
        if self.target.kind == "constant":
            target["value"] = self.target.value
        elif self.target.kind == "coordinate":
            target["axis"] = self.target.axis
        else:
            target["lam"] = self.target.lipschitz
            if self.target.kind == "cosine_to_point" and self.target.point is not None:
                target["point"] = list(self.target.point)
        k_rule = {"kind": self.k_rule.kind}
        if self.k_rule.kind == "fixed":
            k_rule["k"] = self.k_rule.k
        elif self.k_rule.kind in ("dlog2", "ln"):
            k_rule["c"] = self.k_rule.c
        return {
            "manifold": man,
            "dist": dist,
            "scheme": self.scheme,
            "goodness": self.goodness,
            "target": target,
            "m_grid": list(self.m_grid),
            "k_rule": k_rule,
            "master_seed": self.master_seed,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "n_cal": self.n_cal,
            "trials": self.trials,
            "probe_size": self.probe_size,
            "name": self.name,
        }


def _build_manifold(section) -> Manifold:
    if not isinstance(section, dict) or "kind" not in section:
        raise ConfigError("manifold: needs a mapping with a 'kind'")
    kind = section["kind"]
    d = int(section.get("d", 0))
    if kind == "full_sphere":
        return full_sphere(d)
    if kind == "circle":
        return circle(d)
    if kind == "sub_sphere":
        return sub_sphere(d, int(section.get("d_o", 0)))
    raise ConfigError(f"manifold.kind: unknown value {kind!r}")


def _build_dist(section, manifold: Manifold) -> DistributionSpec:
    if not isinstance(section, dict) or "kind" not in section:
        raise ConfigError("dist: needs a mapping with a 'kind'")
    kind = section["kind"]
    if kind == "uniform_sphere":
        return uniform_sphere(manifold.dim)
    if kind == "gaussian":
        return gaussian(manifold.dim, sigma=float(section.get("sigma", 1.0)))
    if kind == "data_attuned":
        return data_attuned(manifold)
    raise ConfigError(f"dist.kind: unknown value {kind!r}")


def _build_target(section) -> TargetFunction:
    if not isinstance(section, dict) or "kind" not in section:
        raise ConfigError("target: needs a mapping with a 'kind'")
    kind = section["kind"]
    if kind == "triangular":
        return triangular(float(section.get("lam", 1.0)))
    if kind == "coordinate":
        return coordinate(int(section.get("axis", 0)))
    if kind == "cosine_to_point":
        return cosine_to_point(float(section.get("lam", 1.0)), section.get("point"))
    if kind == "constant":
        return constant(float(section.get("value", 0.0)))
    raise ConfigError(f"target.kind: unknown value {kind!r}")


def _build_k_rule(section) -> KRule:
    if not isinstance(section, dict) or "kind" not in section:
        raise ConfigError("k_rule: needs a mapping with a 'kind'")
    kind = section["kind"]
    return KRule(kind=kind, k=int(section.get("k", 0)), c=float(section.get("c", 1.0)))


def config_from_dict(raw: dict, name: str = "run") -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping")
    required = ["manifold", "dist", "scheme", "target", "m_grid", "k_rule", "master_seed"]
    missing = [key for key in required if key not in raw]
    if missing:
        raise ConfigError(f"missing config fields: {', '.join(missing)}")
    manifold = _build_manifold(raw["manifold"])
    try:
        return ExperimentConfig(
            manifold=manifold,
            dist=_build_dist(raw["dist"], manifold),
            scheme=str(raw["scheme"]),
            goodness=str(raw.get("goodness", "all_good")),
            target=_build_target(raw["target"]),
            m_grid=tuple(raw["m_grid"]),
            k_rule=_build_k_rule(raw["k_rule"]),
            master_seed=int(raw["master_seed"]),
            n_train=int(raw.get("n_train", 0)),
            n_test=int(raw.get("n_test", 20000)),
            n_cal=int(raw.get("n_cal", 0)),
            trials=int(raw.get("trials", 5)),
            probe_size=int(raw.get("probe_size", 100000)),
            name=name,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config_file(path, seed_override: Optional[int] = None) -> dict[str, ExperimentConfig]:
    """Parse a YAML config file into named runs (one entry for flat files)."""
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    if seed_override is not None:
        raw = dict(raw, master_seed=seed_override)
    if "runs" not in raw:
        return {"run": config_from_dict(raw)}
    shared = {k: v for k, v in raw.items() if k != "runs"}
    runs = raw["runs"]
    if not isinstance(runs, dict) or not runs:
        raise ConfigError("runs: must be a non-empty mapping of named runs")
    out = {}
    for run_name, section in runs.items():
        if not isinstance(section, dict):
            raise ConfigError(f"runs.{run_name}: must be a mapping")
        merged = dict(shared)
        merged.update(section)
        if seed_override is not None:
            merged["master_seed"] = seed_override
        out[str(run_name)] = config_from_dict(merged, name=str(run_name))
    return out
