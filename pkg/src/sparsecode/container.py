"""Flat binary container for encoders and learned models.

One file holds the expansion matrix, optionally the calibrated thresholds,
and optionally the learned readout (weights, counts, goodness mask). The
byte layout is fixed little-endian and documented field by field in
docs/formats.md; rereading a file reproduces every array bit for bit.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .approximator import ApproximatorModel
from .encoder import ExpansionMatrix, KWinners, Sparsifier, ThresholdVector
from .errors import ParameterError
from .geometry import (
    DistributionSpec,
    Manifold,
    circle,
    data_attuned,
    full_sphere,
    gaussian,
    sub_sphere,
    uniform_sphere,
)

MAGIC = b"EASP1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<5sBBBIIIIdQIIIII4x")  # 64 bytes
assert _HEADER.size == 64

_DIST_CODES = {"uniform_sphere": 0, "gaussian": 1, "data_attuned": 2}
_MANIFOLD_CODES = {None: 0, "full_sphere": 1, "circle": 2, "sub_sphere": 3}


@dataclass(frozen=True)
class Container:
    """Decoded contents of an EASP1 file."""

    rows: np.ndarray
    dist: DistributionSpec
    seed: int
    k: int
    tau: Optional[np.ndarray]
    n_cal: int
    weights: Optional[np.ndarray]
    counts: Optional[np.ndarray]
    good_mask: Optional[np.ndarray]

    def to_expansion(self) -> ExpansionMatrix:
        return ExpansionMatrix(rows=self.rows, dist=self.dist, seed=self.seed)

    def to_sparsifier(self, k_override: Optional[int] = None) -> Sparsifier:
        if self.tau is not None and k_override is None:
            m = self.rows.shape[0]
            return ThresholdVector(
                tau=self.tau,
                target_rate=(self.k if self.k else 1) / m,
                calibration_sample_size=max(self.n_cal, 1),
            )
        k = k_override if k_override is not None else self.k
        if not k:
            raise ParameterError("container holds no sparsifier parameter k")
        return KWinners(k)

    def to_model(self) -> ApproximatorModel:
        if self.weights is None:
            raise ParameterError("container holds no learned model")
        scheme = "threshold" if self.tau is not None else "wta"
        sparsifier = self.to_sparsifier()
        return ApproximatorModel(
            weights=self.weights,
            counts=self.counts.astype(np.int64),
            good_mask=self.good_mask.astype(bool),
            scheme=scheme,
            k=self.k if scheme == "wta" else max(1, round(sparsifier.target_rate * self.rows.shape[0])),
            theta=self.to_expansion(),
            tau=sparsifier if scheme == "threshold" else None,
        )


def _manifold_fields(dist: DistributionSpec):
    if dist.kind != "data_attuned":
        return 0, 0
    man = dist.manifold
    return _MANIFOLD_CODES[man.kind], man.intrinsic_dim


def save(
    path,
    theta: ExpansionMatrix,
    k: int = 0,
    tau: Optional[ThresholdVector] = None,
    model: Optional[ApproximatorModel] = None,
) -> None:
    """Write an encoder (and optionally a model) to one container file."""
    m, d = theta.rows.shape
    man_code, man_do = _manifold_fields(theta.dist)
    sigma = theta.dist.sigma if theta.dist.kind == "gaussian" else 0.0
    tau_len = m if tau is not None else 0
    w_len = m if model is not None else 0
    n_cal = tau.calibration_sample_size if tau is not None else 0
    header = _HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        _DIST_CODES[theta.dist.kind],
        man_code,
        d,
        m,
        int(k),
        man_do,
        sigma,
        theta.seed,
        tau_len,
        w_len,
        w_len,
        w_len,
        n_cal,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(theta.rows, dtype="<f8").tobytes())
        if tau is not None:
            fh.write(np.ascontiguousarray(tau.tau, dtype="<f8").tobytes())
        if model is not None:
            fh.write(np.ascontiguousarray(model.weights, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(model.counts, dtype="<u8").tobytes())
            fh.write(np.ascontiguousarray(model.good_mask, dtype="<u1").tobytes())


def save_model(path, model: ApproximatorModel) -> None:
    save(
        path,
        model.theta,
        k=model.k,
        tau=model.tau,
        model=model,
    )


def _rebuild_dist(code: int, d: int, man_code: int, man_do: int, sigma: float) -> DistributionSpec:
    if code == 0:
        return uniform_sphere(d)
    if code == 1:
        return gaussian(d, sigma=sigma)
    if code == 2:
        if man_code == 1:
            man: Manifold = full_sphere(d)
        elif man_code == 2:
            man = circle(d)
        elif man_code == 3:
            man = sub_sphere(d, man_do)
        else:
            raise ParameterError("data-attuned container missing manifold kind")
        return data_attuned(man)
    raise ParameterError(f"unknown distribution code {code}")


def load(path) -> Container:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise ParameterError("file too short for an EASP1 header")
        (
            magic,
            version,
            dist_code,
            man_code,
            d,
            m,
            k,
            man_do,
            sigma,
            seed,
            tau_len,
            w_len,
            c_len,
            g_len,
            n_cal,
        ) = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise ParameterError("not an EASP1 container (bad magic)")
        if version != FORMAT_VERSION:
            raise ParameterError(f"unsupported container version {version}")

        def read_array(count, dtype):
            nbytes = count * np.dtype(dtype).itemsize
            buf = fh.read(nbytes)
            if len(buf) != nbytes:
                raise ParameterError("container truncated")
            return np.frombuffer(buf, dtype=dtype)

        rows = read_array(m * d, "<f8").reshape(m, d)
        tau = read_array(tau_len, "<f8") if tau_len else None
        weights = read_array(w_len, "<f8") if w_len else None
        counts = read_array(c_len, "<u8") if c_len else None
        good = read_array(g_len, "<u1").astype(bool) if g_len else None
    dist = _rebuild_dist(dist_code, d, man_code, man_do, sigma)
    return Container(
        rows=rows,
        dist=dist,
        seed=seed,
        k=k,
        tau=tau,
        n_cal=n_cal,
        weights=weights,
        counts=counts,
        good_mask=good,
    )
