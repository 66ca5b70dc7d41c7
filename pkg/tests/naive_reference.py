"""Independent plain-Python reimplementation of the pipeline.

Used as a brute-force oracle: explicit per-unit dot-product loops, full sorts
for winner selection, dictionary accumulation for cell averages, and direct
membership recomputation at prediction time. No shared code with the package
beyond numpy scalars (so transcendental primitives agree bit for bit).
"""

import math

import numpy as np


def naive_expand(rows, x):
    m = len(rows)
    d = len(x)
    y = []
    for j in range(m):
        acc = 0.0
        for i in range(d):
            acc += rows[j][i] * x[i]
        y.append(acc)
    return y


def naive_kwta(y, k):
    """Indices of the k largest values; equal values win by lower index."""
    order = sorted(range(len(y)), key=lambda j: (-y[j], j))
    return sorted(order[:k])


def naive_threshold(y, tau):
    return [j for j in range(len(y)) if y[j] >= tau[j]]


def naive_calibrate(rows, X, k):
    """Per-unit ascending order statistic at index ceil((1 - k/m) n), 1-based
    (clamped to the minimum for the all-fire rate)."""
    m = len(rows)
    n = len(X)
    idx = max(1, math.ceil((1.0 - k / m) * n))
    tau = []
    for j in range(m):
        vals = sorted(naive_unit_projections(rows[j], X))
        tau.append(vals[idx - 1])
    return tau


def naive_unit_projections(row, X):
    out = []
    for x in X:
        acc = 0.0
        for i in range(len(x)):
            acc += row[i] * x[i]
        out.append(acc)
    return out


def naive_target(kind, params, x):
    if kind == "constant":
        return params["value"]
    if kind == "coordinate":
        return x[params["axis"]]
    if kind == "triangular":
        lam = params["lam"]
        ang = float(np.arctan2(x[1], x[0]))  # shares only the libm primitive
        if ang <= 0.0:
            ang = ang + 2.0 * math.pi
        if ang <= math.pi:
            return 2.0 * lam * ang / math.pi
        return 2.0 * lam * (2.0 * math.pi - ang) / math.pi
    raise ValueError(kind)


def naive_good_mask(rows, manifold_kind, head, half_reach):
    """head = number of leading coordinates spanning the manifold block."""
    good = []
    for row in rows:
        s = math.sqrt(sum(row[i] * row[i] for i in range(head)))
        if s == 0.0:
            good.append(False)
            continue
        proj = [row[i] / s if i < head else 0.0 for i in range(len(row))]
        delta = math.sqrt(sum((row[i] - proj[i]) ** 2 for i in range(len(row))))
        good.append(delta < half_reach)
    return good


def naive_learn(rows, scheme, k, tau, X_train, target_kind, target_params, good):
    """Cell-average weights accumulated in training order."""
    m = len(rows)
    sums = [0.0] * m
    counts = [0] * m
    for x in X_train:
        y = naive_expand(rows, x)
        active = naive_kwta(y, k) if scheme == "wta" else naive_threshold(y, tau)
        f = naive_target(target_kind, target_params, x)
        for j in active:
            sums[j] += f
            counts[j] += 1
    weights = [
        sums[j] / counts[j] if (good[j] and counts[j] > 0) else 0.0 for j in range(m)
    ]
    return weights, counts


def naive_predict(rows, scheme, k, tau, weights, good, x):
    y = naive_expand(rows, x)
    if scheme == "wta":
        active = naive_kwta(y, k)
        return math.fsum(weights[j] for j in active) / k, True
    active = [j for j in naive_threshold(y, tau) if good[j]]
    if not active:
        return 0.0, False
    return math.fsum(weights[j] for j in active) / len(active), True
