"""Command-line front end: reproducible experiment runs and artifact files.

Subcommands: encode, calibrate, learn, sweep, usage, oracle. Every run is
seeded explicitly (--seed overrides the config's master_seed); rerunning a
command with the same inputs produces byte-identical artifacts. --threads
falls back to the SPARSECODE_THREADS environment variable, then 1.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import container
from .approximator import all_good, learn_weights, reach_band
from .config import ExperimentConfig, load_config_file
from .encoder import KWinners, build_expansion, calibrate_thresholds, encode
from .errors import ConfigError, ParameterError
from .geometry import (
    beta_tail,
    cap_measure_exact,
    circle_tube_measure,
    mc_beta_tail,
    mc_cap_measure,
    mc_circle_tube_measure,
)
from .metrics import (
    derive_seed,
    run_rate_sweep,
    usage_scaling,
    write_summary_json,
    write_sweep_csv,
    write_usage_csv,
)


class CliError(Exception):
    pass


def _resolve_threads(value) -> int:
    if value is not None:
        return max(1, int(value))
    env = os.environ.get("SPARSECODE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise CliError(f"SPARSECODE_THREADS={env!r} is not an integer") from exc
    return 1


def _out_dir(args) -> Path:
    out = Path(args.out) if args.out else Path.cwd()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_runs(args) -> dict[str, ExperimentConfig]:
    if not args.config:
        raise CliError("--config is required for this command")
    return load_config_file(args.config, seed_override=args.seed)


def _single_run(args) -> ExperimentConfig:
    runs = _load_runs(args)
    if len(runs) != 1:
        raise CliError("this command needs a single-run config file")
    return next(iter(runs.values()))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_sweep(args) -> int:
    runs = _load_runs(args)
    threads = _resolve_threads(args.threads)
    out = _out_dir(args)
    stem = Path(args.config).stem
    summary = {"config_file": Path(args.config).name, "runs": {}}
    any_invalid = False
    for name, config in runs.items():
        result = run_rate_sweep(config, threads=threads)
        csv_path = out / f"{stem}_{name}.csv"
        write_sweep_csv(csv_path, result)
        payload = result.to_dict()
        payload["config"] = config.to_dict()
        summary["runs"][name] = payload
        any_invalid |= any(not p.valid for p in result.grid)
        slope = "none" if result.fitted_slope is None else f"{result.fitted_slope:+.4f}"
        print(f"run {name}: slope {slope}  ({csv_path})")
    if len(runs) == 2:
        slopes = [summary["runs"][n]["fitted_slope"] for n in runs]
        if None not in slopes:
            summary["slope_gap"] = slopes[0] - slopes[1]
    json_path = out / f"{stem}_summary.json"
    write_summary_json(json_path, summary)
    print(f"summary: {json_path}")
    if args.strict and any_invalid:
        print("strict mode: at least one grid point flagged invalid", file=sys.stderr)
        return 1
    return 0


def cmd_usage(args) -> int:
    config = _single_run(args)
    threads = _resolve_threads(args.threads)
    out = _out_dir(args)
    stem = Path(args.config).stem
    result = usage_scaling(config, threads=threads)
    csv_path = out / f"{stem}_usage.csv"
    write_usage_csv(csv_path, result)
    payload = result.to_dict()
    payload["config"] = config.to_dict()
    write_summary_json(out / f"{stem}_usage.json", payload)
    slope = "none" if result.fitted_slope is None else f"{result.fitted_slope:+.4f}"
    print(f"usage slope {slope}  ({csv_path})")
    return 0


def _build_encoder_parts(config: ExperimentConfig, m: int):
    k = config.k_for(m)
    theta = build_expansion(config.dist, m, derive_seed(config.master_seed, m, 0, 1))
    tau = None
    if config.scheme == "threshold":
        tau = calibrate_thresholds(
            theta,
            config.manifold,
            k,
            config.n_cal_for(m, k),
            derive_seed(config.master_seed, m, 0, 2),
        )
    return theta, k, tau


def cmd_calibrate(args) -> int:
    config = _single_run(args)
    m = args.m or config.m_grid[0]
    theta, k, tau = _build_encoder_parts(config, m)
    out = _out_dir(args)
    path = out / (args.name or f"{Path(args.config).stem}_m{m}.easp")
    container.save(path, theta, k=k, tau=tau)
    print(f"encoder written: {path} (m={m}, k={k}, thresholds={'yes' if tau is not None else 'no'})")
    return 0


def cmd_learn(args) -> int:
    config = _single_run(args)
    m = args.m or config.m_grid[0]
    theta, k, tau = _build_encoder_parts(config, m)
    sparsifier = tau if tau is not None else KWinners(k)
    crit = reach_band(config.manifold) if config.goodness == "reach_band" else all_good()
    model = learn_weights(
        theta,
        sparsifier,
        config.target,
        config.manifold,
        config.n_train_for(m, k),
        derive_seed(config.master_seed, m, 0, 3),
        crit,
    )
    out = _out_dir(args)
    path = out / (args.name or f"{Path(args.config).stem}_m{m}_model.easp")
    container.save_model(path, model)
    print(
        f"model written: {path} (m={m}, k={k}, "
        f"unused units={model.unused_units}, good={int(model.good_mask.sum())})"
    )
    return 0


def _parse_input_rows(path, d: int) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                vec = [float(p) for p in parts]
            except ValueError as exc:
                raise CliError(f"{path}: line {lineno}: not a numeric row") from exc
            if len(vec) != d:
                raise CliError(
                    f"{path}: line {lineno}: expected {d} values, got {len(vec)}"
                )
            rows.append(vec)
    if not rows:
        raise CliError(f"{path}: no input rows")
    return np.asarray(rows, dtype=np.float64)


def cmd_encode(args) -> int:
    box = container.load(args.encoder)
    theta = box.to_expansion()
    sparsifier = box.to_sparsifier(k_override=args.k)
    X = _parse_input_rows(args.input, theta.d)
    out_path = Path(args.output)
    with open(out_path, "w") as fh:
        for x in X:
            code = encode(theta, sparsifier, x)
            fh.write(",".join(str(j) for j in code.active))
            fh.write("\n")
    print(f"{X.shape[0]} codes written: {out_path}")
    return 0


# ---------------------------------------------------------------------------
# Oracle checks
# ---------------------------------------------------------------------------

_DEFAULT_ORACLE_CHECKS = [
    "cap_measure d=4 r=0.3",
    "cap_measure d=5 r=0.5",
    "cap_measure d=6 r=0.3",
    "cap_measure d=7 r=0.7",
    "cap_measure d=8 r=0.5",
    "cap_measure d=9 r=0.4",
    "cap_measure d=10 r=0.6",
    "tube_measure d=4 r=0.5",
    "tube_measure d=5 r=0.3",
    "tube_measure d=6 r=0.6",
    "tube_measure d=8 r=0.5",
    "tube_measure d=10 r=0.4",
    "beta_tail alpha=1 beta=1 eps=0.3 expect=0.3",
    "beta_tail alpha=1 beta=2 eps=0.5 expect=0.25",
    "beta_tail alpha=0.5 beta=1.5 eps=0.2",
    "beta_tail alpha=0.8 beta=3 eps=0.4",
]


def _parse_check(spec: str):
    tokens = spec.split()
    if not tokens:
        raise CliError("empty oracle check")
    kind = tokens[0]
    kv = {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise CliError(f"oracle check token {tok!r} is not key=value")
        key, val = tok.split("=", 1)
        kv[key] = val
    return kind, kv


def run_oracle_check(spec: str, n: int = 10**6, seed: int = 0) -> tuple[bool, str]:
    """One closed form vs Monte Carlo comparison at 3 standard errors."""
    kind, kv = _parse_check(spec)
    expect = float(kv["expect"]) if "expect" in kv else None
    n = int(kv.get("n", n))
    seed = int(kv.get("seed", seed))
    if kind == "cap_measure":
        d, r = int(kv["d"]), float(kv["r"])
        closed = cap_measure_exact(d, r).exact
        mc = mc_cap_measure(d, r, n=n, seed=seed)
    elif kind == "tube_measure":
        d, r = int(kv["d"]), float(kv["r"])
        closed = circle_tube_measure(d, r)
        mc = mc_circle_tube_measure(d, r, n=n, seed=seed)
    elif kind == "beta_tail":
        a, b, eps = float(kv["alpha"]), float(kv["beta"]), float(kv["eps"])
        tail = beta_tail(a, b, eps)
        mc = mc_beta_tail(a, b, eps, n=n, seed=seed)
        if tail.exact is not None:
            closed = tail.exact
        else:
            # only the sandwich is exact here
            ok = tail.lower <= mc.estimate <= tail.upper
            msg = (
                f"beta_tail a={a} b={b} eps={eps}: mc={mc.estimate:.6f} "
                f"in [{tail.lower:.6f}, {tail.upper:.6f}] -> {'pass' if ok else 'FAIL'}"
            )
            return ok, msg
    else:
        raise CliError(f"unknown oracle check {kind!r}")
    dev = abs(closed - mc.estimate)
    ok = dev <= 3.0 * mc.stderr
    if expect is not None:
        ok = ok and abs(closed - expect) <= 1e-9 + 1e-9 * abs(expect)
    msg = (
        f"{kind} {' '.join(f'{k}={v}' for k, v in kv.items())}: closed={closed:.8f} "
        f"mc={mc.estimate:.8f} (3se={3 * mc.stderr:.8f}, n={mc.n_samples}, seed={seed})"
        f" -> {'pass' if ok else 'FAIL'}"
    )
    return ok, msg


def cmd_oracle(args) -> int:
    checks = [args.check] if args.check else _DEFAULT_ORACLE_CHECKS
    seed = args.seed if args.seed is not None else 0
    lines = []
    all_ok = True
    for spec in checks:
        ok, msg = run_oracle_check(spec, seed=seed)
        all_ok &= ok
        lines.append(msg)
        print(msg)
    verdict = "ORACLE SUITE: pass" if all_ok else "ORACLE SUITE: FAIL"
    print(verdict)
    if args.out:
        out = _out_dir(args)
        report = out / "oracle_report.txt"
        report.write_text("\n".join(lines + [verdict]) + "\n")
        print(f"report: {report}")
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="YAML experiment config")
    p.add_argument("--seed", type=int, default=None, help="override master_seed")
    p.add_argument("--out", help="output directory (default: cwd)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (default: SPARSECODE_THREADS or 1)")
    p.add_argument("--strict", action="store_true",
                   help="exit nonzero if any grid point is flagged invalid")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsecode",
        description="Expand-and-sparsify experiment runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run approximation-rate sweeps from a config")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("usage", help="unit-usage scaling across the m grid")
    _add_common(p)
    p.set_defaults(func=cmd_usage)

    p = sub.add_parser("calibrate", help="build an expansion and calibrate thresholds")
    _add_common(p)
    p.add_argument("--m", type=int, default=None, help="unit count (default: first grid m)")
    p.add_argument("--name", help="output file name")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("learn", help="learn cell-average weights and persist the model")
    _add_common(p)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--name", help="output file name")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("encode", help="encode CSV input rows with a persisted encoder")
    _add_common(p)
    p.add_argument("--encoder", required=True, help="EASP1 container file")
    p.add_argument("--input", required=True, help="CSV of d-dimensional rows")
    p.add_argument("--output", required=True, help="output CSV of active index lists")
    p.add_argument("--k", type=int, default=None, help="override winner count")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("oracle", help="closed forms vs Monte Carlo checks")
    _add_common(p)
    p.add_argument("check", nargs="?", default=None,
                   help='e.g. "cap_measure d=6 r=0.3" (default: bundled battery)')
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ConfigError, ParameterError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
