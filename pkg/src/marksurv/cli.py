"""Command-line front end.

Four subcommands: ``simulate`` writes a trajectory CSV, ``fit`` estimates
(rho, nu) on a dataset, ``predict`` emits survivor curves for plotting, and
``blocks`` tabulates Monte Carlo and exact block-count statistics.  Every
stochastic command requires an explicit seed so runs are reproducible; all
numeric output is printed with six significant digits.  Exit codes: 0
success, 2 usage, 3 data, 4 numeric.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import ranking
from .datasets import DataError, load_dataset
from .index import NumericError, ParameterError, index_from_spec
from .inference import (empirical_bayes_curve, fit_exponential, fit_mle,
                        fit_moment, kaplan_meier, profile_interval,
                        risk_trajectory)
from .process import simulate, trajectory_to_csv
from .random_measure import ResourceError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

OUTDIR_ENV = "MARKSURV_OUTDIR"


def _fmt(x) -> str:
    return f"{x:.6g}"


def _out_path(path: str) -> str:
    base = os.environ.get(OUTDIR_ENV)
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


def _index_from_args(args) -> object:
    family = args.family
    if family in ("harmonic", "gamma"):
        return index_from_spec(family, nu=args.nu, rho=args.rho)
    if family == "power":
        return index_from_spec(family, alpha=args.alpha)
    if family == "geometric":
        return index_from_spec(family, alpha=args.alpha)
    if family == "linear":
        return index_from_spec(family)
    if family == "linear-shift":
        return index_from_spec(family, rho=args.rho)
    if family == "beta":
        return index_from_spec(family, rho=args.rho, beta=args.beta)
    raise ParameterError(f"unknown family {family!r}")


def _parse_grid(spec: str) -> np.ndarray:
    try:
        a, b, step = (float(p) for p in spec.split(":"))
    except ValueError as exc:
        raise ParameterError(f"grid must be a:b:step, got {spec!r}") from exc
    if step <= 0 or b < a:
        raise ParameterError(f"bad grid {spec!r}")
    return np.arange(a, b + 0.5 * step, step)


def cmd_simulate(args) -> int:
    index = _index_from_args(args)
    rng = np.random.default_rng(args.seed)
    traj = simulate(args.n, index, rng=rng)
    text = trajectory_to_csv(traj)
    path = _out_path(args.out)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"n={traj.n_initial} events={len(traj.events)} "
          f"distinct_failure_times={traj.num_failure_times}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_fit(args) -> int:
    data = load_dataset(args.data)
    if args.family == "exponential":
        base = fit_exponential(data)
        payload = {"family": "exponential", "rate": base.rate,
                   "mean": base.mean, "loglik": base.loglik}
    else:
        payload = {}
        methods = ("mle", "moment") if args.method == "both" else (args.method,)
        for method in methods:
            if method == "mle":
                fit = fit_mle(data, args.family, fix_rho=args.fix_rho)
                lo, hi = (math.nan, math.nan) if fit.fixed_rho else \
                    profile_interval(fit, 0.95)
                entry = fit.to_dict()
                entry["ci_log_rho_95"] = [lo, hi]
            else:
                fit = fit_moment(data, args.family)
                entry = fit.to_dict()
            payload[method] = entry
    path = _out_path(args.out)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_round_floats(payload), fh, indent=2)
        fh.write("\n")
    _print_fit_summary(payload)
    print(f"wrote {path}")
    return EXIT_OK


def _round_floats(obj):
    if isinstance(obj, float):
        return float(_fmt(obj)) if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round_floats(v) for v in obj]
    return obj


def _print_fit_summary(payload: dict) -> None:
    if "rate" in payload:
        print(f"exponential rate={_fmt(payload['rate'])} "
              f"mean={_fmt(payload['mean'])}")
        return
    for method, entry in payload.items():
        print(f"{method}: rho={_fmt(entry['rho'])} nu={_fmt(entry['nu'])} "
              f"loglik={_fmt(entry['loglik'])}")


def cmd_predict(args) -> int:
    data = load_dataset(args.data)
    grid = _parse_grid(args.grid)
    traj = risk_trajectory(data)
    km = kaplan_meier(data)
    expo = fit_exponential(data)
    curves = {}
    for family in ("harmonic", "gamma"):
        fit = fit_mle(data, family, fix_rho=args.fix_rho)
        curve = empirical_bayes_curve(data, fit, grid)
        curves[family] = curve.survival
    lines = ["t,S_harmonic,S_gamma,S_KM,S_exponential"]
    km_vals = km(grid)
    for i, t in enumerate(grid):
        lines.append(",".join([
            _fmt(t),
            _fmt(curves["harmonic"][i]),
            _fmt(curves["gamma"][i]),
            _fmt(km_vals[i]),
            _fmt(math.exp(-expo.rate * t)),
        ]))
    path = _out_path(args.out)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_blocks(args) -> int:
    index = _index_from_args(args)
    rng = np.random.default_rng(args.seed)
    n_list = [int(tok) for tok in args.n_list.split(",") if tok]
    if not n_list:
        raise ParameterError("empty n list")
    rows = ranking.block_growth_probe(index, n_list, args.reps, rng)
    label = index.describe()
    name, _, params = label.partition("(")
    lines = ["n,mean_k,se,reps,expected_k,family,params"]
    for row in rows:
        exact = ranking.expected_blocks(row.n, index)
        lines.append(f"{row.n},{_fmt(row.mean_blocks)},{_fmt(row.se)},"
                     f"{row.reps},{_fmt(exact)},{name},"
                     f"\"{params.rstrip(')')}\"")
    path = _out_path(args.out)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="marksurv",
        description="Exchangeable Markov survival processes: simulate, fit, "
                    "predict, and probe block statistics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_family(p, fit_only=False):
        choices = (["harmonic", "gamma", "exponential"] if fit_only else
                   ["harmonic", "gamma", "power", "beta", "geometric",
                    "linear", "linear-shift"])
        p.add_argument("--family", default="harmonic", choices=choices)
        p.add_argument("--rho", type=float, default=1.0)
        p.add_argument("--nu", type=float, default=1.0)
        if not fit_only:
            p.add_argument("--alpha", type=float, default=0.5)
            p.add_argument("--beta", type=float, default=0.5)

    p = sub.add_parser("simulate", help="simulate one trajectory")
    add_family(p)
    p.add_argument("-n", type=int, required=True, help="sample size")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="trajectory.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="estimate (rho, nu) from data")
    add_family(p, fit_only=True)
    p.add_argument("--data", required=True,
                   help="CSV/token file path or builtin:gehan")
    p.add_argument("--method", default="mle",
                   choices=["mle", "moment", "both"])
    p.add_argument("--fix-rho", type=float, default=None, dest="fix_rho")
    p.add_argument("--out", default="fit.json")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="survivor curves on a grid")
    p.add_argument("--data", required=True)
    p.add_argument("--grid", default="0:35:0.5", help="a:b:step")
    p.add_argument("--fix-rho", type=float, default=None, dest="fix_rho")
    p.add_argument("--out", default="curves.csv")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("blocks", help="block-count statistics")
    add_family(p)
    p.add_argument("--n-list", required=True, dest="n_list",
                   help="comma-separated sample sizes")
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="blocks.csv")
    p.set_defaults(func=cmd_blocks)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, ResourceError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
