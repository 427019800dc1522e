"""Command-line front end.

    gametree price --config run.json
    gametree region --config run.json --out results/
    gametree converge --config sweep.json --out results/
    gametree verify-embedding --config emb.json
    gametree mc-value --config run.json --seed 7
    gametree oracle --config tiny.json

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import pydantic

from .config import RunConfig, load_config
from .convergence import sweep
from .errors import NumericalError, ValidationError
from .lattice import build_lattice
from .mc import evaluate_strategies, verify_embedding
from .oracle import brute_force_value
from .payoff import build
from .solver import solve, stopping_region

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _emit(payload: dict, cfg: RunConfig):
    payload["config"] = cfg.model_dump(mode="json")
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])


def _solved(cfg: RunConfig, keep_surface=None):
    cfg.require("payoff", "s0", "n")
    spec = cfg.payoff.spec()
    lattice = build_lattice(cfg.model.build(), cfg.s0, spec.maturity, cfg.n)
    payoff = build(spec)
    start = time.perf_counter()
    sol = solve(lattice, payoff, keep_surface=cfg.keep_surface if keep_surface is None else keep_surface,
                tol=cfg.tolerance)
    return sol, (time.perf_counter() - start) * 1e3


def cmd_price(cfg: RunConfig, args):
    sol, ms = _solved(cfg, keep_surface=cfg.keep_surface or bool(args.dump_surface))
    if args.dump_lattice:
        _write_csv(Path(args.dump_lattice), ["i", "z", "s", "p_up", "p_mid", "p_down"], sol.lattice.rows())
    if args.dump_surface:
        _write_csv(Path(args.dump_surface),
                   ["k", "i", "t", "s", "J", "f", "g", "buyer_stop", "seller_stop"],
                   _surface_rows(sol))
    _emit({"value": sol.value, "n": sol.n, "h": sol.h,
           "convention": cfg.payoff.convention.value, "wall_time_ms": ms}, cfg)


def _surface_rows(sol):
    n, s = sol.n, sol.lattice.s
    for k in range(n + 1):
        f, g = sol.obstacles(k)
        for j in range(n - k, n + k + 1):
            yield (k, j - n, k * sol.h, float(s[j]), float(sol.surface[k, j]), float(f[j]),
                   float(g[j]) if g is not None else "", int(sol.buyer_stop[k, j]),
                   int(sol.seller_stop[k, j]))


def cmd_region(cfg: RunConfig, args):
    sol, _ = _solved(cfg)
    out = _out_dir(args)
    summary = {"value": sol.value, "n": sol.n}
    for side in ("buyer", "seller"):
        region = stopping_region(sol, side, cfg.window_sd)
        path = out / f"{side}_region.csv"
        _write_csv(path, ["side", "t", "s_lo", "s_hi"], region.csv_rows())
        summary[side] = {"csv": str(path), "last_active_t": region.last_active_time(),
                         "nonempty_rows": len(region.boundary())}
    _emit(summary, cfg)


def cmd_converge(cfg: RunConfig, args):
    cfg.require("payoff")
    s0_list = cfg.s0_list or ([cfg.s0] if cfg.s0 else None)
    n_list = cfg.n_list or ([cfg.n] if cfg.n else None)
    if not s0_list or not n_list:
        raise ValidationError("converge needs s0_list (or s0) and n_list (or n)")
    res = sweep(cfg.model.build(), cfg.payoff.spec(), s0_list, n_list, threads=cfg.threads)
    out = _out_dir(args)
    _write_csv(out / "sweep.csv", ["s0", "n", "value", "wall_time_ms"],
               ((r.s0, r.n, r.value, r.wall_time * 1e3) for r in res.rows))
    _write_csv(out / "diffs.csv", ["s0", "n_from", "n_to", "abs_diff"],
               ((s0, a, b, d) for s0, ds in res.diffs.items() for a, b, d in ds))
    _emit({"sweep_csv": str(out / "sweep.csv"), "diffs_csv": str(out / "diffs.csv"),
           "values": [{"s0": r.s0, "n": r.n, "value": r.value} for r in res.rows],
           "empirical_cauchy_rate": {repr(s0): rate for s0, rate in res.rates.items()}}, cfg)


def cmd_verify_embedding(cfg: RunConfig, args):
    cfg.require("s0", "h")
    stats = verify_embedding(cfg.model.build(), math.log(cfg.s0), cfg.h, cfg.m, cfg.seed,
                             dt=cfg.dt, threads=cfg.threads)
    _emit(stats.to_dict(), cfg)


def cmd_mc_value(cfg: RunConfig, args):
    sol, _ = _solved(cfg, keep_surface=False)
    res = evaluate_strategies(sol, cfg.model.build(), sol.payoff, cfg.mode, cfg.m, cfg.seed,
                              dt=cfg.dt, threads=cfg.threads)
    payload = res.to_dict()
    payload["lattice_value"] = sol.value
    _emit(payload, cfg)


def cmd_oracle(cfg: RunConfig, args):
    sol, _ = _solved(cfg, keep_surface=False)
    inf_sup, sup_inf = brute_force_value(sol.lattice, sol.payoff)
    _emit({"solver_value": sol.value, "oracle_infsup": inf_sup, "oracle_supinf": sup_inf}, cfg)


COMMANDS = {
    "price": cmd_price,
    "region": cmd_region,
    "converge": cmd_converge,
    "verify-embedding": cmd_verify_embedding,
    "mc-value": cmd_mc_value,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gametree", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file path or inline JSON object")
        p.add_argument("--out", help="output directory for CSV artifacts")
        p.add_argument("--threads", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--s0", type=float)
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--dt", type=float)
        p.add_argument("--h", type=float)
        p.add_argument("--mode", choices=["both", "buyer_only", "seller_only"])
        if name == "price":
            p.add_argument("--dump-lattice", metavar="CSV", help="write (i, z, s, p_up, p_mid, p_down)")
            p.add_argument("--dump-surface", metavar="CSV", help="write the full value surface")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in ("threads", "seed", "s0", "n", "m", "dt", "h", "mode")}
    try:
        cfg = load_config(args.config, overrides)
        COMMANDS[args.command](cfg, args)
    except (ValidationError, pydantic.ValidationError, json.JSONDecodeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
