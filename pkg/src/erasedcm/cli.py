"""Command-line front end: ``erasedcm {generate,sweep,fit,oracle,bounds,tauberian}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .cm_core import empirical_degree_distance, erase, pair_stubs
from .degree_model import DegreeDistribution, mean_degree, sample_sequence
from .estimators import bound_report, loglog_fit, tauberian_term
from .experiment import (
    DEFAULT_GAMMAS,
    SweepPlan,
    fit_all,
    read_records,
    run_sweep,
    write_fits,
    write_plot_data,
)
from .oracle import MAX_STUBS, bound_checks, enumerate_exact

logger = logging.getLogger("erasedcm")


class CliError(Exception):
    pass


def _float_list(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _int_list(text):
    return [int(float(x)) for x in str(text).split(",") if x.strip()]


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise CliError("config file must hold a JSON object")
    return cfg


def _pick(args, cfg, flag, *keys, default=None):
    """Flag value if given, else the first config key present, else default."""
    v = getattr(args, flag, None)
    if v is not None:
        return v
    for k in keys:
        if k in cfg:
            return cfg[k]
    return default


def _scalar(v):
    # a config grid given to a single-valued command takes its first entry
    if isinstance(v, (list, tuple)):
        return v[0]
    if isinstance(v, str) and "," in v:
        return v.split(",")[0]
    return v


def _dist_from(args, cfg) -> DegreeDistribution:
    gamma = _pick(args, cfg, "gamma", "gamma", "gamma_grid")
    if gamma is None:
        raise CliError("--gamma is required")
    k_min = _pick(args, cfg, "kmin", "k_min", default=1)
    return DegreeDistribution(float(_scalar(gamma)), int(_scalar(k_min)))


def _seed_from(args, cfg) -> int:
    seed = int(_scalar(_pick(args, cfg, "seed", "seed", "master_seed", default=0)))
    if not 0 <= seed < 2**64:
        raise CliError("--seed must be a 64-bit unsigned integer")
    return seed


def cmd_generate(args, cfg) -> int:
    out = _pick(args, cfg, "out", "out", "output_path")
    if out is None:
        raise CliError("--out is required")
    seed = _seed_from(args, cfg)
    rng = np.random.default_rng(seed)
    header = {}
    if args.degrees is not None:
        seq = io.parse_degrees(args.degrees)
        dist = _dist_from(args, cfg) if _pick(args, cfg, "gamma", "gamma", "gamma_grid") is not None else None
    else:
        dist = _dist_from(args, cfg)
        n = _pick(args, cfg, "n", "n", "n_grid")
        if n is None:
            raise CliError("--n is required")
        n = int(float(_scalar(n)))
        if n < 1:
            raise CliError("--n must be >= 1")
        seq = sample_sequence(n, dist, rng)
        header = {"n": n, "gamma": dist.gamma, "k_min": dist.k_min, "seed": seed}

    g = pair_stubs(seq, rng)
    simple, stats = erase(g)
    prefix = Path(out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    io.write_degree_sequence(f"{prefix}.degrees.txt", seq, **header)
    io.write_multigraph(f"{prefix}.multigraph.txt", g)
    io.write_simple_graph(f"{prefix}.simple.txt", simple)
    payload = {"n": seq.n, "seed": seed, "evenized": seq.evenized, **stats.to_dict()}
    if dist is not None:
        payload["gamma"] = dist.gamma
        payload["k_min"] = dist.k_min
        payload["empirical_degree_distance"] = empirical_degree_distance(simple, dist)
    io.write_json(f"{prefix}.stats.json", payload)
    print(json.dumps(payload))
    return 0


def _plan_from(args, cfg) -> SweepPlan:
    gammas = _pick(args, cfg, "gamma", "gamma_grid", default=list(DEFAULT_GAMMAS))
    ns = _pick(args, cfg, "n", "n_grid", default=[10**3, 10**4, 10**5, 10**6])
    gammas = _float_list(gammas) if isinstance(gammas, str) else [float(g) for g in np.atleast_1d(gammas)]
    ns = _int_list(ns) if isinstance(ns, str) else [int(n) for n in np.atleast_1d(ns)]
    return SweepPlan(
        gamma_grid=tuple(gammas),
        n_grid=tuple(ns),
        replications=int(_pick(args, cfg, "reps", "replications", default=50)),
        k_min=int(_pick(args, cfg, "kmin", "k_min", default=1)),
        master_seed=_seed_from(args, cfg),
        output_path=str(_pick(args, cfg, "out", "output_path", default="sweep.csv")),
    )


def _emit_fits(records, csv_path: Path, min_reps: int) -> None:
    try:
        fits = fit_all(records, min_replications=min_reps)
    except ValueError as exc:
        logger.warning("fit skipped: %s", exc)
        fits = []
    write_fits(csv_path.with_suffix(".fits.json"), fits)
    write_plot_data(csv_path.parent / f"{csv_path.stem}_plot", records)
    for f in fits:
        print(
            f"gamma={f.gamma:g} slope={f.fitted_slope:.4f} +/- {f.slope_stderr:.4f} "
            f"theory={f.theoretical_slope:.4f}"
        )


def cmd_sweep(args, cfg) -> int:
    plan = _plan_from(args, cfg)
    threads = _pick(args, cfg, "threads", "threads")
    records = run_sweep(plan, threads=threads, resume=not args.no_resume)
    _emit_fits(records, Path(plan.output_path), args.min_reps)
    return 0


def cmd_fit(args, cfg) -> int:
    path = Path(args.records)
    records = read_records(path)
    if not records:
        raise CliError(f"{path}: no records")
    out = Path(args.out) if args.out else path.with_suffix(".fits.json")
    fits = fit_all(records, min_replications=args.min_reps)
    write_fits(out, fits)
    write_plot_data(out.parent / f"{path.stem}_plot", records)
    print(json.dumps([f.__dict__ for f in fits], indent=2))
    return 0


def cmd_oracle(args, cfg) -> int:
    seq = io.parse_degrees(args.degrees)
    if seq.L_n > MAX_STUBS:
        raise CliError(f"L_n = {seq.L_n} exceeds the enumeration limit L_n <= {MAX_STUBS}")
    exact = enumerate_exact(seq)
    payload = exact.to_dict()
    text = json.dumps(payload, indent=2)
    print(text)
    if args.out:
        io.write_json(args.out, payload)
    for name, ok, detail in bound_checks(exact, running=args.running):
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 0


def cmd_bounds(args, cfg) -> int:
    probs = None
    if args.degrees is not None:
        seq = io.parse_degrees(args.degrees)
    else:
        dist = _dist_from(args, cfg)
        n = _pick(args, cfg, "n", "n", "n_grid")
        if n is None:
            raise CliError("--n or --degrees is required")
        seq = sample_sequence(int(float(_scalar(n))), dist, np.random.default_rng(_seed_from(args, cfg)))
    if seq.L_n == 0:
        raise CliError("degree sum is zero")
    if seq.L_n <= MAX_STUBS:
        probs = enumerate_exact(seq).no_edge_matrix()
    payload = bound_report(seq, probs).to_dict()
    print(json.dumps(payload))
    if args.out:
        io.write_json(args.out, payload)
    return 0


def cmd_tauberian(args, cfg) -> int:
    dist = _dist_from(args, cfg)
    ts = _float_list(args.t)
    values = [tauberian_term(dist, t) for t in ts]
    payload = {
        "gamma": dist.gamma,
        "k_min": dist.k_min,
        "mean": mean_degree(dist),
        "t": ts,
        "value": values,
    }
    if len(ts) >= 2:
        payload["loglog_slope"] = loglog_fit(ts, values).slope
    print(json.dumps(payload, indent=2))
    if args.out:
        io.write_json(args.out, payload)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--gamma", help="tail exponent (comma list for sweep)")
    common.add_argument("--kmin", type=int, help="minimum degree")
    common.add_argument("--n", help="number of nodes (comma list for sweep)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--reps", type=int, help="replications per (gamma, n)")
    common.add_argument("--out", help="output path or prefix")
    common.add_argument("--config", help="JSON config; flags override it")
    common.add_argument("--threads", type=int, help="worker processes (default: all cores)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="erasedcm", description="Erased configuration model experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="sample one ECM graph")
    g.add_argument("--degrees", help="fixed degrees, literal '1,1' or a degree file")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("sweep", parents=[common], help="replicated trials over a (gamma, n) grid")
    s.add_argument("--no-resume", action="store_true", help="ignore existing records")
    s.add_argument("--min-reps", type=int, default=10, help="replications required to fit")
    s.set_defaults(func=cmd_sweep)

    f = sub.add_parser("fit", parents=[common], help="fit scaling exponents from a record CSV")
    f.add_argument("records", help="record CSV written by sweep")
    f.add_argument("--min-reps", type=int, default=10)
    f.set_defaults(func=cmd_fit)

    o = sub.add_parser("oracle", parents=[common], help="exact enumeration for tiny sequences")
    o.add_argument("degrees", help="degrees, literal '2,2' or a degree file")
    o.add_argument("--running", action="store_true", help="use the running-denominator no-edge bound")
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bounds", parents=[common], help="bound report for a degree sequence")
    b.add_argument("--degrees", help="fixed degrees instead of sampling")
    b.set_defaults(func=cmd_bounds)

    t = sub.add_parser("tauberian", parents=[common], help="Tauberian term of D1*D2")
    t.add_argument("--t", default="1e2,1e3,1e4,1e5", help="comma list of t values")
    t.set_defaults(func=cmd_tauberian)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _load_config(args.config)
        return args.func(args, cfg)
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
