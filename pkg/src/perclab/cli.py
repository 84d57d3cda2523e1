"""``perc-lab`` command-line front end.

Exit codes: 0 success (or lab pass), 1 lab fail, 2 usage errors, infeasible
scales, unreachable targets and inconclusive labs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from . import estimators as est
from . import geometry as geo
from .graphs import GraphSpecError, generate, metric_profile
from .labs import LABS, PLOT_NAMES, PLOTS, ExperimentManifest, _clean, default_manifest, run_lab

DEFAULT_SEED = 0xC12C1E
SEED_ENV = "PERC_LAB_SEED"

QUANTITIES = ("two-point", "min-two-point", "tail", "giant", "mu", "kappa", "cost", "orange", "green")


class UsageError(Exception):
    pass


def resolve_seed(flag: int | None) -> int:
    """--seed beats PERC_LAB_SEED, which beats the built-in default."""
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env, 0)
        except ValueError:
            raise UsageError(f"{SEED_ENV} is not an integer: {env!r}") from None
    return DEFAULT_SEED


def _dump(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _emit(record: dict, out: str | None, name: str) -> None:
    text = _dump(record)
    sys.stdout.write(text)
    if out:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        (path / name).write_text(text)


# ---------------------------------------------------------------- graph

def cmd_graph(args) -> int:
    g = generate(args.spec)
    prof = metric_profile(g)
    metrics = {"spec": g.spec_string, "vertices": g.vertex_count, "edges": g.edge_count, "degree": g.degree,
               "diameter": prof.diameter, "growth": prof.growth.tolist()}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        g.write_edge_list(out / "graph.edges")
        (out / "metrics.json").write_text(_dump(metrics))
    print(f"{g.spec_string}: |V|={g.vertex_count} |E|={g.edge_count} degree={g.degree} diameter={prof.diameter}")
    return 0


# ---------------------------------------------------------------- estimate

def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise UsageError(f"{args.quantity} needs --{n.replace('_', '-')}")


def _t_param(args) -> float:
    if args.t is not None:
        return args.t
    if args.phi is not None:
        if args.phi >= 1:
            return math.inf
        if args.phi <= 0:
            return -math.inf
        return est.phi_inv(args.phi)
    raise UsageError(f"{args.quantity} needs --t or --phi")


def cmd_estimate(args) -> int:
    g = generate(args.graph)
    seed = resolve_seed(args.seed)
    q, T, W = args.quantity, args.trials, args.workers
    params = {k: v for k, v in vars(args).items()
              if k in ("p", "u", "v", "r", "n", "alpha", "h", "m", "t", "phi", "paths_budget") and v is not None}
    extra = {}
    if q == "two-point":
        _need(args, "p", "u", "v")
        e = est.two_point(g, args.p, args.u, args.v, T, seed, workers=W)
    elif q == "min-two-point":
        _need(args, "p", "r")
        e, extra["argmin"] = est.min_two_point_over_ball(g, args.p, args.r, T, seed, workers=W)
    elif q == "tail":
        _need(args, "p", "n")
        e = est.tail_Ko(g, args.p, int(args.n), T, seed, workers=W)
    elif q == "giant":
        _need(args, "p", "alpha")
        if not 0 < args.alpha <= 1:
            raise UsageError("alpha must lie in (0, 1]")
        e = est.giant_prob(g, args.p, args.alpha, T, seed, workers=W)
    elif q == "mu":
        _need(args, "p", "h")
        e = est.mu_ph(g, args.p, args.h, T, seed, workers=W)
    elif q == "kappa":
        _need(args, "p", "m", "n")
        res = est.corridor_kappa(g, args.p, args.m, args.n, T, args.paths_budget, seed, workers=W)
        e = res.estimate
        extra.update(path=res.path, length=res.length, clamped=res.clamped, upper_estimate=True)
    elif q == "cost":
        _need(args, "p", "n")
        rep = est.uniqueness_zone_and_cost(g, args.p, args.n, T, seed, workers=W)
        e = rep.piv_prob_at_U
        extra.update(U=rep.U, cost=rep.cost, threshold=rep.threshold, certified=rep.certified)
    else:
        _need(args, "n")
        t = _t_param(args)
        if q == "orange":
            s = est.orange_status(g, args.n, t, T, seed, workers=W)
        else:
            s = est.green_status(g, args.n, t, T, seed, args.paths_budget, workers=W)
        e = s.estimate
        extra.update(verdict=s.verdict, margin=s.margin, threshold=s.threshold, reason=s.reason, clamped=s.clamped)
    if e is not None:
        record = est.result_record(q, g, params, e, seed)
    else:
        record = {"quantity": q, "graph": g.spec_string, "params": params, "point": None, "ci": None,
                  "trials": T, "seed": seed}
    record.update(extra)
    _emit(record, args.out, "result.json")
    return 0


# ---------------------------------------------------------------- solve

def cmd_solve(args) -> int:
    g = generate(args.graph)
    seed = resolve_seed(args.seed)
    if args.kind == "qG":
        res = est.q_threshold(g, args.tol, args.trials, seed, args.workers)
        params = {"kind": "qG", "tol": args.tol}
    else:
        if args.alpha is None or args.delta is None:
            raise UsageError("pc-alpha-delta needs --alpha and --delta")
        if not 0 < args.alpha <= 1:
            raise UsageError("alpha must lie in (0, 1]")
        res = est.pc_alpha_delta(g, args.alpha, args.delta, args.tol, args.trials, seed, args.workers)
        params = {"kind": "pc-alpha-delta", "tol": args.tol, "alpha": args.alpha, "delta": args.delta}
    record = {"quantity": "threshold", "graph": g.spec_string, "params": params, "p": res.p,
              "target": res.target, "bracket": list(res.bracket), "p_ci": list(res.p_ci) if res.p_ci else None,
              "trials_per_eval": res.trials_per_eval, "point": res.estimate.point,
              "ci": [res.estimate.ci_low, res.estimate.ci_high], "seed": seed}
    _emit(record, args.out, "result.json")
    return 0


# ---------------------------------------------------------------- lab

def cmd_lab(args) -> int:
    if args.name not in LABS:
        raise UsageError(f"unknown lab {args.name!r}; choose from {', '.join(sorted(LABS))}")
    manifest = ExperimentManifest.load(args.manifest) if args.manifest else default_manifest(args.name)
    if args.seed is not None:
        manifest.base_seed = args.seed
    report = run_lab(args.name, manifest, args.workers)
    out = Path(args.out)
    report.write(out)
    if args.plots:
        from .plotting import line_chart
        x, ys, group = PLOTS[args.name]
        line_chart(out / "series.csv", x, ys, group, out / PLOT_NAMES[args.name], args.name)
    for row in report.rows:
        print(f"{row.verdict:>12}  {row.tag}  lhs={_short(row.lhs)} rhs={_short(row.rhs)}")
    print(f"{args.name}: {report.verdict}")
    return report.exit_code


def _short(x) -> str:
    x = _clean(x)
    if isinstance(x, float):
        return f"{x:.4g}"
    return json.dumps(x) if isinstance(x, (list, dict)) else str(x)


# ---------------------------------------------------------------- geometry

def cmd_geometry(args) -> int:
    from .labs import audit_graph
    g = generate(args.spec)
    a = audit_graph(g, args.instances, resolve_seed(args.seed))
    gq = a["gamma"]
    summary = {
        "graph": g.spec_string,
        "diameter": a["diameter"],
        "ball_removal": {str(k): v for k, v in a["removal"].items()},
        "exposed_sphere_minimal_cutset": {str(k): v for k, v in a["exposed"].items()},
        "delta_bracket": vars(a["bracket"]),
        "timar_connected": a["timar"],
        "gh_lower": a["lower"].value,
        "gh_upper": a["upper"].value,
        "gh_upper_trivial": a["upper"].trivial,
        "gamma": list(gq.gamma),
        "gamma_plus": list(gq.gamma_plus),
        "exceeds_graph": gq.exceeds_graph,
        "class": a["class"],
    }
    _emit(summary, args.out, "geometry.json")
    if args.out:
        out = Path(args.out)
        (out / "gh_upper.json").write_text(a["upper"].to_json() + "\n")
        (out / "gh_lower.json").write_text(a["lower"].to_json() + "\n")
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="perc-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, trials=1000):
        p.add_argument("--trials", type=int, default=trials)
        p.add_argument("--seed", type=lambda s: int(s, 0), default=None)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("-o", "--out", default=None)

    p = sub.add_parser("graph", help="generate a graph and write its edge list and metrics")
    p.add_argument("spec")
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("estimate", help="run one Monte Carlo estimator")
    p.add_argument("quantity", choices=QUANTITIES)
    p.add_argument("--graph", required=True)
    for name, typ in (("p", float), ("u", int), ("v", int), ("r", float), ("n", float), ("alpha", float),
                      ("h", float), ("m", float), ("t", float), ("phi", float)):
        p.add_argument(f"--{name}", type=typ, default=None)
    p.add_argument("--paths-budget", type=int, default=4)
    common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("solve", help="solve for a threshold parameter")
    p.add_argument("kind", choices=("qG", "pc-alpha-delta"))
    p.add_argument("--graph", required=True)
    p.add_argument("--tol", type=float, default=0.01)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("lab", help="run a named experiment")
    p.add_argument("name")
    p.add_argument("--manifest", default=None)
    p.add_argument("--plots", action="store_true")
    p.add_argument("--seed", type=lambda s: int(s, 0), default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--out", default="lab-out")
    p.set_defaults(func=cmd_lab)

    p = sub.add_parser("geometry", help="geometry audit and GH certificates for one graph")
    p.add_argument("spec")
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=None)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_geometry)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except GraphSpecError as exc:
        where = f" (at position {exc.position})" if exc.position is not None else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return 2
    except (UsageError, est.ThresholdError, est.ScaleError, geo.ScaleInfeasible, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
