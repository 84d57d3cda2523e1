"""Named, reproducible experiments with pass / fail / inconclusive rows.

A lab reads an :class:`ExperimentManifest`, runs estimators and geometry
audits, and returns a :class:`LabReport`. Rows compare a measured left side
with a right side; the aggregate verdict needs zero failures and at most a
declared fraction of inconclusive rows.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from . import estimators as est
from . import geometry as geo
from .graphs import FiniteGraph, generate, metric_profile
from .percolation import (
    cluster_labels,
    clusters,
    config_at,
    evolution_curve,
    sample_weights,
    two_arm_event,
)

VERDICTS = ("pass", "fail", "inconclusive", "reported")
EXIT_CODES = {"pass": 0, "fail": 1, "inconclusive": 2}
MANIFEST_DIR = Path(__file__).parent / "data" / "manifests"


@dataclass
class ExperimentManifest:
    experiment: str
    graphs: list[str]
    trials: int
    base_seed: int
    p_values: list[float] = field(default_factory=list)
    scales: list[float] = field(default_factory=list)
    alphas: list[float] = field(default_factory=list)
    deltas: list[float] = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    max_inconclusive_fraction: float = 0.2

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentManifest":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown manifest fields: {sorted(extra)}")
        m = cls(**data)
        m.validate()
        return m

    @classmethod
    def load(cls, path) -> "ExperimentManifest":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def validate(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.graphs:
            raise ValueError("manifest lists no graphs")
        for spec in self.graphs:
            generate(spec)
        for name in ("p_values", "scales", "alphas", "deltas"):
            if name in REQUIRED_GRIDS.get(self.experiment, ()) and not getattr(self, name):
                raise ValueError(f"{self.experiment} needs a nonempty {name} grid")
        for a in self.alphas:
            if not 0 < a <= 1:
                raise ValueError(f"alpha must lie in (0, 1], got {a}")
        for d in self.deltas:
            if not 0 < d <= 1:
                raise ValueError(f"delta must lie in (0, 1], got {d}")


REQUIRED_GRIDS = {
    "sharpness": ("p_values",),
    "gradual": ("deltas",),
    "sharp-density": ("alphas", "deltas"),
}


@dataclass
class Row:
    tag: str
    inputs: dict
    lhs: object
    rhs: object
    margin: float | None
    verdict: str
    note: str = ""


@dataclass
class LabReport:
    experiment: str
    rows: list[Row]
    series: list[dict]
    manifest: dict
    wall_time: float = 0.0
    max_inconclusive_fraction: float = 0.2

    @property
    def verdict(self) -> str:
        judged = [r for r in self.rows if r.verdict != "reported"]
        if any(r.verdict == "fail" for r in judged):
            return "fail"
        if judged and sum(r.verdict == "inconclusive" for r in judged) > self.max_inconclusive_fraction * len(judged):
            return "inconclusive"
        return "pass"

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def to_dict(self) -> dict:
        return _clean({
            "experiment": self.experiment,
            "verdict": self.verdict,
            "rows": [asdict(r) for r in self.rows],
            "provenance": {
                "seed": self.manifest.get("base_seed"),
                "code_version": __version__,
                "wall_time": self.wall_time,
                "manifest": self.manifest,
            },
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tag", "inputs", "lhs", "rhs", "margin", "verdict", "note"])
        for r in self.rows:
            w.writerow([r.tag, _cell(r.inputs), _cell(r.lhs), _cell(r.rhs), _cell(r.margin), r.verdict, r.note])
        return buf.getvalue()

    def series_csv(self) -> str:
        return table_csv(self.series)

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / "report.json", out / "report.csv", out / "series.csv"]
        for path, text in zip(paths, (self.to_json(), self.to_csv(), self.series_csv())):
            path.write_text(text)
        return paths


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    return x


def _cell(x) -> str:
    x = _clean(x)
    if x is None:
        return ""
    if isinstance(x, (dict, list)):
        return json.dumps(x, sort_keys=True)
    return str(x)


def table_csv(records: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols: list[str] = []
    for rec in records:
        cols.extend(k for k in rec if k not in cols)
    w.writerow(cols or ["empty"])
    for rec in records:
        w.writerow([_cell(rec.get(c)) for c in cols])
    return buf.getvalue()


def judge(lhs: float, rhs: float, sigma: float, k: float = 3.0) -> tuple[str, float]:
    """Three-way verdict for lhs <= rhs: pass if it holds by more than k sigma,
    fail if it is violated by more than k sigma, inconclusive otherwise."""
    margin = rhs - lhs
    if margin >= k * sigma:
        return "pass", margin
    if margin < -k * sigma:
        return "fail", margin
    return "inconclusive", margin


class _Graphs(dict):
    def __missing__(self, spec: str) -> FiniteGraph:
        g = self[spec] = generate(spec)
        return g


def _tol(m: ExperimentManifest, key: str, default):
    return m.tolerances.get(key, m.params.get(key, default))


# ---------------------------------------------------------------- sharpness sweep

def lab_sharpness_sweep(m: ExperimentManifest, workers: int = 1) -> LabReport:
    """|K_1| quantiles across sizes and p, read off shared evolution curves."""
    graphs = _Graphs()
    rows, series = [], []
    stats = {}
    for spec in m.graphs:
        g = graphs[spec]
        curves = est.map_trials(lambda i: evolution_curve(g, sample_weights(g, m.base_seed, i)), m.trials, workers)
        logv = math.log(g.vertex_count)
        for p in m.p_values:
            k1 = np.array([c.k1(p) for c in curves], dtype=float)
            q10, q50, q90 = np.quantile(k1, [0.1, 0.5, 0.9])
            rec = {"graph": spec, "vertices": g.vertex_count, "p": p, "k1_q10": q10, "k1_q50": q50, "k1_q90": q90,
                   "median_k1_over_log": q50 / logv, "median_density": q50 / g.vertex_count}
            series.append(rec)
            stats[(spec, p)] = rec
    factor = _tol(m, "log_factor", 2.0)
    span = _tol(m, "density_span", 0.10)
    floor = _tol(m, "density_floor", 0.2)
    for p in m.params.get("subcritical", []):
        vals = [stats[(s, p)]["median_k1_over_log"] for s in m.graphs]
        ratio = max(vals) / min(vals)
        rows.append(Row("sharpness/log_scale", {"p": p, "graphs": m.graphs, "medians": vals}, ratio, factor,
                        factor - ratio, "pass" if ratio <= factor else "fail",
                        "max/min of median |K_1|/log|V| across sizes"))
    for p in m.params.get("supercritical", []):
        vals = [stats[(s, p)]["median_density"] for s in m.graphs]
        width = max(vals) - min(vals)
        rows.append(Row("sharpness/density_span", {"p": p, "graphs": m.graphs, "medians": vals}, width, span,
                        span - width, "pass" if width <= span else "fail", "max - min of median density"))
        rows.append(Row("sharpness/density_floor", {"p": p, "graphs": m.graphs}, floor, min(vals),
                        min(vals) - floor, "pass" if min(vals) >= floor else "fail", "smallest median density"))
    return LabReport("sharpness", rows, series, asdict(m), max_inconclusive_fraction=m.max_inconclusive_fraction)


# ---------------------------------------------------------------- threshold locality

def lab_threshold_locality(m: ExperimentManifest, workers: int = 1) -> LabReport:
    """q(G) per graph against declared windows, plus the trend toward a limit value."""
    graphs = _Graphs()
    tol = _tol(m, "tol", 0.01)
    per_eval = m.params.get("trials_per_eval", m.trials)
    windows = m.params.get("windows", {})
    rows, series, q = [], [], {}
    for spec in m.graphs:
        g = graphs[spec]
        res = est.q_threshold(g, tol, per_eval, m.base_seed, workers)
        q[spec] = res
        series.append({"graph": spec, "vertices": g.vertex_count, "q": res.p,
                       "ci_low": res.p_ci[0], "ci_high": res.p_ci[1]})
        if spec in windows:
            lo, hi = windows[spec]
            inside = lo <= res.p <= hi
            overlap = res.p_ci[1] >= lo and res.p_ci[0] <= hi
            verdict = "pass" if inside else ("inconclusive" if overlap else "fail")
            margin = min(res.p - lo, hi - res.p)
            rows.append(Row("threshold/window", {"graph": spec, "tol": tol, "trials_per_eval": per_eval,
                                                 "ci": list(res.p_ci)}, res.p, [lo, hi], margin, verdict))
    trend = m.params.get("trend")
    if trend:
        limit = trend.get("limit", 0.5)
        slack = trend.get("slack", 0.01)
        small, large = trend["graphs"]
        lhs = abs(q[large].p - limit)
        rhs = abs(q[small].p - limit) + slack
        rows.append(Row("threshold/trend", {"graphs": [small, large], "limit": limit}, lhs, rhs, rhs - lhs,
                        "pass" if lhs <= rhs else "fail", "|q(large) - limit| <= |q(small) - limit| + slack"))
    return LabReport("threshold", rows, series, asdict(m), max_inconclusive_fraction=m.max_inconclusive_fraction)


# ---------------------------------------------------------------- inequality suite

def variance_bound_check(g: FiniteGraph, p: float, n: int, trials: int, seed: int, workers: int = 1) -> dict:
    """Var|X| against n^2 E|X| for X = {u : |K_u| >= n}, with a delta-method error."""
    def size_x(i):
        _, sizes = cluster_labels(g, config_at(sample_weights(g, seed, i), p).open)
        return int(sizes[sizes >= n].sum())

    x = np.array(est.map_trials(size_x, trials, workers), dtype=float)
    mean = x.mean()
    var = x.var(ddof=1)
    # influence function of var - n^2 mean
    psi = (x - mean) ** 2 - var - n * n * (x - mean)
    sigma = float(psi.std(ddof=1) / math.sqrt(trials))
    return {"lhs": float(var), "rhs": float(n * n * mean), "sigma": sigma, "mean": float(mean)}


def ghost_comparison_check(g: FiniteGraph, p: float, h: float, m_size: int, trials: int, seed: int,
                           workers: int = 1) -> dict:
    """P_{(1-mu)p}(|K_o| >= m) against P_p(|K_o| >= m) e^{-hm} / (1 - mu), mu = mu_{p,h} estimated."""
    mu = est.mu_ph(g, p, h, trials, seed, workers=workers)
    tail = est.tail_Ko(g, p, m_size, trials, seed + 1, workers=workers)
    if mu.point >= 1:
        return {"degenerate": True, "mu": mu.point}
    low_p = (1 - mu.point) * p
    lhs = est.tail_Ko(g, low_p, m_size, trials, seed + 2, workers=workers)
    c = math.exp(-h * m_size) / (1 - mu.point)
    rhs = tail.point * c
    se_rhs = math.hypot(c * tail.std_error, tail.point * c / (1 - mu.point) * mu.std_error)
    return {"lhs": lhs.point, "rhs": rhs, "sigma": math.hypot(lhs.std_error, se_rhs), "mu": mu.point,
            "sprinkled_p": low_p, "degenerate": False}


def two_arm_decay_check(g: FiniteGraph, p: float, n: int, trials: int, seed: int, edge: int = 0,
                        workers: int = 1) -> dict:
    """P(T_{e,4n}) / P(T_{e,n}) on shared samples; T_{e,4n} is contained in T_{e,n}."""
    def arms(i):
        cfg = config_at(sample_weights(g, seed, i), p)
        rep = clusters(g, cfg)
        return two_arm_event(g, cfg, edge, n, rep), two_arm_event(g, cfg, edge, 4 * n, rep)

    hits = est.map_trials(arms, trials, workers)
    k_n = sum(a for a, _ in hits)
    k_4n = sum(b for _, b in hits)
    ratio = k_4n / k_n if k_n else math.nan
    sigma = math.sqrt(ratio * (1 - ratio) / k_n) if k_n else math.inf
    return {"count_n": k_n, "count_4n": k_4n, "ratio": ratio, "sigma": sigma,
            "p_n": k_n / trials, "p_4n": k_4n / trials}


def harris_check(g: FiniteGraph, p: float, n: int, r: float, trials: int, seed: int, workers: int = 1) -> dict:
    """P(o <-> u) >= P(|K_o| >= n)^2 - P(|K_o|, |K_u| >= n, o not connected to u) at the weakest u in B_r."""
    _, u = est.min_two_point_over_ball(g, p, r, trials, seed, workers=workers)

    def indicators(i):
        labels, sizes = cluster_labels(g, config_at(sample_weights(g, seed + 1, i), p).open)
        a = sizes[labels[0]] >= n
        b = sizes[labels[u]] >= n
        c = labels[0] == labels[u]
        return a, b, c, a and b and not c

    z = np.array(est.map_trials(indicators, trials, workers), dtype=float)
    A, B, C, N = z.mean(axis=0)
    lhs = A * A - N
    psi = z[:, 2] - 2 * A * z[:, 0] + z[:, 3]
    return {"lhs": float(lhs), "rhs": float(C), "sigma": float(psi.std(ddof=1) / math.sqrt(trials)), "vertex": u}


def lab_inequality_suite(m: ExperimentManifest, workers: int = 1) -> LabReport:
    graphs = _Graphs()
    rows = []
    k = _tol(m, "sigmas", 3.0)
    for i, chk in enumerate(m.params.get("checks", [])):
        kind = chk["check"]
        g = graphs[chk.get("graph", m.graphs[0])]
        trials = chk.get("trials", m.trials)
        seed = m.base_seed + 1000 * i
        ps = chk["p"] if isinstance(chk["p"], list) else [chk["p"]]
        for p in ps:
            inputs = {**chk, "p": p, "trials": trials}
            if kind == "variance_bound":
                res = variance_bound_check(g, p, chk["n"], trials, seed, workers)
                verdict, margin = judge(res["lhs"], res["rhs"], res["sigma"], k)
                rows.append(Row(kind, {**inputs, "sigma": res["sigma"]}, res["lhs"], res["rhs"], margin, verdict))
            elif kind == "ghost_comparison":
                if p >= 1:
                    rows.append(Row(kind, inputs, None, None, None, "reported", "degenerate p = 1 skipped"))
                    continue
                res = ghost_comparison_check(g, p, chk["h"], chk["m"], trials, seed, workers)
                if res["degenerate"]:
                    rows.append(Row(kind, inputs, None, None, None, "reported", "mu = 1, comparison vacuous"))
                    continue
                verdict, margin = judge(res["lhs"], res["rhs"], res["sigma"], k)
                rows.append(Row(kind, {**inputs, "mu": res["mu"], "sigma": res["sigma"]},
                                res["lhs"], res["rhs"], margin, verdict))
            elif kind == "two_arm_decay":
                floor = chk.get("min_count", 10)
                bound = chk.get("ratio_bound", 0.75)
                for n in chk["n"]:
                    res = two_arm_decay_check(g, p, n, trials, seed + n, chk.get("edge", 0), workers)
                    info = {**inputs, "n": n, "count_n": res["count_n"], "count_4n": res["count_4n"],
                            "sigma": res["sigma"]}
                    if min(res["count_n"], res["count_4n"]) < floor:
                        rows.append(Row(kind, info, res["ratio"], bound, None, "inconclusive",
                                        f"counts below noise floor {floor}"))
                        continue
                    verdict, margin = judge(res["ratio"], bound, res["sigma"], k)
                    rows.append(Row(kind, info, res["ratio"], bound, margin, verdict))
            elif kind == "harris_two_point":
                res = harris_check(g, p, chk["n"], chk["r"], trials, seed, workers)
                verdict, margin = judge(res["lhs"], res["rhs"], res["sigma"], k)
                rows.append(Row(kind, {**inputs, "vertex": res["vertex"], "sigma": res["sigma"]},
                                res["lhs"], res["rhs"], margin, verdict))
            else:
                raise ValueError(f"unknown check {kind!r}")
    series = [{"row": i, "tag": r.tag, "lhs": r.lhs, "rhs": r.rhs} for i, r in enumerate(rows)]
    return LabReport("inequalities", rows, series, asdict(m), max_inconclusive_fraction=m.max_inconclusive_fraction)


# ---------------------------------------------------------------- gradual emergence

def jump_statistics(g: FiniteGraph, delta: float, trials: int, seed: int, workers: int = 1) -> np.ndarray:
    """Per-sample J(delta) = sup_p [alpha(p + delta) - alpha(p)], exact from breakpoints."""
    return np.array(est.map_trials(
        lambda i: evolution_curve(g, sample_weights(g, seed, i)).max_increment(delta), trials, workers))


def lab_gradual_emergence(m: ExperimentManifest, workers: int = 1) -> LabReport:
    graphs = _Graphs()
    rows, series = [], []
    med_max = m.params.get("median_max", {})
    med_min = m.params.get("median_min", {})
    for spec in m.graphs:
        g = graphs[spec]
        curves = est.map_trials(lambda i: evolution_curve(g, sample_weights(g, m.base_seed, i)), m.trials, workers)
        for delta in m.deltas:
            J = np.array([c.max_increment(delta) for c in curves])
            q10, q50, q90 = np.quantile(J, [0.1, 0.5, 0.9])
            series.append({"graph": spec, "vertices": g.vertex_count, "delta": delta,
                           "J_q10": q10, "J_median": q50, "J_q90": q90})
            inputs = {"graph": spec, "delta": delta, "trials": m.trials}
            if delta >= 1:
                exact = 1 - 1 / g.vertex_count
                ok = bool(np.all(J == exact))
                rows.append(Row("gradual/full_sweep", inputs, float(J.max()), exact, 0.0 if ok else -1.0,
                                "pass" if ok else "fail", "J(1) = 1 - 1/|V| on every sample"))
            key = f"{spec}@{delta}"
            if key in med_max:
                rows.append(Row("gradual/median_max", inputs, float(q50), med_max[key], med_max[key] - q50,
                                "pass" if q50 <= med_max[key] else "fail"))
            if key in med_min:
                rows.append(Row("gradual/median_min", inputs, med_min[key], float(q50), q50 - med_min[key],
                                "pass" if q50 >= med_min[key] else "fail"))
    return LabReport("gradual", rows, series, asdict(m), max_inconclusive_fraction=m.max_inconclusive_fraction)


# ---------------------------------------------------------------- sharp density

def lab_sharp_density(m: ExperimentManifest, workers: int = 1) -> LabReport:
    """p_c(alpha, 1 - delta) / p_c(alpha, delta) against e^delta, from per-sample critical values.

    Also probes the sharp-threshold window: the p-range over which
    P_p(density(K_1) >= alpha) climbs from ``window[0]`` to ``window[1]``
    should shrink along ``window_family``.
    """
    graphs = _Graphs()
    conf = _tol(m, "confidence", est.DEFAULT_CONFIDENCE)
    report_only = set(m.params.get("report_only", []))
    # below this delta the unknown floor Delta(alpha) may bite, so ratios are only reported
    delta_floor = float(m.params.get("assert_min_delta", 0.25))
    lo_q, hi_q = m.params.get("window", [0.1, 0.9])
    rows, series = [], []
    widths: dict[tuple[str, float], float] = {}
    for spec in m.graphs:
        g = graphs[spec]
        curves = est.map_trials(lambda i: evolution_curve(g, sample_weights(g, m.base_seed, i)), m.trials, workers)
        for alpha in m.alphas:
            size = est.size_threshold(g, alpha)
            crit = np.sort([c.critical_value(size) for c in curves])
            widths[(spec, alpha)] = est.empirical_quantile(crit, hi_q) - est.empirical_quantile(crit, lo_q)
            for delta in m.deltas:
                if not 0 < delta <= 0.5:
                    continue
                a = est.empirical_quantile(crit, delta)
                b = est.empirical_quantile(crit, 1 - delta)
                a_ci = est.quantile_ci(crit, delta, conf)
                b_ci = est.quantile_ci(crit, 1 - delta, conf)
                ratio = b / a if a > 0 else math.inf
                ratio_low = b_ci[0] / a_ci[1] if a_ci[1] > 0 else math.inf
                bound = math.exp(delta)
                series.append({"graph": spec, "alpha": alpha, "delta": delta, "pc_delta": a,
                               "pc_one_minus_delta": b, "ratio": ratio, "bound": bound})
                inputs = {"graph": spec, "alpha": alpha, "delta": delta, "trials": m.trials,
                          "pc": [a, b], "ratio_lower_ci": ratio_low}
                if spec in report_only or delta < delta_floor:
                    verdict = "reported"
                elif ratio <= bound:
                    verdict = "pass"
                elif ratio_low > bound:
                    verdict = "fail"
                else:
                    verdict = "inconclusive"
                rows.append(Row("sharp_density/ratio", inputs, ratio, bound, bound - ratio, verdict))
    family = m.params.get("window_family", [])
    for alpha in m.alphas:
        ws = [widths[(s, alpha)] for s in family if (s, alpha) in widths]
        if len(ws) >= 2:
            shrinking = all(x > y for x, y in zip(ws, ws[1:]))
            rows.append(Row("sharp_density/window_shrinks", {"alpha": alpha, "graphs": family, "window": [lo_q, hi_q]},
                            ws, "strictly decreasing", None, "pass" if shrinking else "fail",
                            "p-window widths across the family"))
    return LabReport("sharp-density", rows, series, asdict(m), max_inconclusive_fraction=m.max_inconclusive_fraction)


# ---------------------------------------------------------------- geometry audit

def audit_graph(g: FiniteGraph, instances: int = 20, seed: int = 0, not_circle_threshold: float = 0.2) -> dict:
    """All deterministic geometry checks for one graph."""
    prof = metric_profile(g)
    D = prof.diameter
    removal = {r: geo.ball_removal_holds(g, r) for r in range(1, D + 1) if 4 * r + 2 <= D}
    exposed = {}
    for n in range(1, D // 3 + 1):
        es = geo.exposed_sphere(g, 0, n)
        if es.sphere_out_of_range:
            continue
        outer = np.flatnonzero(prof.distances == 2 * n + 1)
        rep = geo.cutset_audit(g, es.members, [0], outer)
        exposed[n] = rep.is_cutset and rep.is_minimal
    bracket = geo.delta_bracket(g)
    timar = []
    if bracket.delta_upper is not None and bracket.rank_full > 0:
        rng = np.random.default_rng(seed)
        for _ in range(instances):
            cut, A, B = geo.random_minimal_cutset(g, rng)
            timar.append(geo.is_r_connected(g, cut, bracket.delta_upper).connected)
    upper = geo.gh_circle_upper(g)
    lower = geo.gh_circle_lower(g)
    gq = geo.gamma_quantities(g, lower, upper)
    return {"diameter": D, "removal": removal, "exposed": exposed, "bracket": bracket, "timar": timar,
            "upper": upper, "lower": lower, "gamma": gq,
            "class": geo.classify(lower, upper, gq, not_circle_threshold)}


def lab_geometry_audit(m: ExperimentManifest, workers: int = 1) -> LabReport:
    graphs = _Graphs()
    expect = m.params.get("expect", {})
    thr = _tol(m, "not_circle_threshold", 0.2)
    instances = m.params.get("timar_instances", 20)
    rows, series = [], []
    for spec in m.graphs:
        g = graphs[spec]
        a = audit_graph(g, instances, m.base_seed, thr)
        b = a["bracket"]
        base = {"graph": spec}
        bad = [r for r, ok in a["removal"].items() if not ok]
        rows.append(Row("geometry/ball_removal", {**base, "radii": sorted(a["removal"])}, len(bad), 0, -len(bad),
                        "pass" if not bad else "fail", f"failing radii {bad}" if bad else ""))
        bad = [n for n, ok in a["exposed"].items() if not ok]
        rows.append(Row("geometry/exposed_cutset", {**base, "scales": sorted(a["exposed"])}, len(bad), 0, -len(bad),
                        "pass" if not bad else "fail", f"failing scales {bad}" if bad else ""))
        rows.append(Row("geometry/delta_bracket", {**base, "rank": b.rank_full, "radius": b.radius},
                        b.delta_lower, b.delta_upper, None, "reported", b.status))
        if a["timar"]:
            fails = a["timar"].count(False)
            rows.append(Row("geometry/timar", {**base, "instances": len(a["timar"]), "r": b.delta_upper},
                            fails, 0, -fails, "pass" if not fails else "fail"))
        lo, up = a["lower"].value, a["upper"].value
        rows.append(Row("geometry/gh_sandwich", base, lo, up, up - lo, "pass" if lo <= up else "fail"))
        exp = expect.get(spec, {})
        if "gh_lower_min" in exp:
            rows.append(Row("geometry/gh_lower", base, exp["gh_lower_min"], lo, lo - exp["gh_lower_min"],
                            "pass" if lo >= exp["gh_lower_min"] else "fail"))
        if "gh_upper_max" in exp:
            rows.append(Row("geometry/gh_upper", base, up, exp["gh_upper_max"], exp["gh_upper_max"] - up,
                            "pass" if up <= exp["gh_upper_max"] else "fail"))
        if "class" in exp:
            rows.append(Row("geometry/class", base, a["class"], exp["class"], None,
                            "pass" if a["class"] == exp["class"] else "fail"))
        else:
            rows.append(Row("geometry/class", base, a["class"], None, None, "reported"))
        gq = a["gamma"]
        series.append({"graph": spec, "diameter": a["diameter"], "gh_lower": lo, "gh_upper": up,
                       "gamma_low": gq.gamma[0], "gamma_high": gq.gamma[1], "gamma_plus_low": gq.gamma_plus[0],
                       "gamma_plus_high": gq.gamma_plus[1], "exceeds_graph": gq.exceeds_graph,
                       "delta_lower": b.delta_lower, "delta_upper": b.delta_upper, "class": a["class"]})
    return LabReport("geometry", rows, series, asdict(m), max_inconclusive_fraction=m.max_inconclusive_fraction)


LABS: dict[str, Callable[..., LabReport]] = {
    "sharpness": lab_sharpness_sweep,
    "threshold": lab_threshold_locality,
    "inequalities": lab_inequality_suite,
    "gradual": lab_gradual_emergence,
    "sharp-density": lab_sharp_density,
    "geometry": lab_geometry_audit,
}

# chart layout per lab: (x column, y columns, grouping column)
PLOTS = {
    "sharpness": ("p", ["k1_q50"], "graph"),
    "threshold": ("vertices", ["q"], None),
    "inequalities": ("row", ["lhs", "rhs"], None),
    "gradual": ("delta", ["J_median"], "graph"),
    "sharp-density": ("delta", ["ratio"], "graph"),
    "geometry": ("diameter", ["gh_lower", "gh_upper"], None),
}

PLOT_NAMES = {
    "sharpness": "sharpness_sweep.svg",
    "threshold": "threshold_locality.svg",
    "inequalities": "inequality_suite.svg",
    "gradual": "gradual_emergence.svg",
    "sharp-density": "sharp_density.svg",
    "geometry": "geometry_audit.svg",
}


def default_manifest(name: str) -> ExperimentManifest:
    return ExperimentManifest.load(MANIFEST_DIR / f"{name}.json")


def run_lab(name: str, manifest: ExperimentManifest, workers: int = 1) -> LabReport:
    if name not in LABS:
        raise KeyError(f"unknown lab {name!r}; choose from {sorted(LABS)}")
    start = time.perf_counter()
    report = LABS[name](manifest, workers)
    report.wall_time = time.perf_counter() - start
    return report
