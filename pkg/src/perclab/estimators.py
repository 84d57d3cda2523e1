"""Monte Carlo estimators for connection probabilities, cluster tails,
thresholds, ghost quantities, corridors and scale predicates.

Every estimator is keyed by ``(seed, trial index)`` through the counter-based
streams in :mod:`perclab.rng`; trial ``i`` always sees the same weights, so
estimates that share a seed share samples, and ``workers`` never changes a
result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import rng
from .graphs import FiniteGraph, ball, is_low_growth, metric_profile
from .percolation import (
    ClusterReport,
    Config,
    PivotalityWindow,
    ScaleError,
    cluster_labels,
    clusters,
    config_at,
    evolution_curve,
    sample_ghost,
    sample_weights,
    tube,
)

DEFAULT_CONFIDENCE = 0.95


# ---------------------------------------------------------------- plumbing

def map_trials(fn: Callable[[int], object], trials: int, workers: int = 1, chunk: int = 16) -> list:
    """``[fn(0), ..., fn(trials - 1)]`` in index order, optionally on a thread pool."""
    if workers <= 1 or trials <= chunk:
        return [fn(i) for i in range(trials)]
    blocks = [range(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda block: [fn(i) for i in block], blocks)
        return [x for part in parts for x in part]


def _z(confidence: float) -> float:
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    return NormalDist().inv_cdf(0.5 + confidence / 2)


def wilson_interval(successes: int, trials: int, confidence: float = DEFAULT_CONFIDENCE) -> tuple[float, float]:
    z = _z(confidence)
    phat = successes / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return float(max(0.0, min(phat, centre - half))), float(min(1.0, max(phat, centre + half)))


@dataclass(frozen=True)
class MCEstimate:
    total: float
    trials: int
    point: float
    ci_low: float
    ci_high: float
    std_error: float
    confidence: float = DEFAULT_CONFIDENCE

    @classmethod
    def from_counts(cls, successes: int, trials: int, confidence: float = DEFAULT_CONFIDENCE) -> "MCEstimate":
        if trials < 1:
            raise ValueError("trials must be >= 1")
        successes = int(successes)
        point = successes / trials
        lo, hi = wilson_interval(successes, trials, confidence)
        se = math.sqrt(point * (1 - point) / trials)
        return cls(float(successes), trials, point, lo, hi, se, confidence)

    @classmethod
    def from_values(cls, values, confidence: float = DEFAULT_CONFIDENCE) -> "MCEstimate":
        """Sample mean with a normal-approximation interval."""
        x = np.asarray(values, dtype=float)
        if x.size < 1:
            raise ValueError("trials must be >= 1")
        mean = float(x.mean())
        se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
        z = _z(confidence)
        return cls(float(x.sum()), int(x.size), mean, mean - z * se, mean + z * se, se, confidence)

    @property
    def ci(self) -> tuple[float, float]:
        return (self.ci_low, self.ci_high)


def result_record(quantity: str, g: FiniteGraph, params: dict, est: MCEstimate, seed: int) -> dict:
    return {
        "quantity": quantity,
        "graph": g.spec_string,
        "params": params,
        "point": est.point,
        "ci": [est.ci_low, est.ci_high],
        "trials": est.trials,
        "seed": seed,
    }


def mc_probability(event: Callable[[int, int], bool], trials: int, base_seed: int,
                   confidence: float = DEFAULT_CONFIDENCE, workers: int = 1) -> MCEstimate:
    """Frequency of ``event(base_seed, i)`` over trials i = 0..trials-1, Wilson interval."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hits = map_trials(lambda i: bool(event(base_seed, i)), trials, workers)
    return MCEstimate.from_counts(sum(hits), trials, confidence)


def _labels(g: FiniteGraph, p: float, seed: int, trial: int):
    return cluster_labels(g, config_at(sample_weights(g, seed, trial), p).open)


# ---------------------------------------------------------------- connection probabilities

def two_point(g: FiniteGraph, p: float, u: int, v: int, trials: int, seed: int,
              confidence: float = DEFAULT_CONFIDENCE, workers: int = 1) -> MCEstimate:
    def hit(i):
        labels, _ = _labels(g, p, seed, i)
        return labels[u] == labels[v]

    return MCEstimate.from_counts(sum(map_trials(hit, trials, workers)), trials, confidence)


def min_two_point_over_ball(g: FiniteGraph, p: float, r: float, trials: int, seed: int, root: int = 0,
                            confidence: float = DEFAULT_CONFIDENCE,
                            workers: int = 1) -> tuple[MCEstimate, int]:
    """Smallest estimated P(root <-> u) over u in B_r(root), all u on shared samples.

    Radii past the diameter cover the whole graph. Ties go to the lowest vertex id.
    """
    verts = ball(g, root, r)

    def hits(i):
        labels, _ = _labels(g, p, seed, i)
        return labels[verts] == labels[root]

    counts = np.sum(map_trials(hits, trials, workers), axis=0)
    k = int(np.argmin(counts))
    return MCEstimate.from_counts(int(counts[k]), trials, confidence), int(verts[k])


def tail_Ko(g: FiniteGraph, p: float, n: int, trials: int, seed: int, root: int = 0,
            confidence: float = DEFAULT_CONFIDENCE, workers: int = 1) -> MCEstimate:
    """Estimate P_p(|K_o| >= n)."""
    if n < 1:
        raise ValueError("n must be >= 1")

    def hit(i):
        labels, sizes = _labels(g, p, seed, i)
        return sizes[labels[root]] >= n

    return MCEstimate.from_counts(sum(map_trials(hit, trials, workers)), trials, confidence)


def size_threshold(g: FiniteGraph, alpha: float) -> int:
    """Smallest cluster size s with s / |V| >= alpha."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    return max(1, math.ceil(alpha * g.vertex_count - 1e-9))


def giant_prob(g: FiniteGraph, p: float, alpha: float, trials: int, seed: int,
               confidence: float = DEFAULT_CONFIDENCE, workers: int = 1) -> MCEstimate:
    """Estimate P_p(density of K_1 >= alpha)."""
    need = size_threshold(g, alpha)

    def hit(i):
        _, sizes = _labels(g, p, seed, i)
        return sizes.max() >= need

    return MCEstimate.from_counts(sum(map_trials(hit, trials, workers)), trials, confidence)


def mu_ph(g: FiniteGraph, p: float, h: float, trials: int, seed: int, root: int = 0,
          confidence: float = DEFAULT_CONFIDENCE, workers: int = 1) -> MCEstimate:
    """Estimate P_p x Q_{1-e^-h}(root <-> ghost) with independent edge and ghost streams."""
    if h < 0:
        raise ValueError("h must be >= 0")
    q = 1.0 if math.isinf(h) else -math.expm1(-h)

    def hit(i):
        ghost = sample_ghost(g, q, seed, i).ghosts
        if ghost[root]:
            return True
        labels, _ = _labels(g, p, seed, i)
        return bool(ghost[labels == labels[root]].any())

    return MCEstimate.from_counts(sum(map_trials(hit, trials, workers)), trials, confidence)


# ---------------------------------------------------------------- thresholds

class ThresholdError(ValueError):
    pass


class NonMonotoneError(ThresholdError):
    pass


@dataclass(frozen=True)
class GiantEvent:
    """The increasing event {|K_1| >= min_size}."""

    min_size: int
    description: str

    @classmethod
    def density(cls, g: FiniteGraph, alpha: float) -> "GiantEvent":
        return cls(size_threshold(g, alpha), f"density(K_1) >= {alpha}")

    @classmethod
    def volume_power(cls, g: FiniteGraph, exponent: float = 2 / 3) -> "GiantEvent":
        size = max(1, math.ceil(g.vertex_count ** exponent - 1e-9))
        return cls(size, f"|K_1| >= |V|^{exponent:.6g} = {size}")

    def __call__(self, g: FiniteGraph, config: Config, report: ClusterReport) -> bool:
        return report.k1 >= self.min_size


def critical_values(g: FiniteGraph, size: int, trials: int, seed: int, workers: int = 1) -> np.ndarray:
    """Per-sample p at which |K_1| first reaches ``size`` (exact, from the evolution curve)."""
    return np.array(map_trials(lambda i: evolution_curve(g, sample_weights(g, seed, i)).critical_value(size),
                               trials, workers))


def quantile_ci(sorted_values: np.ndarray, level: float, confidence: float) -> tuple[float, float]:
    """Distribution-free order-statistic interval for the ``level`` quantile."""
    n = sorted_values.size
    a = (1 - confidence) / 2
    lo_rank = int(stats.binom.ppf(a, n, level))
    hi_rank = int(stats.binom.ppf(1 - a, n, level)) + 1
    lo = sorted_values[max(lo_rank - 1, 0)] if lo_rank >= 1 else -math.inf
    hi = sorted_values[hi_rank - 1] if hi_rank <= n else math.inf
    return float(lo), float(hi)


def empirical_quantile(sorted_values: np.ndarray, level: float) -> float:
    """Smallest x with F_n(x) >= level."""
    k = max(1, math.ceil(level * sorted_values.size - 1e-12))
    return float(sorted_values[k - 1])


@dataclass(frozen=True)
class ThresholdResult:
    p: float
    target: str
    bracket: tuple[float, float]
    trials_per_eval: int
    estimate: MCEstimate
    p_ci: tuple[float, float] | None = None
    evaluations: list = field(default_factory=list)


def solve_p(g: FiniteGraph, event, target: float, tol: float = 0.01, trials_per_eval: int = 1000,
            seed: int = 0, confidence: float = DEFAULT_CONFIDENCE, workers: int = 1) -> ThresholdResult:
    """Find p with P_p(event) = target by bisection on common random numbers.

    ``event`` is either a :class:`GiantEvent`, solved exactly per sample from
    evolution curves, or a callable ``event(g, config, report) -> bool`` that
    must be increasing.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target must lie in (0, 1)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    desc = f"P_p({getattr(event, 'description', getattr(event, '__name__', 'event'))}) = {target}"
    if isinstance(event, GiantEvent):
        crit = np.sort(critical_values(g, event.min_size, trials_per_eval, seed, workers))
        T = crit.size

        def phat(p):
            return int(np.searchsorted(crit, p, side="right"))
    else:
        T = trials_per_eval

        def one(i, p):
            cfg = config_at(sample_weights(g, seed, i), p)
            return bool(event(g, cfg, clusters(g, cfg)))

        def phat(p):
            return sum(map_trials(lambda i: one(i, p), T, workers))

    evals = []

    def evaluate(p):
        k = phat(p)
        est = MCEstimate.from_counts(k, T, confidence)
        for q, other in evals:
            lo, hi = (q, other), (p, est)
            if q > p:
                lo, hi = hi, lo
            if lo[1].ci_low > hi[1].ci_high:
                raise NonMonotoneError(
                    f"non-monotone response: P({lo[0]:.4g}) = {lo[1].point:.3g} exceeds P({hi[0]:.4g}) = {hi[1].point:.3g}")
        evals.append((p, est))
        return est

    if evaluate(0.0).point >= target:
        raise ThresholdError(f"target unreachable: probability already >= {target} at p = 0")
    if evaluate(1.0).point < target:
        raise ThresholdError(f"target unreachable: probability stays below {target} at p = 1")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if evaluate(mid).point >= target:
            hi = mid
        else:
            lo = mid
    if isinstance(event, GiantEvent):
        # the empirical crossing lies in (lo, hi]; report it exactly
        p = empirical_quantile(crit, target)
        p_ci = quantile_ci(crit, target, confidence)
    else:
        p = (lo + hi) / 2
        p_ci = None
    est = MCEstimate.from_counts(phat(p), T, confidence)
    return ThresholdResult(p, desc, (lo, hi), T, est, p_ci, [(q, e.point) for q, e in evals])


def q_threshold(g: FiniteGraph, tol: float = 0.01, trials_per_eval: int = 1000, seed: int = 0,
                workers: int = 1, confidence: float = DEFAULT_CONFIDENCE) -> ThresholdResult:
    """q(G): the p with P_p(|K_1| >= |V|^{2/3}) = 1/2."""
    return solve_p(g, GiantEvent.volume_power(g), 0.5, tol, trials_per_eval, seed, confidence, workers)


def q_lower_bound(degree: int) -> float:
    """1/(2d): below it E|K_o| <= 2, which forces q(G) above it once |V| > 64."""
    return 1.0 / (2 * degree)


def pc_alpha_delta(g: FiniteGraph, alpha: float, delta: float, tol: float = 0.01, trials_per_eval: int = 1000,
                   seed: int = 0, workers: int = 1) -> ThresholdResult:
    """p_c(alpha, delta): the p with P_p(density(K_1) >= alpha) = delta."""
    return solve_p(g, GiantEvent.density(g, alpha), delta, tol, trials_per_eval, seed, workers=workers)


# ---------------------------------------------------------------- corridor

def geodesic(g: FiniteGraph, root: int, target: int) -> list[int]:
    key = ("bfs_tree", root)
    if key not in g._memo:
        from ._kernels import bfs_parents
        g._memo[key] = bfs_parents(g.indptr, g.indices, root)
    _, parent = g._memo[key]
    path = [int(target)]
    while path[-1] != root:
        path.append(int(parent[path[-1]]))
    return path[::-1]


@dataclass(frozen=True)
class CorridorResult:
    """Minimum tube-restricted connection estimate over sampled geodesics.

    This is an upper estimate of the corridor infimum, which ranges over all
    paths of the given length.
    """

    estimate: MCEstimate
    path: list[int]
    length: int
    width: int
    clamped: bool
    candidates: int


def corridor_kappa(g: FiniteGraph, p: float, m: float, n: float, trials: int, paths_budget: int = 4,
                   seed: int = 0, root: int = 0, confidence: float = DEFAULT_CONFIDENCE,
                   workers: int = 1) -> CorridorResult:
    if m < 1:
        raise ValueError("corridor length m must be >= 1")
    if paths_budget < 1:
        raise ValueError("paths_budget must be >= 1")
    prof = metric_profile(g, root)
    length = min(math.floor(m), prof.diameter)
    ends = np.flatnonzero(prof.distances == length)
    if ends.size == 0:
        raise ScaleError(f"no path of length {length} from the root")
    picks = np.unique(np.linspace(0, ends.size - 1, min(paths_budget, ends.size)).round().astype(int))
    paths = [geodesic(g, root, int(ends[k])) for k in picks]
    masks = []
    for path in paths:
        inside = tube(g, path, n)
        masks.append(inside[g.eu] & inside[g.ev])

    def hits(i):
        open_ = config_at(sample_weights(g, seed, i), p).open
        out = np.zeros(len(paths), dtype=np.int64)
        for j, (path, mask) in enumerate(zip(paths, masks)):
            labels, _ = cluster_labels(g, open_ & mask)
            out[j] = labels[path[0]] == labels[path[-1]]
        return out

    counts = np.sum(map_trials(hits, trials, workers), axis=0)
    k = int(np.argmin(counts))
    est = MCEstimate.from_counts(int(counts[k]), trials, confidence)
    return CorridorResult(est, paths[k], length, math.floor(n), length < m, len(paths))


# ---------------------------------------------------------------- uniqueness zone and cost

def icbrt(x: float) -> int:
    """floor(x ** (1/3)) without floating-point undershoot."""
    r = int(round(x ** (1.0 / 3.0)))
    while r ** 3 > x:
        r -= 1
    while (r + 1) ** 3 <= x:
        r += 1
    return r


def cost(n: float, gr_u: int) -> float:
    """[log log n / min(log n, log Gr(U))]^(1/4); infinite when Gr(U) = 1."""
    denom = min(math.log(n), math.log(gr_u)) if gr_u > 1 else 0.0
    if denom <= 0:
        return math.inf
    return (math.log(math.log(n)) / denom) ** 0.25


@dataclass(frozen=True)
class CostReport:
    n: float
    U: int
    cost: float
    piv_prob_at_U: MCEstimate | None
    threshold: float
    scan: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.U >= 1


def uniqueness_zone_and_cost(g: FiniteGraph, p: float, n: float, trials: int, seed: int = 0, root: int = 0,
                             confidence: float = DEFAULT_CONFIDENCE, workers: int = 1) -> CostReport:
    """Largest b <= n^(1/3)/8 whose Piv[4b, n^(1/3)] probability is certified <= 1/log n.

    The scan runs downward from the top and stops at the first b whose Wilson
    upper bound clears the threshold. If none does, U = 0 (Piv[0, .] is
    impossible) and the cost is infinite.
    """
    if n < 27:
        raise ValueError("n must be >= 27")
    s = icbrt(n)
    prof = metric_profile(g, root)
    if s > prof.diameter:
        raise ScaleError(f"scale infeasible: n^(1/3) = {s} exceeds diameter {prof.diameter}")
    threshold = 1.0 / math.log(n)
    bs = list(range(s // 8, 0, -1))
    if not bs:
        return CostReport(n, 0, cost(n, prof.gr(0)), None, threshold)
    window = PivotalityWindow.build(g, root, 0, s)
    inners = [np.flatnonzero(prof.distances <= 4 * b) for b in bs]

    def crossings(i):
        open_ = config_at(sample_weights(g, seed, i), p).open
        labels, _ = cluster_labels(g, open_ & window.edge_mask)
        outer = labels[window.outer]
        return np.array([np.intersect1d(labels[inner], outer).size >= 2 for inner in inners])

    counts = np.sum(map_trials(crossings, trials, workers), axis=0)
    scan = []
    for b, c in zip(bs, counts):
        est = MCEstimate.from_counts(int(c), trials, confidence)
        scan.append((b, est))
        if est.ci_high <= threshold:
            return CostReport(n, b, cost(n, prof.gr(b)), est, threshold, scan)
    return CostReport(n, 0, math.inf, None, threshold, scan)


# ---------------------------------------------------------------- scale functions

def phi(t: float) -> float:
    """Sprinkling schedule 1 - 2^(-e^t)."""
    return 1.0 - 2.0 ** (-math.exp(t))


def phi_inv(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError("phi_inv needs p in (0, 1)")
    return math.log(-math.log2(1.0 - p))


def delta_scale(n: float) -> float:
    """exp(-(log log n)^(1/2)); needs n > e."""
    if n <= math.e:
        raise ValueError("delta_scale needs n > e")
    return math.exp(-math.sqrt(math.log(math.log(n))))


def log_R(n: float) -> float:
    return math.log(n) ** 9


def R(n: float) -> float:
    """exp((log n)^9), or inf past float range."""
    try:
        return math.exp(log_R(n))
    except OverflowError:
        return math.inf


def L(n: float) -> float:
    return math.sqrt(math.log(n))


def delta_at_R(n: float) -> float:
    """delta_scale(R(n)) computed in log space: exp(-(9 log log n)^(1/2))."""
    if n <= math.e:
        raise ValueError("needs n > e")
    return math.exp(-math.sqrt(9 * math.log(math.log(n))))


def R_squared_exceeds(n: float, bound: float) -> bool:
    """Whether R(R(n)) > bound, without overflow."""
    if bound <= 1:
        return True
    # log R(R(n)) = (log R(n))^9
    return log_R(n) ** 9 > math.log(bound)


# ---------------------------------------------------------------- orange / green

@dataclass(frozen=True)
class ScaleStatus:
    verdict: bool
    margin: float
    threshold: float
    estimate: MCEstimate | None
    clamped: bool
    reason: str
    detail: dict = field(default_factory=dict)


def orange_status(g: FiniteGraph, n: float, t: float, trials: int, seed: int = 0, root: int = 0,
                  confidence: float = DEFAULT_CONFIDENCE, workers: int = 1) -> ScaleStatus:
    """min over u in B_n of P_phi(t)(o <-> u) against delta_scale(n)."""
    if n < 16:
        raise ValueError("scale predicates need n >= 16")
    p = phi(t)
    diameter = metric_profile(g, root).diameter
    est, argmin = min_two_point_over_ball(g, p, n, trials, seed, root, confidence, workers)
    thr = delta_scale(n)
    ok = est.point >= thr
    return ScaleStatus(ok, est.point - thr, thr, est, math.floor(n) > diameter,
                       "orange" if ok else "two-point below delta(n)", {"argmin": argmin, "p": p})


def green_status(g: FiniteGraph, n: float, t: float, trials: int, seed: int = 0, paths_budget: int = 4,
                 exponent: float = 100.0, root: int = 0, confidence: float = DEFAULT_CONFIDENCE,
                 workers: int = 1) -> ScaleStatus:
    """Orange and (n outside the low-growth set or corridor over R^2(n) >= delta(R(n))).

    R^2(n) exceeds any feasible diameter, so the corridor length is clamped to
    the diameter and ``clamped`` records it.
    """
    orange = orange_status(g, n, t, trials, seed, root, confidence, workers)
    if not orange.verdict:
        return ScaleStatus(False, orange.margin, orange.threshold, orange.estimate, orange.clamped,
                           "not orange", {"orange": asdict(orange)})
    if not is_low_growth(g, n, exponent, root):
        return ScaleStatus(True, orange.margin, orange.threshold, orange.estimate, orange.clamped,
                           "not_low_growth", {"orange_margin": orange.margin})
    diameter = metric_profile(g, root).diameter
    clamped = R_squared_exceeds(n, diameter)
    length = diameter if clamped else math.floor(R(R(n)))
    cor = corridor_kappa(g, phi(t), max(length, 1), n, trials, paths_budget, seed, root, confidence, workers)
    thr = delta_at_R(n)
    ok = cor.estimate.point >= thr
    return ScaleStatus(ok, cor.estimate.point - thr, thr, cor.estimate, clamped,
                       "corridor" if ok else "corridor below delta(R(n))",
                       {"orange_margin": orange.margin, "path": cor.path})
