"""Coarse geometry of finite transitive graphs.

Exposed spheres and cutsets, the ball-removal property, cycle-space
diameter brackets, plentiful-tube packings, and certified bounds on the
Gromov-Hausdorff distance between the rescaled graph (pi / diam G) G and the
unit circle with its arc-length metric.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from ._kernels import bfs_parents
from .graphs import FiniteGraph, metric_profile

TRIVIAL_GH = math.pi / 2  # half the common diameter pi of both rescaled spaces


def _as_array(vertices) -> np.ndarray:
    return np.unique(np.asarray(list(vertices) if not isinstance(vertices, np.ndarray) else vertices,
                                dtype=np.int64))


def _mask(g: FiniteGraph, vertices) -> np.ndarray:
    m = np.zeros(g.vertex_count, dtype=np.bool_)
    m[_as_array(vertices)] = True
    return m


def _trace(g: FiniteGraph, dist: np.ndarray, end: int) -> list[int]:
    """Walk back from ``end`` along strictly decreasing BFS distances (smallest id first)."""
    path = [int(end)]
    while dist[path[-1]] > 0:
        v = path[-1]
        path.append(int(next(w for w in g.neighbors(v).tolist() if dist[w] == dist[v] - 1)))
    return path[::-1]


def _tree(g: FiniteGraph, root: int):
    key = ("bfs_tree", root)
    if key not in g._memo:
        g._memo[key] = bfs_parents(g.indptr, g.indices, root)
    return g._memo[key]


# ---------------------------------------------------------------- exposed spheres

@dataclass(frozen=True)
class ExposedSphere:
    root: int
    n: int
    members: np.ndarray
    sphere_out_of_range: bool = False


def exposed_sphere(g: FiniteGraph, root: int, n: float) -> ExposedSphere:
    """S_n^inf: vertices of S_n joined to S_{2n+1} by a path whose other vertices avoid B_n."""
    n = math.floor(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    dist = metric_profile(g, root).distances
    outer = np.flatnonzero(dist == 2 * n + 1)
    if outer.size == 0:
        return ExposedSphere(root, n, np.empty(0, dtype=np.int64), True)
    reach = g.distances_from(outer, blocked=dist <= n) >= 0
    members = [u for u in np.flatnonzero(dist == n).tolist() if reach[g.neighbors(u)].any()]
    return ExposedSphere(root, n, np.array(members, dtype=np.int64))


# ---------------------------------------------------------------- connectivity of sets

@dataclass(frozen=True)
class RConnectivity:
    connected: bool
    r: int
    partition: tuple[list[int], list[int]] | None = None


def is_r_connected(g: FiniteGraph, vertices, r: float) -> RConnectivity:
    """Whether no split of the set into two parts has the parts at distance > r."""
    verts = _as_array(vertices)
    r = math.floor(r)
    if verts.size == 0:
        raise ValueError("set must be nonempty")
    inside = _mask(g, verts)
    seen = {int(verts[0])}
    stack = [int(verts[0])]
    while stack:
        v = stack.pop()
        d = g.distances_from(v, max_radius=r)
        for w in np.flatnonzero((d >= 0) & inside).tolist():
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) == verts.size:
        return RConnectivity(True, r)
    side = sorted(seen)
    rest = sorted(set(verts.tolist()) - seen)
    return RConnectivity(False, r, (side, rest))


@dataclass(frozen=True)
class RemovalReport:
    parts: list[list[int]]
    dropped_overlap: bool

    @property
    def disconnects(self) -> bool:
        return len(self.parts) >= 2


def removal_components(g: FiniteGraph, removed, probe) -> RemovalReport:
    """Components of G minus ``removed``, restricted to ``probe``."""
    gone = _mask(g, removed) if len(removed) else np.zeros(g.vertex_count, dtype=np.bool_)
    probe = _as_array(probe)
    dropped = bool(gone[probe].any())
    probe = probe[~gone[probe]]
    if probe.size == 0:
        return RemovalReport([], dropped)
    keep = ~gone[g.eu] & ~gone[g.ev]
    from .percolation import cluster_labels
    labels, _ = cluster_labels(g, keep)
    parts: dict[int, list[int]] = {}
    for v in probe.tolist():
        parts.setdefault(int(labels[v]), []).append(v)
    return RemovalReport(sorted(parts.values()), dropped)


def ball_removal_holds(g: FiniteGraph, r: int, root: int = 0) -> bool:
    """B_r does not disconnect the complement of B_{2r}."""
    dist = metric_profile(g, root).distances
    far = np.flatnonzero(dist > 2 * r)
    return not removal_components(g, np.flatnonzero(dist <= r), far).disconnects


# ---------------------------------------------------------------- cutsets

@dataclass(frozen=True)
class CutsetReport:
    cutset: list[int]
    source: list[int]
    target: list[int]
    is_cutset: bool
    is_minimal: bool
    removable: int | None = None
    violating_path: list[int] | None = None


def _path_avoiding(g: FiniteGraph, A: np.ndarray, B: np.ndarray, blocked: np.ndarray) -> list[int] | None:
    dist = g.distances_from(A, blocked=blocked)
    hit = B[dist[B] >= 0]
    if hit.size == 0:
        return None
    end = int(hit[np.argmin(dist[hit])])
    return _trace(g, dist, end)


def cutset_audit(g: FiniteGraph, cutset, A, B) -> CutsetReport:
    """Is ``cutset`` an (A, B)-cutset, and is it minimal?

    Minimality is checked by single-vertex removals, which suffices for
    vertex cutsets: if no single vertex can be dropped, no subset can.
    """
    C, A, B = _as_array(cutset), _as_array(A), _as_array(B)
    if np.intersect1d(C, A).size or np.intersect1d(C, B).size or np.intersect1d(A, B).size:
        raise ValueError("cutset, A and B must be pairwise disjoint")
    blocked = _mask(g, C) if C.size else np.zeros(g.vertex_count, dtype=np.bool_)
    path = _path_avoiding(g, A, B, blocked)
    base = dict(cutset=C.tolist(), source=A.tolist(), target=B.tolist())
    if path is not None:
        return CutsetReport(**base, is_cutset=False, is_minimal=False, violating_path=path)
    for x in C.tolist():
        blocked[x] = False
        restored = _path_avoiding(g, A, B, blocked) is not None
        blocked[x] = True
        if not restored:
            return CutsetReport(**base, is_cutset=True, is_minimal=False, removable=x)
    return CutsetReport(**base, is_cutset=True, is_minimal=True)


def minimal_cutset(g: FiniteGraph, A, B, start) -> list[int]:
    """Shrink the (A, B)-cutset ``start`` to a minimal one by one pass of single-vertex drops.

    A vertex kept once stays necessary: removing more vertices from a
    non-cutset never makes it a cutset.
    """
    A, B = _as_array(A), _as_array(B)
    blocked = _mask(g, start)
    if _path_avoiding(g, A, B, blocked) is not None:
        raise ValueError("start is not an (A, B)-cutset")
    for x in _as_array(start).tolist():
        blocked[x] = False
        if _path_avoiding(g, A, B, blocked) is not None:
            blocked[x] = True
    return np.flatnonzero(blocked).tolist()


def random_minimal_cutset(g: FiniteGraph, rng: np.random.Generator) -> tuple[list[int], list[int], list[int]]:
    """A random instance (cutset, A, B) with singleton A and B at distance >= 2.

    The starting cutset is the outer boundary of a random ball around a,
    then shrunk to a minimal one.
    """
    while True:
        a = int(rng.integers(g.vertex_count))
        d = g.distances_from(a)
        far = np.flatnonzero(d >= 2)
        if far.size:
            break
    b = int(far[rng.integers(far.size)])
    k = int(rng.integers(0, d[b] - 1))
    start = np.flatnonzero(d == k + 1)
    return minimal_cutset(g, [a], [b], start), [a], [b]


# ---------------------------------------------------------------- cycle space

@dataclass(frozen=True)
class CycleSpaceBracket:
    delta_lower: int | None
    delta_upper: int | None
    rank_full: int
    radius: int | None
    status: str  # "exact", "bracket", "trivial" or "not determined"
    upper_source: str = "ball"


class _GF2Basis:
    """Incremental GF(2) row reduction with Python ints as bitsets."""

    def __init__(self):
        self.pivots: dict[int, int] = {}

    def add(self, vec: int) -> bool:
        while vec:
            top = vec.bit_length() - 1
            row = self.pivots.get(top)
            if row is None:
                self.pivots[top] = vec
                return True
            vec ^= row
        return False

    @property
    def rank(self) -> int:
        return len(self.pivots)


def _fundamental_cycles(g: FiniteGraph, verts: np.ndarray) -> Iterable[int]:
    """Edge bitsets of a fundamental cycle basis of the subgraph induced on ``verts``."""
    inside = _mask(g, verts)
    emask = inside[g.eu] & inside[g.ev]
    parent = {}
    parent_edge = {}
    depth = {}
    for s in verts.tolist():
        if s in depth:
            continue
        depth[s] = 0
        parent[s] = s
        queue = [s]
        for v in queue:
            for w in g.neighbors(v).tolist():
                if inside[w] and w not in depth:
                    depth[w] = depth[v] + 1
                    parent[w] = v
                    parent_edge[w] = g.edge_id(v, w)
                    queue.append(w)
    tree = set(parent_edge.values())
    for e in np.flatnonzero(emask).tolist():
        if e in tree:
            continue
        u, v = (int(x) for x in g.edges[e])
        vec = 1 << e
        while u != v:
            if depth[u] < depth[v]:
                u, v = v, u
            vec ^= 1 << parent_edge[u]
            u = parent[u]
        yield vec


def _cycle_diameter(g: FiniteGraph, cycle: Sequence[int]) -> int:
    return max(int(g.distances_from(v)[list(cycle)].max()) for v in cycle)


def _edge_bits(g: FiniteGraph, cycle: Sequence[int]) -> int:
    vec = 0
    for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
        vec ^= 1 << g.edge_id(a, b)
    return vec


def _ball_span_full(g: FiniteGraph, m: int, rank_full: int, budget: int) -> bool | None:
    basis = _GF2Basis()
    used = 0
    for v in range(g.vertex_count):
        verts = np.flatnonzero(g.distances_from(v, max_radius=m) >= 0)
        for vec in _fundamental_cycles(g, verts):
            used += 1
            if used > budget:
                return None
            basis.add(vec)
            if basis.rank == rank_full:
                return True
    return False


def delta_bracket(g: FiniteGraph, budget: int = 200_000, exhaustive_limit: int = 64) -> CycleSpaceBracket:
    """Bracket the cycle-space diameter delta(G).

    Let m be the least radius at which the cycle spaces of all balls B_m(v)
    span the whole cycle space. Every cycle of diameter <= m - 1 sits in
    B_{m-1}(v) for any of its vertices v, so those cycles do not span and
    delta >= m. Every cycle inside B_m(v) has diameter <= 2m, so
    delta <= min(2m, diam G). On graphs with at most ``exhaustive_limit``
    vertices the upper end is tightened with enumerated short cycles.
    """
    rank_full = g.edge_count - g.vertex_count + 1
    if rank_full <= 0:
        return CycleSpaceBracket(0, 0, 0, 0, "trivial")
    if g.edge_count > 20_000:
        return CycleSpaceBracket(None, None, rank_full, None, "not determined")
    D = metric_profile(g).diameter
    lo, hi = 1, D
    full_at_hi = _ball_span_full(g, hi, rank_full, budget)
    if full_at_hi is None:
        return CycleSpaceBracket(None, None, rank_full, None, "not determined")
    while lo < hi:
        mid = (lo + hi) // 2
        ok = _ball_span_full(g, mid, rank_full, budget)
        if ok is None:
            return CycleSpaceBracket(None, None, rank_full, None, "not determined")
        if ok:
            hi = mid
        else:
            lo = mid + 1
    m = lo
    upper, source = min(2 * m, D), "ball"
    if g.vertex_count <= exhaustive_limit and upper > m:
        tight = _enumerated_upper(g, m, upper, rank_full)
        if tight is not None and tight < upper:
            upper, source = tight, "enumeration"
    return CycleSpaceBracket(m, upper, rank_full, m, "exact" if upper == m else "bracket", source)


def _enumerated_upper(g: FiniteGraph, lower: int, upper: int, rank_full: int,
                      max_length: int = 12) -> int | None:
    """Least k in [lower, upper) whose enumerated cycles of diameter <= k span; None if none do."""
    H = g.to_networkx()
    by_diam: dict[int, list[int]] = {}
    for cyc in nx.simple_cycles(H, length_bound=max_length):
        if len(cyc) < 3:
            continue
        d = _cycle_diameter(g, cyc)
        if d < upper:
            by_diam.setdefault(d, []).append(_edge_bits(g, cyc))
    basis = _GF2Basis()
    for k in range(0, upper):
        for vec in by_diam.get(k, []):
            basis.add(vec)
        if k >= lower and basis.rank == rank_full:
            return k
    return None


# ---------------------------------------------------------------- tubes

@dataclass(frozen=True)
class TubeFamily:
    n: int
    k: int
    r: int
    l: int
    tubes: list[list[int]]
    source: list[int]
    target: list[int]
    mode: str

    @property
    def count(self) -> int:
        return len(self.tubes)

    @property
    def success(self) -> bool:
        return self.count >= self.k and all(len(t) - 1 <= self.l for t in self.tubes)

    def verify(self, g: FiniteGraph) -> bool:
        src, dst = set(self.source), set(self.target)
        for t in self.tubes:
            if t[0] not in src or t[-1] not in dst:
                return False
            if any(b not in set(g.neighbors(a).tolist()) for a, b in zip(t[:-1], t[1:])):
                return False
        hoods = [set(np.flatnonzero(g.distances_from(t, max_radius=self.r) >= 0).tolist()) for t in self.tubes]
        return all(not (x & y) for x, y in itertools.combinations(hoods, 2))


class ScaleInfeasible(ValueError):
    pass


def plentiful_tubes(g: FiniteGraph, root: int, n: float, k: int, r: float, l: float, mode: str = "spheres",
                    A=None, B=None) -> TubeFamily:
    """Greedy packing of A -> B paths whose r-neighbourhoods are pairwise disjoint.

    Each round takes a shortest A -> B path in what is left of the graph and
    deletes every vertex within distance 2r of it, so later paths keep their
    r-neighbourhoods clear of it. The count is a lower bound on the packing
    number. ``mode`` is "spheres" for (A, B) = (S_n, S_4n) or "sets" for
    caller-supplied A and B.
    """
    n, r, l = math.floor(n), math.floor(r), math.floor(l)
    if min(k, r, l) < 0:
        raise ValueError("k, r, l must be >= 0")
    dist = metric_profile(g, root).distances
    if mode == "spheres":
        if 4 * n > int(dist.max()) or n < 1:
            raise ScaleInfeasible(f"scale infeasible: 4n = {4 * n} exceeds diameter {int(dist.max())}")
        A, B = np.flatnonzero(dist == n), np.flatnonzero(dist == 4 * n)
    elif mode == "sets":
        if A is None or B is None:
            raise ValueError("mode 'sets' needs A and B")
        A, B = _as_array(A), _as_array(B)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    gone = np.zeros(g.vertex_count, dtype=np.bool_)
    tubes = []
    while True:
        srcs = A[~gone[A]]
        dsts = B[~gone[B]]
        if srcs.size == 0 or dsts.size == 0:
            break
        path = _path_avoiding(g, srcs, dsts, gone.copy())
        if path is None:
            break
        tubes.append(path)
        gone |= g.distances_from(path, max_radius=2 * r) >= 0
    return TubeFamily(n, k, r, l, tubes, A.tolist(), B.tolist(), mode)


# ---------------------------------------------------------------- dense cycles and GH bounds

@dataclass(frozen=True)
class DenseCycle:
    cycle: list[int]
    density: int
    defect: int
    origin: str

    @property
    def length(self) -> int:
        return len(self.cycle)


def _is_cycle(g: FiniteGraph, cycle: Sequence[int]) -> bool:
    if len(cycle) < 3 or len(set(cycle)) != len(cycle):
        return False
    return all(b in set(g.neighbors(a).tolist()) for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]))


def cycle_density(g: FiniteGraph, cycle: Sequence[int]) -> int:
    return int(g.distances_from(list(cycle)).max())


def cycle_defect(g: FiniteGraph, cycle: Sequence[int]) -> int:
    """max over s, t of (|s - t|_l - dist(lambda_s, lambda_t))_+."""
    l = len(cycle)
    idx = np.arange(l)
    cyc = np.asarray(cycle, dtype=np.int64)
    worst = 0
    for s in range(l):
        d = g.distances_from(int(cyc[s]))[cyc]
        gap = np.abs(idx - s)
        gap = np.minimum(gap, l - gap)
        worst = max(worst, int((gap - d).max()))
    return worst


def _tree_cycle(parent: np.ndarray, depth: np.ndarray, u: int, v: int) -> list[int]:
    left, right = [u], [v]
    while left[-1] != right[-1]:
        if depth[left[-1]] >= depth[right[-1]]:
            left.append(int(parent[left[-1]]))
        else:
            right.append(int(parent[right[-1]]))
    return left + right[-2::-1]


def _fundamental_candidates(g: FiniteGraph, root: int) -> list[list[int]]:
    depth, parent = _tree(g, root)
    out = []
    for u, v in g.edges.tolist():
        if parent[u] == v or parent[v] == u:
            continue
        out.append(_tree_cycle(parent, depth, u, v))
    return out


def _exposed_candidates(g: FiniteGraph, root: int) -> list[list[int]]:
    """Cycles built from two sides of an exposed sphere, as in the circle comparison argument.

    The exposed sphere S_{2n}^inf is split by the components of the annulus
    2n <= dist <= 4n; a shortest path between two sides avoiding the interior
    of B_{2n} is closed up with geodesics back to the root.
    """
    dist = metric_profile(g, root).distances
    D = int(dist.max())
    depth, parent = _tree(g, root)
    from .percolation import cluster_labels
    out = []
    for n in range(1, (D - 1) // 4 + 1):
        members = exposed_sphere(g, root, 2 * n).members
        if members.size < 2:
            continue
        annulus = (dist >= 2 * n) & (dist <= 4 * n)
        labels, _ = cluster_labels(g, annulus[g.eu] & annulus[g.ev])
        groups: dict[int, list[int]] = {}
        for u in members.tolist():
            groups.setdefault(int(labels[u]), []).append(u)
        if len(groups) < 2:
            continue
        sides = sorted(groups.values())
        A, B = np.array(sides[0]), np.array(sides[1])
        blocked = dist <= 2 * n
        blocked[B] = False
        path = _path_avoiding(g, A, B, blocked)
        if path is None:
            continue
        out.append(_close(parent, depth, path))
    return out


def _close(parent: np.ndarray, depth: np.ndarray, path: list[int]) -> list[int]:
    """Cycle formed by ``path`` and the two tree geodesics from its ends to their common ancestor."""
    up_a, up_b = [path[0]], [path[-1]]
    while up_a[-1] != up_b[-1]:
        if depth[up_a[-1]] >= depth[up_b[-1]]:
            up_a.append(int(parent[up_a[-1]]))
        else:
            up_b.append(int(parent[up_b[-1]]))
    # path a..b, then b up to the ancestor, then down to a (excluding a)
    return list(path) + up_b[1:] + up_a[-2:0:-1]


def dense_cycle_certificate(g: FiniteGraph, budget_roots: int = 1, max_checked: int = 64) -> DenseCycle | None:
    """Best witness cycle with density <= diam/8 for the GH upper bound, or None.

    Candidates are fundamental cycles of BFS trees from up to ``budget_roots``
    evenly spaced roots plus exposed-sphere cycles from each root. Ties go to
    the lowest root.
    """
    D = metric_profile(g).diameter
    roots = sorted(set(np.linspace(0, g.vertex_count - 1, max(1, budget_roots)).round().astype(int).tolist()))
    pool = []
    seen = set()
    for root in roots:
        for origin, cands in (("exposed", _exposed_candidates(g, root)), ("fundamental", _fundamental_candidates(g, root))):
            for cyc in cands:
                key = frozenset(cyc)
                if key in seen or not _is_cycle(g, cyc):
                    continue
                seen.add(key)
                a = cycle_density(g, cyc)
                if 8 * a <= D:
                    pool.append((cyc, a, origin))
    if not pool:
        return None
    # rank by the bound with zero defect, which only understates it
    pool.sort(key=lambda t: _gh_bound(len(t[0]), t[1], 0, D))
    best = None
    for cyc, a, origin in pool[:max_checked]:
        if best is not None and _gh_bound(len(cyc), a, 0, D) >= _gh_bound(best.length, best.density, best.defect, D):
            break
        b = cycle_defect(g, cyc)
        cand = DenseCycle(list(map(int, cyc)), a, b, origin)
        if best is None or _gh_bound(cand.length, a, b, D) < _gh_bound(best.length, best.density, best.defect, D):
            best = cand
    return best


def _gh_terms(l: int, a: int, b: int, D: int) -> dict:
    return {
        "rescale": math.pi * abs(1 - 2 * D / l),
        "quasi_isometry": 2 * math.pi / l * (a + b),
        "lattice_to_circle": 2 * math.pi / l,
    }


def _gh_bound(l: int, a: int, b: int, D: int) -> float:
    return sum(_gh_terms(l, a, b, D).values())


@dataclass(frozen=True)
class GHCertificate:
    """A bound on dist_GH((pi / D) G, S^1) with the witness that proves it."""

    kind: str  # "upper" or "lower"
    value: float
    diameter: int
    witness: dict = field(default_factory=dict)
    terms: dict = field(default_factory=dict)
    trivial: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GHCertificate":
        return cls(**json.loads(text))

    def verify(self, g: FiniteGraph, tol: float = 1e-12) -> bool:
        D = metric_profile(g).diameter
        if D != self.diameter:
            return False
        if self.kind == "upper":
            if self.trivial:
                return abs(self.value - TRIVIAL_GH) <= tol
            cyc = self.witness["cycle"]
            if not _is_cycle(g, cyc):
                return False
            a, b = cycle_density(g, cyc), cycle_defect(g, cyc)
            if (a, b) != (self.witness["density"], self.witness["defect"]):
                return False
            return abs(min(_gh_bound(len(cyc), a, b, D), TRIVIAL_GH) - self.value) <= tol
        if self.kind == "lower":
            if self.value == 0:
                return True
            pts, k = self.witness["points"], self.witness["separation"]
            for u in pts:
                d = g.distances_from(u)[pts]
                if (d[np.asarray(pts) != u] < k).any():
                    return False
            eps = math.pi * k / D
            gap = eps - 2 * self.value
            return gap > 0 and len(pts) * gap >= 2 * math.pi - 1e-9
        return False


def gh_circle_upper(g: FiniteGraph, budget_roots: int = 1) -> GHCertificate:
    """Triangle-inequality chain through a dense quasi-geodesic cycle of length l.

    dist_GH <= pi |1 - 2D/l| + (2 pi / l)(a + b) + 2 pi / l, with measured
    density a and defect b; capped by the trivial bound pi / 2.
    """
    D = metric_profile(g).diameter
    cyc = dense_cycle_certificate(g, budget_roots)
    if cyc is None:
        return GHCertificate("upper", TRIVIAL_GH, D, {}, {}, trivial=True)
    terms = _gh_terms(cyc.length, cyc.density, cyc.defect, D)
    value = sum(terms.values())
    witness = {"cycle": cyc.cycle, "density": cyc.density, "defect": cyc.defect,
               "length": cyc.length, "origin": cyc.origin}
    if value >= TRIVIAL_GH:
        return GHCertificate("upper", TRIVIAL_GH, D, witness, terms, trivial=True)
    return GHCertificate("upper", value, D, witness, terms)


def greedy_packing(g: FiniteGraph, k: int) -> list[int]:
    """Greedy k-separated set in canonical vertex order."""
    near = np.zeros(g.vertex_count, dtype=np.bool_)
    pts = []
    for v in range(g.vertex_count):
        if near[v]:
            continue
        pts.append(v)
        near |= g.distances_from(v, max_radius=k - 1) >= 0
    return pts


def gh_circle_lower(g: FiniteGraph) -> GHCertificate:
    """Packing obstruction.

    If dist_GH < delta, an eps-separated set of N points in (pi / D) G maps
    to N points of S^1 pairwise more than eps - 2 delta apart, forcing
    N (eps - 2 delta) < 2 pi. So dist_GH >= (eps - 2 pi / N) / 2 for every
    eps-separated N-point set. Separations eps = pi k / D, k = 1..D.
    """
    D = metric_profile(g).diameter
    best, witness = 0.0, {}
    for k in range(1, D + 1):
        pts = greedy_packing(g, k)
        value = (math.pi * k / D - 2 * math.pi / len(pts)) / 2
        if value > best:
            best, witness = value, {"separation": k, "points": pts, "epsilon": math.pi * k / D}
    return GHCertificate("lower", best, D, witness)


@dataclass(frozen=True)
class GammaQuantities:
    gamma: tuple[float, float]
    gamma_plus: tuple[float, float]
    diameter: int
    exceeds_graph: bool


def _gamma_plus(x: float) -> float:
    if x <= 0:
        return 0.0
    try:
        return math.exp(math.log(x) ** 9)
    except OverflowError:
        return math.inf


def gamma_quantities(g: FiniteGraph, lower: GHCertificate | None = None,
                     upper: GHCertificate | None = None) -> GammaQuantities:
    """gamma = dist_GH * D and gamma+ = exp((log gamma)^9), as intervals.

    ``exceeds_graph`` is set when even the lower end of gamma+ passes the
    diameter, so that B_{gamma+} is the whole graph.
    """
    lower = lower or gh_circle_lower(g)
    upper = upper or gh_circle_upper(g)
    D = lower.diameter
    gam = (lower.value * D, upper.value * D)
    plus = (_gamma_plus(gam[0]), _gamma_plus(gam[1]))
    return GammaQuantities(gam, plus, D, plus[0] > D)


def classify(lower: GHCertificate, upper: GHCertificate, gq: GammaQuantities, threshold: float = 0.2) -> str:
    if gq.gamma_plus[1] <= gq.diameter:
        return "circle-like fast"
    if lower.value >= threshold:
        return "not circle-like"
    if not upper.trivial:
        return "stretched"
    return "undetermined"
