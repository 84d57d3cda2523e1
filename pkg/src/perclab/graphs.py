"""Finite transitive graph families and their metric structure."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property, reduce
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from . import _kernels

DATA_DIR = Path(__file__).parent / "data"


class GraphSpecError(ValueError):
    """Raised for malformed or invalid graph-spec strings and Cayley tables.

    ``position`` is the character offset in the spec where parsing failed,
    when that is meaningful.
    """

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


@dataclass(frozen=True, eq=False)
class FiniteGraph:
    """Immutable simple undirected graph in CSR adjacency form.

    ``edges`` holds the canonical edge list as an (|E|, 2) array with
    ``u < v`` in each row and rows sorted; an EdgeId is a row index.
    """

    vertex_count: int
    indptr: np.ndarray
    indices: np.ndarray
    edges: np.ndarray
    spec_string: str = ""
    _edge_ids: dict = field(default_factory=dict, repr=False)
    _memo: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_edges(cls, n: int, pairs: Iterable[tuple[int, int]], spec: str = "") -> "FiniteGraph":
        canon = set()
        for u, v in pairs:
            u, v = int(u), int(v)
            if u == v:
                raise GraphSpecError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphSpecError(f"edge ({u}, {v}) out of range for {n} vertices")
            canon.add((min(u, v), max(u, v)))
        edges = np.array(sorted(canon), dtype=np.int64).reshape(-1, 2)
        deg = np.zeros(n, dtype=np.int64)
        np.add.at(deg, edges[:, 0], 1)
        np.add.at(deg, edges[:, 1], 1)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        both = np.concatenate([edges, edges[:, ::-1]])
        both = both[np.lexsort((both[:, 1], both[:, 0]))]
        indices = both[:, 1].copy()
        ids = {(int(u), int(v)): i for i, (u, v) in enumerate(edges)}
        for a in (indptr, indices, edges):
            a.setflags(write=False)
        return cls(n, indptr, indices, edges, spec, ids)

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def degree(self) -> int:
        """The common degree; raises if the graph is not regular."""
        degs = self.degrees
        if degs.size == 0 or degs.min() != degs.max():
            raise ValueError("graph is not regular")
        return int(degs[0])

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def edge_id(self, u: int, v: int) -> int:
        key = (min(u, v), max(u, v))
        try:
            return self._edge_ids[key]
        except KeyError:
            raise KeyError(f"no edge between {u} and {v}") from None

    @cached_property
    def eu(self) -> np.ndarray:
        return np.ascontiguousarray(self.edges[:, 0])

    @cached_property
    def ev(self) -> np.ndarray:
        return np.ascontiguousarray(self.edges[:, 1])

    def distances_from(self, sources, blocked=None, max_radius: int = -1) -> np.ndarray:
        """BFS distances from a vertex or vertex set; -1 where unreachable."""
        src = np.atleast_1d(np.asarray(sources, dtype=np.int64))
        if blocked is None:
            blocked = _NO_BLOCK.get(self.vertex_count)
        return _kernels.bfs(self.indptr, self.indices, src, blocked, int(max_radius))

    def is_connected(self) -> bool:
        if self.vertex_count == 0:
            return False
        return bool((self.distances_from(0) >= 0).all())

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(range(self.vertex_count))
        G.add_edges_from(map(tuple, self.edges.tolist()))
        return G

    def edge_list_text(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.edges.tolist())

    def write_edge_list(self, path) -> None:
        Path(path).write_text(self.edge_list_text())


class _BlockCache(dict):
    def get(self, n):
        arr = super().get(n)
        if arr is None:
            arr = np.zeros(n, dtype=np.bool_)
            arr.setflags(write=False)
            self[n] = arr
        return arr


_NO_BLOCK = _BlockCache()


# ---------------------------------------------------------------- generators

_SPEC_RE = re.compile(r"^(?P<kind>[a-z]+):(?P<body>.+)$")


def _int(text: str, offset: int, what: str) -> int:
    if not re.fullmatch(r"\d+", text):
        raise GraphSpecError(f"expected integer for {what}, got {text!r} at position {offset}", offset)
    return int(text)


def generate(spec: str) -> FiniteGraph:
    """Build a graph from a spec string.

    Supported forms are ``cycle:<n>``, ``torus:<n1>x<n2>[x...]``,
    ``circulant:<n>:<s1,s2,...>`` and ``cayley:<path>``. Vertex 0 is the
    canonical root; tori are numbered row-major.
    """
    m = _SPEC_RE.match(spec.strip())
    if not m:
        raise GraphSpecError(f"malformed graph spec {spec!r}: expected '<kind>:<params>'", 0)
    kind, body = m["kind"], m["body"]
    offset = m.start("body")
    if kind == "cycle":
        n = _int(body, offset, "cycle length")
        if n < 3:
            raise GraphSpecError(f"n below minimum: cycle length {n} < 3", offset)
        return FiniteGraph.from_edges(n, ((i, (i + 1) % n) for i in range(n)), spec)
    if kind == "torus":
        parts = body.split("x")
        sides = []
        pos = offset
        for part in parts:
            sides.append(_int(part, pos, "torus side"))
            pos += len(part) + 1
        if any(s < 3 for s in sides):
            raise GraphSpecError(f"n below minimum: torus sides must be >= 3, got {sides}", offset)
        return _torus(sides, spec)
    if kind == "circulant":
        if ":" not in body:
            raise GraphSpecError("circulant spec needs '<n>:<steps>'", offset)
        head, steps_txt = body.split(":", 1)
        n = _int(head, offset, "circulant order")
        if n < 3:
            raise GraphSpecError(f"n below minimum: circulant order {n} < 3", offset)
        pos = offset + len(head) + 1
        steps = []
        for part in steps_txt.split(","):
            steps.append(_int(part, pos, "circulant step"))
            pos += len(part) + 1
        return _circulant(n, steps, spec)
    if kind == "cayley":
        return load_cayley(body, spec=spec)
    raise GraphSpecError(f"unknown graph family {kind!r}", 0)


def _torus(sides: Sequence[int], spec: str) -> FiniteGraph:
    n = math.prod(sides)
    coords = np.indices(sides).reshape(len(sides), -1)
    strides = np.array([math.prod(sides[i + 1:]) for i in range(len(sides))], dtype=np.int64)
    pairs = []
    for axis, side in enumerate(sides):
        shifted = coords.copy()
        shifted[axis] = (shifted[axis] + 1) % side
        nbr = strides @ shifted
        pairs.append(np.stack([np.arange(n), nbr], axis=1))
    return FiniteGraph.from_edges(n, np.concatenate(pairs).tolist(), spec)


def _circulant(n: int, steps: Sequence[int], spec: str) -> FiniteGraph:
    reduced = sorted({min(s % n, (-s) % n) for s in steps})
    if not reduced or 0 in reduced:
        raise GraphSpecError(f"circulant steps must be nonzero mod {n}: {list(steps)}")
    if reduce(math.gcd, reduced, n) != 1:
        raise GraphSpecError(f"disconnected: steps {reduced} do not generate Z_{n}")
    pairs = [(i, (i + s) % n) for s in reduced for i in range(n)]
    return FiniteGraph.from_edges(n, pairs, spec)


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    if (DATA_DIR / path).exists():
        return DATA_DIR / path
    raise GraphSpecError(f"Cayley table file not found: {path}")


def parse_cayley_table(text: str) -> tuple[np.ndarray, list[int]]:
    """Parse ``n k`` / n x n multiplication table / k generator indices."""
    tokens = text.split()
    try:
        nums = [int(t) for t in tokens]
    except ValueError as exc:
        raise GraphSpecError(f"non-integer token in Cayley table: {exc}") from None
    if len(nums) < 2:
        raise GraphSpecError("Cayley table missing header 'n k'")
    n, k = nums[0], nums[1]
    if len(nums) != 2 + n * n + k:
        raise GraphSpecError(f"Cayley table should hold {2 + n * n + k} integers, found {len(nums)}")
    table = np.array(nums[2:2 + n * n], dtype=np.int64).reshape(n, n)
    gens = nums[2 + n * n:]
    return table, gens


def check_group(table: np.ndarray) -> int:
    """Verify group axioms; return the identity index."""
    n = table.shape[0]
    if table.min() < 0 or table.max() >= n:
        raise GraphSpecError("multiplication table entries out of range")
    ids = [e for e in range(n) if (table[e] == np.arange(n)).all() and (table[:, e] == np.arange(n)).all()]
    if not ids:
        raise GraphSpecError("multiplication table has no identity")
    e = ids[0]
    for a in range(n):
        if not (table[a] == e).any():
            raise GraphSpecError(f"element {a} has no inverse")
    # (ab)c == a(bc) for all triples
    left = table[table, :]  # left[a, b, c] = (ab)c
    right = table[:, table]  # right[a, b, c] = a(bc)
    if not np.array_equal(left, right):
        raise GraphSpecError("multiplication table is not associative")
    return e


def load_cayley(path: str, spec: str | None = None) -> FiniteGraph:
    """Right Cayley graph g ~ g*s from a multiplication-table file."""
    text = _resolve(path).read_text()
    table, gens = parse_cayley_table(text)
    n = table.shape[0]
    e = check_group(table)
    gset = set(gens)
    if any(not 0 <= s < n for s in gset):
        raise GraphSpecError("generator index out of range")
    if e in gset:
        raise GraphSpecError("identity cannot be a generator (would create loops)")
    inverse = {a: int(np.nonzero(table[a] == e)[0][0]) for a in range(n)}
    for s in gset:
        if inverse[s] not in gset:
            raise GraphSpecError(f"generator set not symmetric: inverse of {s} missing")
    pairs = [(g, int(table[g, s])) for g in range(n) for s in sorted(gset)]
    graph = FiniteGraph.from_edges(n, pairs, spec or f"cayley:{path}")
    if not graph.is_connected():
        raise GraphSpecError("disconnected: generators do not generate the group")
    return graph


def cayley_table_text(table: np.ndarray, gens: Sequence[int]) -> str:
    n = table.shape[0]
    rows = "\n".join(" ".join(map(str, row)) for row in table.tolist())
    return f"{n} {len(gens)}\n{rows}\n{' '.join(map(str, gens))}\n"


# ---------------------------------------------------------------- metric

@dataclass(frozen=True)
class MetricProfile:
    root: int
    distances: np.ndarray
    growth: np.ndarray
    diameter: int

    def gr(self, r: float) -> int:
        """Ball size Gr(r) with the floor convention; saturates past the diameter."""
        k = math.floor(r)
        if k < 0:
            return 0
        return int(self.growth[min(k, self.diameter)])

    def sphere_size(self, r: float) -> int:
        k = math.floor(r)
        if k < 0 or k > self.diameter:
            return 0
        return int(self.growth[k] - (self.growth[k - 1] if k > 0 else 0))


def metric_profile(g: FiniteGraph, root: int = 0, check_all_pairs: bool = False) -> MetricProfile:
    """BFS distances, growth table and diameter seen from ``root``.

    The diameter is the root's eccentricity, which is the graph diameter on
    transitive graphs. ``check_all_pairs`` recomputes every eccentricity
    (only for |V| <= 2000) and raises if they disagree.
    """
    if not 0 <= root < g.vertex_count:
        raise ValueError(f"invalid root {root}")
    key = ("profile", root)
    if key in g._memo and not check_all_pairs:
        return g._memo[key]
    dist = g.distances_from(root)
    if (dist < 0).any():
        raise ValueError("graph is disconnected")
    diameter = int(dist.max())
    growth = np.cumsum(np.bincount(dist, minlength=diameter + 1))
    if check_all_pairs:
        if g.vertex_count > 2000:
            raise ValueError("all-pairs eccentricity check limited to |V| <= 2000")
        ecc = max(int(g.distances_from(v).max()) for v in range(g.vertex_count))
        if ecc != diameter:
            raise ValueError(f"root eccentricity {diameter} differs from diameter {ecc}")
    dist.setflags(write=False)
    growth.setflags(write=False)
    prof = MetricProfile(root, dist, growth, diameter)
    g._memo[key] = prof
    return prof


def ball(g: FiniteGraph, root: int, r: float) -> np.ndarray:
    """Sorted vertex ids at distance <= floor(r) from ``root``."""
    k = math.floor(r)
    if k < 0:
        return np.empty(0, dtype=np.int64)
    d = g.distances_from(root, max_radius=k)
    return np.flatnonzero(d >= 0)


def sphere(g: FiniteGraph, root: int, r: float) -> np.ndarray:
    """Sorted vertex ids at distance exactly floor(r); empty past the diameter."""
    k = math.floor(r)
    if k < 0:
        return np.empty(0, dtype=np.int64)
    d = g.distances_from(root, max_radius=k)
    return np.flatnonzero(d == k)


@dataclass(frozen=True)
class Net:
    centers: list[int]
    parent: dict[int, int]
    radius: int


def build_net(g: FiniteGraph, r: float, root: int = 0) -> Net:
    """Greedy maximal 2r-separated set seeded at ``root`` plus a BFS spanning
    tree of the graph joining centers at distance <= 5r."""
    r = math.floor(r)
    if r < 1:
        raise ValueError("net radius must be >= 1")
    n = g.vertex_count
    covered = np.zeros(n, dtype=np.bool_)
    centers = []
    for v in [root] + [u for u in range(n) if u != root]:
        if covered[v]:
            continue
        centers.append(v)
        covered |= g.distances_from(v, max_radius=2 * r - 1) >= 0
    index = {c: i for i, c in enumerate(centers)}
    near = []
    for c in centers:
        d = g.distances_from(c, max_radius=5 * r)
        near.append([x for x in centers if x != c and d[x] >= 0])
    parent = {root: root}
    queue = [root]
    for c in queue:
        for x in near[index[c]]:
            if x not in parent:
                parent[x] = c
                queue.append(x)
    return Net(centers, parent, r)


@dataclass
class HomogeneityReport:
    homogeneous: bool
    checked: int
    failing_pair: tuple[int, int] | None = None
    skipped: list[str] = field(default_factory=list)


def _rooted_ball(g: FiniteGraph, v: int, r: int) -> nx.Graph:
    d = g.distances_from(v, max_radius=r)
    verts = np.flatnonzero(d >= 0)
    H = nx.Graph()
    for u in verts.tolist():
        H.add_node(u, depth=int(d[u]))
    for u in verts.tolist():
        for w in g.neighbors(u).tolist():
            if d[w] >= 0 and u < w:
                H.add_edge(u, w)
    return H


def check_local_homogeneity(g: FiniteGraph, r: int, sample_pairs=8, seed: int = 0,
                            max_ball: int = 40) -> HomogeneityReport:
    """Rooted-ball isomorphism test B_r(u) ~ B_r(v) on sampled vertex pairs.

    ``sample_pairs`` is either a count (pairs drawn with vertex 0 as one end)
    or an explicit list of pairs. Balls larger than ``max_ball`` are skipped
    and reported.
    """
    if isinstance(sample_pairs, int):
        rng = np.random.default_rng(seed)
        others = rng.integers(0, g.vertex_count, size=sample_pairs)
        pairs = [(0, int(v)) for v in others]
    else:
        pairs = [(int(a), int(b)) for a, b in sample_pairs]
    report = HomogeneityReport(True, 0)
    match = nx.algorithms.isomorphism.categorical_node_match("depth", -1)
    for u, v in pairs:
        bu, bv = _rooted_ball(g, u, r), _rooted_ball(g, v, r)
        if max(len(bu), len(bv)) > max_ball:
            report.skipped.append(f"ball too large for isomorphism search at ({u}, {v})")
            continue
        report.checked += 1
        if not nx.is_isomorphic(bu, bv, node_match=match):
            report.homogeneous = False
            report.failing_pair = (u, v)
            break
    return report


def is_low_growth(g: FiniteGraph, n: float, exponent: float = 100.0, root: int = 0) -> bool:
    """Membership of scale ``n`` in the low-growth set: Gr(n) <= exp((log n)^exponent)."""
    if n < 3:
        raise ValueError("low-growth scales start at n = 3")
    if exponent <= 1:
        raise ValueError("exponent must exceed 1")
    gr = metric_profile(g, root).gr(n)
    return math.log(gr) <= math.log(n) ** exponent
