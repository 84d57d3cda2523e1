"""Bernoulli bond percolation on finite graphs via the standard monotone coupling.

A :class:`PercolationSample` carries one uniform weight per edge; thresholding
the weights at ``p`` gives a configuration of law P_p, and all ``p`` share the
same sample. Cluster structure is computed by union-find.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import _kernels, rng
from .graphs import FiniteGraph, ball, metric_profile


def clamp01(p: float) -> float:
    """Parameters outside [0, 1] act as P_0 or P_1."""
    return min(1.0, max(0.0, float(p)))


@dataclass(frozen=True, eq=False)
class PercolationSample:
    graph: FiniteGraph
    weights: np.ndarray
    seed: int
    trial: int = 0


@dataclass(frozen=True, eq=False)
class Config:
    open: np.ndarray
    p: float | None = None  # None for explicitly constructed configurations

    @property
    def open_ids(self) -> np.ndarray:
        return np.flatnonzero(self.open)

    def write(self, path) -> None:
        """Export open edge ids, one per line."""
        Path(path).write_text("".join(f"{i}\n" for i in self.open_ids.tolist()))


@dataclass(frozen=True, eq=False)
class ClusterReport:
    label: np.ndarray
    sizes: np.ndarray
    k1: int
    k2: int
    vertex_count: int

    def size_of(self, v: int) -> int:
        return int(self.sizes[self.label[v]])

    def density(self, count: int) -> float:
        """Fraction |A| / |V| of the vertex set."""
        return count / self.vertex_count

    @property
    def giant_density(self) -> float:
        return self.k1 / self.vertex_count

    def sorted_sizes(self) -> np.ndarray:
        return np.sort(self.sizes)[::-1]


@dataclass(frozen=True, eq=False)
class GhostField:
    ghosts: np.ndarray
    q: float


@dataclass(frozen=True, eq=False)
class EvolutionCurve:
    """Largest and second-largest cluster sizes as edges open in weight order.

    ``k1_at_step[s]`` is |K_1| once the ``s`` lightest edges are open.
    """

    breakpoints: np.ndarray
    k1_at_step: np.ndarray
    k2_at_step: np.ndarray
    vertex_count: int

    def step_at(self, p: float) -> int:
        return int(np.searchsorted(self.breakpoints, clamp01(p), side="right"))

    def k1(self, p: float) -> int:
        return int(self.k1_at_step[self.step_at(p)])

    def k2(self, p: float) -> int:
        return int(self.k2_at_step[self.step_at(p)])

    def alpha(self, p: float) -> float:
        return self.k1(p) / self.vertex_count

    def critical_value(self, size: int) -> float:
        """Smallest p at which |K_1| >= size; inf if never reached."""
        if size > self.vertex_count:
            return math.inf
        step = int(np.searchsorted(self.k1_at_step, size, side="left"))
        return 0.0 if step == 0 else float(self.breakpoints[step - 1])

    def max_increment(self, delta: float) -> float:
        """Exact sup over p of alpha(p + delta) - alpha(p), read off the breakpoints."""
        w = self.breakpoints
        a = self.k1_at_step
        if delta <= 0:
            return 0.0
        # alpha(p + delta) - alpha(p) is maximised with p + delta at a breakpoint
        # w[j-1] (reaching step j) and p as small as allowed, i.e. p = w[j-1] - delta.
        j = np.arange(1, w.size + 1)
        lower = np.searchsorted(w, w - delta, side="right")
        lower[w - delta < 0] = 0
        jumps = a[j] - a[lower]
        best = max(int(jumps.max(initial=0)), 0)
        return best / self.vertex_count


# ---------------------------------------------------------------- sampling

def sample_weights(g: FiniteGraph, seed: int, trial: int = 0) -> PercolationSample:
    w = rng.uniforms(seed, rng.EDGES, trial, g.edge_count)
    w.setflags(write=False)
    return PercolationSample(g, w, seed, trial)


def config_at(sample: PercolationSample, p: float) -> Config:
    p = clamp01(p)
    return Config(sample.weights <= p, p)


def config_from_edges(g: FiniteGraph, open_edges: Iterable) -> Config:
    """Explicit configuration from edge ids or (u, v) pairs."""
    mask = np.zeros(g.edge_count, dtype=np.bool_)
    for e in open_edges:
        if isinstance(e, (tuple, list)):
            mask[g.edge_id(*e)] = True
        else:
            mask[int(e)] = True
    return Config(mask, None)


def all_open(g: FiniteGraph) -> Config:
    return Config(np.ones(g.edge_count, dtype=np.bool_), 1.0)


def all_closed(g: FiniteGraph) -> Config:
    return Config(np.zeros(g.edge_count, dtype=np.bool_), 0.0)


def _check(g: FiniteGraph, config: Config) -> None:
    if config.open.shape != (g.edge_count,):
        raise ValueError(f"configuration has {config.open.shape[0]} entries, graph has {g.edge_count} edges")


def cluster_labels(g: FiniteGraph, mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return _kernels.label_components(g.vertex_count, g.eu, g.ev, mask)


def clusters(g: FiniteGraph, config: Config) -> ClusterReport:
    _check(g, config)
    labels, sizes = cluster_labels(g, config.open)
    top = np.sort(sizes)[::-1]
    k1 = int(top[0])
    k2 = int(top[1]) if top.size > 1 else 0
    return ClusterReport(labels, sizes, k1, k2, g.vertex_count)


def connected(g: FiniteGraph, config: Config, u: int, v: int) -> bool:
    if u == v:
        return True
    report = clusters(g, config)
    return bool(report.label[u] == report.label[v])


def evolution_curve(g: FiniteGraph, sample: PercolationSample) -> EvolutionCurve:
    order = np.argsort(sample.weights, kind="stable")
    k1, k2 = _kernels.grow_clusters(g.vertex_count, g.eu, g.ev, order)
    return EvolutionCurve(sample.weights[order], k1, k2, g.vertex_count)


# ---------------------------------------------------------------- ghosts

def sample_ghost(g: FiniteGraph, q: float, seed: int, trial: int = 0) -> GhostField:
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"ghost intensity must lie in [0, 1], got {q}")
    u = rng.uniforms(seed, rng.GHOSTS, trial, g.vertex_count)
    return GhostField(u < q, q)


def ghost_connected(g: FiniteGraph, config: Config, ghost: GhostField, v: int,
                    report: ClusterReport | None = None) -> bool:
    """True iff the open cluster of ``v`` contains a ghost."""
    if ghost.ghosts[v]:
        return True
    if report is None:
        report = clusters(g, config)
    return bool(ghost.ghosts[report.label == report.label[v]].any())


# ---------------------------------------------------------------- events

def two_arm_event(g: FiniteGraph, config: Config, e: int, n: int,
                  report: ClusterReport | None = None) -> bool:
    """Endpoints of edge ``e`` lie in distinct clusters, each of size >= n.

    The state of ``e`` is read from ``config`` as given; close it first for
    the conditional variant.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if report is None:
        report = clusters(g, config)
    u, v = g.edges[e]
    a, b = report.label[u], report.label[v]
    return bool(a != b and report.sizes[a] >= n and report.sizes[b] >= n)


class ScaleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PivotalityWindow:
    """Precomputed geometry for Piv[m, n] events around a root."""

    inner: np.ndarray  # vertices of B_m
    outer: np.ndarray  # vertices of S_n
    edge_mask: np.ndarray  # edges with both endpoints in B_n
    m: int
    n: int

    @classmethod
    def build(cls, g: FiniteGraph, root: int, m: float, n: float) -> "PivotalityWindow":
        m, n = math.floor(m), math.floor(n)
        if not 0 <= m < n:
            raise ValueError(f"need 0 <= m < n, got m={m}, n={n}")
        dist = metric_profile(g, root).distances
        outer = np.flatnonzero(dist == n)
        if outer.size == 0:
            raise ScaleError(f"scale exceeds diameter: S_{n} is empty")
        inside = dist <= n
        edge_mask = inside[g.eu] & inside[g.ev]
        return cls(np.flatnonzero(dist <= m), outer, edge_mask, m, n)

    def crossing_clusters(self, g: FiniteGraph, open_mask: np.ndarray, inner: np.ndarray | None = None) -> int:
        labels, _ = cluster_labels(g, open_mask & self.edge_mask)
        inner = self.inner if inner is None else inner
        return np.intersect1d(labels[inner], labels[self.outer]).size


def piv_event(g: FiniteGraph, config: Config, root: int, m: float, n: float) -> bool:
    """At least two clusters of the configuration restricted to B_n each meet B_m and S_n."""
    _check(g, config)
    window = PivotalityWindow.build(g, root, m, n)
    return window.crossing_clusters(g, config.open) >= 2


def tube(g: FiniteGraph, path: Sequence[int], n: float) -> np.ndarray:
    """Boolean vertex mask of B_n(path), the union of n-balls around the path."""
    k = math.floor(n)
    d = g.distances_from(np.asarray(path, dtype=np.int64), max_radius=max(k, 0))
    return d >= 0


def validate_walk(g: FiniteGraph, path: Sequence[int]) -> None:
    for a, b in zip(path[:-1], path[1:]):
        if b not in set(g.neighbors(a).tolist()):
            raise ValueError(f"path is not a walk: {a} and {b} are not adjacent")


def tube_connected(g: FiniteGraph, config: Config, path: Sequence[int], n: float) -> bool:
    """start(path) and end(path) connected by open edges inside B_n(path)."""
    _check(g, config)
    path = list(path)
    validate_walk(g, path)
    if path[0] == path[-1]:
        return True
    inside = tube(g, path, n)
    mask = config.open & inside[g.eu] & inside[g.ev]
    labels, _ = cluster_labels(g, mask)
    return bool(labels[path[0]] == labels[path[-1]])


def restrict_to_ball(g: FiniteGraph, config: Config, root: int, n: float) -> Config:
    verts = np.zeros(g.vertex_count, dtype=np.bool_)
    verts[ball(g, root, n)] = True
    return Config(config.open & verts[g.eu] & verts[g.ev], config.p)
