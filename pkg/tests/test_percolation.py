import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from perclab import rng
from perclab.graphs import generate
from perclab.percolation import (Config, ScaleError, all_closed, all_open, clusters, config_at, config_from_edges,
                                 connected, evolution_curve, ghost_connected, piv_event, restrict_to_ball,
                                 sample_ghost, sample_weights, tube_connected, two_arm_event)


def _scipy_sizes(g, mask):
    n = g.vertex_count
    m = coo_matrix((np.ones(mask.sum()), (g.eu[mask], g.ev[mask])), shape=(n, n))
    _, lab = connected_components(m, directed=False)
    return lab, np.sort(np.bincount(lab))[::-1]


def test_weights_deterministic_and_seed_sensitive():
    g = generate("torus:8x8")
    a, b = sample_weights(g, 7), sample_weights(g, 7)
    assert np.array_equal(a.weights, b.weights)
    assert not np.array_equal(a.weights, sample_weights(g, 8).weights)
    assert not np.array_equal(a.weights, sample_weights(g, 7, trial=1).weights)
    assert ((a.weights >= 0) & (a.weights < 1)).all()


def test_weights_uniform_mean():
    w = rng.uniforms(12345, rng.EDGES, 0, 100_000)
    assert 0.497 <= w.mean() <= 0.503


def test_streams_are_independent_keys():
    a = rng.uniforms(1, rng.EDGES, 0, 32)
    b = rng.uniforms(1, rng.GHOSTS, 0, 32)
    assert not np.array_equal(a, b)
    # a prefix of a longer draw is the shorter draw
    assert np.array_equal(rng.uniforms(1, rng.EDGES, 3, 64)[:32], rng.uniforms(1, rng.EDGES, 3, 32))


def test_config_at_clamps_and_is_monotone():
    g = generate("torus:6x6")
    s = sample_weights(g, 3)
    assert not config_at(s, 0).open.any()
    assert config_at(s, 1).open.all()
    assert np.array_equal(config_at(s, 1.2).open, config_at(s, 1).open)
    assert np.array_equal(config_at(s, -0.5).open, config_at(s, 0).open)
    masks = [config_at(s, p).open for p in np.linspace(0, 1, 21)]
    assert all((a <= b).all() for a, b in zip(masks, masks[1:]))


def test_cluster_examples():
    g = generate("cycle:6")
    rep = clusters(g, all_open(g))
    assert (rep.k1, rep.k2) == (6, 0)
    rep = clusters(g, all_closed(g))
    assert (rep.k1, rep.k2) == (1, 1)
    rep = clusters(g, config_from_edges(g, [(0, 1), (3, 4)]))
    assert sorted(rep.sizes[rep.sizes > 0].tolist()) == [1, 1, 2, 2]
    assert (rep.k1, rep.k2) == (2, 2)
    assert rep.sizes.sum() == 6


def test_connected_examples():
    g = generate("cycle:4")
    assert connected(g, all_closed(g), 2, 2)
    assert connected(g, all_open(g), 0, 2)
    assert not connected(g, config_from_edges(g, [(0, 1)]), 0, 2)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["cycle:30", "torus:7x9", "circulant:40:1,7", "torus:3x3x5"]),
       st.integers(0, 2**32), st.floats(0, 1))
def test_union_find_matches_scipy(spec, seed, p):
    g = generate(spec)
    cfg = config_at(sample_weights(g, seed), p)
    rep = clusters(g, cfg)
    lab, sizes = _scipy_sizes(g, cfg.open)
    assert rep.k1 == sizes[0]
    assert rep.k2 == (sizes[1] if sizes.size > 1 else 0)
    # same partition: label pairs are in bijection
    pairs = set(zip(rep.label.tolist(), lab.tolist()))
    assert len(pairs) == len(set(rep.label.tolist())) == len(set(lab.tolist()))


@pytest.mark.parametrize("spec", ["torus:8x8", "circulant:30:2,3", "cycle:50"])
def test_evolution_curve_matches_direct_clustering(spec):
    g = generate(spec)
    gen = np.random.default_rng(0)
    for trial in range(5):
        s = sample_weights(g, 11, trial)
        curve = evolution_curve(g, s)
        assert curve.k1_at_step[0] == 1 and curve.k1_at_step[-1] == g.vertex_count
        assert (np.diff(curve.k1_at_step) >= 0).all()
        ps = np.concatenate([gen.random(10), s.weights[:3]])
        for p in ps:
            rep = clusters(g, config_at(s, p))
            assert (curve.k1(p), curve.k2(p)) == (rep.k1, rep.k2)


def test_critical_value_and_max_increment():
    g = generate("torus:6x6")
    s = sample_weights(g, 5)
    curve = evolution_curve(g, s)
    for size in (2, 10, 18, 36):
        pc = curve.critical_value(size)
        assert curve.k1(pc) >= size
        assert curve.k1(np.nextafter(pc, -1)) < size
    assert curve.critical_value(37) == np.inf
    assert curve.max_increment(1.0) == 1 - 1 / 36
    # brute force over a fine grid never beats the exact sup
    grid = np.linspace(0, 1, 2001)
    brute = max(curve.alpha(p + 0.1) - curve.alpha(p) for p in grid)
    assert brute <= curve.max_increment(0.1) + 1e-12


def test_ghost_examples():
    g = generate("torus:6x6")
    cfg = all_closed(g)
    assert ghost_connected(g, cfg, sample_ghost(g, 1.0, 1), 0)
    assert not ghost_connected(g, all_open(g), sample_ghost(g, 0.0, 1), 0)
    hits = sum(ghost_connected(g, cfg, sample_ghost(g, 0.3, 9, t), 0) for t in range(4000))
    assert abs(hits / 4000 - 0.3) < 3 * np.sqrt(0.21 / 4000)
    with pytest.raises(ValueError):
        sample_ghost(g, 1.5, 0)


def test_two_arm_examples():
    g = generate("torus:8x8")
    assert not two_arm_event(g, all_open(g), 0, 1)
    assert not two_arm_event(g, all_closed(g), 0, 2)
    # rows x = 0 and x = 1 open, joined only by the closed edge 0 - 8
    rows = [(x * 8 + y, x * 8 + (y + 1) % 8) for x in (0, 1) for y in range(8)]
    cfg = config_from_edges(g, rows)
    e = g.edge_id(0, 8)
    assert not cfg.open[e]
    assert two_arm_event(g, cfg, e, 8)
    assert not two_arm_event(g, cfg, e, 9)
    assert not connected(g, cfg, 0, 8)


def test_piv_examples():
    g = generate("torus:16x16")
    assert not piv_event(g, all_open(g), 0, 1, 5)
    assert not piv_event(g, all_closed(g), 0, 1, 5)
    rays = [(y, y + 1) for y in range(1, 5)] + [((16 - y) % 16, 16 - y - 1) for y in range(1, 5)]
    assert piv_event(g, config_from_edges(g, rays), 0, 1, 5)
    with pytest.raises(ScaleError, match="scale exceeds diameter"):
        piv_event(g, all_open(g), 0, 1, 17)


def test_tube_examples():
    g = generate("cycle:12")
    assert tube_connected(g, all_closed(g), [3], 0)
    path = [0, 1, 2, 3]
    assert tube_connected(g, all_open(g), path, 0)
    assert not tube_connected(g, all_closed(g), path, 2)
    # the long way round lies outside a thin tube
    around = config_from_edges(g, [(i, (i + 1) % 12) for i in range(3, 12)])
    assert not tube_connected(g, around, path, 1)
    assert tube_connected(g, around, path, 6)
    with pytest.raises(ValueError):
        tube_connected(g, all_open(g), [0, 2], 1)


def test_restrict_to_ball():
    g = generate("torus:8x8")
    sub = restrict_to_ball(g, all_open(g), 0, 1)
    assert sub.open.sum() == 4


def test_config_export(tmp_path):
    g = generate("cycle:6")
    cfg = config_from_edges(g, [2, 4])
    cfg.write(tmp_path / "c.txt")
    assert (tmp_path / "c.txt").read_text() == "2\n4\n"
    assert isinstance(cfg, Config) and cfg.p is None
