import numpy as np
import pytest

from planarperc import maps, partition
from planarperc.errors import BudgetExceeded, ConfigError
from planarperc.weights import preset, quad

# rooted bipartite planar maps by edges: 3 * 2^(e-1) (2e)! / (e! (e+2)!)
BIPARTITE_COUNTS = [1, 1, 3, 12, 56, 288, 1584]


def test_rooted_counts():
    assert [len(maps.rooted_maps(e)) for e in range(7)] == BIPARTITE_COUNTS


@pytest.mark.parametrize("e", [1, 2, 3, 4, 5])
def test_maps_are_planar_bipartite_and_distinct(e):
    ms = maps.rooted_maps(e)
    assert all(m.genus == 0 and m.is_bipartite and m.n_edges == e for m in ms)
    assert len({(m.sigma, m.alpha) for m in ms}) == len(ms)


def test_rerooting_is_canonical():
    for m in maps.rooted_maps(3):
        assert m.rerooted(0) == m
        for d in range(len(m.sigma)):
            assert m.rerooted(d) in maps.rooted_maps(3)


def test_disk_weight_small_terms():
    # k = 1: the edge map, then two maps with one inner quadrangle
    w = maps.disk_weight_by_edges(quad(1 / 12), 1, 7)
    assert w[1] == 1.0 and w[2] == 0.0
    assert w[3] == pytest.approx(2 / 12, rel=1e-15)


@pytest.mark.parametrize("name", ["crit-quad", "subcrit-quad(1/16)", "mixed"])
def test_disk_weight_matches_construction(name):
    # regression: the root face used to be weighted as an inner face
    q = preset(name)
    for k in (1, 2, 3):
        a = maps.disk_weight_by_edges(q, k, 7)
        b = partition.w_disk_enumerate(q, k, 7, method="construction").terms
        assert np.allclose(a, b[: len(a)], rtol=1e-13, atol=0)


def test_bijection_counts():
    for e, lhs, rhs in maps.island_bijection_counts(5):
        assert lhs == rhs
    with pytest.raises(BudgetExceeded):
        maps.island_bijection_counts(7)


def test_bare_cycle_and_islands():
    c = maps.bare_cycle(3)
    assert c.face_degrees == [6, 6] and c.n_edges == 6
    assert maps.rooted_islands(2, 0) == (maps.bare_cycle(2),)


def test_island_external_face_unweighted():
    q = quad(1 / 12)
    # the bare 2-cycle has one inner face of degree 2 and q_1 = 0
    assert maps.island_weight_poly(1, 0, q, 0.3) == (1, 0.0)
    # the bare 4-cycle carries q_2 once, not twice
    assert maps.island_weight_poly(2, 0, q, 0.3) == (1, pytest.approx(1 / 12, rel=1e-15))


@pytest.mark.parametrize("p", [0.3, 0.7])
def test_cluster_law_depends_on_multiset(p):
    r = maps.verify_cluster_law(quad(1 / 16), p, 5)
    assert r.passed and r.max_rel_spread <= 1e-12
    assert r.to_json()["n_groups_with_several_clusters"] > 0


def test_cluster_law_extremes():
    q = quad(1 / 16)
    law, total = maps.percolated_cluster_law(q, 0.0, 4)
    edge = (maps.EDGE_MAP.sigma, maps.EDGE_MAP.alpha)
    assert law[edge] == pytest.approx(total, rel=1e-15)
    law, total = maps.percolated_cluster_law(q, 1.0, 4)
    # every map is its own cluster
    expected = sum(maps.map_weight(m, q) for m in maps.rooted_maps_upto(4) if m.n_edges)
    assert total == pytest.approx(expected, rel=1e-14)


def test_cluster_law_inputs():
    with pytest.raises(ConfigError):
        maps.verify_cluster_law(quad(1 / 16), 1.5, 3)
    with pytest.raises(BudgetExceeded):
        maps.verify_cluster_law(quad(1 / 16), 0.5, maps.MAX_EDGES + 1)
