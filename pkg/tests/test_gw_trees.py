import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from planarperc import gw_trees as gw
from planarperc.errors import DomainError, InsufficientTailSamples
from planarperc.pmf import Pmf
from planarperc.weights import solve_admissibility, tuned_family

BINARY = Pmf(0, np.array([0.5, 0.0, 0.5]))


def test_catalan_pmf():
    pmf = gw.exact_leaf_pmf_binary(6)
    assert pmf[0] == 0.0
    assert pmf[1:4] == pytest.approx([1 / 2, 1 / 8, 1 / 16], rel=1e-14)
    # mass of trees with up to n leaves tends to 1 slowly
    assert gw.exact_leaf_pmf_binary(4000).sum() == pytest.approx(1 - 0.0089, abs=1e-3)


def test_leaf_law_matches_catalan():
    b = gw.sample_leaves(BINARY, 200_000, seed=4, node_cap=10**5)
    assert b.censored_fraction < 0.01
    exact = gw.exact_leaf_pmf_binary(8)[1:]
    obs = np.array([(b.leaves == n).sum() for n in range(1, 9)])
    z = (obs - b.leaves.size * exact) / np.sqrt(b.leaves.size * exact * (1 - exact))
    assert np.max(np.abs(z)) < 4
    assert sps.chi2.sf(np.sum(z**2), 8) > 1e-3


def test_crit_quad_mu_leaf_frequencies(crit):
    b = gw.sample_leaves(crit.mu, 100_000, seed=2, node_cap=10**5)
    for n, pn in ((1, 0.5), (2, 0.125)):
        f = np.mean(b.leaves == n)
        assert abs(f - pn) < 3 * np.sqrt(pn * (1 - pn) / b.leaves.size)


def test_node_leaf_parity():
    b = gw.sample_leaves(BINARY, 5000, seed=1, check_rate=1.0)
    ok = ~b.censored
    assert np.array_equal(b.nodes[ok], 2 * b.leaves[ok] - 1)


def test_degenerate_law():
    b = gw.sample_leaves(Pmf(0, np.array([1.0])), 10)
    assert b.leaves.tolist() == [1] * 10 and b.nodes.tolist() == [1] * 10


def test_censoring():
    b = gw.sample_leaves(BINARY, 2000, seed=3, node_cap=15)
    assert b.censored.any() and np.all(b.leaves[~b.censored] <= 8)
    assert gw.sample_leaf_count(BINARY, 3, node_cap=15, run_index=int(np.argmax(b.censored))) == gw.CENSORED


def test_supercritical_rejected():
    with pytest.raises(DomainError):
        gw.sample_leaves(Pmf(0, np.array([0.3, 0.0, 0.7])), 1)


def test_stream_independence():
    a = gw.sample_leaves(BINARY, 100, seed=9)
    assert gw.sample_leaf_count(BINARY, 9, run_index=42) == a.leaves[42]


def test_insufficient_samples():
    with pytest.raises(InsufficientTailSamples):
        gw.volume_tail(BINARY, 50, seed=0)


@given(st.floats(min_value=1.0, max_value=2.0))
def test_exponent_relation(alpha):
    # unpointing divides the pmf by n
    assert gw.unpointed_exponent(alpha) == pytest.approx(gw.pointed_exponent(alpha) - 1)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2**31))
def test_volume_tail_binary(seed):
    r = gw.volume_tail(BINARY, 20_000, seed=seed, node_cap=10**5)
    assert r.pointed.slope == pytest.approx(-1.5, abs=0.15)
    assert r.unpointed.slope == pytest.approx(r.pointed.slope - 1, abs=1e-9)


@pytest.mark.slow
def test_tuned_pointed_slope():
    s = solve_admissibility(tuned_family(2.2, k_cap=2**14), l_max=2**12)
    r = gw.volume_tail(s.mu, 200_000, seed=1, node_cap=10**7)
    assert r.censored_fraction < 0.01
    # alpha = 1.7: slope -(1/alpha + 1) = -1.588
    assert r.pointed.slope == pytest.approx(gw.pointed_exponent(1.7), abs=0.1)
