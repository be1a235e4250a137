import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planarperc import finite_peel as fp
from planarperc.errors import DomainError, TableExhausted


@settings(max_examples=40, deadline=None)
@given(B=st.integers(0, 40), F=st.integers(1, 40), p=st.floats(0.0, 0.99))
def test_transitions_sum_to_one(crit, B, F, p):
    if (B + F) % 2:
        F += 1
    t = fp.transition_probs(fp.BFState(B, F), crit, p)
    assert sum(t.values()) == pytest.approx(1.0, abs=1e-9)
    assert t[(1, -1)] == p
    assert all(v >= 0 for v in t.values())


def test_moves_respect_sides(mixed):
    t = fp.transition_probs(fp.BFState(2, 4), mixed, 0.4)
    for dB, dF in t:
        assert 2 + dB >= 0 and 4 + dF >= 0
    # a face of degree 2k adds 2k - 2 free edges
    assert (0, 0) in t and (0, 2) in t


def test_mark_on_last_free_edge_kills(crit):
    st0 = fp.BFState(3, 1)
    assert fp.BFState(st0.B + 1, st0.F - 1).dead
    t = fp.transition_probs(st0, crit, 0.3)
    assert t[(1, -1)] == 0.3
    with pytest.raises(DomainError):
        fp.transition_probs(fp.BFState(4, 0), crit, 0.3)


def test_state_validation():
    with pytest.raises(DomainError):
        fp.BFState(1, 2)
    with pytest.raises(DomainError):
        fp.BFState(-1, 3)
    assert fp.BFState(3, 5).P == 4


def test_table_exhausted(crit):
    P = crit.table.l_max
    with pytest.raises(TableExhausted):
        fp.transition_probs(fp.BFState(0, 2 * P), crit, 0.3)


def test_root_law(crit, mixed):
    k, pmf, tail = fp.root_degree_law(crit)
    assert k.tolist() == [2] and pmf.tolist() == [1.0] and tail == 0.0
    k, pmf, _ = fp.root_degree_law(mixed)
    assert k.tolist() == [1, 2]
    assert pmf[0] == pytest.approx(0.34090909, abs=1e-8)
    rng = np.random.default_rng(0)
    draws = [fp.sample_root_degree(mixed, None, rng) for _ in range(4000)]
    assert abs(np.mean(np.array(draws) == 1) - pmf[0]) < 4 * np.sqrt(pmf[0] * pmf[1] / 4000)


def test_bf_step(crit):
    rng = np.random.default_rng(1)
    s = fp.BFState(0, 4)
    for _ in range(20):
        if s.dead:
            break
        s = fp.bf_step(s, crit, None, 0.5, rng)
        assert (s.B + s.F) % 2 == 0


def test_deterministic(subcrit):
    a = fp.run_theta_batch(subcrit, 0.1, 50, seed=1)
    assert np.array_equal(a.theta, fp.run_theta_batch(subcrit, 0.1, 50, seed=1).theta)
    assert fp.run_theta(subcrit, None, 0.1, 1, run_index=3) == (a.theta[3], a.theta[3] + 1)
    assert np.array_equal(a.perimeter_upper, a.theta + 1)
    with pytest.raises(DomainError):
        fp.run_theta_batch(subcrit, 1.0, 1)


def test_theta_rate_stable(subcrit):
    rates = []
    for n in (25_000, 50_000, 100_000):
        b = fp.run_theta_batch(subcrit, 0.1, n, seed=1)
        assert b.censored_fraction == 0.0 and b.max_tutte_residual <= 1e-12
        f = fp.theta_tail_fit(b)
        assert f.kind == "exp" and f.r2 > 0.95
        rates.append(f.rate)
    assert max(rates) / min(rates) < 1.2
    assert rates[-1] == pytest.approx(0.44, abs=0.02)
