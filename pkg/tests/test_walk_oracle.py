import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planarperc import walk_oracle as wo
from planarperc.errors import DomainError


@pytest.fixture(scope="module")
def at_pc(crit):
    return wo.step_law(crit, crit.p_c)


@settings(max_examples=20, deadline=None)
@given(p=st.floats(min_value=0.0, max_value=0.95))
def test_crit_quad_small_jumps(crit, p):
    law = wo.step_law(crit, p)
    assert law.delta(0) == pytest.approx(5 / 6 * (1 - p), abs=1e-12)
    assert law.delta(-1) == pytest.approx((1 - p) / 8, abs=1e-12)
    assert law.delta(1) == pytest.approx(p, abs=1e-15)
    assert abs(law.delta.total() + law.delta.lost_mass - 1) <= 1e-12


def test_negative_steps_odd_and_star_has_no_zero(at_pc):
    d = at_pc.delta
    x = d.support
    even_neg = (x < 0) & (x % 2 == 0)
    assert np.all(d.mass[even_neg] == 0.0) and d.mass[(x < 0) & ~even_neg].sum() > 0
    assert at_pc.star(0) == 0.0
    assert abs(at_pc.star.total() + at_pc.star.lost_mass - 1) <= 1e-12


def test_drift_vanishes_at_threshold(crit, at_pc):
    assert abs(at_pc.drift) <= 1e-12
    assert wo.step_law(crit, crit.p_c + 0.1).drift > 0 > wo.step_law(crit, crit.p_c - 0.1).drift


def test_bad_p(crit):
    with pytest.raises(DomainError):
        wo.step_law(crit, 1.0)


def test_propagate_trivial(at_pc):
    assert wo.propagate(at_pc, 0).mass.tolist() == [1.0]
    one = wo.propagate(at_pc, 1, star=False)
    assert one(2) == pytest.approx(at_pc.p) and one(1) == pytest.approx(at_pc.delta(0))
    with pytest.raises(DomainError):
        wo.propagate(at_pc, -1)


@pytest.mark.parametrize("n", [5, 40, 200])
def test_propagate_conserves_mass(at_pc, n):
    free = wo.propagate(at_pc, n, floor=-4 * n)
    assert free.conservation_error() <= 1e-12
    kill = wo.propagate(at_pc, n, absorb_below=0)
    assert kill.conservation_error() <= 1e-12
    assert kill.absorbed > 0


@pytest.mark.parametrize("k", [0, 17, 64])
def test_cyclic_lemma(at_pc, k):
    lhs, rhs = wo.cyclic_check(at_pc, k)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_cyclic_table_matches_single_checks(at_pc):
    lhs, rhs = wo.cyclic_table(at_pc, 64)
    for k in (0, 17, 64):
        a, b = wo.cyclic_check(at_pc, k)
        assert lhs[k] == pytest.approx(a, rel=1e-13) and rhs[k] == pytest.approx(b, rel=1e-13)
    assert np.max(np.abs(lhs - rhs) / rhs) <= 1e-12


def test_first_passage_parity(at_pc):
    hits = wo.first_passage_zero(at_pc, 40).hits
    assert np.all(hits[0::2] == 0.0)
    # B*_1 = 0 needs the -1 jump
    assert hits[1] == pytest.approx(at_pc.star(-1), rel=1e-15)


def test_hcut_zero(crit, at_pc):
    assert wo.hcut_exact(at_pc, 0) == pytest.approx(at_pc.star(-1) / (1 - at_pc.p))
    with pytest.raises(DomainError):
        wo.hcut_exact(at_pc, 0, p=0.5)
    # crit-quad at p_c: (1-p)/8 / (p + (1-p)/6) / (1-p) = 9/32
    assert wo.hcut_exact(at_pc, 0) == pytest.approx(9 / 32, rel=1e-12)


def test_hcut_summable(at_pc):
    h = wo.hcut_table(at_pc, 512)
    assert h.sum() <= 1 / (1 - at_pc.p)
    k = np.arange(64, 513)
    slope = np.polyfit(np.log(k), np.log(h[64:]), 1)[0]
    assert slope < -1.5


def test_zero_return_decay(at_pc):
    z = wo.zero_return_profile(at_pc, 4097)
    t = np.arange(513, 4098, 2)
    slope = np.polyfit(np.log(t), np.log(z[t]), 1)[0]
    assert slope == pytest.approx(-2 / 3, abs=0.02)


def test_survival_zero_at_p_zero(crit):
    c, _ = wo.survival_curve(wo.step_law(crit, 0.0), 256)
    assert c[-1] <= 1e-6
    assert np.all(np.diff(c) <= 1e-15)


def test_survival_bounds(crit):
    with pytest.raises(DomainError):
        wo.survival_curve(wo.step_law(crit, 0.5), 2**16 + 1)


@pytest.mark.slow
def test_supercritical_survival_increments_shrink(crit):
    # the curve still moves by ~1e-2 per doubling near 2^13; the increments
    # shrink roughly like h^(-1/2), so successive ratios approach 1/sqrt(2)
    law = wo.step_law(crit, crit.p_c + 0.05)
    c, lost = wo.survival_curve(law, 2**13)
    assert lost <= 1e-12
    v = np.array([c[2**j] for j in range(8, 14)])
    inc = -np.diff(v)
    assert np.all(inc > 0)
    ratios = inc[1:] / inc[:-1]
    assert np.all(np.diff(ratios) < 0)
    assert 0.70 < ratios[-1] < 0.80
    # frozen value of the DP at the horizon
    assert c[-1] == pytest.approx(0.29056, abs=1e-5)
    assert wo.survival_estimate(law, 2**13) == c[-1]
