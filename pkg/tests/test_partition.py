import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planarperc import partition
from planarperc.errors import BudgetExceeded, NonconvergentTail
from planarperc.weights import preset, quad, solve_admissibility

# W^(1) and W^(2) of subcrit-quad(1/16); the series, quadrature and enumeration
# routes agree on these to 1e-9 and they equal 32/27 and 80/27
W1_SUBCRIT = 32 / 27
W2_SUBCRIT = 80 / 27


def test_w0_is_one(crit, subcrit):
    for s in (crit, subcrit):
        assert s.table.scaled[0] == 1.0
        assert partition.w_disk_quadrature(s, 0)[0] == 1.0


def test_frozen_subcritical_values(subcrit):
    assert subcrit.table.w(1) == pytest.approx(W1_SUBCRIT, rel=1e-12)
    assert subcrit.table.w(2) == pytest.approx(W2_SUBCRIT, rel=1e-12)
    v, err = partition.w_disk_quadrature(subcrit, 1)
    assert v == pytest.approx(W1_SUBCRIT, rel=1e-12) and err < 1e-10


@pytest.mark.parametrize("k", [1, 2])
def test_quadrature_matches_enumeration(subcrit, k):
    e_max = 40
    while True:
        res = partition.w_disk_enumerate(subcrit.weights, k, e_max)
        if res.truncation_bound < 1e-8:
            break
        e_max += 20
    v, _ = partition.w_disk_quadrature(subcrit, k)
    assert abs(res.value - v) / v <= 1e-6
    # the geometric bound really bounds the missing mass
    assert v - res.value <= res.truncation_bound * (1 + 1e-9)


def test_pointed_crit_quad(crit):
    assert crit.table.pointed(1) == pytest.approx(4.0, rel=1e-15)
    assert partition.w_disk_quadrature(crit, 1, pointed=True)[0] == pytest.approx(4.0)
    k = crit.table.k
    exact = np.array([math.comb(2 * int(i), int(i)) / 4.0 ** i for i in k[:60]])
    assert np.allclose(crit.table.pointed_scaled[:60], exact, rtol=1e-13)


def test_enumeration_small_cases():
    q = quad(1 / 16)
    assert partition.w_disk_enumerate(q, 1, 1).value == 1.0
    assert partition.w_disk_enumerate(q, 0, 5).value == 1.0


def test_enumeration_routes_agree():
    q = preset("mixed")
    for k in (1, 2, 3):
        a = partition.w_disk_enumerate(q, k, 6, method="construction").terms
        b = partition.w_disk_enumerate(q, k, 6, method="maps").terms
        assert np.allclose(a, b, rtol=1e-13, atol=0)


def test_critical_enumeration_is_heuristic():
    q = quad(1 / 12)
    assert math.isinf(partition.w_disk_enumerate(q, 1, 20).truncation_bound)
    assert partition.w_disk_enumerate(q, 1, 20).heuristic
    with pytest.raises(NonconvergentTail):
        partition.w_disk_enumerate(q, 1, 20, strict=True)


def test_budget():
    with pytest.raises(BudgetExceeded):
        partition.disk_counts(quad(1 / 16), partition.ENUM_E_MAX + 1)


def test_tutte_examples(crit, subcrit):
    assert partition.check_tutte_identity(subcrit, subcrit.table, 1) <= 1e-8
    assert partition.check_tutte_identity(crit, crit.table, 2) <= 1e-6


def test_tutte_on_right_side_table(subcrit):
    # rebuild W^(l) from the identity itself: residual is then zero by construction
    t = subcrit.table
    s, r = t.scaled.copy(), t.r
    for l in range(1, 40):
        c = subcrit.weights.q(2) * s[l + 1] / r
        g = r * np.sum(s[:l] * s[l - 1::-1])
        s[l] = c + g
    fixed = partition.DiskTable(t.l_max, r, s, t.error, "rebuilt")
    c_part, g_part = partition.tutte_terms(subcrit, fixed, 10)
    assert abs(c_part + g_part - 1) <= 1e-15


def test_tutte_subcritical_half_table(subcrit):
    worst = max(partition.check_tutte_identity(subcrit, subcrit.table, l)
                for l in range(1, subcrit.table.l_max // 2))
    assert worst <= 1e-6


def test_series_and_quadrature_tables_agree(subcrit):
    qt = partition.quadrature_table(subcrit.weights, subcrit.Z, 64)
    rel = np.abs(qt.scaled - subcrit.table.scaled[:65]) / subcrit.table.scaled[:65]
    assert rel.max() <= 1e-9


def test_crit_quad_asymptotic_slope(crit):
    t = crit.table
    lo = t.l_max // 8
    slope = np.polyfit(np.log(t.k[lo:]), np.log(t.scaled[lo:]), 1)[0]
    assert slope == pytest.approx(-2.5, abs=0.1)


def test_table_monotone_after_burn_in(crit, subcrit):
    for s in (crit, subcrit):
        d = np.diff(s.table.scaled[8:])
        assert np.all(d <= 0)


def test_cache_round_trip(tmp_path, subcrit, monkeypatch):
    path = tmp_path / "t.npz"
    partition.save_table(subcrit.table, path)
    back = partition.load_table(path)
    assert np.array_equal(back.scaled, subcrit.table.scaled) and back.r == subcrit.table.r
    monkeypatch.setenv("PLANARPERC_CACHE", str(tmp_path / "cache"))
    partition.solve_cached(subcrit.weights, l_max=128)
    assert list((tmp_path / "cache").glob("disk-*.npz"))


def test_csv(tmp_path, subcrit):
    p = tmp_path / "w.csv"
    subcrit.table.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "k,W_scaled,log_W,rel_error" and len(lines) == subcrit.table.l_max + 2


@settings(max_examples=10, deadline=None)
@given(st.floats(min_value=0.01, max_value=0.07))
def test_tutte_property_quad(g):
    s = solve_admissibility(quad(g), l_max=128)
    for l in (1, 5, 30):
        assert partition.check_tutte_identity(s, s.table, l) <= 1e-10
