import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planarperc import stats
from planarperc.errors import WindowTooSmall


def _power(a, xs, c=1.0):
    return [(float(x), c * float(x) ** a) for x in xs]


def test_exact_power_slope():
    r = stats.fit_power_tail(_power(-2.5, 2.0 ** np.arange(1, 12)))
    assert r.slope == pytest.approx(-2.5, abs=1e-12)
    assert r.r2 == pytest.approx(1.0) and not r.slowly_varying
    assert r.dyadic_slopes == pytest.approx([-2.5] * len(r.dyadic_slopes), abs=1e-12)


def test_geometric_rate():
    pts = [(float(x), 0.5**x) for x in range(1, 30)]
    r = stats.fit_exp_tail(pts, (1, 29))
    assert r.rate == pytest.approx(math.log(2), abs=1e-12)
    assert r.to_json()["rate"] == r.rate


def test_slowly_varying_flag():
    xs = 2.0 ** np.arange(1, 16)
    pts = [(x, x**-1.5 * math.log(x) ** 3) for x in xs]
    r = stats.fit_power_tail(pts, (2, xs[-1]))
    assert r.slowly_varying


def test_window_too_small():
    with pytest.raises(WindowTooSmall):
        stats.fit_power_tail(_power(-2, [1, 2, 4]))
    # zeros and nonpositive x are dropped before counting
    with pytest.raises(WindowTooSmall):
        stats.fit_power_tail([(0, 1.0), (1, 1.0), (2, 0.5), (3, 0.0), (4, 0.25)], (0, 4))


def test_default_window():
    r = stats.fit_power_tail(_power(-1, 2.0 ** np.arange(0, 13)))
    assert r.window == (4096 / 64, 4096)


def test_survival_points():
    pts = stats.survival_points(np.array([1, 2, 2, 3, 10]), [1, 2, 3, 11])
    assert pts == [(1.0, 1.0), (2.0, 0.8), (3.0, 0.4), (11.0, 0.0)]


def test_log_binned_pmf_flat_mass():
    v = np.arange(1, 4097).repeat(100)
    pts = stats.log_binned_pmf(v, len(v))
    assert all(y == pytest.approx(1 / 4096) for _, y in pts)
    assert stats.log_binned_pmf(np.array([0, -1]), 2) == []


@settings(max_examples=50)
@given(a=st.floats(-4, -0.5), c=st.floats(1e-3, 1e3), s=st.floats(0.1, 10))
def test_power_fit_invariances(a, c, s):
    xs = 2.0 ** np.arange(2, 12)
    base = stats.fit_power_tail(_power(a, xs), (4, 2048))
    # scaling y leaves the slope alone; scaling x rescales only the window
    scaled_y = stats.fit_power_tail(_power(a, xs, c), (4, 2048))
    scaled_x = stats.fit_power_tail([(s * x, y) for x, y in _power(a, xs)], (4 * s, 2048 * s))
    assert scaled_y.slope == pytest.approx(base.slope, abs=1e-9)
    assert scaled_x.slope == pytest.approx(base.slope, abs=1e-9)
    assert base.slope == pytest.approx(a, abs=1e-9)


@settings(max_examples=50)
@given(rate=st.floats(0.01, 3), shift=st.floats(-20, 20))
def test_exp_fit_shift_invariance(rate, shift):
    pts = [(float(x), math.exp(-rate * x)) for x in range(10)]
    moved = [(x + shift, y) for x, y in pts]
    a = stats.fit_exp_tail(pts, (0, 9))
    b = stats.fit_exp_tail(moved, (shift, 9 + shift))
    assert a.rate == pytest.approx(rate, rel=1e-9) and b.rate == pytest.approx(rate, rel=1e-9)
