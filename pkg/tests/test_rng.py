import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planarperc import rng


def test_deterministic_and_distinct_streams():
    a = rng.uniforms(1, 0, 1000)
    assert np.array_equal(a, rng.uniforms(1, 0, 1000))
    assert not np.array_equal(a, rng.uniforms(1, 1, 1000))
    assert not np.array_equal(a, rng.uniforms(2, 0, 1000))


def test_uniform_range_and_moments():
    u = rng.uniforms(123, 7, 200_000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 4 * np.sqrt(1 / 12 / u.size)
    # lag-1 correlation
    assert abs(np.corrcoef(u[:-1], u[1:])[0, 1]) < 4 / np.sqrt(u.size)


@settings(max_examples=40)
@given(st.lists(st.floats(0, 10), min_size=1, max_size=30).filter(lambda w: sum(w) > 0))
def test_alias_table_reconstructs_weights(w):
    prob, alias = rng.alias_table(np.array(w))
    n = len(w)
    back = prob / n
    np.add.at(back, alias, (1 - prob) / n)
    assert np.allclose(back, np.array(w) / sum(w), atol=1e-12)


def test_alias_table_rejects_bad_input():
    for w in ([], [0.0, 0.0], [1.0, -1.0]):
        with pytest.raises(ValueError):
            rng.alias_table(np.array(w))
