import numpy as np
import pytest
from scipy import stats as sps

from planarperc import halfplane as hp
from planarperc import walk_oracle as wo
from planarperc.errors import DomainError, InsufficientTailSamples


@pytest.fixture(scope="module")
def at_pc(crit):
    return wo.step_law(crit, crit.p_c)


def test_deterministic_streams(at_pc):
    a = hp.run_batch(at_pc, 11, 500, step_cap=2000)
    b = hp.run_batch(at_pc, 11, 500, step_cap=2000)
    for f in ("tau_star", "T_star", "hit_zero", "steps_total", "nonzero_steps"):
        assert np.array_equal(getattr(a, f), getattr(b, f))
    # run i only depends on (seed, i)
    c = hp.run_batch(at_pc, 11, 100, step_cap=2000, first_run=400)
    assert np.array_equal(c.tau_star, a.tau_star[400:])
    r = hp.run_exploration(at_pc, 11, step_cap=2000, run_index=7)
    assert r == a.record(7)


def test_record_fields(at_pc):
    b = hp.run_batch(at_pc, 5, 2000, step_cap=5000)
    assert np.all(b.T_star[b.hit_zero] % 2 == 1)
    assert np.all(b.nonzero_steps <= b.steps_total)
    assert np.all(b.steps_total <= 5000)
    assert np.all((b.tau_star < 0) == b.survived_cap)
    died = b.tau_star >= 0
    assert np.all(b.tau_star[died] == b.nonzero_steps[died])


def test_step_cap_checked(at_pc):
    with pytest.raises(DomainError):
        hp.run_batch(at_pc, 0, 1, step_cap=0)


def test_hcut_frequencies_match_oracle(at_pc):
    k_max = 8
    oracle = (1 - at_pc.p) * wo.hcut_table(at_pc, k_max)
    b = hp.run_batch(at_pc, 3, 10**6, stop_at_tstar=True, bstar_cap=2 * k_max + 1)
    f, _ = hp.hcut_frequencies(b, k_max)
    z = (f - oracle) / np.sqrt(oracle * (1 - oracle) / b.runs)
    assert sps.chi2.sf(np.sum(z**2), k_max + 1) > 1e-3
    assert np.max(np.abs(z)) < 4


def test_no_survival_at_p_zero(crit):
    b = hp.run_batch(wo.step_law(crit, 0.0), 0, 2000, step_cap=10**4)
    assert not b.survived_cap.any()


def test_threshold_scan(crit):
    rows = hp.threshold_scan(crit, [0.0, 0.2, 0.5, 0.7], 2000, step_cap=4096)
    s = [r["survival"] for r in rows]
    assert s[0] == 0.0 and s[-1] > s[-2] > 0.3
    assert not any(r["monotone_violation"] for r in rows)
    with pytest.raises(DomainError):
        hp.threshold_scan(crit, [1.0], 10)


@pytest.mark.slow
def test_survival_matches_exact_curve_at_equal_horizon(crit):
    # the cap counts every step, so it compares with the absorbing DP at the same time
    law = wo.step_law(crit, crit.p_c + 0.05)
    exact = wo.survival_estimate(law, 2**13)
    b = hp.run_batch(law, 3, 20000, step_cap=2**13)
    f = b.survived_cap.mean()
    assert abs(f - exact) / np.sqrt(exact * (1 - exact) / b.runs) < 3


def test_perimeter_tail(at_pc):
    r = hp.perimeter_tail(at_pc, 20000, [4, 8, 16, 32, 64, 128], seed=1)
    ys = [y for _, y in r.points]
    assert all(a >= b for a, b in zip(ys, ys[1:]))
    assert -0.6 < r.fit.slope < -0.1
    assert set(r.to_json()) >= {"points", "fit", "censored_fraction"}
    with pytest.raises(InsufficientTailSamples):
        hp.perimeter_tail(at_pc, 50, [4, 8, 16, 32])


def test_conditional_hcut(at_pc):
    kg = [0, 1, 2, 3, 4, 6, 8]
    rows = hp.conditional_hcut(at_pc, kg, [0, 4], 20000, seed=1, step_cap=10**5)
    f, _ = hp.hcut_frequencies(hp.run_batch(at_pc, 1, 20000, 10**5), 8)
    assert rows[0]["freq"] == pytest.approx(f[kg].tolist(), abs=0)
    assert rows[0]["ratio_to_unconditional"] == [1.0] * len(kg)
    assert rows[1]["n_conditioned"] < 20000
    assert "k_slope" in rows[0]
