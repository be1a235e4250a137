"""The acceptance suite: thirteen numbered checks shared by ``planarperc verify`` and the tests.

Every check returns a :class:`CriterionResult`; a check passes only when its
numeric condition holds and it finished inside its time budget.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import optimize

from . import finite_peel, gw_trees, halfplane, maps, partition, walk_oracle
from .stats import fit_power_tail
from .weights import (
    dual_type,
    dual_volume_exponent,
    duality_map,
    preset,
    solve_admissibility,
    tuned_family,
    volume_exponent,
)

DEFAULT_SEED = 20261015


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    summary: str
    elapsed: float = 0.0
    budget: float = math.inf
    values: dict = field(default_factory=dict)

    @property
    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} {tag}  {self.name}: {self.summary} [{self.elapsed:.1f} s / {self.budget:.0f} s]"

    def to_json(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "summary": self.summary, "elapsed": self.elapsed, "budget": self.budget,
                "values": self.values}


def _slope(h: np.ndarray, lo: int, hi: int):
    k = np.arange(lo, hi + 1)
    return fit_power_tail(list(zip(k, h[lo:hi + 1])), (lo, hi))


# ---------------------------------------------------------------- the checks

def c1_weight_calculus(seed: int = DEFAULT_SEED) -> tuple[bool, str, dict]:
    g = 1.0 / 12.0
    # smallest root of 3 g x^2 - x + 1 = 0
    Z = (1.0 - math.sqrt(max(1.0 - 12.0 * g, 0.0))) / (6.0 * g)
    r = 1.0 / (4.0 * Z)
    oracle = {"Z": Z, "r": r, "mu0": 1.0 - 3.0 * g * Z, "mu2": 3.0 * g * Z,
              "nu1": g / r, "nu-1": 2.0 * r}
    s = solve_admissibility(preset("crit-quad"))
    got = {"Z": s.Z, "r": s.r, "mu0": s.mu(0), "mu2": s.mu(2), "nu1": s.nu(1), "nu-1": s.nu(-1)}
    err = max(abs(got[k] - oracle[k]) for k in oracle)
    return err <= 1e-9, f"max |solver - quadratic oracle| = {err:.1e} (tol 1e-9)", {"max_err": err, **got}


def c2_feller(seed: int = DEFAULT_SEED, k_max: int = 512) -> tuple[bool, str, dict]:
    s = solve_admissibility(preset("crit-quad"))
    worst = {}
    for label, p in (("p_c", s.p_c), ("supercritical", 0.5 * (s.p_c + 1.0))):
        lhs, rhs = walk_oracle.cyclic_table(walk_oracle.step_law(s, p), k_max)
        worst[label] = float(np.max(np.abs(lhs - rhs) / rhs))
    w = max(worst.values())
    return w <= 1e-10, f"max relative gap over k <= {k_max}: {w:.1e} (tol 1e-10)", worst


def c3_critical_hcut(seed: int = DEFAULT_SEED) -> tuple[bool, str, dict]:
    s = solve_admissibility(preset("crit-quad"))
    h = walk_oracle.hcut_table(walk_oracle.step_law(s, s.p_c), 4096)
    fit = _slope(h, 64, 4096)
    ok = abs(fit.slope + 5.0 / 3.0) <= 0.05
    return ok, f"slope {fit.slope:.4f} on [64, 4096] (target -5/3 +- 0.05)", fit.to_json()


def c4_supercritical_hcut(seed: int = DEFAULT_SEED) -> tuple[bool, str, dict]:
    s = solve_admissibility(preset("crit-quad"))
    p = 0.5 * (s.p_c + 1.0)
    h = walk_oracle.hcut_table(walk_oracle.step_law(s, p), 4096)
    fit = _slope(h, 64, 4096)
    ok = abs(fit.slope + 2.5) <= 0.1
    return ok, f"slope {fit.slope:.4f} at p={p:.4f} (target -5/2 +- 0.1)", fit.to_json()


def c5_duality(seed: int = DEFAULT_SEED) -> tuple[bool, str, dict]:
    F = Fraction
    checks = {"alpha=2 -> 7/6": duality_map(F(2)) == F(7, 6)}
    for alpha in (F(8, 5), F(7, 4), F(2)):
        a = alpha + F(1, 2)
        ap = duality_map(alpha)
        checks[f"a/(a-1) at alpha={alpha}"] = dual_type(a) == ap + F(1, 2)
        checks[f"volume identity at alpha={alpha}"] = volume_exponent(ap) == dual_volume_exponent(alpha)
    bad = [k for k, v in checks.items() if not v]
    return not bad, f"{len(checks) - len(bad)}/{len(checks)} exact rational identities", {"failed": bad}


def c6_threshold(seed: int = DEFAULT_SEED, runs: int = 10**4, step_cap: int = 10**6) -> tuple[bool, str, dict]:
    s = solve_admissibility(preset("crit-quad"))
    nu = s.nu
    k_neg = -nu.offset
    pos = nu.mass[k_neg:]
    # E[dB](p) = p - (1-p)/2 * sum (2k+1) nu(-k-1), the sum taken from the centred nu table
    neg_moment = 2.0 * float(np.dot(np.arange(len(pos)), pos)) - (1.0 - float(pos.sum()))

    def drift(p):
        return p - 0.5 * (1.0 - p) * neg_moment

    root = optimize.brentq(drift, 0.0, 1.0 - 1e-12, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    formula = s.lam / (s.lam + 2.0)
    gap = abs(root - formula)
    rows = halfplane.threshold_scan(s, [s.p_c - 0.05, s.p_c + 0.05], runs, step_cap, seed)
    below, above = rows
    ok_below = below["survival"] <= 3.0 * below["stderr"]
    ok_above = above["survival"] >= 5.0 * above["stderr"]
    ok = gap <= 1e-12 and ok_below and ok_above and not above["monotone_violation"]
    msg = (f"|root - lambda/(lambda+2)| = {gap:.1e}; survival {below['survival']:.4f} at p_c-0.05, "
           f"{above['survival']:.4f} ({above['survival'] / above['stderr']:.0f} sigma) at p_c+0.05")
    return ok, msg, {"root": root, "formula": formula, "rows": rows}


def c7_perimeter_tail(seed: int = DEFAULT_SEED, runs: int = 10**5) -> tuple[bool, str, dict]:
    s = solve_admissibility(preset("crit-quad"))
    rep = halfplane.perimeter_tail(walk_oracle.step_law(s, s.p_c), runs,
                                   [2**i for i in range(2, 14)], seed=seed)
    ok = abs(rep.fit.slope + 1.0 / 3.0) <= 0.1
    return ok, f"tau* tail slope {rep.fit.slope:.4f} (target -1/3 +- 0.1)", rep.to_json()


def c8_subcritical_theta(seed: int = DEFAULT_SEED, runs: int = 10**5) -> tuple[bool, str, dict]:
    s = solve_admissibility(preset("subcrit-quad(1/16)"))
    b = finite_peel.run_theta_batch(s, 0.1, runs, seed)
    fit = finite_peel.theta_tail_fit(b, 0.5, 0.999)
    ok = fit.r2 >= 0.98 and fit.rate > 0 and b.censored_fraction == 0.0
    return ok, f"exponential fit R^2 {fit.r2:.4f}, rate {fit.rate:.3f} (need R^2 >= 0.98)", fit.to_json()


def c9_volume(seed: int = DEFAULT_SEED, runs: int = 10**6) -> tuple[bool, str, dict]:
    s = solve_admissibility(preset("crit-quad"))
    rep = gw_trees.volume_tail(s.mu, runs, n_grid=(2**5, 2**17), seed=seed)
    ok = abs(rep.pointed.slope + 1.5) <= 0.1 and rep.censored_fraction < 0.01
    msg = (f"pointed slope {rep.pointed.slope:.4f} (target -3/2 +- 0.1), "
           f"reweighted {rep.unpointed.slope:.4f}, censored {rep.censored_fraction:.1e}")
    return ok, msg, rep.to_json()


def _enumerate_to(q, k, bound=1e-8, e_max=40, e_limit=400):
    while True:
        res = partition.w_disk_enumerate(q, k, e_max)
        if res.truncation_bound < bound or e_max >= e_limit:
            return res
        e_max += 20


def c10_partition_oracles(seed: int = DEFAULT_SEED) -> tuple[bool, str, dict]:
    q = preset("subcrit-quad(1/16)")
    s = solve_admissibility(q)
    rel = {}
    for k in (1, 2):
        res = _enumerate_to(q, k)
        val, _ = partition.w_disk_quadrature(s, k)
        rel[k] = (abs(res.value - val) / val, res.truncation_bound, res.e_max)
    # the explicit half-edge enumeration must reproduce the construction term by term
    small = max(float(np.max(np.abs(maps.disk_weight_by_edges(q, k, 7)
                                    - partition.w_disk_enumerate(q, k, 7).terms)))
                for k in (1, 2))
    tutte = {}
    for name in ("subcrit-quad(1/16)", "crit-quad"):
        sw = solve_admissibility(preset(name))
        tutte[name] = max(partition.check_tutte_identity(sw, sw.table, l) for l in range(1, 65))
    ok = (all(r <= 1e-6 and b < 1e-8 for r, b, _ in rel.values()) and small <= 1e-15
          and max(tutte.values()) <= 1e-6)
    msg = (f"quadrature vs enumeration {max(r for r, _, _ in rel.values()):.1e} (tol 1e-6), "
           f"max Tutte residual l<=64 {max(tutte.values()):.1e} (tol 1e-6)")
    return ok, msg, {"quad_vs_enum": {str(k): v for k, v in rel.items()}, "maps_vs_construction": small,
                     "tutte": tutte}


def c11_cluster_law(seed: int = DEFAULT_SEED) -> tuple[bool, str, dict]:
    out = {}
    ok = True
    for name, p in (("subcrit-quad(1/16)", 0.5), ("mixed", 0.3)):
        rep = maps.verify_cluster_law(preset(name), p, 5)
        out[name] = rep.to_json()
        ok = ok and rep.passed
    spread = max(v["max_rel_spread"] for v in out.values())
    return ok, f"max spread within face-degree classes {spread:.1e} at E_max=5", out


def c12_dilute(seed: int = DEFAULT_SEED) -> tuple[bool, str, dict]:
    s = solve_admissibility(tuned_family(2.2, k_cap=2**18), l_max=16384)
    index = -s.classification.evidence["nu_tail_slope"]
    h = walk_oracle.hcut_table(walk_oracle.step_law(s, s.p_c), 4096)
    fit = _slope(h, 64, 4096)
    alpha = Fraction(17, 10)
    ap = duality_map(alpha)
    exact = ap == Fraction(4, 3) and dual_type(alpha + Fraction(1, 2)) == Fraction(11, 6) == ap + Fraction(1, 2)
    ok = abs(index - 1.2) <= 0.1 and abs(fit.slope + 11.0 / 6.0) <= 0.1 and exact
    msg = (f"nu tail index {index:.3f} (1.2 +- 0.1), Hcut slope {fit.slope:.4f} (-11/6 +- 0.1), "
           f"alpha'=4/3 exact: {exact}")
    return ok, msg, {"index": index, "m_mu": s.m_mu, "p_c": s.p_c, "fit": fit.to_json()}


def c13_mc_vs_oracle(seed: int = DEFAULT_SEED, runs: int = 10**6) -> tuple[bool, str, dict]:
    s = solve_admissibility(preset("crit-quad"))
    law = walk_oracle.step_law(s, s.p_c)
    exact = walk_oracle.hcut_table(law, 32) * (1.0 - law.p)
    b = halfplane.run_batch(law, seed, runs, stop_at_tstar=True, bstar_cap=65)
    freq, _ = halfplane.hcut_frequencies(b, 32)
    z = (freq - exact) / np.sqrt(exact * (1 - exact) / runs)
    worst = float(np.max(np.abs(z)))
    return worst <= 3.0, f"max |z| over k <= 32: {worst:.2f} (need <= 3)", {"z": z.tolist()}


CRITERIA = {
    1: ("weight calculus", c1_weight_calculus, 1.0),
    2: ("Feller identity", c2_feller, 30.0),
    3: ("critical Hcut exponent", c3_critical_hcut, 120.0),
    4: ("supercritical Hcut exponent", c4_supercritical_hcut, 120.0),
    5: ("duality arithmetic", c5_duality, 1.0),
    6: ("threshold formula", c6_threshold, 300.0),
    7: ("critical perimeter tail", c7_perimeter_tail, 300.0),
    8: ("subcritical sharpness", c8_subcritical_theta, 300.0),
    9: ("volume law", c9_volume, 180.0),
    10: ("partition oracles", c10_partition_oracles, 120.0),
    11: ("cluster product form", c11_cluster_law, 300.0),
    12: ("non-generic dilute case", c12_dilute, 600.0),
    13: ("MC vs oracle", c13_mc_vs_oracle, 300.0),
}

SUITES = {
    "all": tuple(CRITERIA),
    "fast": (1, 2, 3, 4, 5, 10, 11, 13),
    "feller": (2,),
    "exponents": (3, 4, 7, 9, 12),
    "mc": (6, 7, 8, 9, 13),
}


def run_criterion(number: int, seed: int = DEFAULT_SEED, **kwargs) -> CriterionResult:
    name, fn, budget = CRITERIA[number]
    t0 = time.perf_counter()
    try:
        ok, summary, values = fn(seed, **kwargs)
    except Exception as exc:  # a crash is a failed check, reported with its error name
        ok, summary, values = False, f"{type(exc).__name__}: {exc}", {}
    elapsed = time.perf_counter() - t0
    if elapsed > budget:
        ok = False
        summary += f"; over the {budget:.0f} s budget"
    return CriterionResult(number, name, bool(ok), summary, elapsed, budget, values)


def run_suite(numbers=None, seed: int = DEFAULT_SEED, echo=None) -> list[CriterionResult]:
    out = []
    for n in numbers or CRITERIA:
        res = run_criterion(n, seed)
        if echo is not None:
            echo(res.line)
        out.append(res)
    return out
