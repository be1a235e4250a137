"""Exact distribution propagation for the half-plane boundary walk.

The walk ``B`` starts at 1 and moves by ``+1`` with probability ``p``, by
``-(2k+1)`` with probability ``(1-p) nu(-k-1) / 2`` and stays put otherwise.
``B*`` is ``B`` with the zero steps removed. All computations here are
deterministic dynamic programs over integer positions; the Monte Carlo
simulator in :mod:`planarperc.halfplane` is checked against them.

Mass bookkeeping follows :class:`~planarperc.pmf.Pmf`: probability that
leaves the window because it can no longer matter (absorbed, or clipped
below a floor it cannot climb back from in time) is ``absorbed`` and exact;
probability carried by the truncated tail of ``nu`` from positions where it
might still matter is ``lost_mass``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import DomainError, WindowOverflow
from .pmf import Pmf
from .weights import SolvedWeights, nu_law

__all__ = [
    "Pmf", "StepLaw", "step_law", "propagate", "first_passage_zero", "hcut_exact",
    "hcut_table", "cyclic_check", "cyclic_table", "zero_return_profile", "survival_curve",
    "survival_estimate", "MAX_STEPS",
]

MAX_STEPS = 2**20
MAX_LOST = 1e-6
DIRECT_WORK = 4_000_000


@dataclass(frozen=True)
class StepLaw:
    """Step laws of ``B`` (``delta``) and of ``B*`` (``star``) for a fixed ``p``."""

    p: float
    delta: Pmf
    star: Pmf
    p_nonzero: float
    drift: float
    lam: float

    @property
    def k_neg(self) -> int:
        return (1 - self.delta.offset) // 2

    def p_zero(self) -> float:
        return self.delta(0)


def step_law(solved: SolvedWeights, p: float, strict: bool = True) -> StepLaw:
    """Build the step laws from the solved ``nu``.

    With ``strict`` the ``nu`` tail must be below the truncation threshold.
    """
    if not 0.0 <= p < 1.0:
        raise DomainError("p must lie in [0, 1)")
    nu = nu_law(solved) if strict else solved.nu
    k_neg = -nu.offset
    neg = nu.mass[:k_neg][::-1]  # nu(-k-1), k = 0 .. k_neg-1
    pos_total = float(nu.mass[k_neg:].sum())
    n_total = 1.0 - pos_total  # includes the truncated tail
    # jumps -(2K-1) .. +1
    dense = np.zeros(2 * k_neg + 1)
    dense[2 * k_neg - 2 - 2 * np.arange(k_neg)] = 0.5 * (1.0 - p) * neg
    dense[-1] = p
    zero_idx = 2 * k_neg - 1
    dense[zero_idx] = 1.0 - p - 0.5 * (1.0 - p) * n_total
    tail = 0.5 * (1.0 - p) * nu.lost_mass
    delta = Pmf(-(2 * k_neg - 1), dense, lost_mass=tail)
    p_nonzero = p + 0.5 * (1.0 - p) * n_total
    star_mass = dense.copy()
    star_mass[zero_idx] = 0.0
    star = Pmf(delta.offset, star_mass / p_nonzero, lost_mass=tail / p_nonzero)
    lam = solved.lam
    drift = p - (1.0 - p) * lam / 2.0 if math.isfinite(lam) else -math.inf
    return StepLaw(float(p), delta, star, p_nonzero, drift, lam)


def _convolve(s: np.ndarray, k: np.ndarray, method: str) -> np.ndarray:
    if method == "direct" or (method == "auto" and len(s) * len(k) <= DIRECT_WORK):
        return np.convolve(s, k)
    out = fftconvolve(s, k)
    np.maximum(out, 0.0, out=out)
    return out


class _Engine:
    """One-step transport of a window of mass under a fixed jump kernel."""

    def __init__(self, kernel: Pmf, method: str):
        self.k = kernel.mass
        self.dmin = kernel.offset
        self.dmax = kernel.hi
        self.tail = kernel.lost_mass
        self.method = method

    def hit(self, lo: int, s: np.ndarray, target: int) -> float:
        """Probability of landing exactly on ``target`` in one step."""
        # positions x with target - x in [dmin, dmax]
        x_lo = max(lo, target - self.dmax)
        x_hi = min(lo + len(s) - 1, target - self.dmin)
        if x_hi < x_lo:
            return 0.0
        xs = s[x_lo - lo: x_hi - lo + 1]
        ks = self.k[target - x_hi - self.dmin: target - x_lo - self.dmin + 1][::-1]
        return float(np.dot(xs, ks))

    def step(self, lo: int, s: np.ndarray, floor: int) -> tuple[int, np.ndarray, float]:
        """Advance one step, dropping positions below ``floor``; returns new window and lost mass."""
        hi = lo + len(s) - 1
        # tail jumps land at or below x + dmin - 1; they matter only if that can be >= floor
        lost = 0.0
        if self.tail > 0.0:
            x_cut = floor - self.dmin + 1
            if x_cut <= hi:
                lost = self.tail * float(s[max(x_cut - lo, 0):].sum())
        new_hi = hi + self.dmax
        new_lo = max(floor, lo + self.dmin)
        if new_lo > new_hi:
            return floor, np.zeros(0), lost
        d_lo = max(self.dmin, floor - hi)
        kern = self.k[d_lo - self.dmin:]
        out = _convolve(s, kern, self.method)
        base = lo + d_lo
        return new_lo, out[new_lo - base: new_hi - base + 1], lost


def _check_n(n: int) -> None:
    if n < 0 or n > MAX_STEPS:
        raise DomainError(f"number of steps must lie in [0, {MAX_STEPS}]")


def propagate(law: StepLaw, n: int, start: int = 1, absorb_below: int | None = None,
              floor: int | None = None, star: bool = True, method: str = "auto",
              max_lost: float = MAX_LOST) -> Pmf:
    """Law of the walk after ``n`` steps.

    ``absorb_below`` kills the walk at the first visit to a position
    ``<= absorb_below``. ``floor`` instead clips positions below it at every
    step (use it when only positions that can come back above the floor in the
    remaining time matter). Without either, the window is the full reachable
    range.
    """
    _check_n(n)
    kernel = law.star if star else law.delta
    eng = _Engine(kernel, method)
    if absorb_below is not None:
        fl = absorb_below + 1
        if start < fl:
            return Pmf(start, np.zeros(1), absorbed=1.0)
    elif floor is not None:
        fl = floor
    else:
        fl = start + n * kernel.offset
        if n * (kernel.hi - kernel.offset) > 2**24:
            raise WindowOverflow("full window too wide; pass a floor")
    lo, s = start, np.ones(1)
    lost = 0.0
    for _ in range(n):
        lo, s, l_step = eng.step(lo, s, fl)
        lost += l_step
        if lost > max_lost:
            raise WindowOverflow(f"lost mass {lost:.2e} above {max_lost:.0e}")
        if len(s) == 0:
            break
    total = float(s.sum()) if len(s) else 0.0
    absorbed = max(1.0 - total - lost, 0.0)
    if len(s) == 0:
        s = np.zeros(1)
        lo = fl
    return Pmf(lo, s, lost_mass=lost, absorbed=absorbed)


@dataclass(frozen=True)
class FirstPassage:
    """``hits[t] = P(T* = t, B*_{T*} = 0)`` for ``t = 0 .. n`` and the walk still alive at ``n``."""

    hits: np.ndarray
    alive: Pmf


def first_passage_zero(law: StepLaw, n: int, start: int = 1, method: str = "auto",
                       max_lost: float = MAX_LOST) -> FirstPassage:
    """First-passage DP for ``T* = inf{i > 0 : B*_i <= 0}`` recording exact landings on 0."""
    _check_n(n)
    eng = _Engine(law.star, method)
    hits = np.zeros(n + 1)
    lo, s = start, np.ones(1)
    lost = 0.0
    for t in range(1, n + 1):
        hits[t] = eng.hit(lo, s, 0)
        lo, s, l_step = eng.step(lo, s, 1)
        lost += l_step
        if lost > max_lost:
            raise WindowOverflow(f"lost mass {lost:.2e} above {max_lost:.0e}")
    total = float(s.sum())
    alive = Pmf(lo, s, lost_mass=lost, absorbed=max(1.0 - total - lost, 0.0))
    return FirstPassage(hits, alive)


def hcut_table(law: StepLaw, k_max: int, method: str = "auto") -> np.ndarray:
    """``P(T* = 2k+1, B*_{T*} = 0) / (1-p)`` for ``k = 0 .. k_max`` from one DP run."""
    fp = first_passage_zero(law, 2 * k_max + 1, method=method)
    return fp.hits[1::2] / (1.0 - law.p)


def hcut_exact(law: StepLaw, k: int, p: float | None = None, method: str = "auto") -> float:
    """Probability of ``Hcut_k`` in the half-plane exploration."""
    if p is not None and p != law.p:
        raise DomainError("p differs from the step law's p")
    return float(hcut_table(law, k, method=method)[k])


def cyclic_check(law: StepLaw, k: int, method: str = "direct") -> tuple[float, float]:
    """Both sides of the cyclic-lemma identity at time ``n = 2k+1``.

    ``lhs`` comes from the absorbing DP, ``rhs = P(B*_n = 0) / n`` from a free DP.
    """
    n = 2 * k + 1
    lhs = float(first_passage_zero(law, n, method=method).hits[n])
    eng = _Engine(law.star, method)
    lo, s = 1, np.ones(1)
    for t in range(1, n + 1):
        # positions below -(n - t) cannot reach 0 by time n
        lo, s, _ = eng.step(lo, s, -(n - t))
    val = float(s[-lo]) if 0 <= -lo < len(s) else 0.0
    return lhs, val / n


def cyclic_table(law: StepLaw, k_max: int, method: str = "direct") -> tuple[np.ndarray, np.ndarray]:
    """``cyclic_check`` for every ``k <= k_max`` from one absorbing and one free DP."""
    n = 2 * k_max + 1
    lhs = first_passage_zero(law, n, method=method).hits[1::2]
    ret = zero_return_profile(law, n, method=method)[1::2]
    return lhs, ret / (2 * np.arange(k_max + 1) + 1)


def zero_return_profile(law: StepLaw, n: int, start: int = 1, method: str = "auto") -> np.ndarray:
    """``P(B*_t = 0)`` for ``t = 0 .. n`` from the free walk (fixed floor ``-n``)."""
    _check_n(n)
    eng = _Engine(law.star, method)
    out = np.zeros(n + 1)
    out[0] = 1.0 if start == 0 else 0.0
    lo, s = start, np.ones(1)
    lost = 0.0
    for t in range(1, n + 1):
        lo, s, l_step = eng.step(lo, s, -n)
        lost += l_step
        if 0 <= -lo < len(s):
            out[t] = s[-lo]
    if lost > MAX_LOST:
        raise WindowOverflow(f"lost mass {lost:.2e} above {MAX_LOST:.0e}")
    return out


def survival_curve(law: StepLaw, horizon: int, method: str = "auto") -> tuple[np.ndarray, float]:
    """``P(tau > t)`` for ``t = 0 .. horizon`` with ``tau`` the first time ``B < 0``.

    Returns the curve and the total lost mass, which bounds its error from above.
    """
    if horizon > 2**16:
        raise DomainError("survival horizon above 2^16")
    eng = _Engine(law.delta, method)
    out = np.ones(horizon + 1)
    lo, s = 1, np.ones(1)
    lost = 0.0
    for t in range(1, horizon + 1):
        lo, s, l_step = eng.step(lo, s, 0)
        lost += l_step
        out[t] = s.sum()
    return out, lost


def survival_estimate(law: StepLaw, horizon: int, method: str = "auto") -> float:
    """``P(tau > horizon)`` by the absorbing DP."""
    return float(survival_curve(law, horizon, method)[0][-1])
