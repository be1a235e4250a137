"""Percolation peeling on finite Boltzmann maps, reduced to the ``(B, F)`` chain.

``B`` counts black and ``F`` free boundary edges of the unexplored hole, whose
half-perimeter is ``P = (B + F) / 2``. From ``(B, F)`` with ``F > 0``:

* the peeled free edge is black (probability ``p``): ``(+1, -1)``;
* a new face of degree ``2k``: ``(0, +2k-2)``, probability ``(1-p) q_k W^(P+k-1) / W^(P)``;
* the edge is glued to the black side, enclosing ``2k`` edges:
  ``(-2k-1, -1)``, probability ``(1-p) W^(k) W^(P-k-1) / W^(P)`` for ``2k+1 <= B``;
* it is glued to the free side, enclosing ``2j`` edges:
  ``(0, -2j-2)``, probability ``(1-p) W^(j) W^(P-j-1) / W^(P)`` for ``2j+2 <= F``.

The chain dies when ``F = 0``; ``theta`` is that time. With ``s_k = W^(k) r^k``
all ratios are bounded: ``W^(j) W^(k) / W^(P) = r s_j s_k / s_P`` when
``j + k + 1 = P``. Above the disk table the chain uses the perimeter-free
limit kernel (``nu``), renormalised over the moves allowed by ``(B, F)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DomainError, TableExhausted
from .rng import next_double, stream_state
from .stats import fit_exp_tail, survival_points
from .weights import SolvedWeights

DEFAULT_STEP_CAP = 10**6
CHECK_RATE = 0.01
TUTTE_TOL = 1e-6


@dataclass(frozen=True)
class BFState:
    B: int
    F: int

    def __post_init__(self):
        if self.B < 0 or self.F < 0 or (self.B + self.F) % 2:
            raise DomainError("need B, F >= 0 with B + F even")

    @property
    def P(self) -> int:
        return (self.B + self.F) // 2

    @property
    def dead(self) -> bool:
        return self.F == 0


@dataclass(frozen=True)
class _Kernel:
    s: np.ndarray        # W^(k) r^k, k = 0 .. L_max
    r: float
    ks: np.ndarray       # support of q
    cq: np.ndarray       # q_k r^-(k-1), so C_k has weight cq_k s_{P+k-1} / s_P
    nu_pos: np.ndarray   # nu(k-1) = cq_k, the limit of the C_k weights
    nu_neg: np.ndarray   # nu(-k-1), k = 0 .. K_neg-1
    root_cdf: np.ndarray
    root_k: np.ndarray
    root_tail: float


def _kernel(solved: SolvedWeights, table=None) -> _Kernel:
    table = solved.table if table is None else table
    q = solved.weights
    ks, _ = q.coefficients
    r = table.r
    cq = np.exp(q.log_q - (ks - 1) * math.log(r))
    nu = solved.nu
    k_neg = -nu.offset
    nu_neg = nu.mass[:k_neg][::-1].copy()
    s = table.scaled
    root_k, root_cdf, root_tail = _root_law(cq, ks, s)
    return _Kernel(s, r, ks.astype(np.int64), cq, cq.copy(), nu_neg, root_cdf, root_k, root_tail)


def _root_law(cq, ks, s):
    # P(root face has degree 2k) ~ q_k W^(k) ~ cq_k s_k
    inside = ks < len(s)
    w = cq[inside] * s[ks[inside]]
    tot = w.sum()
    # beyond the table s_k ~ s_L (k/L)^-a; this is only reported, never sampled
    tail = 0.0
    if (~inside).any():
        L = len(s) - 1
        tail = float(np.sum(cq[~inside] * s[L])) / tot
    return ks[inside].astype(np.int64), np.cumsum(w) / tot, tail


def root_degree_law(solved: SolvedWeights, table=None) -> tuple[np.ndarray, np.ndarray, float]:
    """``(k, P(k))`` for the root-face half-degree and the (upper-bounded) mass beyond the table."""
    kern = _kernel(solved, table)
    pmf = np.diff(np.concatenate([[0.0], kern.root_cdf]))
    return kern.root_k, pmf, kern.root_tail


def sample_root_degree(solved: SolvedWeights, table, rng: np.random.Generator) -> int:
    """Half-degree ``k`` of the root face, drawn with weight ``q_k W^(k)``."""
    k, pmf, _ = root_degree_law(solved, table)
    return int(rng.choice(k, p=pmf / pmf.sum()))


def transition_probs(state: BFState, solved: SolvedWeights, p: float, table=None) -> dict:
    """All moves out of ``state`` as ``{(dB, dF): probability}``, from the finite-perimeter kernel."""
    if state.dead:
        raise DomainError("no transitions out of a dead state")
    kern = _kernel(solved, table)
    P, B, F = state.P, state.B, state.F
    s, r = kern.s, kern.r
    if P + int(kern.ks.max()) - 1 >= len(s):
        raise TableExhausted(f"P={P} needs W beyond L_max={len(s) - 1}")
    out = {(1, -1): p}
    for k, c in zip(kern.ks.tolist(), kern.cq.tolist()):
        out[(0, 2 * k - 2)] = out.get((0, 2 * k - 2), 0.0) + (1 - p) * c * s[P + k - 1] / s[P]
    for k in range(0, (B - 1) // 2 + 1):
        key = (-2 * k - 1, -1)
        out[key] = out.get(key, 0.0) + (1 - p) * r * s[k] * s[P - k - 1] / s[P]
    for j in range(0, F // 2):
        key = (0, -2 * j - 2)
        out[key] = out.get(key, 0.0) + (1 - p) * r * s[j] * s[P - j - 1] / s[P]
    return out


def bf_step(state: BFState, solved: SolvedWeights, table, p: float, rng: np.random.Generator):
    """One step of the chain; returns the next BFState (``F == 0`` means dead)."""
    probs = transition_probs(state, solved, p, table)
    moves = list(probs)
    w = np.array([probs[m] for m in moves])
    dB, dF = moves[rng.choice(len(moves), p=w / w.sum())]
    return BFState(state.B + dB, state.F + dF)


@njit(cache=True)
def _theta_runs(s, r, ks, cq, nu_pos, nu_neg, root_k, root_cdf, p, seed, first_run, n_runs,
                step_cap, check_every, theta, censored, switch_p, max_resid):
    L = s.shape[0] - 1
    kmax = ks.max()
    n_neg = nu_neg.shape[0]
    worst = 0.0
    for run in range(n_runs):
        st = np.empty(1, dtype=np.uint64)
        st[0] = stream_state(np.uint64(seed), np.uint64(first_run + run))
        u = next_double(st)
        j = 0
        while j < root_cdf.shape[0] - 1 and root_cdf[j] <= u:
            j += 1
        k0 = root_k[j]
        B = 1
        F = 2 * k0 - 1
        n = 0
        sw = -1
        while F > 0 and n < step_cap:
            n += 1
            u = next_double(st)
            if u < p:
                B += 1
                F -= 1
                continue
            u = (u - p) / (1.0 - p)
            P = (B + F) // 2
            finite = P + kmax - 1 <= L
            if not finite and sw < 0:
                sw = P
            if finite:
                inv = 1.0 / s[P]
                if check_every > 0 and n % check_every == 0:
                    tot = 0.0
                    for i in range(ks.shape[0]):
                        tot += cq[i] * s[P + ks[i] - 1] * inv
                    for i in range(P):
                        tot += r * s[i] * s[P - 1 - i] * inv
                    d = abs(tot - 1.0)
                    if d > worst:
                        worst = d
                acc = 0.0
                moved = False
                for i in range(ks.shape[0]):
                    acc += cq[i] * s[P + ks[i] - 1] * inv
                    if u < acc:
                        F += 2 * ks[i] - 2
                        moved = True
                        break
                if moved:
                    continue
                for i in range((B - 1) // 2 + 1):
                    acc += r * s[i] * s[P - i - 1] * inv
                    if u < acc:
                        B -= 2 * i + 1
                        F -= 1
                        moved = True
                        break
                if moved:
                    continue
                for i in range(F // 2):
                    acc += r * s[i] * s[P - i - 1] * inv
                    if u < acc:
                        F -= 2 * i + 2
                        moved = True
                        break
                if not moved:
                    # rounding leftover: take the last allowed gluing
                    if F >= 2:
                        F -= 2 * (F // 2)
                    else:
                        B -= 2 * ((B - 1) // 2) + 1
                        F -= 1
            else:
                # limit kernel restricted to the moves allowed at (B, F)
                tot = 0.0
                for i in range(ks.shape[0]):
                    tot += nu_pos[i]
                nb = min((B - 1) // 2 + 1, n_neg) if B >= 1 else 0
                nf = min(F // 2, n_neg)
                for i in range(nb):
                    tot += 0.5 * nu_neg[i]
                for i in range(nf):
                    tot += 0.5 * nu_neg[i]
                x = u * tot
                acc = 0.0
                moved = False
                for i in range(ks.shape[0]):
                    acc += nu_pos[i]
                    if x < acc:
                        F += 2 * ks[i] - 2
                        moved = True
                        break
                if moved:
                    continue
                for i in range(nb):
                    acc += 0.5 * nu_neg[i]
                    if x < acc:
                        B -= 2 * i + 1
                        F -= 1
                        moved = True
                        break
                if moved:
                    continue
                for i in range(nf):
                    acc += 0.5 * nu_neg[i]
                    if x < acc or i == nf - 1:
                        F -= 2 * i + 2
                        break
        theta[run] = n
        censored[run] = F > 0
        switch_p[run] = sw
    max_resid[0] = worst


@dataclass(frozen=True)
class ThetaBatch:
    theta: np.ndarray
    censored: np.ndarray
    switch_perimeter: np.ndarray  # -1 when the run never left the table
    max_tutte_residual: float
    p: float
    seed: int

    @property
    def perimeter_upper(self) -> np.ndarray:
        return self.theta + 1

    @property
    def censored_fraction(self) -> float:
        return float(self.censored.mean())


def run_theta_batch(solved: SolvedWeights, p: float, runs: int, seed: int = 0,
                    step_cap: int = DEFAULT_STEP_CAP, table=None, first_run: int = 0,
                    check_rate: float = CHECK_RATE) -> ThetaBatch:
    """``theta`` for ``runs`` explorations; run ``i`` uses stream ``(seed, first_run + i)``."""
    if not 0.0 <= p < 1.0:
        raise DomainError("p must lie in [0, 1)")
    kern = _kernel(solved, table)
    theta = np.empty(runs, dtype=np.int64)
    cens = np.empty(runs, dtype=np.bool_)
    sw = np.empty(runs, dtype=np.int64)
    resid = np.zeros(1)
    every = int(round(1.0 / check_rate)) if check_rate > 0 else 0
    _theta_runs(kern.s, kern.r, kern.ks, kern.cq, kern.nu_pos, kern.nu_neg, kern.root_k, kern.root_cdf,
                float(p), np.uint64(seed), first_run, runs, step_cap, every, theta, cens, sw, resid)
    if resid[0] > TUTTE_TOL:
        raise TableExhausted(f"one-step normalisation off by {resid[0]:.2e}")
    return ThetaBatch(theta, cens, sw, float(resid[0]), float(p), int(seed))


def run_theta(solved: SolvedWeights, table, p: float, rng_seed: int,
              step_cap: int = DEFAULT_STEP_CAP, run_index: int = 0) -> tuple[int, int]:
    """``(theta, theta + 1)`` for one run; ``theta + 1`` bounds the cluster perimeter."""
    b = run_theta_batch(solved, p, 1, rng_seed, step_cap, table, first_run=run_index)
    return int(b.theta[0]), int(b.theta[0]) + 1


def theta_tail_fit(batch: ThetaBatch, q_lo: float = 0.5, q_hi: float = 0.999):
    """Exponential fit of ``P(theta >= m)`` over the ``[q_lo, q_hi]`` quantile window."""
    th = batch.theta[~batch.censored]
    lo, hi = np.quantile(th, [q_lo, q_hi])
    grid = np.arange(int(lo), int(hi) + 1)
    pts = survival_points(batch.theta, grid)
    return fit_exp_tail(pts, (float(lo), float(hi)))
