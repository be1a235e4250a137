"""Monte Carlo of the percolation exploration in the infinite half-plane map.

Only the black-boundary walk ``B`` matters: it starts at 1 and is killed at
``tau``, the first time it is negative. The simulator draws the nonzero steps
of ``B`` directly from the law of ``B*`` and the number of zero steps in
between from the matching geometric law, which gives the same joint law of
``(B*, raw step count)`` as stepping ``B`` one step at a time.

Negative steps beyond the tabulated range of ``nu`` (mass ``nu.lost_mass``)
are drawn from a power law with the fitted tail type ``a``; such jumps are at
least ``2 K_neg + 1`` and only matter once ``B`` exceeds ``2 K_neg``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DomainError, InsufficientTailSamples
from .rng import alias_draw, alias_table, next_double, stream_state
from .stats import fit_exp_tail, fit_power_tail, survival_points
from .walk_oracle import StepLaw, step_law
from .weights import SolvedWeights

DEFAULT_STEP_CAP = 10**6
MIN_TAIL_SAMPLES = 100


@dataclass(frozen=True)
class ExplorationRecord:
    """Outcome of one run. ``tau_star`` and ``T_star`` are counted in nonzero steps.

    ``tau_star`` is -1 when the run reached the cap alive; ``T_star`` is -1
    when ``B*`` never went to 0 or below before the run ended.
    """

    tau_star: int
    T_star: int
    hit_zero_exit: bool
    hcut_index: int | None
    survived_cap: bool
    steps_total: int
    nonzero_steps: int


@dataclass(frozen=True)
class ExplorationBatch:
    tau_star: np.ndarray
    T_star: np.ndarray
    hit_zero: np.ndarray
    steps_total: np.ndarray
    nonzero_steps: np.ndarray
    survived_cap: np.ndarray
    p: float
    seed: int
    step_cap: int

    @property
    def runs(self) -> int:
        return len(self.tau_star)

    @property
    def hcut_index(self) -> np.ndarray:
        """``k`` with ``T* = 2k+1`` for zero exits, -1 otherwise."""
        return np.where(self.hit_zero, (self.T_star - 1) // 2, -1)

    def record(self, i: int) -> ExplorationRecord:
        hz = bool(self.hit_zero[i])
        return ExplorationRecord(
            tau_star=int(self.tau_star[i]), T_star=int(self.T_star[i]), hit_zero_exit=hz,
            hcut_index=int((self.T_star[i] - 1) // 2) if hz else None,
            survived_cap=bool(self.survived_cap[i]), steps_total=int(self.steps_total[i]),
            nonzero_steps=int(self.nonzero_steps[i]))


@dataclass(frozen=True)
class _Sampler:
    prob: np.ndarray
    alias: np.ndarray
    jumps: np.ndarray
    tail_index: int
    k_neg: int
    tail_a: float
    log_p_zero: float


def _sampler(law: StepLaw, tail_a: float) -> _Sampler:
    star = law.star
    keep = np.nonzero(star.mass > 0)[0]
    jumps = (star.offset + keep).astype(np.int64)
    w = star.mass[keep]
    tail_index = -1
    if star.lost_mass > 0:
        tail_index = len(w)
        w = np.append(w, star.lost_mass)
        jumps = np.append(jumps, 0)
    prob, alias = alias_table(w)
    p0 = law.p_zero()
    log_p0 = math.log(p0) if p0 > 0 else -math.inf
    return _Sampler(prob, alias, jumps, tail_index, law.k_neg, float(tail_a), log_p0)


@njit(cache=True)
def _explore(prob, alias, jumps, tail_index, k_neg, tail_a, log_p0, seed, first_run, n_runs,
             step_cap, bstar_cap, stop_at_tstar, tau_star, t_star, hit_zero, steps_total,
             nonzero, survived):
    for r in range(n_runs):
        st = np.empty(1, dtype=np.uint64)
        st[0] = stream_state(np.uint64(seed), np.uint64(first_run + r))
        b = 1
        nz = 0
        steps = 0
        ts = -1
        hz = False
        tau = -1
        alive = True
        while True:
            # zero steps before the next nonzero one: geometric on {0, 1, ...}
            if log_p0 > -np.inf:
                u = next_double(st)
                g = math.floor(math.log1p(-u) / log_p0)
                if steps + g >= step_cap:
                    steps = step_cap
                    break
                steps += int(g)
            if steps >= step_cap:
                break
            i = alias_draw(prob, alias, st)
            if i == tail_index:
                u = next_double(st)
                k = int(k_neg * (1.0 - u) ** (-1.0 / (tail_a - 1.0)))
                d = -(2 * k + 1)
            else:
                d = jumps[i]
            steps += 1
            b += d
            nz += 1
            if ts < 0 and b <= 0:
                ts = nz
                hz = b == 0
                if stop_at_tstar:
                    alive = b >= 0
                    if b < 0:
                        tau = nz
                    break
            if b < 0:
                tau = nz
                alive = False
                break
            if bstar_cap > 0 and nz >= bstar_cap:
                break
        tau_star[r] = tau
        t_star[r] = ts
        hit_zero[r] = hz
        steps_total[r] = steps
        nonzero[r] = nz
        survived[r] = alive and tau < 0 and steps >= step_cap


def run_batch(law: StepLaw, seed: int, runs: int, step_cap: int = DEFAULT_STEP_CAP,
              first_run: int = 0, stop_at_tstar: bool = False, bstar_cap: int = 0,
              tail_a: float = 2.5) -> ExplorationBatch:
    """Simulate ``runs`` independent explorations; run ``i`` uses stream ``(seed, first_run + i)``.

    ``stop_at_tstar`` ends each run at ``T*``; ``bstar_cap`` ends it after that
    many nonzero steps. Both leave ``tau_star`` at -1 for runs stopped alive.
    """
    if step_cap < 1:
        raise DomainError("step_cap must be >= 1")
    s = _sampler(law, tail_a)
    tau = np.empty(runs, dtype=np.int64)
    ts = np.empty(runs, dtype=np.int64)
    hz = np.empty(runs, dtype=np.bool_)
    steps = np.empty(runs, dtype=np.int64)
    nz = np.empty(runs, dtype=np.int64)
    surv = np.empty(runs, dtype=np.bool_)
    _explore(s.prob, s.alias, s.jumps, s.tail_index, s.k_neg, s.tail_a, s.log_p_zero,
             np.uint64(seed), first_run, runs, step_cap, bstar_cap, stop_at_tstar,
             tau, ts, hz, steps, nz, surv)
    return ExplorationBatch(tau, ts, hz, steps, nz, surv, law.p, int(seed), int(step_cap))


def run_exploration(law: StepLaw, rng_seed: int, step_cap: int = DEFAULT_STEP_CAP,
                    run_index: int = 0) -> ExplorationRecord:
    """One exploration run from ``B_0 = 1``."""
    return run_batch(law, rng_seed, 1, step_cap, first_run=run_index).record(0)


def hcut_frequencies(batch: ExplorationBatch, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Empirical ``P(T* = 2k+1, B*_{T*} = 0)`` for ``k = 0 .. k_max`` and binomial standard errors."""
    idx = batch.hcut_index
    counts = np.bincount(idx[(idx >= 0) & (idx <= k_max)], minlength=k_max + 1)[: k_max + 1]
    f = counts / batch.runs
    return f, np.sqrt(f * (1 - f) / batch.runs)


def _tail_a(solved: SolvedWeights) -> float:
    a = solved.type_a
    return float(a) if isinstance(a, (int, float)) and a > 1.5 else 2.5


def threshold_scan(solved: SolvedWeights, p_grid, runs: int, step_cap: int = DEFAULT_STEP_CAP,
                   seed: int = 0) -> list[dict]:
    """Survival frequency at the cap and mean ``tau*`` of dying runs, per ``p``.

    Each row carries ``monotone_violation`` when its survival frequency falls
    more than 4 standard errors below that of a smaller ``p``.
    """
    rows = []
    for p in p_grid:
        if not 0.0 <= p < 1.0:
            raise DomainError("p grid must lie in [0, 1)")
        law = step_law(solved, p)
        b = run_batch(law, seed, runs, step_cap, tail_a=_tail_a(solved))
        f = float(b.survived_cap.mean())
        dying = b.tau_star[b.tau_star >= 0]
        rows.append({
            "p": float(p), "runs": runs, "survival": f,
            "stderr": math.sqrt(max(f * (1 - f), 1.0 / runs) / runs),
            "mean_tau_star_dying": float(dying.mean()) if len(dying) else math.nan,
            "drift": law.drift,
        })
    for i, row in enumerate(rows):
        row["monotone_violation"] = any(
            prev["p"] < row["p"] and prev["survival"] - row["survival"]
            > 4 * math.hypot(prev["stderr"], row["stderr"]) for prev in rows[:i])
    return rows


def _tau_star_with_censoring(batch: ExplorationBatch) -> np.ndarray:
    """``tau*`` with runs alive at the cap mapped to a large sentinel (they exceed every grid point
    below their nonzero step count)."""
    t = batch.tau_star.copy()
    alive = t < 0
    t[alive] = np.iinfo(np.int64).max
    return t


@dataclass(frozen=True)
class TailReport:
    points: list
    fit: object
    censored_fraction: float
    ambiguous_runs: int
    runs: int

    def to_json(self) -> dict:
        return {"points": self.points, "fit": self.fit.to_json(), "runs": self.runs,
                "censored_fraction": self.censored_fraction, "ambiguous_runs": self.ambiguous_runs}


def perimeter_tail(law: StepLaw, runs: int, m_grid, seed: int = 0,
                   step_cap: int = DEFAULT_STEP_CAP, kind: str = "power",
                   tail_a: float = 2.5) -> TailReport:
    """Empirical ``P(tau* >= 2m)`` on ``m_grid`` with a power (or exponential) fit.

    Runs are stopped once ``tau* >= 2 max(m_grid)`` is settled.
    """
    m_grid = sorted(int(m) for m in m_grid)
    b = run_batch(law, seed, runs, step_cap, tail_a=tail_a, bstar_cap=2 * m_grid[-1])
    alive = b.tau_star < 0
    top = 2 * m_grid[-1]
    # a run cut at the cap with fewer nonzero steps than a grid point is undecided there
    ambiguous = int(np.sum(alive & (b.nonzero_steps < top)))
    t = _tau_star_with_censoring(b)
    beyond = int(np.sum(t >= m_grid[-1] // 2))
    if beyond < MIN_TAIL_SAMPLES:
        raise InsufficientTailSamples(f"{beyond} samples beyond {m_grid[-1] // 2}")
    pts = [(float(m), f) for (_, f), m in zip(survival_points(t, [2 * m for m in m_grid]), m_grid)]
    fitter = fit_power_tail if kind == "power" else fit_exp_tail
    fit = fitter(pts, (m_grid[0], m_grid[-1]))
    return TailReport(pts, fit, float(alive.mean()), ambiguous, runs)


def conditional_hcut(law: StepLaw, k_grid, m_ladder, runs: int, seed: int = 0,
                     step_cap: int = DEFAULT_STEP_CAP, tail_a: float = 2.5) -> list[dict]:
    """``P(Hcut_k | tau* >= 2m)`` for every ``m`` of the ladder (``m = 0`` is unconditional)."""
    k_grid = sorted(int(k) for k in k_grid)
    b = run_batch(law, seed, runs, step_cap, tail_a=tail_a)
    t = _tau_star_with_censoring(b)
    idx = b.hcut_index
    base = None
    rows = []
    for m in m_ladder:
        sel = t >= 2 * m
        n = int(sel.sum())
        if n == 0:
            raise InsufficientTailSamples(f"no run with tau* >= {2 * m}")
        counts = np.array([np.sum(sel & (idx == k)) for k in k_grid], dtype=float)
        freq = counts / n
        if base is None:
            base = freq
        row = {"m": int(m), "n_conditioned": n, "k": k_grid, "freq": freq.tolist(),
               "stderr": np.sqrt(freq * (1 - freq) / n).tolist()}
        good = counts > 0
        if good.sum() >= 4:
            fit = fit_power_tail(list(zip(np.array(k_grid)[good], freq[good])),
                                 (k_grid[0], k_grid[-1]))
            row["k_slope"] = fit.slope
            row["k_slope_stderr"] = fit.stderr
        with np.errstate(divide="ignore", invalid="ignore"):
            row["ratio_to_unconditional"] = np.where(base > 0, freq / base, np.nan).tolist()
        rows.append(row)
    return rows
