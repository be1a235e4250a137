"""Weight-sequence calculus for bipartite Boltzmann maps.

A weight sequence assigns ``q_k >= 0`` to faces of degree ``2k``. This module
solves the admissibility equation, builds the offspring law ``mu`` and the
peeling step law ``nu``, classifies the sequence by its type ``a`` and tunes
one-parameter families to criticality.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from numbers import Real

import numpy as np
from scipy import optimize
from scipy.special import gammaln

from .errors import (
    BracketFailure,
    ConfigError,
    Degenerate,
    DomainError,
    Inconclusive,
    InvalidWeights,
    NotAdmissible,
    TailTruncationTooCoarse,
    TuningFailure,
)
from .pmf import Pmf

OVERFLOW_LOG = 700.0
X_MAX = 1e6
CLASSIFY_TOL = 1e-9
CRITICAL_TOL = 1e-6
NU_TAIL_MAX = 1e-4


@dataclass(frozen=True)
class Tail:
    """Analytic tail ``q_k = c * beta**k * k**(-a_shape)`` for ``k >= k_min``.

    ``beta=None`` asks :func:`tune_critical` to pick the scale at which the
    tuned sequence is critical with its tangency at ``x = 1/(4 beta)``.
    """

    c: float
    beta: float | None
    a_shape: float
    k_min: int = 1


@dataclass(frozen=True)
class WeightSeq:
    explicit: tuple[tuple[int, float], ...] = ()
    tail: Tail | None = None
    k_cap: int = 4096

    def __post_init__(self):
        pairs = tuple(sorted((int(k), float(v)) for k, v in self.explicit))
        ks = [k for k, _ in pairs]
        if len(set(ks)) != len(ks):
            raise InvalidWeights("explicit indices must be distinct")
        if any(k < 1 for k in ks):
            raise InvalidWeights("half-degrees must be positive integers")
        if any(not (v >= 0.0) or not math.isfinite(v) for _, v in pairs):
            raise InvalidWeights("weights must be finite and nonnegative")
        if ks and self.k_cap < max(ks):
            raise InvalidWeights("k_cap below the largest explicit index")
        if self.tail is not None:
            t = self.tail
            if not t.a_shape > 1.5:
                raise InvalidWeights("tail exponent must exceed 3/2")
            if t.c < 0 or (t.beta is not None and t.beta <= 0) or t.k_min < 1:
                raise InvalidWeights("tail needs c >= 0, beta > 0, k_min >= 1")
        object.__setattr__(self, "explicit", pairs)

    @cached_property
    def _log_coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        # kept in log form: beta^k underflows long before k_cap for small beta
        logs = {k: math.log(v) for k, v in self.explicit if v > 0}
        t = self.tail
        if t is not None and t.c > 0 and t.k_min <= self.k_cap:
            if t.beta is None:
                raise ConfigError("tail scale beta unresolved; run tune_critical first")
            kt = np.arange(t.k_min, self.k_cap + 1, dtype=np.int64)
            lt = math.log(t.c) + kt * math.log(t.beta) - t.a_shape * np.log(kt)
            for k, v in zip(kt.tolist(), lt.tolist()):
                logs[k] = float(np.logaddexp(logs[k], v)) if k in logs else v
        ks = np.array(sorted(logs), dtype=np.int64)
        lq = np.array([logs[k] for k in ks.tolist()], dtype=float)
        return ks, lq

    @property
    def coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """Indices ``k`` with ``q_k > 0`` and the values ``q_k`` (which may underflow to 0)."""
        ks, lq = self._log_coefficients
        return ks, np.exp(lq)

    @property
    def log_q(self) -> np.ndarray:
        return self._log_coefficients[1]

    @cached_property
    def log_a(self) -> np.ndarray:
        """``log(binom(2k-1, k-1) q_k)`` on the support."""
        ks, lq = self._log_coefficients
        return log_binom_odd(ks) + lq

    def q(self, k: int) -> float:
        ks, vals = self.coefficients
        i = np.searchsorted(ks, k)
        if i < len(ks) and ks[i] == k:
            return float(vals[i])
        return 0.0

    def scaled(self, factor: float) -> WeightSeq:
        """Multiply the free scale: the tail constant if a tail exists, else every weight."""
        if self.tail is not None:
            return replace(self, tail=replace(self.tail, c=self.tail.c * factor))
        return replace(self, explicit=tuple((k, v * factor) for k, v in self.explicit))

    def to_json(self) -> dict:
        tail = None
        if self.tail is not None:
            t = self.tail
            tail = {"c": t.c, "beta": t.beta, "a": t.a_shape, "k_min": t.k_min}
        return {"explicit": [[k, v] for k, v in self.explicit], "tail": tail, "k_cap": self.k_cap}

    def key(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def log_binom_odd(k) -> np.ndarray:
    """``log binom(2k-1, k-1)``."""
    k = np.asarray(k, dtype=float)
    return gammaln(2 * k) - gammaln(k) - gammaln(k + 1)


_CENTRAL_CACHE = [np.zeros(1)]


def log_central(k) -> np.ndarray:
    """``log(binom(2k, k) 4**-k)`` as the cumulative sum of ``log1p(-1/(2i))``.

    The gammaln difference loses about ``k * eps`` relative accuracy; the
    cumulative sum stays near ``sqrt(k) * eps``.
    """
    k = np.asarray(k)
    kmax = int(k.max()) if k.size else 0
    if kmax > 10_000_000:
        kf = k.astype(float)
        return gammaln(2 * kf + 1) - 2 * gammaln(kf + 1) - kf * math.log(4.0)
    table = _CENTRAL_CACHE[0]
    if len(table) <= kmax:
        i = np.arange(1, 2 * kmax + 2, dtype=float)
        table = np.concatenate([[0.0], np.cumsum(np.log1p(-0.5 / i))])
        _CENTRAL_CACHE[0] = table
    return table[k.astype(np.int64)]


def _series(ks: np.ndarray, log_a: np.ndarray, x, deriv: int = 0):
    """``d^deriv/dx^deriv sum_k a_k x^(k-1)`` for scalar or array ``x``, saturating to inf."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x_arr.shape)
    power = (ks - 1 - deriv).astype(float)
    mult = np.ones(len(ks))
    for j in range(deriv):
        mult = mult * (ks - 1 - j)
    ok = mult > 0
    ks_, la, pw, mu = ks[ok], log_a[ok], power[ok], np.log(mult[ok])
    for i, xv in enumerate(x_arr.ravel()):
        if xv < 0:
            raise DomainError("x must be nonnegative")
        if xv == 0.0:
            sel = pw == 0
            out.flat[i] = float(np.exp(la[sel] + mu[sel]).sum())
            continue
        lt = la + mu + pw * math.log(xv)
        if lt.size and lt.max() > OVERFLOW_LOG:
            out.flat[i] = math.inf
        else:
            out.flat[i] = float(np.exp(lt).sum())
    if np.ndim(x) == 0:
        return float(out.flat[0])
    return out


def eval_f(q: WeightSeq, x):
    """``f_q(x) = sum_k binom(2k-1, k-1) q_k x^(k-1)`` truncated at ``k_cap``."""
    ks, _ = q.coefficients
    return _series(ks, q.log_a, x, 0)


def eval_fprime(q: WeightSeq, x):
    ks, _ = q.coefficients
    return _series(ks, q.log_a, x, 1)


# ---------------------------------------------------------------- admissibility

def _bisect(fun, lo: float, hi: float, increasing: bool = True, log: bool = False) -> float:
    """Sign-change bisection to machine precision; ``fun`` monotone on [lo, hi]."""
    a, b = (math.log(lo), math.log(hi)) if log else (lo, hi)
    for _ in range(200):
        m = 0.5 * (a + b)
        if m == a or m == b:
            break
        v = fun(math.exp(m) if log else m)
        if (v > 0) == increasing:
            b = m
        else:
            a = m
    return math.exp(a) if log else a


@dataclass(frozen=True)
class _Core:
    Z: float
    tangent: bool
    g_min: float


def _minimiser(ks, la) -> float:
    """Minimiser of the convex ``g(x) = f(x) - 1 + 1/x`` on ``[1, x_max]``."""

    def gp(x):
        return _series(ks, la, x, 1) - 1.0 / (x * x)

    if gp(1.0) >= 0:
        return 1.0
    if gp(X_MAX) < 0:
        return X_MAX
    return _bisect(gp, 1.0, X_MAX, increasing=True, log=True)


def _g_min(q: WeightSeq) -> float:
    """``min g`` over ``[1, x_max]``; admissibility is ``_g_min <= 0`` up to rounding."""
    ks, _ = q.coefficients
    la = q.log_a
    x = _minimiser(ks, la)
    return _series(ks, la, x, 0) - 1.0 + 1.0 / x


def _solve_core(q: WeightSeq) -> _Core:
    ks, vals = q.coefficients
    if len(ks) == 0:
        raise Degenerate("all weights vanish")
    if ks.max() == 1:
        raise Degenerate("weights supported on 2-gons only")
    la = q.log_a

    def g(x):
        return _series(ks, la, x, 0) - 1.0 + 1.0 / x

    if _series(ks, la, 1.0, 1) >= 1.0:
        raise NotAdmissible("f'(1) >= 1: g increases on (1, x_max]")
    x_m = _minimiser(ks, la)
    g_min = g(x_m)
    scale = 1.0 + abs(_series(ks, la, x_m, 0)) + 1.0 / x_m
    tol = 64 * np.finfo(float).eps * scale
    if not math.isfinite(g_min) or g_min > tol:
        raise NotAdmissible(f"f(x) - 1 + 1/x > 0 on (1, {X_MAX:g}] (min {g_min:.3e})")
    if g_min >= -tol:
        return _Core(Z=x_m, tangent=True, g_min=g_min)
    Z = _bisect(g, 1.0, x_m, increasing=False)
    return _Core(Z=Z, tangent=False, g_min=g_min)


def is_admissible(q: WeightSeq) -> bool:
    try:
        _solve_core(q)
    except (NotAdmissible, Degenerate):
        return False
    return True


def mu_law(q: WeightSeq, Z: float) -> Pmf:
    ks, _ = q.coefficients
    mass = np.zeros(int(ks.max()) + 1)
    mass[ks] = np.exp(q.log_a + (ks - 1) * math.log(Z))
    mass[0] = 1.0 - mass[1:].sum()
    if mass[0] < -1e-12:
        raise NotAdmissible("mu(0) < 0")
    mass[0] = max(mass[0], 0.0)
    return Pmf(0, mass)


# ---------------------------------------------------------------- classification

@dataclass(frozen=True)
class Classification:
    kind: str  # "subcritical" or "discrete-stable"
    a: float
    alpha: float | None
    evidence: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        if self.kind == "subcritical":
            return "Subcritical(a=3/2)"
        return f"DiscreteStable(alpha={self.alpha:.4g})"


@dataclass(frozen=True)
class SolvedWeights:
    weights: WeightSeq
    Z: float
    r: float
    mu: Pmf
    nu: Pmf
    m_mu: float
    table: object  # partition.DiskTable
    lam: float
    p_c: float
    classification: Classification | None
    lambda_direct: float
    tangent: bool

    @property
    def type_a(self):
        c = self.classification
        if c is None:
            return "generic"
        return c.a

    @property
    def alpha(self):
        c = self.classification
        return None if c is None else c.alpha

    @property
    def critical(self) -> bool:
        return self.m_mu >= 1.0 - CLASSIFY_TOL

    def summary(self) -> dict:
        c = self.classification
        return {
            "Z": self.Z,
            "r": self.r,
            "m_mu": self.m_mu,
            "mu0": self.mu(0),
            "lambda": self.lam,
            "p_c": self.p_c,
            "type_a": self.type_a,
            "alpha": self.alpha,
            "class": None if c is None else c.label,
            "nu_tail_mass": self.nu.lost_mass,
            "L_max": self.table.l_max,
        }


def _nu_positive(q: WeightSeq, r: float) -> np.ndarray:
    """``nu(k) = q_{k+1} r^-k`` for ``k = 0 .. max support - 1``."""
    ks, _ = q.coefficients
    out = np.zeros(int(ks.max()))
    out[ks - 1] = np.exp(q.log_q - (ks - 1) * math.log(r))
    return out


def nu_law(solved: SolvedWeights) -> Pmf:
    """The peeling step law ``nu`` as a Pmf on ``[-K_neg, K_pos]``.

    The mass of ``nu`` below ``-K_neg`` is carried as ``lost_mass``.
    """
    eps = solved.nu.lost_mass
    if eps > NU_TAIL_MAX:
        raise TailTruncationTooCoarse(f"nu tail beyond {solved.nu.offset} carries {eps:.2e}")
    return solved.nu


def _build_nu(q: WeightSeq, r: float, table, k_neg: int) -> Pmf:
    pos = _nu_positive(q, r)
    if k_neg > table.l_max + 1:
        raise ConfigError("negative tail cap exceeds the disk table")
    neg = 2.0 * r * table.scaled[:k_neg]  # nu(-k-1), k = 0..k_neg-1
    n_total = 1.0 - pos.sum()
    eps = n_total - neg.sum()
    mass = np.concatenate([neg[::-1], pos])
    return Pmf(-k_neg, mass, lost_mass=max(eps, 0.0))


def _lambda_direct(nu: Pmf) -> float:
    """Truncated sum of ``(2k+1) nu(-k-1)`` plus a power-law remainder estimate."""
    k_neg = -nu.offset
    neg = nu.mass[:k_neg][::-1]
    k = np.arange(k_neg)
    partial = float(np.dot(2 * k + 1, neg))
    if k_neg < 64:
        return partial
    lo, hi = k_neg // 4, k_neg - 1
    if neg[lo] <= 0 or neg[hi] <= 0:
        return partial
    s = math.log(neg[hi] / neg[lo]) / math.log(hi / lo)
    if s >= -2.0:
        return math.inf
    # sum_{k>=K} 2k * C k^s  ~  2C K^(s+2) / -(s+2)
    c = neg[hi] / hi**s
    return partial + 2 * c * k_neg ** (s + 2) / (-(s + 2))


def classify(solved: SolvedWeights, window: tuple[int, int] | None = None) -> Classification:
    """Subcritical when ``m_mu < 1 - 1e-9``, else the type from the tail of ``nu``."""
    m = solved.m_mu
    if m < 1.0 - CLASSIFY_TOL:
        return Classification("subcritical", 1.5, None, {"m_mu": m})
    k_cap = solved.weights.k_cap
    if window is None:
        # the numeric model cuts q at k_cap, so the last dyadic levels are biased
        window = (max(k_cap // 256, 1), max(k_cap // 16, 1))
    lo, hi = window
    nu_pos = solved.nu.mass[-solved.nu.offset:]
    support_hi = int(np.nonzero(nu_pos)[0].max()) if np.any(nu_pos > 0) else 0
    mu = solved.mu.mass
    j = np.arange(len(mu))
    evidence = {"m_mu": m, "window": [lo, hi], "nu_support_max": support_hi}
    if support_hi < lo:
        evidence["reason"] = "bounded support below the fit window: finite variance"
        evidence["mu_variance"] = float(np.dot(j * j, mu) - 1.0)
        return Classification("discrete-stable", 2.5, 2.0, evidence)
    levels = [2**i for i in range(int(math.ceil(math.log2(lo))), int(math.log2(hi)) + 1)]
    levels = [x for x in levels if lo <= x <= hi and x <= support_hi]
    if len(levels) < 3:
        raise Inconclusive("tail window shorter than 3 dyadic levels")
    tail = np.cumsum(nu_pos[::-1])[::-1]
    y = np.array([tail[x] for x in levels])
    slope = float(np.polyfit(np.log(levels), np.log(y), 1)[0])
    dyadic = np.diff(np.log2(y)).tolist()
    cum_var = np.cumsum(j * j * mu)
    v_levels = [x for x in levels if x < len(mu)]
    v_slope = None
    if len(v_levels) >= 2:
        v_slope = float(np.polyfit(np.log(v_levels), np.log(cum_var[v_levels]), 1)[0])
    a = 1.0 - slope
    evidence.update(nu_tail_slope=slope, dyadic_slopes=dyadic, truncated_variance_slope=v_slope)
    a = min(a, 2.5)
    alpha = a - 0.5
    if not 1.0 < alpha <= 2.0:
        raise Inconclusive(f"fitted alpha={alpha:.3f} outside (1, 2]")
    return Classification("discrete-stable", a, alpha, evidence)


def solve_admissibility(q: WeightSeq, l_max: int | None = None, k_neg: int | None = None,
                        method: str = "series") -> SolvedWeights:
    """Solve ``f_q(x) = 1 - 1/x`` and assemble ``mu``, ``nu``, ``lambda`` and ``p_c``."""
    from . import partition

    core = _solve_core(q)
    Z = core.Z
    r = 1.0 / (4.0 * Z)
    mu = mu_law(q, Z)
    m_mu = float(np.dot(mu.support, mu.mass))
    if l_max is None:
        l_max = 4096
    if k_neg is None:
        k_neg = l_max
    if method == "series":
        table = partition.disk_table(Z, mu.mass, l_max)
    elif method == "quadrature":
        table = partition.quadrature_table(q, Z, l_max)
    else:
        raise ConfigError(f"unknown disk table method {method!r}")
    nu = _build_nu(q, r, table, k_neg)
    lam_direct = _lambda_direct(nu)
    provisional = SolvedWeights(q, Z, r, mu, nu, m_mu, table, math.nan, math.nan, None,
                                lam_direct, core.tangent)
    cls = None
    try:
        cls = classify(provisional)
    except Inconclusive:
        cls = None
    if m_mu < 1.0 - CLASSIFY_TOL:
        lam = math.inf
    else:
        # at criticality nu is centred, so the negative moment follows from the positive part
        pos = nu.mass[-nu.offset:]
        kp = np.arange(len(pos))
        lam = 2.0 * float(np.dot(kp, pos)) - (1.0 - float(pos.sum()))
    p_c = 1.0 if math.isinf(lam) else lam / (lam + 2.0)
    return replace(provisional, lam=lam, p_c=p_c, classification=cls)


# ---------------------------------------------------------------- tuning

def _tail_sums(tail: Tail, k_cap: int) -> tuple[float, float]:
    k = np.arange(tail.k_min, k_cap + 1, dtype=float)
    b = np.exp(log_binom_odd(k) - k * math.log(4.0) - tail.a_shape * np.log(k))
    return float(b.sum()), float(((k - 1) * b).sum())


def critical_scale(shape: WeightSeq) -> tuple[float, float]:
    """Tail scale ``(beta, c)`` putting the critical tangency at ``x = 1/(4 beta)``.

    There ``mu(k)`` is an exact power law ``~ k^(-a-1/2)`` on the tail support.
    """
    t = shape.tail
    if t is None:
        raise ConfigError("critical_beta needs a tail descriptor")
    s0, s1 = _tail_sums(t, shape.k_cap)
    fixed = replace(shape, tail=None)
    if not fixed.explicit or all(v == 0 for _, v in fixed.explicit):
        return s1 / (4.0 * (s0 + s1)), 1.0 / s1
    ks, _ = fixed.coefficients

    def c_of(beta):
        fpe = _series(ks, fixed.log_a, 1.0 / (4.0 * beta), 1)
        return (16 * beta**2 - fpe) / (16 * beta**2 * s1)

    def excess(beta):
        fe = _series(ks, fixed.log_a, 1.0 / (4.0 * beta), 0)
        return fe + c_of(beta) * 4 * beta * s0 - 1.0 + 4 * beta

    try:
        beta = optimize.brentq(excess, 1e-9, 0.25 - 1e-12, xtol=1e-15, rtol=1e-15)
    except ValueError as exc:
        raise BracketFailure("no conditioning scale beta makes the shape critical") from exc
    c = c_of(beta)
    if not c > 0:
        raise BracketFailure("explicit weights alone are already supercritical")
    return beta, c


def _explicit_critical_c(shape: WeightSeq) -> float:
    """Free factor ``c*`` for a shape without tail: tangency of ``c F(x)`` with ``1 - 1/x``.

    ``g(Z) = g'(Z) = 0`` gives ``F(Z) = (Z^2 - Z) F'(Z)`` and ``c = 1 / (Z^2 F'(Z))``;
    ``F - (x^2 - x) F'`` is strictly decreasing on ``x > 1``, so the root is unique.
    """
    ks, _ = shape.coefficients
    la = shape.log_a

    def h(x):
        return _series(ks, la, x, 0) - (x * x - x) * _series(ks, la, x, 1)

    hi = 2.0
    while h(hi) > 0:
        hi *= 2.0
        if hi > X_MAX:
            raise BracketFailure("no tangency point below x_max")
    Z = optimize.brentq(h, 1.0, hi, xtol=1e-15, rtol=1e-15)
    return 1.0 / (Z * Z * _series(ks, la, Z, 1))


def critical_beta(shape: WeightSeq) -> float:
    return critical_scale(shape)[0]


def tune_critical(shape: WeightSeq, target_a: float | None = None, c_max: float | None = None,
                  rtol: float = 1e-10) -> WeightSeq:
    """Scale the free constant of ``shape`` to ``c* = sup{c : admissible}``.

    The free constant is the tail's ``c`` when a tail is present, otherwise a
    common factor on all explicit weights. ``target_a = 3/2`` returns the
    subcritical sequence at ``0.9 c*``.
    """
    t = shape.tail
    if t is not None:
        if target_a is not None and target_a != 1.5 and abs(t.a_shape - target_a) > 1e-12:
            raise ConfigError("tail exponent must equal the target type")
        c_exact = None
        if t.beta is None:
            beta, c_exact = critical_scale(shape)
            shape = replace(shape, tail=replace(t, beta=beta))
        base = shape.tail.c if shape.tail.c > 0 else 1.0
        shape = replace(shape, tail=replace(shape.tail, c=1.0))
    else:
        base = 1.0
        ks, _ = shape.coefficients
        c_exact = _explicit_critical_c(shape) if len(ks) and ks.max() > 1 else None

    def adm(c):
        return is_admissible(shape.scaled(c))

    lo = None
    c = base
    for _ in range(80):
        if adm(c):
            lo = c
            break
        c *= 0.5
    if lo is None:
        raise BracketFailure("no admissible c found below the initial upper bracket")
    hi = lo
    for _ in range(200):
        hi = 2.0 * hi
        if c_max is not None and hi > c_max:
            if adm(c_max):
                raise BracketFailure(f"admissible region extends beyond c_max={c_max:g}")
            hi = c_max
            break
        if not adm(hi):
            break
        lo = hi
    else:
        raise BracketFailure("admissible region unbounded in c")
    while hi - lo > rtol * lo:
        mid = 0.5 * (lo + hi)
        if adm(mid):
            lo = mid
        else:
            hi = mid
    # min g is smooth in c with slope f_tail(x_m) > 0, so its root pins c* to rounding level
    if _g_min(shape.scaled(lo)) < 0 < _g_min(shape.scaled(hi)):
        c_root = optimize.brentq(lambda c: _g_min(shape.scaled(c)), lo, hi, xtol=1e-300,
                                 rtol=4 * np.finfo(float).eps)
        while not adm(c_root) and c_root > lo:
            c_root = np.nextafter(c_root, 0.0)
        lo = max(lo, float(c_root))
    if c_exact is not None:
        # bisection only brackets c*: m_mu - 1 ~ (c* - c)^(1/2) at a generic tangency, flatter
        # ((c* - c)^(1 - 1/alpha)) for tails, so 1e-10 in c is far from 1e-6 in m_mu
        if abs(lo - c_exact) > 1e-6 * c_exact:
            raise TuningFailure(f"bisection c={lo!r} disagrees with the tangency value {c_exact!r}")
        lo = c_exact
    tuned = shape.scaled(lo)
    mu = mu_law(tuned, _solve_core(tuned).Z)
    m = mu.mean()
    if not (1.0 - CRITICAL_TOL <= m <= 1.0 + 1e-9):
        raise TuningFailure(f"tuned mean m_mu={m!r} not within {CRITICAL_TOL} of 1")
    if target_a is not None and target_a == 1.5:
        return shape.scaled(0.9 * lo)
    return tuned


# ---------------------------------------------------------------- duality arithmetic

def _check_alpha(alpha):
    # the boundary 3/2 is allowed: it is the fixed point of the map
    if not (Fraction(3, 2) <= alpha <= 2):
        raise DomainError("alpha must lie in [3/2, 2]")


def duality_map(alpha):
    """``alpha' = (2 alpha + 3) / (4 alpha - 2)``; exact for Fraction input."""
    if not isinstance(alpha, Fraction):
        if not isinstance(alpha, Real):
            raise DomainError("alpha must be real")
    _check_alpha(alpha)
    return (2 * alpha + 3) / (4 * alpha - 2)


def dual_type(a):
    """``a' = a / (a - 1)`` for the type ``a = alpha + 1/2``."""
    return a / (a - 1)


def volume_exponent(alpha):
    """``(2 alpha + 1) / alpha``, the unpointed volume exponent."""
    return (2 * alpha + 1) / alpha


def dual_volume_exponent(alpha):
    """``(8 alpha + 4) / (2 alpha + 3)``, which equals ``volume_exponent(duality_map(alpha))``."""
    _check_alpha(alpha)
    return (8 * alpha + 4) / (2 * alpha + 3)


# ---------------------------------------------------------------- presets and parsing

def quad(g: float, k_cap: int = 4096) -> WeightSeq:
    return WeightSeq(explicit=((2, g),), k_cap=k_cap)


TUNED_K_CAP = 65536


def tuned_family(a: float, k_cap: int = TUNED_K_CAP, k_min: int = 1) -> WeightSeq:
    """``q_k = c beta^k k^-a`` tuned to criticality, ``beta`` solved for."""
    shape = WeightSeq(tail=Tail(c=1.0, beta=None, a_shape=a, k_min=k_min), k_cap=k_cap)
    return tune_critical(shape, a)


PRESET_NAMES = ("crit-quad", "subcrit-quad:<g>", "quad:<g>", "mixed", "tuned:<a>")


def preset(name: str) -> WeightSeq:
    name = name.strip()
    if name == "crit-quad":
        return quad(1.0 / 12.0)
    for prefix in ("subcrit-quad", "quad"):
        if name.startswith(prefix):
            arg = name[len(prefix):].strip("():")
            g = 1.0 / 16.0 if not arg else _parse_number(arg)
            return quad(g)
    if name == "mixed":
        return WeightSeq(explicit=((1, 0.05), (2, 0.04)))
    if name.startswith("tuned"):
        arg = name[len("tuned"):].strip("():-")
        return tuned_family(_parse_number(arg) if arg else 2.2)
    raise ConfigError(f"unknown preset {name!r}; known: {', '.join(PRESET_NAMES)}")


def _parse_number(s: str) -> float:
    try:
        return float(Fraction(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad number {s!r}") from exc


def parse_weights(doc) -> WeightSeq:
    """Build a WeightSeq from the JSON document form (dict or string)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid weight JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("weight JSON must be an object")
    try:
        explicit = tuple((int(k), float(v)) for k, v in doc.get("explicit", []))
        tail = None
        if doc.get("tail"):
            t = doc["tail"]
            tail = Tail(c=float(t.get("c", 1.0)),
                        beta=None if t.get("beta") is None else float(t["beta"]),
                        a_shape=float(t["a"]), k_min=int(t.get("k_min", 1)))
        return WeightSeq(explicit=explicit, tail=tail, k_cap=int(doc.get("k_cap", 4096)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed weight JSON: {exc}") from exc
