"""Disk partition functions ``W^(k)``.

Three independent routes are provided:

* :func:`disk_table` evaluates the moment series obtained from the integral
  representation after the substitution ``y = u Z(u)``, where
  ``u = y (1 - f(y))``. All terms are nonnegative so there is no cancellation.
* :func:`w_disk_quadrature` integrates ``binom(2k,k) int_0^1 (u Z(u))^k du``
  with Gauss-Legendre panels and a root solve for ``Z(u)`` at every node.
* :func:`w_disk_enumerate` sums over rooted maps, either through the root-edge
  construction (each rooted map is produced once, counted by edges) or by
  explicit enumeration of permutation-encoded maps from :mod:`planarperc.maps`.

Values ``W^(k)`` overflow double precision for moderate ``k`` (``r^-k`` grows
geometrically), so tables store ``W^(k) r^k``.
"""
from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import BudgetExceeded, ConfigError, NonconvergentTail, RootFailure, TableExhausted
from .weights import (
    SolvedWeights,
    WeightSeq,
    _series,
    is_admissible,
    log_central,
)

SERIES_REL_ERR = 1e-13


@dataclass(frozen=True)
class DiskTable:
    """``W^(k)`` for ``0 <= k <= l_max`` stored as ``scaled[k] = W^(k) r^k``."""

    l_max: int
    r: float
    scaled: np.ndarray
    error: np.ndarray  # relative error bound per entry
    method: str = "series"

    def __post_init__(self):
        for name in ("scaled", "error"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def k(self) -> np.ndarray:
        return np.arange(self.l_max + 1)

    @property
    def log_values(self) -> np.ndarray:
        return np.log(self.scaled) - self.k * math.log(self.r)

    @property
    def values(self) -> np.ndarray:
        """``W^(k)``; entries beyond the double range are ``inf``."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)

    def w(self, k: int) -> float:
        return float(self.scaled[k] * self.r ** (-k))

    @property
    def pointed_scaled(self) -> np.ndarray:
        """``W^(k,pointed) r^k = binom(2k,k) 4^-k``."""
        return np.exp(log_central(self.k))

    def pointed(self, k: int) -> float:
        """``W^(k,pointed) = (4r)^-k binom(2k,k)``."""
        return math.comb(2 * k, k) * (4.0 * self.r) ** (-k)

    @property
    def quad_error(self) -> np.ndarray:
        return self.error * self.scaled

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write("k,W_scaled,log_W,rel_error\n")
            for k in range(self.l_max + 1):
                fh.write(f"{k},{self.scaled[k]:.17g},{self.log_values[k]:.17g},{self.error[k]:.3g}\n")


def disk_table(Z: float, mu: np.ndarray, l_max: int) -> DiskTable:
    """``W^(k) r^k = binom(2k,k) 4^-k Z/(k+1) [(1 - m) + sum_j j(j-1) mu(j)/(j+k)]``."""
    mu = np.asarray(mu, dtype=float)
    j = np.arange(len(mu), dtype=float)
    m = float(np.dot(j, mu))
    cj = j * (j - 1) * mu
    sel = cj > 0
    jj, cc = j[sel], cj[sel]
    k = np.arange(l_max + 1, dtype=float)
    acc = np.empty(l_max + 1)
    step = max(1, 2_000_000 // max(len(jj), 1))
    for s in range(0, l_max + 1, step):
        kk = k[s:s + step, None]
        acc[s:s + step] = (cc / (jj + kk)).sum(axis=1)
    bracket = max(1.0 - m, 0.0) + acc
    scaled = np.exp(log_central(k)) * Z / (k + 1.0) * bracket
    scaled[0] = 1.0  # Z mu(0) = Z (1 - f(Z)) = 1 exactly
    # the rounding of 1 - m is the only term that is not relative-accurate
    err = SERIES_REL_ERR + 8 * np.finfo(float).eps * (1.0 + m) / bracket
    err[0] = 0.0
    return DiskTable(l_max=l_max, r=1.0 / (4.0 * Z), scaled=scaled, error=err, method="series")


# ---------------------------------------------------------------- quadrature

_GL = {n: np.polynomial.legendre.leggauss(n) for n in (32, 64)}


def _inner_roots(q: WeightSeq, Z: float, u: np.ndarray, max_iter: int = 400) -> tuple[np.ndarray, np.ndarray]:
    """Smallest root ``x`` of ``f(u x) = 1 - 1/x`` in ``(1, Z]`` for each ``u``.

    ``g(x) = f(ux) - 1 + 1/x`` is convex with ``g(1) > 0 >= g(Z)``, so Newton
    started at ``x = 1`` increases monotonically to the root.
    """
    ks, _ = q.coefficients
    la = q.log_a
    x = np.ones_like(u)
    step = np.full_like(u, np.inf)
    active = np.ones(u.shape, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        xa, ua = x[active], u[active]
        g = _series(ks, la, ua * xa, 0) - 1.0 + 1.0 / xa
        gp = ua * _series(ks, la, ua * xa, 1) - 1.0 / (xa * xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            dx = -g / gp
        bad = ~np.isfinite(dx) | (gp >= 0)
        dx[bad] = 0.0
        dx = np.clip(dx, 0.0, None)
        xn = np.minimum(xa + dx, Z)
        st = xn - xa
        x[active] = xn
        step[active] = st
        idx = np.nonzero(active)[0]
        done = (st <= 4 * np.finfo(float).eps * xn) | (g <= 0)
        active[idx[done]] = False
    if active.any():
        raise RootFailure(f"inner root did not converge at {int(active.sum())} nodes")
    fx = _series(ks, la, u * x, 0)
    fpx = _series(ks, la, u * x, 1)
    resid = fx - 1.0 + 1.0 / x
    if np.any(resid > 1e-10):
        raise RootFailure("inner root residual too large")
    # conditioning: rounding of u = 1 - s^2 and of g itself, divided by |dg/dx|
    eps = np.finfo(float).eps
    slope = np.abs(u * fpx - 1.0 / (x * x))
    with np.errstate(divide="ignore"):
        cond = (x * fpx * eps + 8 * eps * (fx + 1.0 + 1.0 / x)) / slope
    cond = np.where(np.isfinite(cond), cond, Z)
    return x, np.minimum(np.maximum(step, 0.0) + cond, Z)


def _panel(q, Z, a, b, kvec, n):
    t, w = _GL[n]
    s = 0.5 * (b - a) * t + 0.5 * (b + a)
    u = 1.0 - s * s
    x, dx = _inner_roots(q, Z, u)
    h = np.clip(u * x / Z, 0.0, 1.0)
    jac = 0.5 * (b - a) * w * 2.0 * s
    with np.errstate(divide="ignore"):
        logh = np.log(h)
    hk = np.exp(np.outer(kvec, logh))
    val = hk @ jac
    dh = u * dx / Z
    with np.errstate(invalid="ignore", divide="ignore"):
        dint = np.where(h > 0, kvec[:, None] * hk / np.where(h > 0, h, 1.0), 0.0)
    root_err = np.abs(dint) @ (np.abs(jac) * dh)
    return val, root_err


def _quadrature_moments(q: WeightSeq, Z: float, kvec: np.ndarray, tol: float = 1e-12,
                        max_panels: int = 20) -> tuple[np.ndarray, np.ndarray, int]:
    """``int_0^1 (u Z(u)/Z)^k du`` for each ``k`` with ``u = 1 - s^2``."""
    kvec = np.asarray(kvec, dtype=float)
    kmax = max(float(kvec.max()), 1.0)
    depth = int(min(max(math.ceil(math.log2(kmax + 1)) + 2, 4), max_panels - 4))
    edges = [0.0] + [2.0 ** (-j) for j in range(depth, -1, -1)]
    panels = {}
    for a, b in zip(edges[:-1], edges[1:]):
        panels[(a, b)] = (_panel(q, Z, a, b, kvec, 64), _panel(q, Z, a, b, kvec, 32)[0])

    def totals():
        v = sum(p[0][0] for p in panels.values())
        e = sum(np.abs(p[0][0] - p[1]) for p in panels.values())
        re = sum(p[0][1] for p in panels.values())
        return v, e, re

    val, est, root_err = totals()
    while len(panels) < max_panels and np.max(est / val) > tol:
        worst = max(panels, key=lambda ab: np.max(np.abs(panels[ab][0][0] - panels[ab][1]) / val))
        a, b = worst
        del panels[worst]
        m = 0.5 * (a + b)
        for lo, hi in ((a, m), (m, b)):
            panels[(lo, hi)] = (_panel(q, Z, lo, hi, kvec, 64), _panel(q, Z, lo, hi, kvec, 32)[0])
        new, est, root_err = totals()
        change = np.abs(new - val) / new
        val = new
        if np.max(change) < tol and np.max(est / val) < 1e3 * tol:
            break
    return val, est + root_err, len(panels)


def w_disk_quadrature(solved: SolvedWeights, k: int, pointed: bool = False) -> tuple[float, float]:
    """``W^(k)`` by quadrature, with an absolute error bound."""
    if k < 0:
        raise ConfigError("k must be nonnegative")
    if pointed:
        return math.comb(2 * k, k) * (4.0 * solved.r) ** (-k), 0.0
    if k == 0:
        return 1.0, 0.0
    val, err, _ = _quadrature_moments(solved.weights, solved.Z, np.array([k]))
    factor = math.comb(2 * k, k) * solved.Z ** k
    return float(val[0] * factor), float(err[0] * factor)


def quadrature_table(q: WeightSeq, Z: float, l_max: int, max_panels: int = 20) -> DiskTable:
    kvec = np.arange(l_max + 1)
    val, err, _ = _quadrature_moments(q, Z, kvec, max_panels=max_panels)
    scaled = np.exp(log_central(kvec)) * val
    rel = err / val
    scaled[0], rel[0] = 1.0, 0.0
    return DiskTable(l_max=l_max, r=1.0 / (4.0 * Z), scaled=scaled, error=rel, method="quadrature")


# ---------------------------------------------------------------- Tutte identity

def tutte_terms(solved: SolvedWeights, table: DiskTable, l: int) -> tuple[float, float]:
    """``(sum_k p^(l)(k), sum_j p^(l)(j, l-1-j))`` from a table of ``W r^k``."""
    q = solved.weights
    ks, vals = q.coefficients
    if l < 1:
        raise ConfigError("l must be >= 1")
    if l + int(ks.max()) - 1 > table.l_max:
        raise TableExhausted(f"need W up to {l + int(ks.max()) - 1}, table stops at {table.l_max}")
    s = table.scaled
    r = table.r
    # q_k W^(l+k-1)/W^(l) = q_k r^-(k-1) s_{l+k-1}/s_l
    c_part = float(np.sum(np.exp(q.log_q - (ks - 1) * math.log(r)) * s[l + ks - 1]) / s[l])
    j = np.arange(l)
    g_part = float(r * np.sum(s[j] * s[l - 1 - j]) / s[l])
    return c_part, g_part


def check_tutte_identity(solved: SolvedWeights, table: DiskTable, l: int) -> float:
    """``|sum of one-step peeling probabilities at perimeter 2l - 1|``."""
    c_part, g_part = tutte_terms(solved, table, l)
    return abs(c_part + g_part - 1.0)


# ---------------------------------------------------------------- enumeration

@dataclass(frozen=True)
class EnumerationResult:
    value: float
    truncation_bound: float
    heuristic: bool
    terms: np.ndarray  # contribution of maps with exactly E edges
    e_max: int


ENUM_E_MAX = 4000


def disk_counts(q: WeightSeq, e_max: int) -> np.ndarray:
    """``T[l, E]``: weight of rooted maps with root face degree ``2l`` and ``E`` edges.

    The root-edge construction: removing the root edge of a map with boundary
    ``2l`` either reveals a new internal face of degree ``2k`` (boundary grows to
    ``2(l+k-1)``) or splits the map into two maps with boundaries ``2j`` and
    ``2(l-1-j)``. Both operations remove exactly one edge, so every rooted map
    is produced once, from strictly smaller maps.
    """
    if e_max > ENUM_E_MAX:
        raise BudgetExceeded(f"E_max={e_max} above {ENUM_E_MAX}")
    ks, vals = q.coefficients
    T = np.zeros((e_max + 2, e_max + 1))
    T[0, 0] = 1.0
    for E in range(1, e_max + 1):
        for l in range(1, E + 1):
            tot = 0.0
            for k, v in zip(ks.tolist(), vals.tolist()):
                if l + k - 1 <= E - 1:
                    tot += v * T[l + k - 1, E - 1]
            A = T[0:l, 0:E]
            B = T[l - 1::-1, E - 1::-1] if l - 1 >= 0 else None
            tot += float(np.sum(A * B))
            T[l, E] = tot
    return T[: e_max + 1]


def _edge_ratio(q: WeightSeq) -> float:
    """``1/t_c`` where ``t_c = sup{t : (q_k t^k) admissible}``: growth per edge."""
    ks, vals = q.coefficients

    def at(t):
        return WeightSeq(explicit=tuple(zip(ks.tolist(), (vals * t ** ks).tolist())), k_cap=q.k_cap)

    if not is_admissible(q):
        return math.inf
    lo, hi = 1.0, 2.0
    while is_admissible(at(hi)):
        lo, hi = hi, 2 * hi
        if hi > 1e12:
            return 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if is_admissible(at(mid)):
            lo = mid
        else:
            hi = mid
    return 1.0 / lo


def w_disk_enumerate(q: WeightSeq, k: int, e_max: int, method: str = "construction",
                     strict: bool = False) -> EnumerationResult:
    """Truncated ``W^(k)`` summed over rooted maps with at most ``e_max`` edges."""
    if k < 0:
        raise ConfigError("k must be nonnegative")
    if k == 0:
        return EnumerationResult(1.0, 0.0, False, np.array([1.0]), e_max)
    if method == "maps":
        from .maps import disk_weight_by_edges
        terms = disk_weight_by_edges(q, k, e_max)
    elif method == "construction":
        terms = disk_counts(q, e_max)[k]
    else:
        raise ConfigError(f"unknown enumeration method {method!r}")
    value = float(terms.sum())
    rho = _edge_ratio(q)
    nz = np.nonzero(terms)[0]
    heuristic = not (rho < 1.0 - 1e-9)
    if heuristic:
        if strict:
            raise NonconvergentTail("critical or inadmissible weights: no geometric bound")
        bound = math.inf
    elif len(nz) == 0:
        bound = 0.0
    else:
        last = int(nz[-1])
        period = int(np.gcd.reduce(np.diff(nz))) if len(nz) > 1 else 1
        rp = rho ** period
        bound = float(terms[last] * rp / (1.0 - rp))
    return EnumerationResult(value, bound, heuristic, terms, e_max)


# ---------------------------------------------------------------- cache

def cache_dir() -> Path | None:
    d = os.environ.get("PLANARPERC_CACHE")
    return Path(d) if d else None


def cache_key(q: WeightSeq, l_max: int, method: str) -> str:
    h = hashlib.sha256(f"{q.key()}|{l_max}|{method}".encode()).hexdigest()
    return h[:24]


def save_table(table: DiskTable, path) -> None:
    np.savez(path, l_max=table.l_max, r=table.r, scaled=table.scaled, error=table.error,
             method=np.array(table.method))


def load_table(path) -> DiskTable:
    with np.load(path) as z:
        return DiskTable(int(z["l_max"]), float(z["r"]), z["scaled"], z["error"], str(z["method"]))


@lru_cache(maxsize=32)
def _cached_solve(key: str, l_max: int, method: str) -> SolvedWeights:
    from .weights import parse_weights, solve_admissibility
    return solve_admissibility(parse_weights(key), l_max=l_max, method=method)


def solve_cached(q: WeightSeq, l_max: int = 4096, method: str = "series") -> SolvedWeights:
    """Solve with an in-process memo; tables also persist under ``PLANARPERC_CACHE``."""
    d = cache_dir()
    if d is None:
        return _cached_solve(q.key(), l_max, method)
    from .weights import solve_admissibility
    d.mkdir(parents=True, exist_ok=True)
    path = d / f"disk-{cache_key(q, l_max, method)}.npz"
    solved = _cached_solve(q.key(), l_max, method)
    if not path.exists():
        save_table(solved.table, path)
    return solved
