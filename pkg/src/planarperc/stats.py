"""Power-law and exponential tail fits with dyadic diagnostics."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats as sps

from .errors import WindowTooSmall

MIN_POINTS = 4
DRIFT_TOL = 0.02


@dataclass(frozen=True)
class FitReport:
    """Least-squares fit summary. ``slope`` is the power exponent or minus the rate."""

    slope: float
    stderr: float
    r2: float
    window: tuple[float, float]
    n_points: int
    dyadic_slopes: list = field(default_factory=list)
    slowly_varying: bool = False
    kind: str = "power"

    @property
    def rate(self) -> float:
        return -self.slope

    def to_json(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        if self.kind == "exp":
            d["rate"] = self.rate
        return d


def _select(points, window, log_x=False):
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (x, y) pairs")
    x, y = pts[:, 0], pts[:, 1]
    if window is None:
        hi = float(x.max()) if len(x) else 0.0
        window = (hi / 64.0, hi)
    lo, hi = window
    sel = (x >= lo) & (x <= hi) & (y > 0)
    if log_x:
        sel &= x > 0
    if sel.sum() < MIN_POINTS:
        raise WindowTooSmall(f"{int(sel.sum())} usable points in [{lo:g}, {hi:g}], need {MIN_POINTS}")
    order = np.argsort(x[sel])
    return x[sel][order], y[sel][order], (float(lo), float(hi))


def dyadic_slopes(x: np.ndarray, y: np.ndarray) -> list[float]:
    """Local slopes ``log2(y(2^(j+1)) / y(2^j))`` over the dyadic levels inside ``[x_min, x_max]``.

    ``y`` at a level is interpolated linearly in log-log coordinates.
    """
    lx, ly = np.log2(x), np.log2(y)
    levels = np.arange(math.ceil(lx[0]), math.floor(lx[-1]) + 1)
    if len(levels) < 2:
        return []
    vals = np.interp(levels, lx, ly)
    return np.diff(vals).tolist()


def _drifting(slopes: list[float]) -> bool:
    if len(slopes) < 3:
        return False
    s = np.asarray(slopes)
    if s.max() - s.min() <= DRIFT_TOL:
        return False
    rho = sps.spearmanr(np.arange(len(s)), s).statistic
    return bool(abs(rho) >= 0.8)


def fit_power_tail(points, window=None) -> FitReport:
    """Fit ``log y = slope * log x + c`` on the points with ``x`` in ``window``."""
    x, y, win = _select(points, window, log_x=True)
    res = sps.linregress(np.log(x), np.log(y))
    ds = dyadic_slopes(x, y)
    r2 = float(res.rvalue**2) if len(x) > 2 else 1.0
    return FitReport(float(res.slope), float(res.stderr), r2, win, len(x), ds, _drifting(ds), "power")


def fit_exp_tail(points, window=None) -> FitReport:
    """Fit ``log y = -rate * x + c``; the report's ``rate`` is the decay constant."""
    x, y, win = _select(points, window)
    res = sps.linregress(x, np.log(y))
    r2 = float(res.rvalue**2)
    return FitReport(float(res.slope), float(res.stderr), r2, win, len(x), [], False, "exp")


def survival_points(samples: np.ndarray, grid) -> list[tuple[float, float]]:
    """Empirical ``P(X >= g)`` on ``grid`` from integer samples."""
    s = np.sort(np.asarray(samples))
    n = len(s)
    out = []
    for g in grid:
        cnt = n - np.searchsorted(s, g, side="left")
        out.append((float(g), cnt / n))
    return out


def log_binned_pmf(values: np.ndarray, n_total: int, bins_per_octave: int = 4,
                   min_count: int = 50) -> list[tuple[float, float]]:
    """Pmf averaged over geometric bins: ``(geometric centre, mass per integer)``.

    Bins with fewer than ``min_count`` samples are dropped.
    """
    v = np.asarray(values)
    v = v[v > 0]
    if len(v) == 0:
        return []
    top = int(v.max())
    n_edges = int(bins_per_octave * (math.log2(top) + 1)) + 1
    edges = np.unique(np.floor(2.0 ** (np.arange(n_edges) / bins_per_octave)).astype(np.int64))
    edges = np.append(edges[edges <= top], top + 1)
    counts = np.histogram(v, bins=edges)[0]
    out = []
    for lo, hi, c in zip(edges[:-1], edges[1:], counts):
        if c >= min_count:
            out.append((math.sqrt(lo * (hi - 1)), c / n_total / (hi - lo)))
    return out
