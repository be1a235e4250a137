"""Galton-Watson trees with offspring law ``mu_q`` and their leaf counts.

Pointed Boltzmann maps correspond to these trees with vertices mapped to
leaves, so the leaf-count law of a critical tree carries the volume exponent
of the map. The tree is never stored: a run keeps the number of pending
nodes (the Lukasiewicz walk) and counts leaves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DomainError, InsufficientTailSamples
from .pmf import Pmf
from .rng import alias_draw, alias_table, stream_state
from .stats import fit_power_tail, log_binned_pmf

DEFAULT_NODE_CAP = 10**7
CENSORED = -1


@njit(cache=True)
def _leaf_runs(prob, alias, values, seed, first_run, n_runs, node_cap, leaves, nodes, check_every,
               bad):
    for r in range(n_runs):
        st = np.empty(1, dtype=np.uint64)
        st[0] = stream_state(np.uint64(seed), np.uint64(first_run + r))
        pending = 1
        n = 0
        lv = 0
        children = 0
        while pending > 0 and n < node_cap:
            c = values[alias_draw(prob, alias, st)]
            n += 1
            children += c
            if c == 0:
                lv += 1
            pending += c - 1
        if pending > 0:
            leaves[r] = -1
        else:
            leaves[r] = lv
            # every node but the root is somebody's child
            if check_every > 0 and r % check_every == 0 and children != n - 1:
                bad[0] += 1
        nodes[r] = n


@dataclass(frozen=True)
class LeafBatch:
    leaves: np.ndarray   # -1 for censored trees
    nodes: np.ndarray
    node_cap: int

    @property
    def censored(self) -> np.ndarray:
        return self.leaves < 0

    @property
    def censored_fraction(self) -> float:
        return float(self.censored.mean())


def _offspring(mu: Pmf):
    m = np.asarray(mu.mass)
    keep = np.nonzero(m > 0)[0]
    if mu.offset < 0:
        raise DomainError("offspring law must live on nonnegative integers")
    mean = float(np.dot(mu.offset + keep, m[keep]) / m[keep].sum())
    if mean > 1.0 + 1e-9:
        raise DomainError(f"supercritical offspring law (mean {mean:.6g})")
    prob, alias = alias_table(m[keep])
    return prob, alias, (mu.offset + keep).astype(np.int64)


def sample_leaves(mu: Pmf, runs: int, seed: int = 0, node_cap: int = DEFAULT_NODE_CAP,
                  first_run: int = 0, check_rate: float = 0.01) -> LeafBatch:
    """Leaf counts of ``runs`` independent trees; tree ``i`` uses stream ``(seed, first_run + i)``."""
    prob, alias, values = _offspring(mu)
    leaves = np.empty(runs, dtype=np.int64)
    nodes = np.empty(runs, dtype=np.int64)
    bad = np.zeros(1, dtype=np.int64)
    every = int(round(1 / check_rate)) if check_rate > 0 else 0
    _leaf_runs(prob, alias, values, np.uint64(seed), first_run, runs, node_cap, leaves, nodes,
               every, bad)
    if bad[0]:
        raise AssertionError("tree identity violated")
    return LeafBatch(leaves, nodes, node_cap)


def sample_leaf_count(mu: Pmf, rng_seed: int, node_cap: int = DEFAULT_NODE_CAP,
                      run_index: int = 0) -> int:
    """Leaf count of one tree, or ``CENSORED`` (-1) when it exceeds ``node_cap`` nodes."""
    return int(sample_leaves(mu, 1, rng_seed, node_cap, first_run=run_index).leaves[0])


@dataclass(frozen=True)
class VolumeReport:
    points: list
    pointed: object
    unpointed: object
    censored_fraction: float
    runs: int

    def to_json(self) -> dict:
        return {"points": self.points, "pointed": self.pointed.to_json(),
                "unpointed": self.unpointed.to_json(), "censored_fraction": self.censored_fraction,
                "runs": self.runs}


def volume_tail(mu: Pmf, runs: int, n_grid=None, seed: int = 0,
                node_cap: int = DEFAULT_NODE_CAP, batch: LeafBatch | None = None) -> VolumeReport:
    """Pointed leaf-count pmf slope, and the unpointed slope from the ``1/n`` reweighting.

    The pmf is averaged over geometric bins holding at least 50 samples; the
    fit uses the bins with centres between ``min(n_grid)`` and ``max(n_grid)``.
    """
    if batch is None:
        batch = sample_leaves(mu, runs, seed, node_cap)
    ok = batch.leaves[~batch.censored]
    pts = log_binned_pmf(ok, batch.leaves.size)
    if len(pts) < 4:
        raise InsufficientTailSamples("fewer than 4 populated bins")
    x = np.array([p[0] for p in pts])
    if n_grid is None:
        n_grid = (max(x.max() / 256.0, 8.0), x.max())
    win = (min(n_grid), max(n_grid))
    pointed = fit_power_tail(pts, win)
    rew = [(n, y / n) for n, y in pts]
    unpointed = fit_power_tail(rew, win)
    return VolumeReport(pts, pointed, unpointed, batch.censored_fraction, int(batch.leaves.size))


def pointed_exponent(alpha: float) -> float:
    """``-(1/alpha + 1)``."""
    return -(1.0 / alpha + 1.0)


def unpointed_exponent(alpha: float) -> float:
    """``-(2 alpha + 1) / alpha``."""
    return -(2.0 * alpha + 1.0) / alpha


def exact_leaf_pmf_binary(n_max: int) -> np.ndarray:
    """``P(leaves = n)`` for offspring ``{0, 2}`` with probability 1/2 each (Catalan numbers)."""
    n = np.arange(1, n_max + 1)
    # a tree with n leaves has n-1 internal nodes: Catalan(n-1) shapes of weight 2^-(2n-1)
    logc = np.array([math.lgamma(2 * k - 1) - math.lgamma(k) - math.lgamma(k + 1) for k in n])
    return np.concatenate([[0.0], np.exp(logc - (2 * n - 1) * math.log(2.0))])
