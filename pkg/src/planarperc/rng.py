"""Counter-based random streams and alias tables usable inside numba kernels.

Every Monte Carlo run owns one stream keyed by ``(seed, run_index)``, so a
batch gives the same records whatever order or chunking the runs are executed
in. The generator is splitmix64: the state is a 64-bit counter advanced by a
fixed odd increment and every output is a bijective mix of the state.
NumPy generators cannot be called from nopython code, hence this module.
"""
from __future__ import annotations

import numpy as np
from numba import njit, uint64

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def stream_state(seed, run_index):
    """Initial state of the stream for one run."""
    return mix64(uint64(seed) ^ mix64(uint64(run_index) * GOLDEN + GOLDEN))


@njit(cache=True)
def next_u64(state):
    """Advance ``state`` (a length-1 uint64 array) and return 64 random bits."""
    state[0] += GOLDEN
    return mix64(state[0])


@njit(cache=True)
def next_double(state):
    """Uniform on [0, 1) with 53 random bits."""
    return float(next_u64(state) >> _S11) * _TWO53


def alias_table(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vose alias table ``(prob, alias)`` for a nonnegative weight vector."""
    w = np.asarray(p, dtype=float)
    n = len(w)
    if n == 0 or not np.all(w >= 0) or w.sum() <= 0:
        raise ValueError("alias table needs nonnegative weights with positive sum")
    scaled = w / w.sum() * n
    prob = np.zeros(n)
    alias = np.zeros(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = scaled[g] + scaled[s] - 1.0
        if scaled[g] < 1.0:
            small.append(g)
        else:
            large.append(g)
    for i in large + small:
        prob[i] = 1.0
        alias[i] = i
    return prob, alias


@njit(cache=True)
def alias_draw(prob, alias, state):
    n = prob.shape[0]
    u = next_double(state) * n
    i = int(u)
    if i >= n:
        i = n - 1
    if u - i < prob[i]:
        return i
    return alias[i]


def uniforms(seed: int, run_index: int, n: int) -> np.ndarray:
    """First ``n`` uniforms of a stream (for tests and debugging)."""
    return _uniforms(np.uint64(seed), np.uint64(run_index), n)


@njit(cache=True)
def _uniforms(seed, run_index, n):
    st = np.empty(1, dtype=np.uint64)
    st[0] = stream_state(seed, run_index)
    out = np.empty(n)
    for i in range(n):
        out[i] = next_double(st)
    return out
