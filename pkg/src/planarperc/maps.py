"""Tiny rooted bipartite planar maps as permutations on half-edges.

A map on ``2E`` darts is a pair ``(sigma, alpha)``: ``sigma`` rotates darts
around their vertex, ``alpha`` is the fixed-point-free involution pairing the
two halves of an edge. Faces are the cycles of ``phi = sigma o alpha``; the
root face is the cycle containing the root dart ``0``.

Maps are generated by adding one edge at a time to every smaller map and
deduplicated by the canonical BFS relabelling from each root dart. The same
machinery enumerates islands (maps with a simple, untouched external face)
and checks the cluster decomposition of percolated maps.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BudgetExceeded, ConfigError
from .weights import WeightSeq

MAX_EDGES = 7


def _cycles(perm: tuple[int, ...]) -> list[list[int]]:
    seen = [False] * len(perm)
    out = []
    for d in range(len(perm)):
        if not seen[d]:
            cyc = []
            x = d
            while not seen[x]:
                seen[x] = True
                cyc.append(x)
                x = perm[x]
            out.append(cyc)
    return out


def canonical_code(sigma, alpha, root: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Relabel darts in BFS order from ``root`` following ``sigma`` then ``alpha``."""
    label = {root: 0}
    order = [root]
    i = 0
    while i < len(order):
        d = order[i]
        i += 1
        for nb in (sigma[d], alpha[d]):
            if nb not in label:
                label[nb] = len(order)
                order.append(nb)
    if len(order) != len(sigma):
        raise ConfigError("map is not connected")
    s = [0] * len(order)
    a = [0] * len(order)
    for d in order:
        s[label[d]] = label[sigma[d]]
        a[label[d]] = label[alpha[d]]
    return tuple(s), tuple(a)


@dataclass(frozen=True)
class TinyMap:
    """Rooted map in canonical form; the root dart is ``0``."""

    sigma: tuple[int, ...]
    alpha: tuple[int, ...]

    @property
    def n_edges(self) -> int:
        return len(self.sigma) // 2

    @property
    def phi(self) -> tuple[int, ...]:
        return tuple(self.sigma[self.alpha[d]] for d in range(len(self.sigma)))

    @property
    def vertices(self) -> list[list[int]]:
        if not self.sigma:
            return [[]]
        return _cycles(self.sigma)

    @property
    def faces(self) -> list[list[int]]:
        if not self.sigma:
            return [[]]
        return _cycles(self.phi)

    @property
    def face_degrees(self) -> list[int]:
        return [len(f) for f in self.faces]

    @property
    def root_face(self) -> list[int]:
        for f in self.faces:
            if 0 in f:
                return f
        return []

    @property
    def genus(self) -> int:
        v, e, f = len(self.vertices), self.n_edges, len(self.faces)
        return (2 - (v - e + f)) // 2

    @property
    def is_bipartite(self) -> bool:
        return all(d % 2 == 0 for d in self.face_degrees)

    def vertex_of(self) -> list[int]:
        vid = [0] * len(self.sigma)
        for i, cyc in enumerate(self.vertices):
            for d in cyc:
                vid[d] = i
        return vid

    def rerooted(self, root: int) -> TinyMap:
        return TinyMap(*canonical_code(self.sigma, self.alpha, root))


VERTEX_MAP = TinyMap((), ())
EDGE_MAP = TinyMap((0, 1), (1, 0))


def _insert_after(sigma: list[int], corner: int, new: int) -> None:
    sigma[new] = sigma[corner]
    sigma[corner] = new


def _extensions(m: TinyMap, allowed_corners=None):
    """All maps obtained from ``m`` by adding one edge (chord or pendant) at allowed corners."""
    n = len(m.sigma)
    x, y = n, n + 1
    corners = range(n) if allowed_corners is None else allowed_corners
    vid = m.vertex_of()
    base_alpha = list(m.alpha) + [y, x]
    for c1 in corners:
        s = list(m.sigma) + [x, y]
        _insert_after(s, c1, x)
        yield tuple(s), tuple(base_alpha)
        for c2 in corners:
            if c2 <= c1 or vid[c2] == vid[c1]:
                continue
            s = list(m.sigma) + [x, y]
            _insert_after(s, c1, x)
            _insert_after(s, c2, y)
            yield tuple(s), tuple(base_alpha)


def _orbit_codes(sigma, alpha) -> set:
    return {canonical_code(sigma, alpha, r) for r in range(len(sigma))}


@lru_cache(maxsize=None)
def _unrooted_classes(n_edges: int) -> tuple[tuple[TinyMap, frozenset], ...]:
    """Unrooted bipartite planar maps with ``n_edges`` edges, with all their rootings."""
    if n_edges > MAX_EDGES:
        raise BudgetExceeded(f"explicit enumeration limited to {MAX_EDGES} edges")
    if n_edges == 1:
        return ((EDGE_MAP, frozenset({(EDGE_MAP.sigma, EDGE_MAP.alpha)})),)
    seen = {}
    for rep, _ in _unrooted_classes(n_edges - 1):
        for sigma, alpha in _extensions(rep):
            cand = TinyMap(sigma, alpha)
            if cand.genus != 0 or not cand.is_bipartite:
                continue
            codes = _orbit_codes(sigma, alpha)
            key = min(codes)
            if key not in seen:
                seen[key] = (TinyMap(*key), frozenset(codes))
    return tuple(seen[k] for k in sorted(seen))


@lru_cache(maxsize=None)
def rooted_maps(n_edges: int) -> tuple[TinyMap, ...]:
    """All rooted bipartite planar maps with exactly ``n_edges`` edges."""
    if n_edges == 0:
        return (VERTEX_MAP,)
    out = set()
    for _, codes in _unrooted_classes(n_edges):
        out.update(codes)
    return tuple(TinyMap(*c) for c in sorted(out))


def rooted_maps_upto(e_max: int) -> list[TinyMap]:
    return [m for e in range(e_max + 1) for m in rooted_maps(e)]


def disk_weight_by_edges(q: WeightSeq, k: int, e_max: int) -> np.ndarray:
    """Weight of rooted maps with root face degree ``2k`` per edge count (internal faces weighted)."""
    out = np.zeros(e_max + 1)
    if k == 0:
        out[0] = 1.0
        return out
    for e in range(1, e_max + 1):
        for m in rooted_maps(e):
            faces = m.faces
            rf = m.root_face
            if len(rf) != 2 * k:
                continue
            w = 1.0
            for f in faces:
                if 0 not in f:
                    w *= q.q(len(f) // 2)
            out[e] += w
    return out


def map_weight(m: TinyMap, q: WeightSeq) -> float:
    w = 1.0
    for d in m.face_degrees:
        w *= q.q(d // 2)
    return w


# ---------------------------------------------------------------- clusters and islands

def edges_of(m: TinyMap) -> list[tuple[int, int]]:
    """Edges as ``(d, alpha(d))`` with ``d < alpha(d)``; the root edge comes first."""
    return [(d, m.alpha[d]) for d in range(len(m.sigma)) if d < m.alpha[d]]


def cluster_of(m: TinyMap, black: dict[int, bool]) -> TinyMap:
    """Black component of the root vertex as a rooted map (``black`` keyed by lower dart)."""
    vid = m.vertex_of()
    adj = defaultdict(list)
    for d, e in edges_of(m):
        if black[d]:
            adj[vid[d]].append(vid[e])
            adj[vid[e]].append(vid[d])
    start = vid[0]
    comp = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in comp:
                comp.add(w)
                stack.append(w)
    keep = set()
    for d, e in edges_of(m):
        if black[d] and vid[d] in comp:
            keep.update((d, e))
    sigma = {}
    for d in keep:
        x = m.sigma[d]
        while x not in keep:
            x = m.sigma[x]
        sigma[d] = x
    idx = {d: i for i, d in enumerate(sorted(keep))}
    s = [0] * len(keep)
    a = [0] * len(keep)
    for d in keep:
        s[idx[d]] = idx[sigma[d]]
        a[idx[d]] = idx[m.alpha[d]]
    return TinyMap(*canonical_code(tuple(s), tuple(a), idx[0]))


def bare_cycle(k: int) -> TinyMap:
    """Simple ``2k``-cycle rooted on its external face."""
    n = 2 * k
    sigma = [0] * (2 * n)
    alpha = [0] * (2 * n)
    for i in range(n):
        out, back = 2 * i, 2 * i + 1  # edge i from vertex i to vertex i+1
        alpha[out], alpha[back] = back, out
    for v in range(n):
        out_v = 2 * v
        in_v = 2 * ((v - 1) % n) + 1
        sigma[out_v] = in_v
        sigma[in_v] = out_v
    return TinyMap(*canonical_code(tuple(sigma), tuple(alpha), 0))


@lru_cache(maxsize=None)
def rooted_islands(k: int, n_internal: int) -> tuple[TinyMap, ...]:
    """Maps with simple external face of degree ``2k`` (the root face) and ``n_internal`` inner edges."""
    if 2 * k + n_internal > 2 * MAX_EDGES + 2:
        raise BudgetExceeded("island too large for explicit enumeration")
    if n_internal == 0:
        return (bare_cycle(k),)
    out = {}
    for isl in rooted_islands(k, n_internal - 1):
        ext = set(isl.root_face)
        allowed = [d for d in range(len(isl.sigma)) if isl.sigma[d] not in ext]
        for sigma, alpha in _extensions(isl, allowed):
            cand = TinyMap(sigma, alpha)
            if cand.genus != 0 or not cand.is_bipartite:
                continue
            code = canonical_code(sigma, alpha, 0)
            out.setdefault(code, TinyMap(*code))
    return tuple(out[c] for c in sorted(out))


def island_boundary_edges(isl: TinyMap) -> set[int]:
    rf = isl.root_face
    return {min(d, isl.alpha[d]) for d in rf}


def island_colorings(isl: TinyMap):
    """Yield black-indicator dicts on internal edges satisfying the island rule."""
    vid = isl.vertex_of()
    bverts = {vid[d] for d in isl.root_face}
    bedges = island_boundary_edges(isl)
    internal = [d for d, e in edges_of(isl) if d not in bedges]
    free = [d for d in internal if vid[d] not in bverts and vid[isl.alpha[d]] not in bverts]
    for bits in itertools.product((False, True), repeat=len(free)):
        black = {d: False for d in internal}
        black.update(zip(free, bits))
        yield black


def island_weight_poly(k: int, n_internal: int, q: WeightSeq, p: float) -> tuple[int, float]:
    """(count of colored islands, their weight) with perimeter ``2k`` and ``n_internal`` inner edges."""
    count = 0
    weight = 0.0
    for isl in rooted_islands(k, n_internal):
        fw = 1.0
        for f in isl.faces:
            if 0 not in f:  # the external face carries no weight
                fw *= q.q(len(f) // 2)
        for black in island_colorings(isl):
            nb = sum(black.values())
            count += 1
            weight += fw * p**nb * (1 - p) ** (len(black) - nb)
    return count, weight


@dataclass
class ClusterLawReport:
    e_max: int
    p: float
    passed: bool
    max_rel_spread: float
    truncation_bound: float
    n_clusters: int
    groups: dict = field(default_factory=dict)  # multiset -> list of (code, prob)
    islands: dict = field(default_factory=dict)  # k -> truncated I_k(p)

    def to_json(self) -> dict:
        return {
            "e_max": self.e_max,
            "p": self.p,
            "passed": self.passed,
            "max_rel_spread": self.max_rel_spread,
            "truncation_bound": self.truncation_bound,
            "n_clusters": self.n_clusters,
            "n_groups_with_several_clusters": sum(len(v) > 1 for v in self.groups.values()),
            "I_k_truncated": {str(k): v for k, v in self.islands.items()},
        }


def percolated_cluster_law(q: WeightSeq, p: float, e_max: int) -> tuple[dict, float]:
    """Unnormalised truncated weights of each rooted cluster and the total weight."""
    law = defaultdict(float)
    total = 0.0
    for e in range(1, e_max + 1):
        for m in rooted_maps(e):
            w = map_weight(m, q)
            if w == 0.0:
                continue
            edges = edges_of(m)
            others = [d for d, _ in edges if d != 0]
            for bits in itertools.product((False, True), repeat=len(others)):
                black = {0: True}
                black.update(zip(others, bits))
                nb = sum(bits)
                pw = w * p**nb * (1 - p) ** (len(others) - nb)
                c = cluster_of(m, black)
                law[(c.sigma, c.alpha)] += pw
                total += pw
    return dict(law), total


def _missing_mass_fraction(q: WeightSeq, e_max: int) -> float:
    """Weight of maps with more than ``e_max`` edges relative to those with at most ``e_max``."""
    from .partition import disk_counts, _edge_ratio

    rho = _edge_ratio(q)
    if not rho < 1.0:
        return math.inf
    horizon = max(4 * e_max, 40)
    T = disk_counts(q, horizon)
    ks, vals = q.coefficients
    per_e = np.zeros(horizon + 1)
    for k, v in zip(ks.tolist(), vals.tolist()):
        if k <= horizon:
            per_e += v * T[k]
    inside = per_e[: e_max + 1].sum()
    nz = np.nonzero(per_e)[0]
    period = int(np.gcd.reduce(np.diff(nz))) if len(nz) > 1 else 1
    rp = rho**period
    beyond = per_e[e_max + 1:].sum() + per_e[nz[-1]] * rp / (1 - rp)
    return float(beyond / inside)


def verify_cluster_law(q: WeightSeq, p: float, e_max: int) -> ClusterLawReport:
    """Check that the truncated cluster law depends only on the face-degree multiset."""
    if e_max > MAX_EDGES:
        raise BudgetExceeded(f"E_max={e_max} above {MAX_EDGES}")
    if not 0.0 <= p <= 1.0:
        raise ConfigError("p must lie in [0, 1]")
    law, total = percolated_cluster_law(q, p, e_max)
    groups = defaultdict(list)
    for code, w in law.items():
        c = TinyMap(*code)
        ms = tuple(sorted(d // 2 for d in c.face_degrees))
        groups[ms].append((code, w / total))
    spread = 0.0
    for items in groups.values():
        vals = np.array([v for _, v in items])
        if len(vals) > 1 and vals.max() > 0:
            spread = max(spread, float((vals.max() - vals.min()) / vals.max()))
    bound = _missing_mass_fraction(q, e_max)
    islands = {}
    for k in range(1, e_max + 1):
        tot = 0.0
        for e in range(0, e_max - k + 1):
            tot += island_weight_poly(k, e, q, p)[1]
        islands[k] = tot
    passed = spread <= max(bound, 1e-12)
    return ClusterLawReport(e_max, p, passed, spread, bound, len(law), dict(groups), islands)


def island_bijection_counts(e_max: int) -> list[tuple[int, int, int]]:
    """``(E, #percolated maps, #(cluster, islands))`` with all weights set to one.

    Percolated maps carry every coloring with the root edge black. On the
    decomposition side each face of the cluster receives a colored island of
    matching perimeter; the inner edges of all islands add up to ``E - E(c)``.
    """
    if e_max > 6:
        raise BudgetExceeded("bijection count limited to 6 edges")
    ncol = {}

    def nisl(k, e):
        if (k, e) not in ncol:
            ncol[(k, e)] = sum(1 for isl in rooted_islands(k, e) for _ in island_colorings(isl))
        return ncol[(k, e)]

    rows = []
    for E in range(1, e_max + 1):
        lhs = len(rooted_maps(E)) * 2 ** (E - 1)
        rhs = 0
        for ec in range(1, E + 1):
            budget = E - ec
            for c in rooted_maps(ec):
                halfdeg = [d // 2 for d in c.face_degrees]
                # distribute the budget over the faces
                poly = np.zeros(budget + 1, dtype=object)
                poly[0] = 1
                for k in halfdeg:
                    fk = np.array([nisl(k, e) for e in range(budget + 1)], dtype=object)
                    new = np.zeros(budget + 1, dtype=object)
                    for i in range(budget + 1):
                        for j in range(budget + 1 - i):
                            new[i + j] += poly[i] * fk[j]
                    poly = new
                rhs += int(poly[budget])
        rows.append((E, lhs, rhs))
    return rows


def face_multiset(m: TinyMap) -> Counter:
    return Counter(d // 2 for d in m.face_degrees)
