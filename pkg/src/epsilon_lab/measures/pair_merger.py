"""
Pairwise-merger machine (PMM) and the signal-state overlaps it yields.

Pair-states are unordered pairs {i, j} of distinct causal states. On a symbol
both components allow, a pair either moves to another pair or merges into a
single state; each edge carries sqrt(p_i(x) p_j(x)). With B the pair-to-pair
weight matrix and c the one-step merger mass per pair,

    G(L) = sum_{m < L} B^m c,      G(inf) = (I - B)^{-1} c.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as la

from ..core.machine import EpsilonMachine
from ..core.reports import Horizon, Order
from ..errors import RatioUndefinedError, SingularOverlapError

log = logging.getLogger(__name__)

PSD_TOL = 1e-10
RADIUS_MARGIN = 1e-12
INCREMENT_FLOOR = 1e-15


@dataclass(frozen=True)
class PairEdge:
    source: int
    symbol: int
    target: int
    weight: float


@dataclass(frozen=True)
class MergerEdge:
    source: int
    symbol: int
    state: int
    weight: float


@dataclass(frozen=True, eq=False)
class PairMergerMachine:
    machine: EpsilonMachine
    pairs: Tuple[Tuple[int, int], ...]
    pair_edges: Tuple[PairEdge, ...]
    merger_edges: Tuple[MergerEdge, ...]
    B: np.ndarray
    c: np.ndarray

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    def index(self, a: Union[str, int], b: Union[str, int]) -> int:
        i = self.machine.state_index(a)
        j = self.machine.state_index(b)
        if i == j:
            raise ValueError("a pair-state needs two distinct causal states")
        lo, hi = min(i, j), max(i, j)
        n = self.machine.n_states
        # lexicographic position of (lo, hi) among i < j pairs
        return lo * n - lo * (lo + 1) // 2 + (hi - lo - 1)


def build_pmm(m: EpsilonMachine) -> PairMergerMachine:
    n, k = m.n_states, m.n_symbols
    pairs = tuple((i, j) for i in range(n) for j in range(i + 1, n))
    position = {pair: p for p, pair in enumerate(pairs)}
    P = len(pairs)

    B = np.zeros((P, P))
    c = np.zeros(P)
    pair_edges: List[PairEdge] = []
    merger_edges: List[MergerEdge] = []
    for p, (i, j) in enumerate(pairs):
        pi_row, pj_row = m.branch_distribution(i), m.branch_distribution(j)
        for x in range(k):
            ti, tj = int(m.targets[i, x]), int(m.targets[j, x])
            if ti < 0 or tj < 0:
                continue
            w = math.sqrt(float(pi_row[x]) * float(pj_row[x]))
            if ti == tj:
                merger_edges.append(MergerEdge(p, x, ti, w))
                c[p] += w
            else:
                q = position[(min(ti, tj), max(ti, tj))]
                pair_edges.append(PairEdge(p, x, q, w))
                B[p, q] += w

    B.setflags(write=False)
    c.setflags(write=False)
    log.debug("PMM of %r: %d pair-states, %d pair edges, %d merger edges",
              m.name, P, len(pair_edges), len(merger_edges))
    return PairMergerMachine(m, pairs, tuple(pair_edges), tuple(merger_edges), B, c)


def pmm_edge_list(pmm: PairMergerMachine) -> List[Dict[str, Any]]:
    m = pmm.machine
    rows: List[Dict[str, Any]] = []
    for e in pmm.pair_edges:
        i, j = pmm.pairs[e.source]
        a, b = pmm.pairs[e.target]
        rows.append({
            "source": [m.states[i], m.states[j]],
            "symbol": m.alphabet[e.symbol],
            "target": [m.states[a], m.states[b]],
            "weight": e.weight,
            "merger": False,
        })
    for e in pmm.merger_edges:
        i, j = pmm.pairs[e.source]
        rows.append({
            "source": [m.states[i], m.states[j]],
            "symbol": m.alphabet[e.symbol],
            "target": [m.states[e.state]],
            "weight": e.weight,
            "merger": True,
        })
    rows.sort(key=lambda r: (r["source"], r["symbol"]))
    return rows


# ---------- cryptic order ----------

def _merging_pairs(pmm: PairMergerMachine) -> Tuple[set, Dict[int, List[int]]]:
    """Pair-states that can reach a merger edge, and the pair graph among them."""
    succ: Dict[int, List[int]] = {p: [] for p in range(pmm.n_pairs)}
    pred: Dict[int, List[int]] = {p: [] for p in range(pmm.n_pairs)}
    for e in pmm.pair_edges:
        succ[e.source].append(e.target)
        pred[e.target].append(e.source)

    live = {e.source for e in pmm.merger_edges}
    stack = list(live)
    while stack:
        q = stack.pop()
        for p in pred[q]:
            if p not in live:
                live.add(p)
                stack.append(p)
    graph = {p: sorted({q for q in succ[p] if q in live}) for p in live}
    return live, graph


def cryptic_order(pmm: PairMergerMachine, topological: bool = False) -> Order:
    """
    Length of the longest pair path ending in a merger; infinite when a cycle
    of pair-states can still reach a merger. The default reads it off the
    overlap increments, `topological=True` off the pair graph alone.
    """
    if not pmm.merger_edges:
        return 0
    live, graph = _merging_pairs(pmm)

    indegree = {p: 0 for p in live}
    for p, qs in graph.items():
        for q in qs:
            indegree[q] += 1
    order = [p for p in sorted(live) if indegree[p] == 0]
    head = 0
    while head < len(order):
        p = order[head]
        head += 1
        for q in graph[p]:
            indegree[q] -= 1
            if indegree[q] == 0:
                order.append(q)
    if len(order) < len(live):
        return math.inf

    if topological:
        has_merger = {e.source for e in pmm.merger_edges}
        depth: Dict[int, int] = {}
        for p in reversed(order):
            best = 1 if p in has_merger else 0
            for q in graph[p]:
                best = max(best, 1 + depth[q])
            depth[p] = best
        return max(depth.values())

    # acyclic, so increments vanish beyond n_pairs steps
    y = np.array(pmm.c, dtype=float)
    k = 0
    for L in range(1, pmm.n_pairs + 2):
        if np.any(y > INCREMENT_FLOOR):
            k = L
        y = pmm.B @ y
    return k


# ---------- Gram matrices ----------

@dataclass(frozen=True, eq=False)
class GramMatrix:
    horizon: Horizon
    entries: np.ndarray

    def overlap(self, i: int, j: int) -> float:
        return float(self.entries[i, j])


def _to_gram(pmm: PairMergerMachine, x: np.ndarray, horizon: Horizon) -> GramMatrix:
    n = pmm.machine.n_states
    G = np.eye(n)
    for p, (i, j) in enumerate(pmm.pairs):
        G[i, j] = G[j, i] = min(1.0, max(0.0, float(x[p])))
    G.setflags(write=False)
    return GramMatrix(horizon, G)


def pair_overlaps(pmm: PairMergerMachine, L: int) -> np.ndarray:
    """Overlap per pair-state after L symbols: x_{L+1} = c + B x_L, x_0 = 0."""
    if L < 0:
        raise ValueError("horizon must be >= 0")
    x = np.zeros(pmm.n_pairs)
    for _ in range(L):
        x = pmm.c + pmm.B @ x
    return x


def gram_matrix(pmm: PairMergerMachine, L: int) -> GramMatrix:
    return _to_gram(pmm, pair_overlaps(pmm, L), L)


def spectral_radius(pmm: PairMergerMachine) -> float:
    if pmm.n_pairs == 0:
        return 0.0
    return float(np.max(np.abs(la.eigvals(pmm.B))))


def asymptotic_pair_overlaps(pmm: PairMergerMachine) -> np.ndarray:
    if pmm.n_pairs == 0:
        return np.zeros(0)
    radius = spectral_radius(pmm)
    if radius >= 1.0 - RADIUS_MARGIN:
        raise SingularOverlapError(
            f"pair-state spectral radius {radius:.6g} >= 1 for {pmm.machine.name!r}; "
            "the machine has predictively identical states"
        )
    x = la.solve(np.eye(pmm.n_pairs) - pmm.B, pmm.c)
    if np.any(x < -1e-9) or np.any(x > 1.0 + 1e-9):
        raise SingularOverlapError(
            f"asymptotic overlaps of {pmm.machine.name!r} left [0, 1]"
        )
    return x


def gram_matrix_asymptotic(pmm: PairMergerMachine) -> GramMatrix:
    return _to_gram(pmm, asymptotic_pair_overlaps(pmm), math.inf)


def asymptotic_error_bound(pmm: PairMergerMachine, L: int) -> float:
    """Certified max |G_ij(inf) - G_ij(L)|: the tail is B^L G(inf)."""
    if pmm.n_pairs == 0:
        return 0.0
    x_inf = asymptotic_pair_overlaps(pmm)
    BL = np.linalg.matrix_power(np.asarray(pmm.B), L)
    return float(np.max(np.abs(BL).sum(axis=1)) * np.max(np.abs(x_inf), initial=0.0))


def overlap_increments(
    pmm: PairMergerMachine,
    pair: Union[int, Sequence[Union[str, int]]],
    max_L: int,
) -> np.ndarray:
    """
    inc[L] = weight of paths from `pair` whose first merger happens at step L;
    inc[0] = 0 and the cumulative sums are the Gram entries.
    """
    p = pair if isinstance(pair, (int, np.integer)) else pmm.index(*pair)
    inc = np.zeros(max_L + 1)
    if pmm.n_pairs == 0:
        return inc
    y = np.array(pmm.c, dtype=float)
    for L in range(1, max_L + 1):
        inc[L] = y[p]
        y = pmm.B @ y
    return inc


# ---------- Jozsa ratio criterion ----------

@dataclass(frozen=True)
class JozsaResult:
    positive: bool
    min_eigenvalue: float
    ratio: np.ndarray


def jozsa_ratio_check(
    G_a: GramMatrix, G_b: GramMatrix, undefined: str = "error"
) -> JozsaResult:
    """
    Element-wise ratio R = G_b / G_a (0/0 = 1) and whether it is positive
    semidefinite. `undefined="carry"` lets a newly nonzero overlap enter as G_b.
    """
    a, b = np.asarray(G_a.entries, float), np.asarray(G_b.entries, float)
    if a.shape != b.shape:
        raise ValueError(f"Gram shapes differ: {a.shape} vs {b.shape}")
    if undefined not in ("error", "carry"):
        raise ValueError(f"unknown undefined-ratio policy {undefined!r}")

    R = np.ones_like(a)
    nz = a > 0.0
    R[nz] = b[nz] / a[nz]
    fresh = ~nz & (b > 0.0)
    if np.any(fresh):
        if undefined == "error":
            i, j = np.argwhere(fresh)[0]
            raise RatioUndefinedError(
                f"ratio undefined at ({i}, {j}): {b[i, j]:.3g} / 0"
            )
        R[fresh] = b[fresh]

    min_eig = float(la.eigvalsh(0.5 * (R + R.T))[0])
    return JozsaResult(min_eig >= -PSD_TOL, min_eig, R)
