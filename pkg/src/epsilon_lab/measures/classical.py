"""Classical information measures of an epsilon-machine (all in bits)."""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional

import numpy as np
from scipy.stats import entropy

from ..core.machine import EpsilonMachine, is_minimal
from ..core.reports import Order
from ..errors import ResourceCapError

log = logging.getLogger(__name__)

INFINITE = math.inf
DEFAULT_MAX_L = 14
DEFAULT_BLOCK_CAP = 16
DEFAULT_SUBSET_BUDGET = 1_000_000

_UNSET = object()


def statistical_complexity(m: EpsilonMachine) -> float:
    """C_mu = H[pi]."""
    return float(entropy(m.stationary, base=2))


def entropy_rate(m: EpsilonMachine) -> float:
    """State-averaged branching uncertainty."""
    branching = [
        float(entropy(m.branch_distribution(i), base=2)) for i in range(m.n_states)
    ]
    return float(np.dot(m.stationary, branching))


def block_entropies(
    m: EpsilonMachine, max_L: int, cap: int = DEFAULT_BLOCK_CAP
) -> List[float]:
    """H(0), H(1), ..., H(max_L) from one level-wise enumeration."""
    if max_L > cap:
        raise ResourceCapError(f"block length {max_L} exceeds cap {cap}")
    out = [0.0]
    T = m.labeled
    if not m.strict:
        T = T / T.sum(axis=0).sum(axis=1, keepdims=True)[None, :, :]
    V = np.asarray(m.stationary, dtype=float)[None, :]
    for _ in range(max_L):
        V = np.einsum("wi,xij->wxj", V, T).reshape(-1, m.n_states)
        V = V[V.sum(axis=1) > 0.0]
        out.append(float(entropy(V.sum(axis=1), base=2)))
    return out


def block_entropy(m: EpsilonMachine, L: int, cap: int = DEFAULT_BLOCK_CAP) -> float:
    return block_entropies(m, L, cap)[L]


def entropy_rate_estimates(
    m: EpsilonMachine, max_L: int, cap: int = DEFAULT_BLOCK_CAP
) -> List[float]:
    """h(L) = H(L) - H(L-1) for L = 1..max_L; converges to h_mu from above."""
    H = block_entropies(m, max_L, cap)
    return [H[L] - H[L - 1] for L in range(1, max_L + 1)]


# ---------- Markov order ----------

def markov_order(m: EpsilonMachine, budget: int = DEFAULT_SUBSET_BUDGET) -> Order:
    """
    Synchronization depth from the observer subset graph. Returns an int,
    INFINITE when a non-singleton subset sits on a reachable cycle, or None
    when the subset graph outgrows `budget`.
    """
    if m.n_states == 1:
        return 0

    full = frozenset(range(m.n_states))
    succ: Dict[FrozenSet[int], List[FrozenSet[int]]] = {}
    queue = deque([full])
    seen = {full}
    while queue:
        U = queue.popleft()
        nxt = []
        for x in range(m.n_symbols):
            V = frozenset(int(m.targets[i, x]) for i in U if m.targets[i, x] >= 0)
            if len(V) < 2:
                continue
            nxt.append(V)
            if V not in seen:
                seen.add(V)
                if len(seen) > budget:
                    log.warning("subset graph of %r exceeds %d nodes", m.name, budget)
                    return None
                queue.append(V)
        succ[U] = nxt

    if not is_minimal(m):
        log.info("markov order of non-minimal %r refers to this presentation", m.name)

    # Kahn's algorithm: leftovers mean a cycle among non-singleton subsets
    indegree = {U: 0 for U in succ}
    for U, vs in succ.items():
        for V in vs:
            indegree[V] += 1
    order = [U for U, d in indegree.items() if d == 0]
    depth = {U: 0 for U in succ}
    head = 0
    while head < len(order):
        U = order[head]
        head += 1
        for V in succ[U]:
            depth[V] = max(depth[V], depth[U] + 1)
            indegree[V] -= 1
            if indegree[V] == 0:
                order.append(V)
    if len(order) < len(succ):
        return INFINITE
    return 1 + max(depth.values())


# ---------- excess entropy ----------

@dataclass
class ExcessEntropy:
    value: float
    status: str
    horizon: int
    last_increment: float
    block_entropies: List[float] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def excess_entropy(
    m: EpsilonMachine,
    tol: float = 1e-10,
    max_L: int = DEFAULT_MAX_L,
    cap: int = DEFAULT_BLOCK_CAP,
    markov=_UNSET,
    h_mu: Optional[float] = None,
) -> ExcessEntropy:
    """
    E from block-entropy convergence, E(L) = H(L) - L h_mu. Exact at a finite
    Markov order within reach; otherwise stops when the increment drops below
    `tol` or reports the E(max_L) lower bound as truncated.
    """
    if max_L > cap:
        raise ResourceCapError(f"excess entropy horizon {max_L} exceeds cap {cap}")
    h = entropy_rate(m) if h_mu is None else h_mu
    R = markov_order(m) if markov is _UNSET else markov

    if R is not None and not math.isinf(R) and R <= max_L:
        R = int(R)
        H = block_entropies(m, R, cap)
        return ExcessEntropy(max(0.0, H[R] - R * h), "converged", R, 0.0, H)

    H = block_entropies(m, max_L, cap)
    prev = 0.0
    inc = 0.0
    for L in range(1, max_L + 1):
        current = H[L] - L * h
        inc = current - prev
        if inc < tol:
            return ExcessEntropy(max(0.0, max(current, prev)), "converged", L, inc, H[: L + 1])
        prev = current
    log.warning("E(%d) of %r still rising by %.3g bits; reporting truncated value",
                max_L, m.name, inc)
    return ExcessEntropy(max(0.0, prev), "truncated", max_L, inc, H)


def crypticity(m: EpsilonMachine, **kwargs) -> float:
    return statistical_complexity(m) - excess_entropy(m, **kwargs).value
