"""
q-machine signal states, density matrices and C_q(L).

The default path never builds signal states: C_q(L) is the von Neumann
entropy of M = sqrt(pi pi^T) * G(L), which shares rho(L)'s nonzero spectrum.
The explicit construction here is the oracle the Gram path is checked against.
"""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np
import scipy.linalg as la
from scipy.sparse import csr_matrix
from scipy.special import entr

from ..core.machine import EpsilonMachine, RngLike, make_rng, spell
from ..core.reports import CurvePoint, Horizon
from ..errors import InvariantError, ParameterError, ResourceCapError
from .pair_merger import (
    GramMatrix,
    PairMergerMachine,
    asymptotic_error_bound,
    build_pmm,
    gram_matrix,
    gram_matrix_asymptotic,
)

log = logging.getLogger(__name__)

DEFAULT_WORD_CAP = 4096
DEFAULT_DIM_CAP = 2048
EIG_CLIP = 1e-12
NEGATIVE_EIG_TOL = 1e-9
SYMMETRY_TOL = 1e-12
TRACE_TOL = 1e-9
LN2 = math.log(2.0)

METHODS = ("gram", "brute", "both")


def _is_inf(L: Horizon) -> bool:
    return isinstance(L, float) and math.isinf(L)


# ---------- signal states ----------

@dataclass(frozen=True, eq=False)
class SignalStateSet:
    """
    Row j is |eta_j(L)>, a vector over the basis (word, state) ordered
    word-major (words lexicographic by symbol index), then state index.
    """

    machine: EpsilonMachine
    horizon: int
    amplitudes: csr_matrix

    @property
    def dimension(self) -> int:
        return self.amplitudes.shape[1]

    def vector(self, state: Union[str, int]) -> np.ndarray:
        j = self.machine.state_index(state)
        return self.amplitudes.getrow(j).toarray().ravel()

    def decode(self, column: int) -> Tuple[str, str]:
        """Basis column -> (word, successor state label)."""
        m = self.machine
        w, k = divmod(int(column), m.n_states)
        xs: List[int] = []
        for _ in range(self.horizon):
            w, x = divmod(w, m.n_symbols)
            xs.append(x)
        return spell(m, xs[::-1]), m.states[k]

    def norms(self) -> np.ndarray:
        return np.asarray(self.amplitudes.multiply(self.amplitudes).sum(axis=1)).ravel()


def _chain(m: EpsilonMachine) -> np.ndarray:
    T = m.labeled
    if not m.strict:
        T = T / T.sum(axis=0).sum(axis=1, keepdims=True)[None, :, :]
    return T


def signal_states(
    m: EpsilonMachine, L: int, word_cap: int = DEFAULT_WORD_CAP
) -> SignalStateSet:
    if L < 0:
        raise ParameterError("horizon must be >= 0")
    n_words = m.n_symbols ** L
    if n_words > word_cap:
        raise ResourceCapError(
            f"|A|^L = {n_words} words exceeds the oracle cap {word_cap}; use the Gram path"
        )
    n = m.n_states
    T = _chain(m)
    # P[j, w, k] = P(w, sigma_k | sigma_j)
    P = np.eye(n)[:, None, :]
    for _ in range(L):
        P = np.einsum("jws,xst->jwxt", P, T).reshape(n, -1, n)
    amplitudes = csr_matrix(np.sqrt(P.reshape(n, n_words * n)))
    return SignalStateSet(m, L, amplitudes)


# ---------- density matrices ----------

@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """rho(L) restricted to the columns `support` of the signal-state basis."""

    horizon: Horizon
    matrix: np.ndarray
    support: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))


def density_matrix(
    states: SignalStateSet,
    pi: Optional[np.ndarray] = None,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> DensityMatrix:
    weights = states.machine.stationary if pi is None else np.asarray(pi, float)
    V = states.amplitudes
    support = np.flatnonzero(V.getnnz(axis=0) > 0)
    if len(support) > dim_cap:
        raise ResourceCapError(
            f"signal-state support {len(support)} exceeds the oracle dimension cap {dim_cap}"
        )
    Vs = V[:, support].toarray()
    rho = Vs.T @ (weights[:, None] * Vs)
    return DensityMatrix(states.horizon, 0.5 * (rho + rho.T), support)


def weighted_gram(G: GramMatrix, pi: np.ndarray) -> np.ndarray:
    """M_ij = sqrt(pi_i pi_j) G_ij; same nonzero spectrum as rho."""
    root = np.sqrt(np.asarray(pi, dtype=float))
    return np.outer(root, root) * np.asarray(G.entries)


def vn_entropy(matrix: np.ndarray, clip: float = EIG_CLIP) -> float:
    """-tr(rho log2 rho) with eigenvalues below `clip` treated as zero."""
    rho = np.asarray(matrix, dtype=float)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvariantError(f"density matrix must be square, got {rho.shape}")
    asym = float(np.max(np.abs(rho - rho.T), initial=0.0))
    if asym > SYMMETRY_TOL:
        raise InvariantError(f"density matrix asymmetric by {asym:.3g}")
    tr = float(np.trace(rho))
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvariantError(f"density matrix trace {tr!r} != 1")

    lam = la.eigvalsh(0.5 * (rho + rho.T))
    if lam.size and lam[0] < -NEGATIVE_EIG_TOL:
        raise InvariantError(f"density matrix has eigenvalue {lam[0]:.3g} < 0")
    lam = np.where(lam > clip, lam, 0.0)
    return float(entr(lam).sum() / LN2)


# ---------- C_q ----------

def cq_bruteforce(
    m: EpsilonMachine,
    L: int,
    word_cap: int = DEFAULT_WORD_CAP,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> float:
    rho = density_matrix(signal_states(m, L, word_cap), m.stationary, dim_cap)
    return vn_entropy(rho.matrix)


def cq(m: EpsilonMachine, L: Horizon, pmm: Optional[PairMergerMachine] = None) -> float:
    """C_q(L) from the pair-merger Gram matrix; `L` may be math.inf."""
    pmm = build_pmm(m) if pmm is None else pmm
    if _is_inf(L):
        G = gram_matrix_asymptotic(pmm)
    else:
        if L < 0:
            raise ParameterError("horizon must be >= 0")
        G = gram_matrix(pmm, int(L))
    return vn_entropy(weighted_gram(G, m.stationary))


def cq_curve(
    m: EpsilonMachine,
    horizons: Iterable[Horizon],
    method: str = "gram",
    word_cap: int = DEFAULT_WORD_CAP,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> List[CurvePoint]:
    """
    C_q at each horizon. The `inf` point is tagged "asymptotic" and carries the
    certified overlap gap between G(inf) and the deepest finite horizon asked for.
    """
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}")
    horizons = list(horizons)
    finite = [int(L) for L in horizons if not _is_inf(L)]
    pmm = build_pmm(m)

    points: List[CurvePoint] = []
    for L in horizons:
        if _is_inf(L):
            if method == "brute":
                raise ParameterError("the brute-force oracle has no L = inf")
            deepest = max(finite, default=0)
            value = cq(m, math.inf, pmm)
            points.append(
                CurvePoint(math.inf, value, "asymptotic", asymptotic_error_bound(pmm, deepest))
            )
            continue
        if method in ("gram", "both"):
            points.append(CurvePoint(int(L), cq(m, int(L), pmm), "gram"))
        if method in ("brute", "both"):
            points.append(
                CurvePoint(int(L), cq_bruteforce(m, int(L), word_cap, dim_cap), "brute")
            )
    return points


# ---------- measurement ----------

def _outcomes(states: SignalStateSet, start: Union[str, int]) -> Tuple[np.ndarray, np.ndarray]:
    j = states.machine.state_index(start)
    row = states.amplitudes.getrow(j)
    probs = np.asarray(row.data, dtype=float) ** 2
    return np.asarray(row.indices), probs / probs.sum()


def measure_simulate(
    m: EpsilonMachine,
    L: int,
    start: Union[str, int],
    seed: RngLike = None,
    word_cap: int = DEFAULT_WORD_CAP,
) -> Tuple[str, str]:
    """
    Project |eta_start(L)> on the (word, state) basis: returns the observed
    word and the causal state it leaves the machine in.
    """
    if L == 0:
        return "", m.states[m.state_index(start)]
    states = signal_states(m, L, word_cap)
    columns, probs = _outcomes(states, start)
    pick = int(make_rng(seed).choice(len(columns), p=probs))
    return states.decode(int(columns[pick]))


def measure_simulate_many(
    m: EpsilonMachine,
    L: int,
    start: Union[str, int],
    n: int,
    seed: RngLike = None,
    word_cap: int = DEFAULT_WORD_CAP,
) -> Counter:
    """Counts of (word, state) over n independent measurements."""
    if L == 0:
        return Counter({("", m.states[m.state_index(start)]): n})
    states = signal_states(m, L, word_cap)
    columns, probs = _outcomes(states, start)
    picks = make_rng(seed).choice(len(columns), size=n, p=probs)
    tally = np.bincount(picks, minlength=len(columns))
    return Counter({
        states.decode(int(columns[c])): int(count)
        for c, count in enumerate(tally) if count
    })


def word_frequencies(outcomes: Mapping[Tuple[str, str], int]) -> Dict[str, float]:
    total = sum(outcomes.values())
    freq: Dict[str, float] = {}
    for (word, _), count in outcomes.items():
        freq[word] = freq.get(word, 0.0) + count / total
    return freq


def total_variation(p: Mapping[str, float], q: Mapping[str, float]) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(w, 0.0) - q.get(w, 0.0)) for w in keys)
