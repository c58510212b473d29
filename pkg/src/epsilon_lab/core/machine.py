"""Epsilon-machines: construction, parsing, validation, minimization, simulation."""
from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from decimal import Decimal
from functools import cached_property
from typing import (
    Any,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
import scipy.linalg as la
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import (
    ConvergenceError,
    InconsistentWordError,
    MachineSchemaError,
    MachineValidationError,
    UnknownStateError,
    UnknownSymbolError,
)

log = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-9
EDGE_DROP_TOL = 1e-12
STATIONARY_TOL = 1e-12
MERGE_TOL = 1e-9

Number = Union[int, float, Decimal]
Edge = Tuple[str, str, str, Number]
Word = Union[str, Sequence[str]]
RngLike = Union[None, int, np.random.Generator]


@dataclass(frozen=True)
class Alphabet:
    symbols: Tuple[str, ...]

    def __post_init__(self) -> None:
        symbols = tuple(str(s) for s in self.symbols)
        if not symbols:
            raise MachineSchemaError("alphabet needs at least one symbol", "alphabet")
        if len(set(symbols)) != len(symbols):
            raise MachineSchemaError("symbol labels must be unique", "alphabet")
        object.__setattr__(self, "symbols", symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __getitem__(self, idx: int) -> str:
        return self.symbols[idx]

    @cached_property
    def _positions(self) -> Dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    def index(self, symbol: str) -> int:
        try:
            return self._positions[symbol]
        except KeyError:
            raise UnknownSymbolError(
                f"symbol {symbol!r} is not in alphabet {list(self.symbols)}"
            ) from None


@dataclass(frozen=True, eq=False)
class EpsilonMachine:
    """
    Finite unifilar machine. `targets[i, x]` is the successor of state i on
    symbol x (-1 when x is not allowed) and `probs[i, x]` its probability.
    Instances are immutable; the stationary distribution is cached on build.
    """

    name: str
    alphabet: Alphabet
    states: Tuple[str, ...]
    targets: np.ndarray
    probs: np.ndarray
    strict: bool = True
    stationary: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        states = tuple(str(s) for s in self.states)
        if not states:
            raise MachineSchemaError("machine needs at least one state", "states")
        if len(set(states)) != len(states):
            raise MachineSchemaError("state labels must be unique", "states")
        if not isinstance(self.alphabet, Alphabet):
            object.__setattr__(self, "alphabet", Alphabet(tuple(self.alphabet)))

        n, k = len(states), len(self.alphabet)
        targets = np.array(self.targets, dtype=np.int64).reshape(n, k)
        probs = np.array(self.probs, dtype=float).reshape(n, k)

        dropped = (targets >= 0) & (probs < EDGE_DROP_TOL)
        targets[dropped] = -1
        probs[targets < 0] = 0.0
        if np.any(targets >= n):
            raise MachineSchemaError("transition target out of range", "transitions")

        sums = probs.sum(axis=1)
        for i, total in enumerate(sums):
            if total <= 0.0:
                raise MachineValidationError(
                    f"stochasticity: state {states[i]!r} has no outgoing transitions"
                )
        if self.strict:
            worst = int(np.argmax(np.abs(sums - 1.0)))
            if abs(sums[worst] - 1.0) > ROW_SUM_TOL:
                raise MachineValidationError(
                    f"stochasticity: state {states[worst]!r} sums to {sums[worst]!r}"
                )
            probs = probs / sums[:, None]

        targets.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "probs", probs)

        if not _strongly_connected(targets):
            raise MachineValidationError(
                f"irreducibility: state graph of {self.name!r} is not strongly connected"
            )
        object.__setattr__(self, "stationary", stationary_distribution(self))

    # ---------- construction ----------

    @classmethod
    def from_edges(
        cls,
        name: str,
        alphabet: Sequence[str],
        states: Sequence[str],
        edges: Iterable[Edge],
        strict: bool = True,
    ) -> "EpsilonMachine":
        """Build from (from, symbol, to, prob) tuples; zero-probability edges are dropped."""
        alpha = Alphabet(tuple(alphabet))
        states = tuple(str(s) for s in states)
        state_pos = {s: i for i, s in enumerate(states)}
        n, k = len(states), len(alpha)

        targets = np.full((n, k), -1, dtype=np.int64)
        probs = np.zeros((n, k), dtype=float)
        exact_sums: Dict[int, Decimal] = {}
        exact = True

        for src, sym, dst, prob in edges:
            if src not in state_pos:
                raise MachineSchemaError(f"unknown state {src!r}", "transitions.from")
            if dst not in state_pos:
                raise MachineSchemaError(f"unknown state {dst!r}", "transitions.to")
            i, j, x = state_pos[src], state_pos[dst], alpha.index(sym)
            if targets[i, x] >= 0:
                raise MachineValidationError(
                    f"unifilarity: ({src!r}, {sym!r}) has more than one transition"
                )
            p = float(prob)
            if p < 0.0 or p > 1.0 + ROW_SUM_TOL:
                raise MachineSchemaError(
                    f"probability {prob} of ({src!r}, {sym!r}) outside [0, 1]",
                    "transitions.prob",
                )
            if p < EDGE_DROP_TOL:
                continue
            targets[i, x] = j
            probs[i, x] = p
            if isinstance(prob, Decimal):
                exact_sums[i] = exact_sums.get(i, Decimal(0)) + prob
            else:
                exact = False

        if strict and exact:
            for i, total in exact_sums.items():
                if abs(total - 1) > Decimal(str(ROW_SUM_TOL)):
                    raise MachineValidationError(
                        f"stochasticity: state {states[i]!r} sums to {total}"
                    )

        return cls(name=name, alphabet=alpha, states=states,
                   targets=targets, probs=probs, strict=strict)

    # ---------- structure ----------

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_symbols(self) -> int:
        return len(self.alphabet)

    @cached_property
    def _state_positions(self) -> Dict[str, int]:
        return {s: i for i, s in enumerate(self.states)}

    def state_index(self, state: Union[str, int]) -> int:
        if isinstance(state, (int, np.integer)) and 0 <= int(state) < self.n_states:
            return int(state)
        try:
            return self._state_positions[str(state)]
        except KeyError:
            raise UnknownStateError(
                f"state {state!r} is not in machine {self.name!r}"
            ) from None

    def word_indices(self, word: Word) -> List[int]:
        """Symbol indices of `word`; a str is split into characters when every symbol is one."""
        if isinstance(word, str):
            if all(len(s) == 1 for s in self.alphabet):
                tokens: Sequence[str] = list(word)
            else:
                tokens = word.split()
        else:
            tokens = [str(s) for s in word]
        return [self.alphabet.index(s) for s in tokens]

    def successor(self, i: int, x: int) -> Optional[int]:
        j = int(self.targets[i, x])
        return None if j < 0 else j

    def edges(self) -> Iterator[Tuple[str, str, str, float]]:
        for i in range(self.n_states):
            for x in range(self.n_symbols):
                j = self.targets[i, x]
                if j >= 0:
                    yield self.states[i], self.alphabet[x], self.states[j], float(self.probs[i, x])

    @cached_property
    def labeled(self) -> np.ndarray:
        """Stack of symbol-labeled matrices T^(x), shape (|A|, |S|, |S|)."""
        n, k = self.n_states, self.n_symbols
        mats = np.zeros((k, n, n))
        rows, syms = np.nonzero(self.targets >= 0)
        mats[syms, rows, self.targets[rows, syms]] = self.probs[rows, syms]
        mats.setflags(write=False)
        return mats

    def symbol_matrices(self) -> List[np.ndarray]:
        return [self.labeled[x] for x in range(self.n_symbols)]

    def transition_matrix(self) -> np.ndarray:
        T = self.labeled.sum(axis=0)
        if not self.strict:
            T = T / T.sum(axis=1, keepdims=True)
        return T

    def branch_distribution(self, i: int) -> np.ndarray:
        row = np.asarray(self.probs[i], dtype=float)
        return row if self.strict else row / row.sum()


def _strongly_connected(targets: np.ndarray) -> bool:
    n = targets.shape[0]
    rows, cols = np.nonzero(targets >= 0)
    graph = csr_matrix(
        (np.ones(len(rows)), (rows, targets[rows, cols])), shape=(n, n)
    )
    n_comp, _ = connected_components(graph, directed=True, connection="strong")
    return n_comp == 1


# ---------- documents ----------

def _string_list(doc: Mapping[str, Any], key: str) -> List[str]:
    value = doc.get(key)
    if not isinstance(value, list) or not value:
        raise MachineSchemaError("must be a non-empty array of strings", key)
    for pos, item in enumerate(value):
        if not isinstance(item, str):
            raise MachineSchemaError("must be a string", f"{key}[{pos}]")
    return list(value)


def machine_from_document(doc: Any, strict: bool = True) -> EpsilonMachine:
    if not isinstance(doc, dict):
        raise MachineSchemaError("document must be a JSON object", "$")
    name = doc.get("name", "machine")
    if not isinstance(name, str):
        raise MachineSchemaError("must be a string", "name")
    alphabet = _string_list(doc, "alphabet")
    states = _string_list(doc, "states")

    transitions = doc.get("transitions")
    if not isinstance(transitions, list):
        raise MachineSchemaError("must be an array of transition objects", "transitions")

    edges: List[Edge] = []
    seen = set()
    for pos, item in enumerate(transitions):
        where = f"transitions[{pos}]"
        if not isinstance(item, dict):
            raise MachineSchemaError("must be an object", where)
        for key in ("from", "symbol", "to", "prob"):
            if key not in item:
                raise MachineSchemaError("missing field", f"{where}.{key}")
        src, sym, dst, prob = item["from"], item["symbol"], item["to"], item["prob"]
        for key, value in (("from", src), ("symbol", sym), ("to", dst)):
            if not isinstance(value, str):
                raise MachineSchemaError("must be a string", f"{where}.{key}")
        if sym not in alphabet:
            raise MachineSchemaError(f"symbol {sym!r} not in alphabet", f"{where}.symbol")
        for key, value in (("from", src), ("to", dst)):
            if value not in states:
                raise MachineSchemaError(f"state {value!r} not in states", f"{where}.{key}")
        if isinstance(prob, bool) or not isinstance(prob, (Decimal, int, float)):
            raise MachineSchemaError("must be a decimal number", f"{where}.prob")
        prob = Decimal(str(prob)) if not isinstance(prob, Decimal) else prob
        if not (Decimal(0) < prob <= Decimal(1)):
            raise MachineSchemaError(f"{prob} is not in (0, 1]", f"{where}.prob")
        if (src, sym) in seen:
            raise MachineSchemaError(
                f"unifilarity: duplicate transition for ({src!r}, {sym!r})", where
            )
        seen.add((src, sym))
        edges.append((src, sym, dst, prob))

    return EpsilonMachine.from_edges(name, alphabet, states, edges, strict=strict)


def parse_machine(text: str, strict: bool = True) -> EpsilonMachine:
    """
    Parse a JSON machine-document; decimals are read exactly before the row-sum
    check. With strict=False row sums are left for `validate` to report.
    """
    try:
        doc = json.loads(text, parse_float=Decimal, parse_int=Decimal)
    except json.JSONDecodeError as exc:
        raise MachineSchemaError(exc.msg, f"line {exc.lineno} col {exc.colno}") from exc
    return machine_from_document(doc, strict=strict)


def machine_to_document(m: EpsilonMachine) -> Dict[str, Any]:
    return {
        "name": m.name,
        "alphabet": list(m.alphabet.symbols),
        "states": list(m.states),
        "transitions": [
            {"from": src, "symbol": sym, "to": dst, "prob": prob}
            for src, sym, dst, prob in m.edges()
        ],
    }


def dump_machine(m: EpsilonMachine) -> str:
    return json.dumps(machine_to_document(m), indent=2, ensure_ascii=False)


# ---------- stationary distribution ----------

def stationary_distribution(m: EpsilonMachine) -> np.ndarray:
    """Left fixed point of the state-to-state matrix, normalized to sum 1."""
    T = m.transition_matrix()
    n = T.shape[0]
    A = T.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = la.solve(A, b)
    except la.LinAlgError as exc:
        raise ConvergenceError(f"stationary solve failed for {m.name!r}: {exc}") from exc

    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residual = float(np.max(np.abs(pi @ T - pi)))
    sweeps = 0
    # lazy-chain polish; plain power iteration would oscillate on periodic machines
    while residual > STATIONARY_TOL and sweeps < 1000:
        pi = 0.5 * (pi + pi @ T)
        pi /= pi.sum()
        residual = float(np.max(np.abs(pi @ T - pi)))
        sweeps += 1
    if residual > STATIONARY_TOL or np.any(pi <= 0.0):
        raise ConvergenceError(
            f"no positive stationary distribution for {m.name!r} (residual {residual:.3g})"
        )
    pi.setflags(write=False)
    return pi


# ---------- validation ----------

@dataclass(frozen=True)
class Violation:
    rule: str
    context: str
    value: float


@dataclass
class ValidationReport:
    ok: bool
    violations: List[Violation]
    minimal: bool
    noncounifilar_states: FrozenSet[str]

    @property
    def counifilar(self) -> bool:
        return not self.noncounifilar_states


def noncounifilar_states(m: EpsilonMachine) -> FrozenSet[str]:
    """States entered from two or more distinct predecessors on the same symbol."""
    found = set()
    for x in range(m.n_symbols):
        preds: Dict[int, set] = {}
        for i in range(m.n_states):
            j = m.targets[i, x]
            if j >= 0:
                preds.setdefault(int(j), set()).add(i)
        found.update(m.states[j] for j, srcs in preds.items() if len(srcs) >= 2)
    return frozenset(found)


def validate(m: EpsilonMachine) -> ValidationReport:
    violations: List[Violation] = []

    sums = m.probs.sum(axis=1)
    for i, total in enumerate(sums):
        if abs(total - 1.0) > ROW_SUM_TOL:
            violations.append(Violation("stochasticity", m.states[i], float(total)))

    if not _strongly_connected(m.targets):
        violations.append(Violation("irreducibility", m.name, 0.0))

    pi = m.stationary
    residual = float(np.max(np.abs(pi @ m.transition_matrix() - pi)))
    if residual > STATIONARY_TOL:
        violations.append(Violation("stationarity", m.name, residual))
    for i in np.flatnonzero(pi <= 0.0):
        violations.append(Violation("stationary-positive", m.states[i], float(pi[i])))

    minimal = is_minimal(m)
    if not minimal:
        log.warning("machine %r is not minimal; predictively equivalent states present", m.name)

    return ValidationReport(
        ok=not violations,
        violations=violations,
        minimal=minimal,
        noncounifilar_states=noncounifilar_states(m),
    )


def counifilar(m: EpsilonMachine) -> bool:
    return not noncounifilar_states(m)


# ---------- minimization ----------

def _partition(m: EpsilonMachine) -> List[int]:
    """Moore refinement: next-symbol distribution first, then successor blocks."""
    support = m.targets >= 0
    reps: List[int] = []
    blocks: List[int] = []
    for i in range(m.n_states):
        for b, r in enumerate(reps):
            if np.array_equal(support[i], support[r]) and np.max(
                np.abs(m.probs[i] - m.probs[r])
            ) <= MERGE_TOL:
                blocks.append(b)
                break
        else:
            reps.append(i)
            blocks.append(len(reps) - 1)

    while True:
        signatures: Dict[Tuple[int, ...], int] = {}
        refined = []
        for i in range(m.n_states):
            sig = (blocks[i],) + tuple(
                blocks[t] if t >= 0 else -1 for t in m.targets[i]
            )
            refined.append(signatures.setdefault(sig, len(signatures)))
        if len(signatures) == len(set(blocks)):
            return refined
        blocks = refined


def is_minimal(m: EpsilonMachine) -> bool:
    return len(set(_partition(m))) == m.n_states


def minimize(m: EpsilonMachine) -> EpsilonMachine:
    """Merge predictively equivalent states; each block keeps its first member's label."""
    blocks = _partition(m)
    if len(set(blocks)) == m.n_states:
        return m

    rep_of: Dict[int, int] = {}
    for i, b in enumerate(blocks):
        rep_of.setdefault(b, i)
    kept = [rep_of[b] for b in sorted(rep_of, key=rep_of.get)]

    edges = []
    for i in kept:
        for x in range(m.n_symbols):
            j = m.targets[i, x]
            if j >= 0:
                edges.append((m.states[i], m.alphabet[x],
                              m.states[rep_of[blocks[j]]], float(m.probs[i, x])))
    log.info("minimized %r: %d -> %d states", m.name, m.n_states, len(kept))
    return EpsilonMachine.from_edges(
        m.name, m.alphabet.symbols, [m.states[i] for i in kept], edges, strict=m.strict
    )


def isomorphic(a: EpsilonMachine, b: EpsilonMachine, tol: float = MERGE_TOL) -> bool:
    """Structural isomorphism up to state relabeling (probabilities within `tol`)."""
    if a.n_states != b.n_states or a.alphabet.symbols != b.alphabet.symbols:
        return False
    for j0 in range(b.n_states):
        mapping = {0: j0}
        stack = [0]
        ok = True
        while stack and ok:
            i = stack.pop()
            j = mapping[i]
            for x in range(a.n_symbols):
                ti, tj = int(a.targets[i, x]), int(b.targets[j, x])
                if (ti < 0) != (tj < 0):
                    ok = False
                    break
                if ti < 0:
                    continue
                if abs(a.probs[i, x] - b.probs[j, x]) > tol:
                    ok = False
                    break
                if ti in mapping:
                    if mapping[ti] != tj:
                        ok = False
                        break
                else:
                    mapping[ti] = tj
                    stack.append(ti)
        if ok and len(set(mapping.values())) == a.n_states:
            return True
    return False


# ---------- words, sampling, inference ----------

def spell(m: EpsilonMachine, xs: Sequence[int]) -> str:
    """Symbol indices as a word string (space-separated for multi-character symbols)."""
    sep = "" if all(len(s) == 1 for s in m.alphabet) else " "
    return sep.join(m.alphabet[x] for x in xs)


def all_words(m: EpsilonMachine, L: int) -> List[str]:
    """Every length-L word in lexicographic symbol-index order."""
    return [spell(m, xs) for xs in itertools.product(range(m.n_symbols), repeat=L)]


def word_probability(
    m: EpsilonMachine, state: Union[str, int], word: Word
) -> Tuple[float, Optional[str]]:
    """P(word | state) along the unique path, with the successor (None if disallowed)."""
    i = m.state_index(state)
    xs = m.word_indices(word)
    prob = 1.0
    for x in xs:
        j = m.targets[i, x]
        if j < 0:
            return 0.0, None
        prob *= float(m.branch_distribution(i)[x])
        i = int(j)
    return prob, m.states[i]


def make_rng(seed: RngLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample(
    m: EpsilonMachine,
    length: int,
    seed: RngLike = None,
    start: Optional[Union[str, int]] = None,
) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
    """Generate `length` symbols; returns (symbols, state path of length + 1)."""
    if length < 0:
        raise ValueError("length must be >= 0")
    rng = make_rng(seed)
    if start is None:
        i = int(rng.choice(m.n_states, p=m.stationary))
    else:
        i = m.state_index(start)

    symbols: List[str] = []
    path = [m.states[i]]
    for _ in range(length):
        allowed = np.flatnonzero(m.targets[i] >= 0)
        weights = m.branch_distribution(i)[allowed]
        x = int(allowed[rng.choice(len(allowed), p=weights / weights.sum())])
        i = int(m.targets[i, x])
        symbols.append(m.alphabet[x])
        path.append(m.states[i])
    return tuple(symbols), tuple(path)


def backward_inference(
    m: EpsilonMachine, word: Word, final: Union[str, int]
) -> List[FrozenSet[str]]:
    """
    For t = 0..len(word), the states at time t lying on some path that emits
    `word` and ends in `final`.
    """
    xs = m.word_indices(word)
    f = m.state_index(final)
    everyone = set(range(m.n_states))

    forward = [everyone]
    for x in xs:
        forward.append({int(m.targets[i, x]) for i in forward[-1] if m.targets[i, x] >= 0})

    backward = [set() for _ in range(len(xs) + 1)]
    backward[-1] = {f}
    for t in range(len(xs) - 1, -1, -1):
        x = xs[t]
        backward[t] = {i for i in everyone if m.targets[i, x] in backward[t + 1]}

    consistent = [forward[t] & backward[t] for t in range(len(xs) + 1)]
    if not consistent[0]:
        raise InconsistentWordError(
            f"word {''.join(m.alphabet[x] for x in xs)!r} cannot end in state {m.states[f]!r}"
        )
    return [frozenset(m.states[i] for i in sorted(s)) for s in consistent]
