from __future__ import annotations

from typing import Sequence

from ..core.machine import EpsilonMachine
from ..errors import ParameterError
from .base import ProcessFamily, check_natural, state_labels


def period_cycle(n: int) -> EpsilonMachine:
    """Deterministic period-n process emitting 1 then n-1 zeros."""
    n = check_natural(n, "n")
    s = state_labels(n)
    edges = [(s[i], "1" if i == 0 else "0", s[(i + 1) % n], 1.0) for i in range(n)]
    return EpsilonMachine.from_edges(f"period-{n}", ("0", "1"), s, edges)


def iid(probabilities: Sequence[float]) -> EpsilonMachine:
    """Single-state machine over symbols '0'..'k-1'."""
    probs = [float(q) for q in probabilities]
    if not probs or any(q < 0.0 for q in probs):
        raise ParameterError("iid needs a non-empty list of nonnegative probabilities")
    alphabet = [str(x) for x in range(len(probs))]
    edges = [("A", a, "A", q) for a, q in zip(alphabet, probs)]
    return EpsilonMachine.from_edges(f"iid{len(probs)}", alphabet, ("A",), edges)


class PeriodCycle(ProcessFamily):
    name = "period"
    defaults = {"n": 2}
    sweep_parameter = ""

    def _build(self, n: int) -> EpsilonMachine:
        return period_cycle(n)


class FairCoin(ProcessFamily):
    name = "iid"
    defaults = {"p": 0.5}

    def _build(self, p: float) -> EpsilonMachine:
        return iid([1.0 - p, p])
