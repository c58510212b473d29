from __future__ import annotations

from ..core.machine import EpsilonMachine
from ..errors import ParameterError
from .base import ProcessFamily, check_natural, check_probability, state_labels


def rk_golden_mean(R: int, k: int, p: float) -> EpsilonMachine:
    """
    Golden Mean generalization with Markov order R and cryptic order k.

    s0 self-loops on 1 w.p. p and leaves on 0 w.p. 1-p; a chain of R-1 zeros
    (s1..s_{R-1}) is followed by a chain of k ones (s_R..s_{R+k-1}) back to s0.
    """
    R = check_natural(R, "R")
    k = check_natural(k, "k")
    if k > R:
        raise ParameterError(f"cryptic order k = {k} cannot exceed Markov order R = {R}")
    p = check_probability(p)

    n = R + k
    s = state_labels(n)
    edges = [(s[0], "1", s[0], p), (s[0], "0", s[1], 1.0 - p)]
    for i in range(1, R):
        edges.append((s[i], "0", s[i + 1], 1.0))
    for i in range(R, n):
        edges.append((s[i], "1", s[(i + 1) % n], 1.0))
    return EpsilonMachine.from_edges(f"rk-golden-mean(R={R},k={k},p={p:g})", ("0", "1"), s, edges)


def golden_mean(p: float) -> EpsilonMachine:
    """No two consecutive 0s; R = k = 1."""
    return rk_golden_mean(1, 1, p)


class RkGoldenMean(ProcessFamily):
    name = "rk-golden-mean"
    defaults = {"R": 4, "k": 3, "p": None}

    def _build(self, R: int, k: int, p: float) -> EpsilonMachine:
        return rk_golden_mean(R, k, p)


class GoldenMean(ProcessFamily):
    name = "golden-mean"
    defaults = {"p": None}

    def _build(self, p: float) -> EpsilonMachine:
        return golden_mean(p)
