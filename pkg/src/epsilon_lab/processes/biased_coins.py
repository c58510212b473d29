from __future__ import annotations

from ..core.machine import EpsilonMachine
from .base import ProcessFamily, check_probability


def biased_coins(p: float) -> EpsilonMachine:
    """
    Two coins: A emits 0 (stay) w.p. 1-p and 1 (switch to B) w.p. p; B emits
    0 (back to A) w.p. p and 1 (stay) w.p. 1-p. Non-minimal at p = 1/2.
    """
    p = check_probability(p)
    q = 1.0 - p
    return EpsilonMachine.from_edges(
        f"biased-coins(p={p:g})",
        ("0", "1"),
        ("A", "B"),
        [
            ("A", "0", "A", q),
            ("A", "1", "B", p),
            ("B", "0", "A", p),
            ("B", "1", "B", q),
        ],
    )


class BiasedCoins(ProcessFamily):
    name = "biased-coins"
    defaults = {"p": None}

    def _build(self, p: float) -> EpsilonMachine:
        return biased_coins(p)
