from __future__ import annotations

from ..core.machine import EpsilonMachine
from .base import ProcessFamily, check_probability


def nemo(p: float) -> EpsilonMachine:
    """Three states; infinite Markov and cryptic orders for every p."""
    p = check_probability(p)
    return EpsilonMachine.from_edges(
        f"nemo(p={p:g})",
        ("0", "1"),
        ("A", "B", "C"),
        [
            ("A", "0", "A", p),
            ("A", "1", "B", 1.0 - p),
            ("B", "1", "C", 1.0),
            ("C", "0", "A", 0.5),
            ("C", "1", "A", 0.5),
        ],
    )


class Nemo(ProcessFamily):
    name = "nemo"
    defaults = {"p": None}

    def _build(self, p: float) -> EpsilonMachine:
        return nemo(p)
