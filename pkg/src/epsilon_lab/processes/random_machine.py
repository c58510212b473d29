"""
Random unifilar machines for the monotonicity survey.

Sampler: every (state, symbol) slot is independently absent or mapped to a
uniformly chosen target; topologies that are not strongly connected or leave a
state without outgoing symbols are redrawn. Branch probabilities are flat
Dirichlet over each state's allowed symbols. The result is minimized, so its
state count can be below the requested one.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..core.machine import (
    Alphabet,
    EpsilonMachine,
    RngLike,
    dump_machine,
    make_rng,
    minimize,
)
from ..errors import MachineValidationError, ParameterError, ResourceCapError
from .base import ProcessFamily, check_natural, state_labels

log = logging.getLogger(__name__)

MAX_ATTEMPTS = 10_000


def random_machine(
    n_states: int,
    alphabet_size: int = 2,
    seed: RngLike = None,
    name: Optional[str] = None,
    max_attempts: int = MAX_ATTEMPTS,
) -> EpsilonMachine:
    n = check_natural(n_states, "n_states")
    k = check_natural(alphabet_size, "alphabet_size", minimum=2)
    rng = make_rng(seed)
    alphabet = Alphabet(tuple(str(x) for x in range(k)))
    labels = tuple(state_labels(n))
    name = name or f"random(n={n},seed={seed})"

    for attempt in range(1, max_attempts + 1):
        targets = rng.integers(-1, n, size=(n, k))
        allowed = targets >= 0
        if not allowed.any(axis=1).all():
            continue
        probs = np.zeros((n, k))
        for i in range(n):
            cols = np.flatnonzero(allowed[i])
            probs[i, cols] = rng.dirichlet(np.ones(len(cols)))
        try:
            m = EpsilonMachine(name, alphabet, labels, targets, probs)
        except MachineValidationError:
            continue
        log.debug("random machine %r after %d attempt(s)", name, attempt)
        return minimize(m)

    raise ResourceCapError(
        f"no irreducible {n}-state machine over {k} symbols in {max_attempts} attempts"
    )


def machine_digest(m: EpsilonMachine) -> str:
    return hashlib.sha256(dump_machine(m).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CorpusEntry:
    index: int
    seed: int
    requested_states: int
    machine: EpsilonMachine
    digest: str

    @property
    def n_states(self) -> int:
        return self.machine.n_states

    def manifest_row(self) -> dict:
        return {
            "index": self.index,
            "seed": self.seed,
            "n_states": self.n_states,
            "requested_states": self.requested_states,
            "digest": self.digest,
        }


def corpus_seeds(n_machines: int, n_min: int, n_max: int, seed: int) -> List[tuple]:
    """(index, child seed, requested state count), independent of any worker split."""
    if n_machines < 0:
        raise ParameterError("n_machines must be >= 0")
    n_min = check_natural(n_min, "n_min")
    n_max = check_natural(n_max, "n_max")
    if n_max < n_min:
        raise ParameterError(f"state range [{n_min}, {n_max}] is empty")
    if n_machines == 0:
        return []
    children = np.random.SeedSequence(seed).generate_state(n_machines)
    span = n_max - n_min + 1
    return [(i, int(c), n_min + int(c) % span) for i, c in enumerate(children)]


def corpus_entry(index: int, child: int, n_states: int, alphabet_size: int = 2) -> CorpusEntry:
    m = random_machine(n_states, alphabet_size, seed=child, name=f"random-{index:04d}")
    return CorpusEntry(index, child, n_states, m, machine_digest(m))


def random_corpus(
    n_machines: int,
    n_min: int = 2,
    n_max: int = 7,
    seed: int = 0,
    alphabet_size: int = 2,
) -> List[CorpusEntry]:
    return [
        corpus_entry(i, child, n, alphabet_size)
        for i, child, n in corpus_seeds(n_machines, n_min, n_max, seed)
    ]


class RandomFamily(ProcessFamily):
    name = "random"
    defaults = {"n_states": 3, "alphabet_size": 2, "seed": 0}
    sweep_parameter = ""

    def _build(self, n_states: int, alphabet_size: int, seed: int) -> EpsilonMachine:
        return random_machine(n_states, alphabet_size, seed=int(seed))
