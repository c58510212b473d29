from __future__ import annotations

from typing import Any, Dict

from ..core.machine import EpsilonMachine
from ..errors import ParameterError
from .base import ProcessFamily
from .biased_coins import BiasedCoins, biased_coins
from .elementary import FairCoin, PeriodCycle, iid, period_cycle
from .golden_mean import GoldenMean, RkGoldenMean, golden_mean, rk_golden_mean
from .nemo import Nemo, nemo
from .random_machine import (
    CorpusEntry,
    RandomFamily,
    machine_digest,
    random_corpus,
    random_machine,
)

FAMILIES: Dict[str, ProcessFamily] = {
    family.name: family
    for family in (
        BiasedCoins(),
        RkGoldenMean(),
        GoldenMean(),
        Nemo(),
        PeriodCycle(),
        FairCoin(),
        RandomFamily(),
    )
}


def get_family(name: str) -> ProcessFamily:
    try:
        return FAMILIES[name]
    except KeyError:
        raise ParameterError(
            f"unknown family {name!r}; choose from {', '.join(sorted(FAMILIES))}"
        ) from None


def build_family(family: str, **params: Any) -> EpsilonMachine:
    return get_family(family).build(**params)


__all__ = [
    "FAMILIES",
    "CorpusEntry",
    "ProcessFamily",
    "biased_coins",
    "build_family",
    "example_corpus",
    "get_family",
    "golden_mean",
    "iid",
    "machine_digest",
    "nemo",
    "period_cycle",
    "random_corpus",
    "random_machine",
    "rk_golden_mean",
]


def example_corpus() -> list:
    """The worked example processes at five parameter points each, plus trivial fixtures."""
    machines = []
    for p in (0.1, 0.3, 0.5, 0.666, 0.9):
        machines.append(biased_coins(p))
    for p in (0.1, 0.3, 0.505, 0.7, 0.9):
        machines.append(rk_golden_mean(4, 3, p))
    for p in (0.1, 0.25, 0.5, 0.666, 0.9):
        machines.append(nemo(p))
    machines.extend([golden_mean(0.5), iid([0.5, 0.5]), period_cycle(2)])
    return machines
