from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import ParameterError

Order = Optional[Union[int, float]]
Horizon = Union[int, float]


def format_order(order: Order) -> str:
    """'inf' for infinite orders, 'unknown' when the subset budget ran out."""
    if order is None:
        return "unknown"
    if isinstance(order, float) and math.isinf(order):
        return "inf"
    return str(int(order))


def format_horizon(L: Horizon) -> str:
    return "inf" if isinstance(L, float) and math.isinf(L) else str(int(L))


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


@dataclass
class MeasureReport:
    """Everything `analyze` computes for one machine."""

    name: str
    n_states: int
    alphabet_size: int
    h_mu: float
    C_mu: float
    E: float
    E_status: str
    E_horizon: int
    E_last_increment: float
    block_entropies: List[Tuple[int, float]] = field(default_factory=list)
    markov_order: Order = None
    cryptic_order: Order = None
    minimal: bool = True
    counifilar: bool = False
    noncounifilar_states: Tuple[str, ...] = ()
    cq: Dict[int, float] = field(default_factory=dict)
    cq_inf: Optional[float] = None
    cq_inf_error: Optional[float] = None
    spectral_radius: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    @property
    def crypticity(self) -> float:
        return self.C_mu - self.E

    def to_kv(self) -> Dict[str, str]:
        kv = {
            "name": self.name,
            "n_states": str(self.n_states),
            "alphabet_size": str(self.alphabet_size),
            "h_mu": _fmt(self.h_mu),
            "C_mu": _fmt(self.C_mu),
            "E": _fmt(self.E),
            "E_status": self.E_status,
            "E_horizon": str(self.E_horizon),
            "E_last_increment": _fmt(self.E_last_increment),
            "crypticity": _fmt(self.crypticity),
            "R": format_order(self.markov_order),
            "k": format_order(self.cryptic_order),
            "minimal": str(self.minimal).lower(),
            "counifilar": str(self.counifilar).lower(),
            "noncounifilar_states": ",".join(self.noncounifilar_states),
        }
        for L, H in self.block_entropies:
            kv[f"H_{L}"] = _fmt(H)
        for L in sorted(self.cq):
            kv[f"Cq_{L}"] = _fmt(self.cq[L])
        kv["Cq_inf"] = _fmt(self.cq_inf)
        kv["Cq_inf_err"] = _fmt(self.cq_inf_error)
        kv["spectral_radius"] = _fmt(self.spectral_radius)
        if self.notes:
            kv["notes"] = "; ".join(self.notes)
        return kv

    def csv_row(self, param: Optional[float] = None) -> Dict[str, str]:
        return {
            "name": self.name,
            "param": _fmt(param),
            "h_mu": _fmt(self.h_mu),
            "C_mu": _fmt(self.C_mu),
            "E": _fmt(self.E),
            "E_status": self.E_status,
            "R": format_order(self.markov_order),
            "k": format_order(self.cryptic_order),
        }


MEASURE_COLUMNS = ("name", "param", "h_mu", "C_mu", "E", "E_status", "R", "k")


@dataclass(frozen=True)
class CurvePoint:
    L: Horizon
    value: float
    method: str
    err_bound: float = 0.0


CURVE_COLUMNS = ("name", "param", "L", "Cq", "method", "err_bound")
SWEEP_COLUMNS = CURVE_COLUMNS + ("C_mu", "E", "E_status", "status")


@dataclass
class SweepSpec:
    """One sweep: a family (or a single machine file) over a parameter grid."""

    family: Optional[str] = None
    machine_path: Optional[Path] = None
    params: Dict[str, float] = field(default_factory=dict)
    start: float = 0.01
    stop: float = 0.99
    steps: int = 99
    horizons: Sequence[Horizon] = tuple(range(0, 6))
    method: str = "gram"
    out: Optional[Path] = None

    def __post_init__(self) -> None:
        if self.family is None and self.machine_path is None:
            raise ParameterError("sweep needs a family or a machine file")
        if self.method not in ("gram", "brute", "both"):
            raise ParameterError(f"unknown method {self.method!r}")
        if self.steps < 1:
            raise ParameterError("steps must be >= 1")
        if self.family is not None and not (0.0 < self.start <= self.stop < 1.0):
            raise ParameterError(
                f"grid [{self.start}, {self.stop}] must lie inside (0, 1)"
            )

    def grid(self) -> List[Optional[float]]:
        if self.family is None:
            return [None]
        if self.steps == 1:
            return [float(self.start)]
        return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]


@dataclass(frozen=True)
class CheckResult:
    machine: str
    invariant: str
    passed: bool
    detail: str = ""


@dataclass
class VerifyReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]


@dataclass
class SurveyRecord:
    index: int
    seed: int
    n_states: int
    markov_order: Order
    cryptic_order: Order
    cq: List[float]
    monotone: bool
    max_increase: float
    jozsa_positive: bool
    jozsa_min_eigenvalue: float
    digest: str = ""

    def row(self) -> Dict[str, str]:
        return {
            "index": str(self.index),
            "seed": str(self.seed),
            "n_states": str(self.n_states),
            "R": format_order(self.markov_order),
            "k": format_order(self.cryptic_order),
            "monotone": str(self.monotone).lower(),
            "max_increase": _fmt(self.max_increase),
            "jozsa_positive": str(self.jozsa_positive).lower(),
            "jozsa_min_eig": _fmt(self.jozsa_min_eigenvalue),
            "digest": self.digest,
        }


SURVEY_COLUMNS = (
    "index", "seed", "n_states", "R", "k", "monotone",
    "max_increase", "jozsa_positive", "jozsa_min_eig", "digest",
)


@dataclass
class SurveyReport:
    records: List[SurveyRecord] = field(default_factory=list)

    @property
    def n_machines(self) -> int:
        return len(self.records)

    @property
    def monotonicity_violations(self) -> List[SurveyRecord]:
        return [r for r in self.records if not r.monotone]

    @property
    def nonpositive_ratio(self) -> List[SurveyRecord]:
        return [r for r in self.records if not r.jozsa_positive]

    @property
    def order_violations(self) -> List[SurveyRecord]:
        bad = []
        for r in self.records:
            R, k = r.markov_order, r.cryptic_order
            if R is None or k is None or math.isinf(R) or math.isinf(k):
                continue
            if k > R:
                bad.append(r)
        return bad

    def summary(self) -> Dict[str, int]:
        finite_k = sum(
            1 for r in self.records
            if r.cryptic_order is not None and not math.isinf(r.cryptic_order)
        )
        return {
            "machines": self.n_machines,
            "monotonicity_violations": len(self.monotonicity_violations),
            "nonpositive_ratio_matrices": len(self.nonpositive_ratio),
            "order_violations": len(self.order_violations),
            "finite_cryptic_order": finite_k,
        }
