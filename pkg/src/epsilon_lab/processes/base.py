from __future__ import annotations

import math
import string
from typing import Any, Dict, List

from ..core.machine import EpsilonMachine
from ..errors import ParameterError


def state_labels(n: int) -> List[str]:
    """A, B, C, ... up to 26 states, s0, s1, ... beyond."""
    if n <= len(string.ascii_uppercase):
        return list(string.ascii_uppercase[:n])
    return [f"s{i}" for i in range(n)]


def check_probability(p: float, name: str = "p") -> float:
    p = float(p)
    if math.isnan(p) or not 0.0 < p < 1.0:
        raise ParameterError(f"{name} = {p} must lie in (0, 1)")
    return p


def check_natural(value: Any, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or int(value) != value or int(value) < minimum:
        raise ParameterError(f"{name} = {value!r} must be an integer >= {minimum}")
    return int(value)


class ProcessFamily:
    """
    A named, parameterized machine builder. `defaults` lists every parameter
    the family accepts; None marks a required one.
    """

    name: str = "base"
    defaults: Dict[str, Any] = {}
    sweep_parameter: str = "p"

    def build(self, **params: Any) -> EpsilonMachine:
        unknown = sorted(set(params) - set(self.defaults))
        if unknown:
            raise ParameterError(f"{self.name} takes no parameter(s) {', '.join(unknown)}")
        merged = dict(self.defaults)
        merged.update({k: v for k, v in params.items() if v is not None})
        missing = [k for k, v in merged.items() if v is None]
        if missing:
            raise ParameterError(f"{self.name} needs {', '.join('--' + k for k in missing)}")
        return self._build(**merged)

    def _build(self, **params: Any) -> EpsilonMachine:
        raise NotImplementedError
