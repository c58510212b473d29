"""Tidy CSV output. Every cell is preformatted text, so files are byte-stable."""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, List, Mapping, Optional, Sequence, Union

import pandas as pd

from ..core.reports import CurvePoint, format_horizon

PathLike = Union[str, Path]


def format_cell(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def curve_rows(
    name: str, param: Optional[float], points: Iterable[CurvePoint]
) -> List[dict]:
    return [
        {
            "name": name,
            "param": format_cell(param),
            "L": format_horizon(pt.L),
            "Cq": format_cell(pt.value),
            "method": pt.method,
            "err_bound": format_cell(pt.err_bound),
        }
        for pt in points
    ]


def to_frame(rows: Sequence[Mapping[str, str]], columns: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=list(columns), dtype=str).fillna("")


def render_csv(rows: Sequence[Mapping[str, str]], columns: Sequence[str]) -> str:
    return to_frame(rows, columns).to_csv(index=False, lineterminator="\n")


def write_csv(
    rows: Sequence[Mapping[str, str]], columns: Sequence[str], path: PathLike
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    to_frame(rows, columns).to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    return path
