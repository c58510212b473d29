from __future__ import annotations

import json
import math

import pandas as pd
import pytest

from epsilon_lab.core.machine import isomorphic
from epsilon_lab.core.reports import CURVE_COLUMNS, CurvePoint, SurveyRecord, format_order
from epsilon_lab.errors import MachineSchemaError
from epsilon_lab.io.documents import (
    format_kv,
    pmm_document,
    read_machine_file,
    write_json,
    write_machine_file,
)
from epsilon_lab.io.tables import curve_rows, render_csv, write_csv
from epsilon_lab.measures.pair_merger import build_pmm


def test_machine_file_round_trip(tmp_path, nemo666):
    path = write_machine_file(nemo666, tmp_path / "deep" / "nemo.json")
    assert isomorphic(read_machine_file(path), nemo666)


def test_unreadable_machine_file(tmp_path):
    with pytest.raises(MachineSchemaError) as info:
        read_machine_file(tmp_path / "missing.json")
    assert info.value.position == str(tmp_path / "missing.json")


def test_format_kv_keeps_order():
    assert format_kv({"b": "2", "a": "1"}) == "b=2\na=1\n"


def test_pmm_document(tmp_path, nemo666):
    doc = pmm_document(build_pmm(nemo666))
    assert doc["pair_states"] == [["A", "B"], ["A", "C"], ["B", "C"]]
    assert doc["spectral_radius"] == pytest.approx(((1 - 0.666) / 2) ** (1 / 3))
    path = write_json(doc, tmp_path / "pmm.json")
    assert json.loads(path.read_text(encoding="utf-8"))["edges"] == doc["edges"]


def test_curve_csv_is_exact_text():
    points = [CurvePoint(0, 1.5, "gram"), CurvePoint(math.inf, 0.25, "asymptotic", 1e-3)]
    text = render_csv(curve_rows("demo", 0.5, points), CURVE_COLUMNS)
    assert text == (
        "name,param,L,Cq,method,err_bound\n"
        "demo,0.5,0,1.5,gram,0.0\n"
        "demo,0.5,inf,0.25,asymptotic,0.001\n"
    )


def test_csv_write_then_read(tmp_path):
    record = SurveyRecord(
        index=3, seed=11, n_states=4, markov_order=math.inf, cryptic_order=2,
        cq=[1.0, 0.9], monotone=True, max_increase=-0.1,
        jozsa_positive=True, jozsa_min_eigenvalue=0.0, digest="ab",
    )
    path = write_csv([record.row()], list(record.row()), tmp_path / "s.csv")
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    assert frame.loc[0, "R"] == "inf"
    assert frame.loc[0, "k"] == "2"
    assert frame.loc[0, "digest"] == "ab"


def test_format_order():
    assert format_order(None) == "unknown"
    assert format_order(math.inf) == "inf"
    assert format_order(3) == "3"
