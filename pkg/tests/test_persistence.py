from __future__ import annotations

import json

from epsilon_lab.persistence.corpus_store import CorpusStore
from epsilon_lab.persistence.run_store import RunStore


def test_run_store_is_lazy(tmp_path):
    store = RunStore(tmp_path / "logs", tmp_path / "runs")
    store.log_event("analyze", "ignored before a run starts")
    assert not (tmp_path / "logs").exists()
    assert store.load_last_snapshot() is None


def test_run_store_lifecycle(tmp_path):
    store = RunStore(tmp_path / "logs", tmp_path / "runs")
    name = store.start_run("sweep", ["--family", "nemo"])
    assert name.startswith("run-")
    store.log_event("sweep", "5 rows, 0 failed")
    store.save_snapshot({"rows": 5})
    store.finish_run(0)

    lines = store.log_file.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith(f"[{name}] run: sweep started")
    assert lines[1] == f"[{name}] sweep: 5 rows, 0 failed"
    assert "finished exit=0" in lines[2]

    meta = json.loads(store.meta_file.read_text(encoding="utf-8"))
    assert meta["argv"] == ["--family", "nemo"]
    assert store.load_last_snapshot() == {"run": name, "command": "sweep", "result": {"rows": 5}}


def test_run_store_ignores_corrupt_snapshot(tmp_path):
    store = RunStore(tmp_path / "logs", tmp_path / "runs")
    store.snapshot_file.parent.mkdir(parents=True)
    store.snapshot_file.write_text("{not json", encoding="utf-8")
    assert store.load_last_snapshot() is None


def test_run_meta_points_at_previous_run(tmp_path):
    first = RunStore(tmp_path / "logs", tmp_path / "runs")
    name = first.start_run("analyze")
    first.save_snapshot({"k": "1"})
    meta = json.loads(first.meta_file.read_text(encoding="utf-8"))
    assert meta["previous_run"] is None

    second = RunStore(tmp_path / "logs", tmp_path / "runs")
    second.start_run("verify")
    meta = json.loads(second.meta_file.read_text(encoding="utf-8"))
    assert meta["previous_run"] == name


def test_corpus_store_records_and_detects_drift(tmp_path):
    path = tmp_path / "corpus" / "manifest.json"
    store = CorpusStore(path)
    assert store.rows() == []
    store.record(
        [{"index": 1, "digest": "bb"}, {"index": 0, "digest": "aa"}],
        {"seed": 7},
    )
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["seed"] == 7
    assert [r["index"] for r in data["machines"]] == [0, 1]

    reloaded = CorpusStore(path)
    assert reloaded.digest_of(1) == "bb"
    assert reloaded.digest_of(5) == ""
    assert reloaded.mismatches([{"index": 0, "digest": "aa"}, {"index": 1, "digest": "zz"},
                                {"index": 2, "digest": "cc"}]) == [1]


def test_corpus_store_tolerates_garbage(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text("[1, 2", encoding="utf-8")
    assert CorpusStore(path).rows() == []
