from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List


class CorpusStore:
    """Survey corpus manifest: one row per machine (index, seed, n_states, digest)."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._rows: Dict[int, Dict[str, Any]] = {}
        self._loaded = False

    def load(self) -> None:
        if self._loaded:
            return
        self._loaded = True
        if not self.path.exists():
            return
        try:
            data = json.loads(self.path.read_text(encoding="utf-8"))
        except (OSError, ValueError):
            return
        if isinstance(data, dict):
            data = data.get("machines", [])
        if isinstance(data, list):
            self._rows = {int(r["index"]): dict(r) for r in data if isinstance(r, dict) and "index" in r}

    def rows(self) -> List[Dict[str, Any]]:
        self.load()
        return [self._rows[i] for i in sorted(self._rows)]

    def digest_of(self, index: int) -> str:
        self.load()
        row = self._rows.get(int(index))
        return "" if row is None else str(row.get("digest", ""))

    def mismatches(self, rows: Iterable[Dict[str, Any]]) -> List[int]:
        """Indices whose digest differs from the stored manifest (new indices are fine)."""
        self.load()
        bad = []
        for row in rows:
            known = self.digest_of(row["index"])
            if known and known != row.get("digest"):
                bad.append(int(row["index"]))
        return bad

    def record(self, rows: Iterable[Dict[str, Any]], meta: Dict[str, Any] | None = None) -> None:
        self.load()
        for row in rows:
            self._rows[int(row["index"])] = dict(row)
        self._persist(meta or {})

    def _persist(self, meta: Dict[str, Any]) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        payload = dict(meta)
        payload["machines"] = self.rows()
        self.path.write_text(
            json.dumps(payload, indent=2, ensure_ascii=False), encoding="utf-8"
        )
