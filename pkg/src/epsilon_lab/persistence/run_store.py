from __future__ import annotations

import json
import time
from pathlib import Path
from typing import Any, Dict, Optional, Sequence


class RunStore:
    """
    Plain-text run log plus JSON snapshots of the last run's result and metadata.
    Directories are created on first write.
    """

    def __init__(self, log_dir: Path, runs_dir: Path):
        self.log_dir = Path(log_dir)
        self.runs_dir = Path(runs_dir)

        self.log_file: Path = self.log_dir / "run_log.txt"
        self.snapshot_file: Path = self.runs_dir / "last_run.json"
        self.meta_file: Path = self.runs_dir / "run_meta.json"

        self.run_name: Optional[str] = None
        self.command: Optional[str] = None
        self._started: Optional[float] = None

    # ---------- snapshot ----------

    def load_last_snapshot(self) -> Optional[Dict[str, Any]]:
        if not self.snapshot_file.exists():
            return None
        try:
            data = json.loads(self.snapshot_file.read_text(encoding="utf-8"))
        except (OSError, ValueError):
            return None
        return data if isinstance(data, dict) else None

    def save_snapshot(self, result: Dict[str, Any]) -> None:
        self.runs_dir.mkdir(parents=True, exist_ok=True)
        snapshot = {"run": self.run_name, "command": self.command, "result": result}
        self.snapshot_file.write_text(
            json.dumps(snapshot, indent=2, ensure_ascii=False), encoding="utf-8"
        )

    # ---------- run lifecycle ----------

    def start_run(self, command: str, argv: Sequence[str] = ()) -> str:
        self.run_name = f"run-{time.strftime('%Y%m%d-%H%M%S')}"
        self.command = command
        self._started = time.monotonic()
        self.log_event("run", f"{command} started at {time.ctime()} argv={' '.join(argv)}")

        last = self.load_last_snapshot()
        self.runs_dir.mkdir(parents=True, exist_ok=True)
        meta = {
            "run_name": self.run_name,
            "command": command,
            "argv": list(argv),
            "started_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "previous_run": last.get("run") if last else None,
        }
        self.meta_file.write_text(json.dumps(meta, indent=2, ensure_ascii=False), encoding="utf-8")
        return self.run_name

    def finish_run(self, exit_code: int) -> None:
        elapsed = 0.0 if self._started is None else time.monotonic() - self._started
        self.log_event("run", f"{self.command} finished exit={exit_code} in {elapsed:.2f}s")

    def log_event(self, tag: str, text: str) -> None:
        """Append `[run-name] tag: text` to run_log.txt."""
        if not self.run_name:
            return
        self.log_dir.mkdir(parents=True, exist_ok=True)
        with self.log_file.open("a", encoding="utf-8") as h:
            h.write(f"[{self.run_name}] {tag}: {text}\n")
