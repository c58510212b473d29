from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional


BASE_DIR = Path(__file__).resolve().parents[2]
DATA_DIR = BASE_DIR / "data"
MACHINES_DIR = DATA_DIR / "machines"
VAR_DIR = BASE_DIR / "var"


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    return int(float(raw))


@dataclass
class LabConfig:
    # brute-force oracle budget
    oracle_word_cap: int = field(
        default_factory=lambda: _env_int("EPSILON_LAB_ORACLE_WORDS", 4096)
    )
    oracle_dim_cap: int = field(
        default_factory=lambda: _env_int("EPSILON_LAB_ORACLE_DIM", 2048)
    )

    # block entropies / excess entropy
    max_block_length: int = field(
        default_factory=lambda: _env_int("EPSILON_LAB_MAX_L", 14)
    )
    block_entropy_cap: int = 16
    excess_tol: float = 1e-10

    subset_budget: int = field(
        default_factory=lambda: _env_int("EPSILON_LAB_SUBSET_BUDGET", 1_000_000)
    )

    # C_q(L+1) - C_q(L) above this counts as a monotonicity violation
    monotone_tol: float = 1e-10

    # curves, sweeps, surveys
    curve_max_L: int = 8
    sweep_steps: int = 99
    measurement_draws: int = 100_000
    measurement_tv: float = 0.01
    workers: int = field(default_factory=lambda: _env_int("EPSILON_LAB_WORKERS", 1))

    # runtime files; the three subdirectories default to var_dir/{logs,runs,corpus}
    var_dir: Path = field(
        default_factory=lambda: Path(os.getenv("EPSILON_LAB_VAR_DIR") or VAR_DIR)
    )
    log_dir: Optional[Path] = None
    runs_dir: Optional[Path] = None
    corpus_dir: Optional[Path] = None

    def __post_init__(self) -> None:
        self.var_dir = Path(self.var_dir)
        self.log_dir = Path(self.log_dir or self.var_dir / "logs")
        self.runs_dir = Path(self.runs_dir or self.var_dir / "runs")
        self.corpus_dir = Path(self.corpus_dir or self.var_dir / "corpus")

    def horizon_for(self, alphabet_size: int) -> int:
        """Default E horizon, scaled down for alphabets larger than binary."""
        if alphabet_size <= 2:
            return self.max_block_length
        return min(self.max_block_length, int(28 // math.log2(alphabet_size)))

    def block_cap_for(self, alphabet_size: int) -> int:
        if alphabet_size <= 2:
            return self.block_entropy_cap
        return min(self.block_entropy_cap, int(32 // math.log2(alphabet_size)))
