from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import settings

# --- add src to sys.path ---
PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))
# ----------------------------

from epsilon_lab.config import MACHINES_DIR, LabConfig  # noqa: E402
from epsilon_lab.processes import biased_coins, nemo, rk_golden_mean  # noqa: E402

settings.register_profile("lab", max_examples=40, deadline=None, derandomize=True)
settings.load_profile("lab")


@pytest.fixture
def coins():
    return biased_coins(0.666)


@pytest.fixture
def gm43():
    return rk_golden_mean(4, 3, 0.505)


@pytest.fixture
def nemo666():
    return nemo(0.666)


@pytest.fixture
def machines_dir() -> Path:
    return MACHINES_DIR


@pytest.fixture
def lab_config(tmp_path) -> LabConfig:
    var = tmp_path / "var"
    return LabConfig(
        var_dir=var,
        log_dir=var / "logs",
        runs_dir=var / "runs",
        corpus_dir=var / "corpus",
        workers=1,
    )
