from __future__ import annotations

import sys
from pathlib import Path

from dotenv import load_dotenv

# --- add src to sys.path ---
PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))
# ----------------------------

from epsilon_lab.config import LabConfig
from epsilon_lab.main import main

# C_q curves of the three worked example processes over p in (0, 1)
CURVES = {
    "biased-coins": ["--family", "biased-coins", "--Lmax", "4"],
    "rk-golden-mean": ["--family", "rk-golden-mean", "--R", "4", "--k", "3", "--Lmax", "5"],
    "nemo": ["--family", "nemo", "--Lmax", "19", "--inf"],
}


def run_all() -> int:
    out_dir = LabConfig().var_dir / "sweeps"
    code = 0
    for name, args in CURVES.items():
        code = max(code, main(["sweep", *args, "--out", str(out_dir / f"{name}.csv")]))
    return code


if __name__ == "__main__":
    load_dotenv()
    sys.exit(main(["sweep", *sys.argv[1:]]) if len(sys.argv) > 1 else run_all())
