"""Files in and out: machine documents, key=value reports, JSON payloads."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Mapping, Union

from ..core.machine import EpsilonMachine, dump_machine, parse_machine
from ..errors import MachineSchemaError
from ..measures.pair_merger import PairMergerMachine, pmm_edge_list, spectral_radius

PathLike = Union[str, Path]


def read_machine_file(path: PathLike, strict: bool = True) -> EpsilonMachine:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MachineSchemaError(f"cannot read machine document: {exc.strerror}", str(path)) from exc
    return parse_machine(text, strict=strict)


def write_machine_file(m: EpsilonMachine, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_machine(m) + "\n", encoding="utf-8")
    return path


def format_kv(kv: Mapping[str, str]) -> str:
    return "".join(f"{key}={value}\n" for key, value in kv.items())


def write_text(text: str, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def write_json(payload: Any, path: PathLike) -> Path:
    return write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", path)


def pmm_document(pmm: PairMergerMachine) -> Dict[str, Any]:
    m = pmm.machine
    return {
        "machine": m.name,
        "pair_states": [[m.states[i], m.states[j]] for i, j in pmm.pairs],
        "spectral_radius": spectral_radius(pmm),
        "edges": pmm_edge_list(pmm),
    }
