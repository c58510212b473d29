from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from dotenv import load_dotenv

from .config import LabConfig
from .core.machine import EpsilonMachine, dump_machine, minimize, sample
from .core.orchestrator import AnalysisLab
from .core.reports import MEASURE_COLUMNS, SURVEY_COLUMNS, SWEEP_COLUMNS, SweepSpec
from .errors import LabError, MachineValidationError, ParameterError
from .io.documents import (
    format_kv,
    pmm_document,
    read_machine_file,
    write_json,
    write_machine_file,
    write_text,
)
from .io.tables import render_csv, write_csv
from .measures.pair_merger import build_pmm
from .persistence.corpus_store import CorpusStore
from .persistence.run_store import RunStore
from .processes import example_corpus, get_family, random_corpus

log = logging.getLogger("epsilon_lab")

# family parameter -> argparse destination
FAMILY_ARGS = {
    "p": "p",
    "R": "R",
    "k": "k",
    "n": "n",
    "n_states": "n_states",
    "alphabet_size": "alphabet_size",
    "seed": "family_seed",
}


def _configure_logging(verbose: int, quiet: bool) -> None:
    level = logging.WARNING if quiet else (logging.DEBUG if verbose else logging.INFO)
    logging.basicConfig(
        level=level,
        format="[%(name)s] %(levelname)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


# ---------- argument plumbing ----------

def _add_machine_args(p: argparse.ArgumentParser) -> None:
    src = p.add_argument_group("machine")
    src.add_argument("--family", help="process family id, e.g. nemo, biased-coins, rk-golden-mean")
    src.add_argument("--machine", type=Path, help="machine-document JSON file")
    src.add_argument("--p", type=float, help="family probability parameter")
    src.add_argument("--R", type=int, help="Markov order (rk-golden-mean)")
    src.add_argument("--k", type=int, help="cryptic order (rk-golden-mean)")
    src.add_argument("--n", type=int, help="period (period family)")
    src.add_argument("--n-states", type=int, help="state count (random family)")
    src.add_argument("--alphabet-size", type=int, help="alphabet size (random family)")
    src.add_argument("--family-seed", type=int, help="seed (random family)")


def _family_params(args: argparse.Namespace, family_name: str, skip: Sequence[str] = ()) -> Dict[str, Any]:
    family = get_family(family_name)
    params = {}
    for name in family.defaults:
        if name in skip:
            continue
        value = getattr(args, FAMILY_ARGS[name], None)
        if value is not None:
            params[name] = value
    return params


def _load_machine(args: argparse.Namespace) -> EpsilonMachine:
    if args.machine is not None:
        return read_machine_file(args.machine)
    if args.family:
        return get_family(args.family).build(**_family_params(args, args.family))
    raise ParameterError("give --family or --machine")


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_text(text, out)
        log.info("wrote %s", out)


# ---------- commands ----------

def cmd_analyze(args: argparse.Namespace, lab: AnalysisLab, store: RunStore) -> int:
    m = _load_machine(args)
    report = lab.analyze(m, L_max=args.Lmax, minimize_first=args.minimize)
    if not report.minimal and not args.minimize:
        log.warning("%s is not minimal; pass --minimize to analyze its minimal presentation", m.name)
    if args.format == "csv":
        text = render_csv([report.csv_row(args.p)], MEASURE_COLUMNS)
    else:
        text = format_kv(report.to_kv())
    _emit(text, args.out)
    store.save_snapshot(report.to_kv())
    return 0


def _horizons(args: argparse.Namespace) -> List[Any]:
    horizons: List[Any] = list(args.L) if args.L else list(range(args.Lmax + 1))
    if args.inf:
        horizons.append(math.inf)
    return horizons


def cmd_sweep(args: argparse.Namespace, lab: AnalysisLab, store: RunStore) -> int:
    machine = read_machine_file(args.machine) if args.machine is not None else None
    params = {} if machine is not None or not args.family else _family_params(args, args.family, skip=("p",))
    spec = SweepSpec(
        family=None if machine is not None else args.family,
        machine_path=args.machine,
        params=params,
        start=args.start,
        stop=args.stop,
        steps=args.steps if args.steps is not None else lab.config.sweep_steps,
        horizons=_horizons(args),
        method=args.method,
        out=args.out,
    )
    rows = lab.sweep(spec, machine=machine)
    if args.out is not None:
        write_csv(rows, SWEEP_COLUMNS, args.out)
        log.info("wrote %d rows to %s", len(rows), args.out)
    else:
        sys.stdout.write(render_csv(rows, SWEEP_COLUMNS))
    failed = sum(1 for r in rows if r["status"] != "ok")
    store.save_snapshot({"rows": len(rows), "failed": failed})
    return 0


def cmd_verify(args: argparse.Namespace, lab: AnalysisLab, store: RunStore) -> int:
    if args.machine:
        # lenient load; row sums are checked as stochasticity
        machines = [read_machine_file(path, strict=False) for path in args.machine]
    elif args.corpus == "random":
        machines = [e.machine for e in random_corpus(args.n_machines, args.n_min, args.n_max, args.seed)]
    else:
        machines = example_corpus()
    report = lab.verify(machines, L_max=args.Lmax, seed=args.seed)

    lines = [
        f"{'PASS' if c.passed else 'FAIL'} {c.machine} {c.invariant}" + (f" ({c.detail})" if c.detail else "")
        for c in report.checks
    ]
    lines.append(f"checks={len(report.checks)} failures={len(report.failures)}")
    _emit("\n".join(lines) + "\n", args.out)
    store.save_snapshot({
        "checks": len(report.checks),
        "failures": [dataclasses.asdict(c) for c in report.failures],
    })
    return 0 if report.passed else 3


def cmd_survey(args: argparse.Namespace, lab: AnalysisLab, store: RunStore) -> int:
    corpus = CorpusStore(
        lab.config.corpus_dir / f"corpus-seed{args.seed}-n{args.n_min}-{args.n_max}.json"
    )
    report = lab.survey(
        args.n_machines, args.n_min, args.n_max, args.seed, args.Lmax,
        alphabet_size=args.alphabet_size, store=corpus,
    )
    if args.out is not None:
        write_csv([r.row() for r in report.records], SURVEY_COLUMNS, args.out)

    summary = report.summary()
    lines = [f"{k}={v}" for k, v in summary.items()]
    for r in report.nonpositive_ratio:
        lines.append(f"nonpositive-ratio random-{r.index:04d} seed={r.seed} min_eig={r.jozsa_min_eigenvalue!r}")
    for r in report.monotonicity_violations:
        lines.append(f"MONOTONICITY-VIOLATION random-{r.index:04d} seed={r.seed} rise={r.max_increase!r}")
    sys.stdout.write("\n".join(lines) + "\n")
    store.save_snapshot(summary)
    return 0


def cmd_sample(args: argparse.Namespace, lab: AnalysisLab, store: RunStore) -> int:
    m = _load_machine(args)
    symbols, path = sample(m, args.length, seed=args.seed, start=args.start)
    sep = "" if all(len(s) == 1 for s in m.alphabet) else " "
    _emit(f"symbols={sep.join(symbols)}\nstates={' '.join(path)}\n", args.out)
    return 0


def cmd_export(args: argparse.Namespace, lab: AnalysisLab, store: RunStore) -> int:
    m = _load_machine(args)
    if args.minimize:
        m = minimize(m)
    if args.out is None:
        sys.stdout.write(dump_machine(m) + "\n")
    else:
        write_machine_file(m, args.out)
        log.info("wrote %s", args.out)
    return 0


def cmd_pmm(args: argparse.Namespace, lab: AnalysisLab, store: RunStore) -> int:
    m = _load_machine(args)
    doc = pmm_document(build_pmm(m))
    if args.out is None:
        sys.stdout.write(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")
    else:
        write_json(doc, args.out)
    return 0


COMMANDS = {
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "survey": cmd_survey,
    "sample": cmd_sample,
    "export": cmd_export,
    "pmm": cmd_pmm,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epsilon-lab",
        description="Classical and quantum statistical complexity of epsilon-machines.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("-q", "--quiet", action="store_true")
    parser.add_argument("--var-dir", type=Path, help="runtime directory for logs and manifests")
    parser.add_argument("--workers", type=int, help="process pool size for sweep/survey")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="all measures of one machine")
    _add_machine_args(p)
    p.add_argument("--Lmax", type=int, default=None, help="deepest finite C_q horizon")
    p.add_argument("--minimize", action="store_true")
    p.add_argument("--format", choices=("kv", "csv"), default="kv")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("sweep", help="C_q curves over a parameter grid")
    _add_machine_args(p)
    p.add_argument("--start", type=float, default=0.01)
    p.add_argument("--stop", type=float, default=0.99)
    p.add_argument("--steps", type=int)
    p.add_argument("--L", type=int, nargs="+", help="horizons (default 0..Lmax)")
    p.add_argument("--Lmax", type=int, default=5)
    p.add_argument("--inf", action="store_true", help="add the asymptotic horizon")
    p.add_argument("--method", choices=("gram", "brute", "both"), default="gram")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("verify", help="oracle cross-checks and invariants")
    p.add_argument("--corpus", choices=("examples", "random"), default="examples")
    p.add_argument("--machine", type=Path, nargs="+", help="verify these machine files instead")
    p.add_argument("--n-machines", type=int, default=200)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--Lmax", type=int, default=5)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("survey", help="random-machine C_q monotonicity survey")
    p.add_argument("--n-machines", type=int, default=1000)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=7)
    p.add_argument("--alphabet-size", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--Lmax", type=int, default=8)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("sample", help="generate a symbol sequence")
    _add_machine_args(p)
    p.add_argument("--length", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--start", help="start state label (default: drawn from pi)")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("export", help="write a machine document")
    _add_machine_args(p)
    p.add_argument("--minimize", action="store_true")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("pmm", help="pair-merger machine edge list")
    _add_machine_args(p)
    p.add_argument("--out", type=Path)
    return parser


def _config_from(args: argparse.Namespace) -> LabConfig:
    config = LabConfig()
    if args.var_dir is not None:
        var = args.var_dir
        config = dataclasses.replace(
            config, var_dir=var, log_dir=var / "logs", runs_dir=var / "runs", corpus_dir=var / "corpus"
        )
    if args.workers is not None:
        config = dataclasses.replace(config, workers=max(1, args.workers))
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose, args.quiet)

    config = _config_from(args)
    store = RunStore(config.log_dir, config.runs_dir)
    lab = AnalysisLab(config, run_store=store)
    store.start_run(args.command, argv)

    try:
        code = COMMANDS[args.command](args, lab, store)
    except MachineValidationError as exc:
        print(f"[epsilon_lab] invalid machine: {exc}", file=sys.stderr)
        report = exc.report
        if report is not None:
            for v in report.violations:
                print(f"  {v.rule} {v.context} {v.value!r}", file=sys.stderr)
        code = exc.exit_code
    except LabError as exc:
        print(f"[epsilon_lab] {type(exc).__name__}: {exc}", file=sys.stderr)
        code = exc.exit_code
    store.finish_run(code)
    return code


if __name__ == "__main__":
    sys.exit(main())
