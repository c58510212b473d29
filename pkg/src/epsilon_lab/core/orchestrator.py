from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from ..config import LabConfig
from ..errors import LabError, ParameterError, SingularOverlapError
from ..io.tables import curve_rows, format_cell
from ..measures.classical import (
    excess_entropy,
    entropy_rate,
    markov_order,
    statistical_complexity,
)
from ..measures.pair_merger import (
    asymptotic_error_bound,
    build_pmm,
    cryptic_order,
    gram_matrix,
    jozsa_ratio_check,
    spectral_radius,
)
from ..measures.q_machine import (
    cq,
    cq_bruteforce,
    cq_curve,
    measure_simulate_many,
    total_variation,
    word_frequencies,
)
from ..persistence.corpus_store import CorpusStore
from ..persistence.run_store import RunStore
from ..processes import get_family
from ..processes.random_machine import corpus_entry, corpus_seeds
from .machine import EpsilonMachine, all_words, minimize, validate, word_probability
from .reports import (
    CheckResult,
    CurvePoint,
    Horizon,
    MeasureReport,
    SurveyRecord,
    SurveyReport,
    SWEEP_COLUMNS,
    SweepSpec,
    VerifyReport,
    format_horizon,
    format_order,
)

log = logging.getLogger(__name__)

ORACLE_TOL = 1e-10
LOWER_BOUND_TOL = 1e-6
UPPER_BOUND_TOL = 1e-9
OVERLAP_MONOTONE_TOL = 1e-12


def _finite(order) -> bool:
    return order is not None and not math.isinf(order)


def _map(fn: Callable, jobs: Sequence[Any], workers: int) -> List[Any]:
    """Ordered map, through a process pool when workers > 1."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


# ---------- pool workers (module level so they pickle) ----------

def _sweep_point(job: Dict[str, Any]) -> List[Dict[str, str]]:
    spec: SweepSpec = job["spec"]
    config: LabConfig = job["config"]
    param = job["param"]
    name = ""
    try:
        m = job["machine"]
        if m is None:
            family = get_family(spec.family)
            params = dict(spec.params)
            params[family.sweep_parameter] = param
            m = family.build(**params)
        name = m.name
        ee = excess_entropy(
            m,
            tol=config.excess_tol,
            max_L=config.horizon_for(m.n_symbols),
            cap=config.block_cap_for(m.n_symbols),
            markov=markov_order(m, config.subset_budget),
        )
        C_mu = statistical_complexity(m)
        points = cq_curve(m, spec.horizons, spec.method, config.oracle_word_cap, config.oracle_dim_cap)
    except LabError as exc:
        log.warning("sweep point %s failed: %s", param, exc)
        status = f"error:{type(exc).__name__}"
        return _failed_rows(name or str(spec.family), param, spec.horizons, status)

    extra = {"C_mu": format_cell(C_mu), "E": format_cell(ee.value), "E_status": ee.status, "status": "ok"}
    return [{**row, **extra} for row in curve_rows(m.name, param, points)]


def _failed_rows(name: str, param: Optional[float], horizons: Sequence[Horizon], status: str) -> List[Dict[str, str]]:
    blank = dict.fromkeys(SWEEP_COLUMNS, "")
    return [
        {**blank, "name": name, "param": format_cell(param), "L": format_horizon(L), "status": status}
        for L in horizons
    ]


def _survey_one(job: Dict[str, Any]) -> Dict[str, Any]:
    config: LabConfig = job["config"]
    entry = corpus_entry(job["index"], job["seed"], job["n_states"], job["alphabet_size"])
    m = entry.machine
    L_max = job["L_max"]

    pmm = build_pmm(m)
    R = markov_order(m, config.subset_budget)
    k = cryptic_order(pmm)
    curve = [cq(m, L, pmm) for L in range(L_max + 1)]
    steps = [curve[L + 1] - curve[L] for L in range(L_max)]
    max_increase = max(steps, default=0.0)

    positive = True
    min_eig = math.inf
    G_prev = gram_matrix(pmm, 0)
    for L in range(1, L_max + 1):
        G_next = gram_matrix(pmm, L)
        check = jozsa_ratio_check(G_prev, G_next, undefined="carry")
        positive = positive and check.positive
        min_eig = min(min_eig, check.min_eigenvalue)
        G_prev = G_next

    record = SurveyRecord(
        index=entry.index,
        seed=entry.seed,
        n_states=m.n_states,
        markov_order=R,
        cryptic_order=k,
        cq=curve,
        monotone=max_increase <= config.monotone_tol,
        max_increase=max_increase,
        jozsa_positive=positive,
        jozsa_min_eigenvalue=min_eig if math.isfinite(min_eig) else 0.0,
        digest=entry.digest,
    )
    return {"record": record, "manifest": entry.manifest_row()}


class AnalysisLab:
    """
    Front door for every command:
    - analyze: all measures of one machine
    - sweep: C_q curves over a family's parameter grid
    - verify: oracle cross-checks and bound invariants
    - survey: the random-machine monotonicity study
    Every call is logged to the run store when one is attached.
    """

    def __init__(self, config: Optional[LabConfig] = None, run_store: Optional[RunStore] = None):
        self.config = config or LabConfig()
        self.run_store = run_store

    def _note(self, tag: str, text: str) -> None:
        log.info("%s: %s", tag, text)
        if self.run_store is not None:
            self.run_store.log_event(tag, text)

    # ---------- analyze ----------

    def analyze(
        self,
        m: EpsilonMachine,
        L_max: Optional[int] = None,
        include_inf: bool = True,
        minimize_first: bool = False,
    ) -> MeasureReport:
        cfg = self.config
        L_max = cfg.curve_max_L if L_max is None else int(L_max)
        notes: List[str] = []

        report = validate(m)
        if not report.ok:
            notes.extend(f"{v.rule}:{v.context}" for v in report.violations)
        if not report.minimal:
            if minimize_first:
                m = minimize(m)
                notes.append("minimized from a non-minimal presentation")
                report = validate(m)
            else:
                notes.append("non-minimal presentation; measures refer to it as given")

        R = markov_order(m, cfg.subset_budget)
        if R is None:
            notes.append("markov order unknown: subset budget exhausted")
        h = entropy_rate(m)
        ee = excess_entropy(
            m,
            tol=cfg.excess_tol,
            max_L=cfg.horizon_for(m.n_symbols),
            cap=cfg.block_cap_for(m.n_symbols),
            markov=R,
            h_mu=h,
        )
        pmm = build_pmm(m)
        k = cryptic_order(pmm)

        out = MeasureReport(
            name=m.name,
            n_states=m.n_states,
            alphabet_size=m.n_symbols,
            h_mu=h,
            C_mu=statistical_complexity(m),
            E=ee.value,
            E_status=ee.status,
            E_horizon=ee.horizon,
            E_last_increment=ee.last_increment,
            block_entropies=list(enumerate(ee.block_entropies)),
            markov_order=R,
            cryptic_order=k,
            minimal=report.minimal,
            counifilar=report.counifilar,
            noncounifilar_states=tuple(sorted(report.noncounifilar_states)),
            cq={L: cq(m, L, pmm) for L in range(L_max + 1)},
            spectral_radius=spectral_radius(pmm),
            notes=notes,
        )
        if include_inf:
            try:
                out.cq_inf = cq(m, math.inf, pmm)
                out.cq_inf_error = asymptotic_error_bound(pmm, L_max)
            except SingularOverlapError as exc:
                log.warning("no asymptotic C_q for %r: %s", m.name, exc)
                notes.append("asymptotic overlaps singular")

        self._note("analyze", f"{m.name} R={format_order(R)} k={format_order(k)} E={ee.status}")
        return out

    # ---------- curves and sweeps ----------

    def curve(self, m: EpsilonMachine, horizons: Iterable[Horizon], method: str = "gram") -> List[CurvePoint]:
        return cq_curve(m, horizons, method, self.config.oracle_word_cap, self.config.oracle_dim_cap)

    def sweep(self, spec: SweepSpec, machine: Optional[EpsilonMachine] = None) -> List[Dict[str, str]]:
        """One row per (param, L, method) in grid order."""
        if machine is None and spec.family and not get_family(spec.family).sweep_parameter:
            raise ParameterError(f"family {spec.family!r} has no probability parameter to sweep")
        jobs = [
            {"spec": spec, "config": self.config, "param": param, "machine": machine}
            for param in spec.grid()
        ]
        rows = [row for chunk in _map(_sweep_point, jobs, self.config.workers) for row in chunk]
        failed = sum(1 for r in rows if r["status"] != "ok")
        self._note("sweep", f"{spec.family or spec.machine_path}: {len(rows)} rows, {failed} failed")
        return rows

    # ---------- verify ----------

    def verify(self, machines: Iterable[EpsilonMachine], L_max: int = 5, seed: int = 0) -> VerifyReport:
        out = VerifyReport()
        rng = np.random.default_rng(seed)
        for m in machines:
            checks = self._verify_machine(m, L_max, rng)
            out.checks.extend(checks)
        self._note("verify", f"{len(out.checks)} checks, {len(out.failures)} failed")
        return out

    def _verify_machine(self, m: EpsilonMachine, L_max: int, rng: np.random.Generator) -> List[CheckResult]:
        cfg = self.config
        checks: List[CheckResult] = []

        def run(invariant: str, fn: Callable[[], str]) -> None:
            try:
                detail = fn()
                checks.append(CheckResult(m.name, invariant, not detail, detail))
            except LabError as exc:
                checks.append(CheckResult(m.name, invariant, False, f"{type(exc).__name__}: {exc}"))

        report = validate(m)
        for v in report.violations:
            checks.append(CheckResult(m.name, v.rule, False, f"{v.context} = {v.value!r}"))
        if report.ok:
            checks.append(CheckResult(m.name, "validation", True))

        pmm = build_pmm(m)
        horizons = [L for L in range(L_max + 1) if m.n_symbols ** L <= cfg.oracle_word_cap]
        gram = {L: cq(m, L, pmm) for L in range(L_max + 1)}

        def oracle() -> str:
            worst = max(
                abs(gram[L] - cq_bruteforce(m, L, cfg.oracle_word_cap, cfg.oracle_dim_cap))
                for L in horizons
            )
            return "" if worst <= ORACLE_TOL else f"max |gram - brute| = {worst:.3g}"

        def bounds() -> str:
            C_mu = statistical_complexity(m)
            E = excess_entropy(
                m, tol=cfg.excess_tol, max_L=cfg.horizon_for(m.n_symbols),
                cap=cfg.block_cap_for(m.n_symbols), markov=markov_order(m, cfg.subset_budget),
            ).value
            if abs(gram[0] - C_mu) > ORACLE_TOL:
                return f"C_q(0) = {gram[0]!r} != C_mu = {C_mu!r}"
            for L, v in gram.items():
                if not (E - LOWER_BOUND_TOL <= v <= C_mu + UPPER_BOUND_TOL):
                    return f"C_q({L}) = {v!r} outside [E, C_mu] = [{E!r}, {C_mu!r}]"
            return ""

        def overlap_monotone() -> str:
            prev = gram_matrix(pmm, 0).entries
            for L in range(1, L_max + 1):
                cur = gram_matrix(pmm, L).entries
                drop = float(np.max(prev - cur))
                if drop > OVERLAP_MONOTONE_TOL:
                    return f"overlap decreased by {drop:.3g} at L = {L}"
                prev = cur
            return ""

        def orders() -> str:
            R = markov_order(m, cfg.subset_budget)
            k = cryptic_order(pmm)
            if _finite(R) and _finite(k) and k > R:
                return f"k = {format_order(k)} > R = {format_order(R)}"
            return ""

        def measurement() -> str:
            L = min(3, max(horizons))
            start = int(np.argmax(m.stationary))
            draws = measure_simulate_many(m, L, start, cfg.measurement_draws, seed=rng)
            empirical = word_frequencies(draws)
            classical = {w: word_probability(m, start, w)[0] for w in all_words(m, L)}
            tv = total_variation(empirical, classical)
            return "" if tv <= cfg.measurement_tv else f"total variation {tv:.4f} at L = {L}"

        run("oracle-equivalence", oracle)
        run("cq-bounds", bounds)
        run("overlap-monotonicity", overlap_monotone)
        run("order-inequality", orders)
        run("measurement-statistics", measurement)

        for c in checks:
            if not c.passed:
                log.warning("verify %s: %s failed (%s)", c.machine, c.invariant, c.detail)
        return checks

    # ---------- survey ----------

    def survey(
        self,
        n_machines: int,
        n_min: int = 2,
        n_max: int = 7,
        seed: int = 0,
        L_max: int = 8,
        alphabet_size: int = 2,
        store: Optional[CorpusStore] = None,
    ) -> SurveyReport:
        jobs = [
            {"index": i, "seed": child, "n_states": n, "alphabet_size": alphabet_size,
             "L_max": L_max, "config": self.config}
            for i, child, n in corpus_seeds(n_machines, n_min, n_max, seed)
        ]
        results = _map(_survey_one, jobs, self.config.workers)
        out = SurveyReport([r["record"] for r in results])

        if store is not None:
            manifest = [r["manifest"] for r in results]
            drifted = store.mismatches(manifest)
            if drifted:
                log.warning("corpus digests changed for machines %s", drifted[:10])
            store.record(manifest, {"seed": seed, "n_min": n_min, "n_max": n_max,
                                    "alphabet_size": alphabet_size})

        for r in out.monotonicity_violations:
            log.warning("C_q rose by %.3g on random-%04d (seed %d)", r.max_increase, r.index, r.seed)
        self._note("survey", " ".join(f"{k}={v}" for k, v in out.summary().items()))
        return out
