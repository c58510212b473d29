from .config import LabConfig
from .core.machine import EpsilonMachine, minimize, parse_machine, validate
from .core.orchestrator import AnalysisLab
from .measures.classical import excess_entropy, markov_order, statistical_complexity
from .measures.pair_merger import build_pmm, cryptic_order, gram_matrix, gram_matrix_asymptotic
from .measures.q_machine import cq, cq_bruteforce

__all__ = [
    "AnalysisLab",
    "EpsilonMachine",
    "LabConfig",
    "build_pmm",
    "cq",
    "cq_bruteforce",
    "cryptic_order",
    "excess_entropy",
    "gram_matrix",
    "gram_matrix_asymptotic",
    "markov_order",
    "minimize",
    "parse_machine",
    "statistical_complexity",
    "validate",
]
