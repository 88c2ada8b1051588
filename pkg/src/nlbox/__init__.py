"""Nonlocal correlation boxes and the distributed protocols they enable."""

from .boolfn import (
    AnfPolynomial,
    BipartiteDecomposition,
    TruthTable,
    anf_from_truth_table,
    builtin_function,
    decompose_bipartite,
    evaluate_anf,
    truth_table_from_anf,
)
from .correlations import (
    BoxInput,
    BoxOutput,
    LocalDeterministic,
    NoisyPR,
    PerfectPR,
    Quantum,
    SharedRandomness,
    Site,
    chsh_score_exact,
    enumerate_local_strategies,
    joint_distribution,
    marginal_distribution,
    sample_box,
)
from .protocol import (
    BoxPool,
    ProtocolResult,
    run_baseline_protocol,
    run_general_protocol,
    run_ip_protocol,
    verify_exhaustive,
)

__all__ = [
    "AnfPolynomial",
    "BipartiteDecomposition",
    "BoxInput",
    "BoxOutput",
    "BoxPool",
    "LocalDeterministic",
    "NoisyPR",
    "PerfectPR",
    "ProtocolResult",
    "Quantum",
    "SharedRandomness",
    "Site",
    "TruthTable",
    "anf_from_truth_table",
    "builtin_function",
    "chsh_score_exact",
    "decompose_bipartite",
    "enumerate_local_strategies",
    "evaluate_anf",
    "joint_distribution",
    "marginal_distribution",
    "run_baseline_protocol",
    "run_general_protocol",
    "run_ip_protocol",
    "sample_box",
    "truth_table_from_anf",
    "verify_exhaustive",
]

__version__ = "0.1.0"
