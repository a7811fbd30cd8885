"""Erased configuration model with regularly varying degrees.

Sampling, stub pairing and erasure, exact enumeration on tiny sequences,
closed-form bounds on the erased fraction, and a sweep harness for fitting
its scaling in the graph size.
"""

from .cm_core import (
    ErasureStats,
    Multigraph,
    SimpleGraph,
    empirical_degree_distance,
    erase,
    erasure_batch,
    pair_stubs,
)
from .degree_model import (
    DegreeDistribution,
    DegreeSequence,
    mean_degree,
    sample_degree,
    sample_sequence,
    tail_prob,
)
from .estimators import (
    BoundReport,
    bound_lemma1,
    bound_report,
    clt_scaling_diagnostic,
    erased_identity_rhs,
    no_edge_upper_bound,
    pairwise_exp_sum,
    tauberian_term,
    theoretical_exponent,
)
from .experiment import FitResult, SweepPlan, TrialRecord, fit_exponent, run_sweep, run_trial
from .oracle import ExactResult, enumerate_exact

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "DegreeDistribution",
    "DegreeSequence",
    "ErasureStats",
    "ExactResult",
    "FitResult",
    "Multigraph",
    "SimpleGraph",
    "SweepPlan",
    "TrialRecord",
    "bound_lemma1",
    "bound_report",
    "clt_scaling_diagnostic",
    "empirical_degree_distance",
    "enumerate_exact",
    "erase",
    "erased_identity_rhs",
    "erasure_batch",
    "fit_exponent",
    "mean_degree",
    "no_edge_upper_bound",
    "pair_stubs",
    "pairwise_exp_sum",
    "run_sweep",
    "run_trial",
    "sample_degree",
    "sample_sequence",
    "tail_prob",
    "tauberian_term",
    "theoretical_exponent",
]
