"""Paired comparison of F-measures for two classifiers on a shared test set."""

__version__ = "0.1.0"

from .estimator import (
    ComparisonReport,
    DegenerateDifference,
    FStats,
    InfiniteVariance,
    Undefined,
    compare,
    f_measure,
    jvesr_cov,
    kappa,
    kappa_cov,
    normal_two_sided_p,
)
from .montecarlo import JointPmf, NoRetainedReps, SimResult, run_validation
from .pipeline import Dataset, HarnessReport, run_harness
from .tally import JointCounts, read_csv, tally_from_records

__all__ = [
    "ComparisonReport", "DegenerateDifference", "FStats", "InfiniteVariance",
    "Undefined", "compare", "f_measure", "jvesr_cov", "kappa", "kappa_cov",
    "normal_two_sided_p", "JointPmf", "NoRetainedReps", "SimResult",
    "run_validation", "Dataset", "HarnessReport", "run_harness",
    "JointCounts", "read_csv", "tally_from_records",
]
