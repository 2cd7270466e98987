from .bench import generate_benchmark, read_domains, write_benchmark, write_domains
from .metrics import (
    GroundTruth,
    TruthError,
    attribute_precision,
    coverage,
    group_alignments,
    join_attribute_precision,
    join_coverage,
    precision_recall,
)
from .weights import FitError, FitResult, LabeledPair, fit_weights

__all__ = [
    "FitError",
    "FitResult",
    "GroundTruth",
    "LabeledPair",
    "TruthError",
    "attribute_precision",
    "coverage",
    "fit_weights",
    "generate_benchmark",
    "group_alignments",
    "join_attribute_precision",
    "join_coverage",
    "precision_recall",
    "read_domains",
    "write_benchmark",
    "write_domains",
]
