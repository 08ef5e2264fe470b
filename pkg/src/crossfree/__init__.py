"""Operator-valued free probability over crossed products ``M x_alpha G``."""

__version__ = "0.1.0"

from .coeffalgebra import CoeffMatrix, GaussianRational, mat_eq
from .crossedalg import (
    ActionSpec,
    CrossedElement,
    CrossedProduct,
    cond_expect,
    group_trace,
    word_trace,
    x_adjoint,
    x_mul,
)
from .errors import DomainError
from .freeprob import (
    FreenessReport,
    MonomialElement,
    alternating_centered_oracle,
    check_freeness,
    cumulant,
    cumulant_factorized,
    moments_from_cumulants,
    partitioned_moment,
    trace_partitioned,
)
from .groupwords import GroupSpec, GroupWord, parse_word, reduce, sample_word
from .nclattice import NCPartition, enumerate_nc, leq, mobius, nesting_forest, parse_partition

__all__ = [
    "ActionSpec", "CoeffMatrix", "CrossedElement", "CrossedProduct", "DomainError",
    "FreenessReport", "GaussianRational", "GroupSpec", "GroupWord", "MonomialElement",
    "NCPartition", "alternating_centered_oracle", "check_freeness", "cond_expect", "cumulant",
    "cumulant_factorized", "enumerate_nc", "group_trace", "leq", "mat_eq", "mobius",
    "moments_from_cumulants", "nesting_forest", "parse_partition", "parse_word",
    "partitioned_moment", "reduce", "sample_word", "trace_partitioned", "word_trace",
    "x_adjoint", "x_mul",
]
