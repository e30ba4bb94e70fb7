"""Semigroup generation and evaluation for row-finite operators on sequence space.

The package decides, with certificates, whether a finitely-described
row-finite infinite matrix generates a strongly continuous semigroup on the
space of all scalar sequences, evaluates exp(tA) and its Cesàro mean
coordinatewise in exact rational arithmetic with certified truncation
error, and ships a verification harness plus a corpus of reference
operators and counterexamples.
"""

from .errors import (
    DomainError,
    InvalidOperatorError,
    InvalidVectorError,
    OmegaSgError,
    ResourceLimitError,
)
from .operators import (
    DEFAULT_SUPPORT_CAP,
    Rational,
    RowFiniteOperator,
    SequenceVector,
    SparseRow,
    apply,
    build_operator,
    format_rational,
    load_operator,
    load_vector,
    parse_rational,
    power_row,
    project,
    row,
)
from .reachability import (
    Edge,
    FailsStructurally,
    FiniteClosure,
    Generates,
    GeneratorVerdict,
    InfiniteCertificate,
    PeriodicRule,
    QuotientGraph,
    ReachabilityResult,
    StructuralFailureError,
    closure_of_rows,
    decide_generation,
    dependency_closure,
    has_positive_cycle,
    quotient_graph,
)
from .exponential import (
    EvaluationReport,
    FiniteMatrix,
    TailBound,
    cesaro_apply,
    closed_submatrix,
    exp_apply,
    exp_lower,
    exp_upper,
    norm_bound,
    series_on_matrix,
    tail_remainder,
    truncation_order,
)
from .verifier import (
    CheckReport,
    ProbeWitness,
    check_cesaro_identity,
    check_generator_fd,
    check_semigroup_law,
    probe_exact_failure,
)
from .corpus import (
    CorpusEntry,
    get_example,
    list_examples,
    run_entry,
    run_regression,
    smooth_shift_divergence,
)

__version__ = "0.1.0"

__all__ = [
    "CheckReport",
    "CorpusEntry",
    "DEFAULT_SUPPORT_CAP",
    "DomainError",
    "Edge",
    "EvaluationReport",
    "FailsStructurally",
    "FiniteClosure",
    "FiniteMatrix",
    "Generates",
    "GeneratorVerdict",
    "InfiniteCertificate",
    "InvalidOperatorError",
    "InvalidVectorError",
    "OmegaSgError",
    "PeriodicRule",
    "ProbeWitness",
    "QuotientGraph",
    "Rational",
    "ReachabilityResult",
    "ResourceLimitError",
    "RowFiniteOperator",
    "SequenceVector",
    "SparseRow",
    "StructuralFailureError",
    "TailBound",
    "apply",
    "build_operator",
    "cesaro_apply",
    "check_cesaro_identity",
    "check_generator_fd",
    "check_semigroup_law",
    "closed_submatrix",
    "closure_of_rows",
    "decide_generation",
    "dependency_closure",
    "exp_apply",
    "exp_lower",
    "exp_upper",
    "format_rational",
    "get_example",
    "has_positive_cycle",
    "list_examples",
    "load_operator",
    "load_vector",
    "norm_bound",
    "parse_rational",
    "power_row",
    "probe_exact_failure",
    "project",
    "quotient_graph",
    "row",
    "run_entry",
    "run_regression",
    "series_on_matrix",
    "smooth_shift_divergence",
    "tail_remainder",
    "truncation_order",
]
