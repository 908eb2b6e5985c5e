"""Lazy computable subsets of omega with into/within, permutations and densities."""

__version__ = "0.1.0"

from .constructions import (
    BitSource,
    ColumnOracle,
    PartitionFamily,
    RealSpec,
    bernoulli_set,
    build_partition,
    build_xr,
    partition_index,
    real_to_bits,
)
from .density import (
    DensityReport,
    density_at,
    density_report,
    geometric_grid,
    intrinsic_probe,
    principal_checkpoints,
)
from .dsl import evaluate, parse, to_text
from .errors import (
    BudgetExhausted,
    DomainError,
    FillExhausted,
    IndexCapExceeded,
    InjectivityViolation,
    SetExhausted,
)
from .permutations import (
    PermutationHandle,
    apply,
    compose,
    join_hat,
    patch_bijection,
    sample_permutation,
    sparse_subset,
    verify_bijection_prefix,
)
from .sets import (
    EvaluationBudget,
    SetHandle,
    arithmetic,
    column,
    compl,
    count,
    diff,
    empty,
    evens,
    explicit,
    factorials,
    intersect,
    into,
    join,
    member,
    nth,
    odds,
    omega,
    prefix,
    union,
    within,
)

__all__ = [
    "apply",
    "arithmetic",
    "bernoulli_set",
    "BitSource",
    "BudgetExhausted",
    "build_partition",
    "build_xr",
    "column",
    "ColumnOracle",
    "compl",
    "compose",
    "count",
    "density_at",
    "density_report",
    "DensityReport",
    "diff",
    "DomainError",
    "empty",
    "evaluate",
    "EvaluationBudget",
    "evens",
    "explicit",
    "factorials",
    "FillExhausted",
    "geometric_grid",
    "IndexCapExceeded",
    "InjectivityViolation",
    "intersect",
    "into",
    "intrinsic_probe",
    "join",
    "join_hat",
    "member",
    "nth",
    "odds",
    "omega",
    "parse",
    "partition_index",
    "PartitionFamily",
    "patch_bijection",
    "PermutationHandle",
    "prefix",
    "principal_checkpoints",
    "real_to_bits",
    "RealSpec",
    "sample_permutation",
    "SetExhausted",
    "SetHandle",
    "sparse_subset",
    "to_text",
    "union",
    "verify_bijection_prefix",
    "within",
]
