"""Exact graded linear algebra: prime fields and integer lattices."""

from .backend import (
    BACKEND_NAME,
    SparseEchelonGF2,
    gf2_eliminate,
    gf2_rank,
    gf2_reduce,
    sparse_gf2_rank,
)
from .integers import (
    AbelianGroupPresentation,
    IntegerMatrix,
    homology_at,
    integer_row_kernel,
    integer_solve_row,
    invariant_factors,
    lattice_row_basis,
    quotient_presentation,
    smith_normal_form,
    subquotient,
)
from .modp import (
    PrimeFieldMatrix,
    SubquotientBasis,
    vec_add,
    vec_entry,
    vec_from_terms,
    vec_is_zero,
    vec_scale,
    vec_support,
    vec_zero,
)

__all__ = [
    "BACKEND_NAME",
    "AbelianGroupPresentation",
    "IntegerMatrix",
    "PrimeFieldMatrix",
    "SparseEchelonGF2",
    "SubquotientBasis",
    "gf2_eliminate",
    "gf2_rank",
    "gf2_reduce",
    "homology_at",
    "integer_row_kernel",
    "integer_solve_row",
    "invariant_factors",
    "lattice_row_basis",
    "quotient_presentation",
    "smith_normal_form",
    "sparse_gf2_rank",
    "subquotient",
    "vec_add",
    "vec_entry",
    "vec_from_terms",
    "vec_is_zero",
    "vec_scale",
    "vec_support",
    "vec_zero",
]
