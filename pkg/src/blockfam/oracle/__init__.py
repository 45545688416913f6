"""Independent reference implementations used by tests and acceptance checks.

Deliberately simple and allocation-heavy: a textbook triple loop for matrix
multiply, scalar factorizations, a combinatorial Pfaffian, and a fully
nested-loop tensor contraction. They share nothing with the engine or the
factorization drivers beyond the view types, and they always accumulate in
f64 so f32 results are compared against a higher-precision truth.
"""
from .reference import (
    chol_scalar,
    contract_naive,
    gemm_naive,
    lu_scalar,
    pfaffian_combinatorial,
)

__all__ = [
    "gemm_naive",
    "chol_scalar",
    "lu_scalar",
    "pfaffian_combinatorial",
    "contract_naive",
]
