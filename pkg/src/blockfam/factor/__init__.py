"""Control-tree-driven factorization families."""
from .cholesky import cholesky
from .ltlt import TridiagSkew, ltlt_pivoted, pfaffian, unit_lower_from_storage
from .lu import lu_partial, lu_solve
from .pivots import PivotVector, apply_pivots
from .qr import Reflectors, apply_q, form_q, qr_householder

__all__ = [
    "cholesky",
    "lu_partial",
    "lu_solve",
    "PivotVector",
    "apply_pivots",
    "qr_householder",
    "apply_q",
    "form_q",
    "Reflectors",
    "ltlt_pivoted",
    "pfaffian",
    "TridiagSkew",
    "unit_lower_from_storage",
]
