"""blockfam: families of blocked dense linear and multi-linear algebra
algorithms, selected at runtime by control trees, on a packed micro-kernel
engine with pack-time operation fusion."""
from . import control, engine, factor, oracle, tensor
from .engine import (
    KernelConfig,
    default_config,
    gemm,
    gemmt_lower,
    sandwich_skew,
    syrk_lower,
    trsm,
)
from .control import ControlNode, default_tree, enumerate_trees, parse_tree
from .factor import cholesky, ltlt_pivoted, lu_partial, lu_solve, pfaffian, qr_householder
from .tensor import contract, make_tensor
from .views import DType, MatrixView, Range, make_view, partition_steps

__version__ = "0.1.0"

__all__ = [
    "control",
    "engine",
    "factor",
    "oracle",
    "tensor",
    "DType",
    "MatrixView",
    "Range",
    "make_view",
    "partition_steps",
    "KernelConfig",
    "default_config",
    "gemm",
    "gemmt_lower",
    "syrk_lower",
    "sandwich_skew",
    "trsm",
    "ControlNode",
    "parse_tree",
    "default_tree",
    "enumerate_trees",
    "cholesky",
    "lu_partial",
    "lu_solve",
    "qr_householder",
    "ltlt_pivoted",
    "pfaffian",
    "contract",
    "make_tensor",
    "__version__",
]
