"""Level-3 compute engine: packing, micro-kernel, GEMM family, TRSM."""
from .config import KernelConfig, default_config
from .gemm import (
    ScatterMatrix,
    gemm,
    gemm_scatter,
    gemmt_lower,
    microkernel,
    sandwich_skew,
    scatter_from_view,
    syrk_lower,
)
from .packing import PackedPanel, PackTransform, pack_panel
from .team import WorkerTeam, chunk_evenly
from .trsm import LEFT_LOWER_NOTRANS_UNIT, RIGHT_LOWER_TRANS_NONUNIT, trsm
from .workspace import Workspace, workspace

__all__ = [
    "KernelConfig",
    "default_config",
    "ScatterMatrix",
    "scatter_from_view",
    "gemm",
    "gemm_scatter",
    "gemmt_lower",
    "syrk_lower",
    "sandwich_skew",
    "microkernel",
    "PackedPanel",
    "PackTransform",
    "pack_panel",
    "WorkerTeam",
    "chunk_evenly",
    "trsm",
    "RIGHT_LOWER_TRANS_NONUNIT",
    "LEFT_LOWER_NOTRANS_UNIT",
    "Workspace",
    "workspace",
]
