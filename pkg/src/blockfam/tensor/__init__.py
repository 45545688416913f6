"""Block-scatter tensor views and contraction through the matrix engine."""
from .contract import ContractionPlan, contract, plan_contraction
from .scatter import BlockScatterView, block_scatter
from .types import MAX_RANK, ContractionSpec, TensorView, make_tensor

__all__ = [
    "TensorView",
    "make_tensor",
    "ContractionSpec",
    "MAX_RANK",
    "BlockScatterView",
    "block_scatter",
    "ContractionPlan",
    "plan_contraction",
    "contract",
]
