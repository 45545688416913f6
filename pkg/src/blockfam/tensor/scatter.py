"""Block-scatter tensor-to-matrix mapping.

Flattens chosen tensor modes into matrix rows and columns via offset
vectors (last listed mode fastest), plus per-block stride summaries that
let the engine's packing take an affine fast path wherever a block of
offsets is an arithmetic progression.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import ShapeError
from ..views import DType
from .types import TensorView

__all__ = ["BlockScatterView", "block_scatter"]


@dataclass(frozen=True, eq=False)
class BlockScatterView:
    """Matrix facade over a tensor: element (i, j) = storage[rscat[i] + cscat[j]].

    rbs[b] is the common offset step within row block b (blocks of mr rows),
    or 0 when that block is not an arithmetic progression; cbs likewise for
    nr-column blocks. A regular strided matrix is the special case with all
    summaries nonzero.
    """

    storage: np.ndarray = field(repr=False)
    dtype: DType
    m: int
    n: int
    rscat: np.ndarray
    cscat: np.ndarray
    rbs: np.ndarray
    cbs: np.ndarray


def _axis_scatter(offset: int, dims: Sequence[int], strides: Sequence[int]) -> np.ndarray:
    """Offsets of the flattened multi-index, last mode fastest."""
    scat = np.array([offset], dtype=np.int64)
    for d, s in zip(dims, strides):
        scat = (scat[:, None] + np.arange(d, dtype=np.int64) * s).ravel()
    return scat


def _block_summary(scat: np.ndarray, bs: int, tail_stride: int) -> np.ndarray:
    """Per-block common stride, 0 for non-affine blocks.

    Single-element blocks report tail_stride (the fastest mode's stride),
    as if the block were padded with the continuing progression.
    """
    n = scat.size
    n_blocks = max(1, (n + bs - 1) // bs) if n > 0 else 1
    out = np.zeros(n_blocks, dtype=np.int64)
    for b in range(n_blocks):
        seg = scat[b * bs : (b + 1) * bs]
        if seg.size <= 1:
            out[b] = tail_stride
            continue
        d = np.diff(seg)
        out[b] = d[0] if (d == d[0]).all() and d[0] != 0 else 0
    return out


def block_scatter(
    t: TensorView,
    row_modes: Sequence[int],
    col_modes: Sequence[int],
    mr: int,
    nr: int,
) -> BlockScatterView:
    """Matricize tensor t with the given mode split.

    row_modes and col_modes must partition all modes of t; the scatter
    vectors linearize each group with its last listed mode fastest.
    """
    row_modes = list(row_modes)
    col_modes = list(col_modes)
    if sorted(row_modes + col_modes) != list(range(t.rank)):
        raise ShapeError(
            f"row modes {row_modes} and col modes {col_modes} must partition "
            f"{t.rank} tensor modes"
        )
    rdims = [t.dims[i] for i in row_modes]
    rstrides = [t.strides[i] for i in row_modes]
    cdims = [t.dims[i] for i in col_modes]
    cstrides = [t.strides[i] for i in col_modes]
    rscat = _axis_scatter(t.offset, rdims, rstrides)
    cscat = _axis_scatter(0, cdims, cstrides)
    m = int(np.prod(rdims)) if rdims else 1
    n = int(np.prod(cdims)) if cdims else 1
    rbs = _block_summary(rscat, mr, rstrides[-1] if rstrides else 0)
    cbs = _block_summary(cscat, nr, cstrides[-1] if cstrides else 0)
    return BlockScatterView(t.storage, t.dtype, m, n, rscat, cscat, rbs, cbs)
