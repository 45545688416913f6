"""Packed micro-panel buffers and the pack-time transform hook."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ShapeError
from ..views import MatrixView
from .config import KernelConfig
from .kernels import pack_a_block, pack_b_block, pack_b_block_tridiag

__all__ = ["PackedPanel", "PackTransform", "pack_panel"]


@dataclass(frozen=True)
class PackTransform:
    """Linear recombination applied while packing (the fusion hook).

    kind "identity" copies; kind "tridiag_skew_right" packs T*src where T is
    the skew-symmetric tridiagonal with subdiagonal t, combining at most two
    adjacent source rows per packed row so no intermediate matrix exists.
    """

    kind: str
    t: Optional[np.ndarray] = None

    IDENTITY = "identity"
    TRIDIAG_SKEW_RIGHT = "tridiag_skew_right"

    def __post_init__(self) -> None:
        if self.kind not in (self.IDENTITY, self.TRIDIAG_SKEW_RIGHT):
            raise ValueError(f"unknown pack transform {self.kind!r}")
        if self.kind == self.TRIDIAG_SKEW_RIGHT and self.t is None:
            raise ValueError("tridiag_skew_right requires a coefficient vector")

    @classmethod
    def identity(cls) -> "PackTransform":
        return cls(cls.IDENTITY)

    @classmethod
    def tridiag_skew_right(cls, t: np.ndarray) -> "PackTransform":
        return cls(cls.TRIDIAG_SKEW_RIGHT, np.asarray(t, dtype=np.float64))


@dataclass(frozen=True)
class PackedPanel:
    """Contiguous micro-panel buffer: n_panels panels of panel_dim x k,
    k-major within each panel, zero padded where the source ran out."""

    buffer: np.ndarray
    panel_dim: int
    k: int
    n_panels: int
    side: str

    def panel(self, p: int) -> np.ndarray:
        size = self.panel_dim * self.k
        return self.buffer[p * size : (p + 1) * size].reshape(self.k, self.panel_dim)


def pack_panel(
    src: MatrixView,
    side: str,
    cfg: KernelConfig,
    transform: Optional[PackTransform] = None,
) -> PackedPanel:
    """Pack one cache block (mc x kc for side A, kc x nc for side B).

    Side A packs mr-row panels, side B nr-column panels. The
    tridiag_skew_right transform is only meaningful on side B and requires
    len(t) == src.m - 1.
    """
    if side not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    if transform is None:
        transform = PackTransform.identity()
    if transform.kind == PackTransform.TRIDIAG_SKEW_RIGHT and side != "B":
        raise ValueError("tridiag_skew_right transform applies to side B only")

    from .gemm import scatter_from_view  # local import to avoid a cycle

    acc = cfg.acc_dtype.np
    if side == "A":
        if src.m > cfg.mc or src.n > cfg.kc:
            raise ShapeError(f"A block {src.m}x{src.n} exceeds mc x kc = {cfg.mc}x{cfg.kc}")
        mr, k = cfg.mr, src.n
        n_panels = max(1, (src.m + mr - 1) // mr) if src.m > 0 else 0
        buf = np.zeros(max(n_panels, 1) * mr * max(k, 0), dtype=acc)
        if src.m > 0 and k > 0:
            acc_view = scatter_from_view(src, cfg.mr, cfg.nr)
            pack_a_block(buf, acc_view.buf, acc_view.rscat, acc_view.cscat, acc_view.rbs, 0, src.m, 0, k, mr)
        return PackedPanel(buf, mr, k, n_panels, "A")

    if src.m > cfg.kc or src.n > cfg.nc:
        raise ShapeError(f"B block {src.m}x{src.n} exceeds kc x nc = {cfg.kc}x{cfg.nc}")
    nr, k = cfg.nr, src.m
    n_panels = max(1, (src.n + nr - 1) // nr) if src.n > 0 else 0
    buf = np.zeros(max(n_panels, 1) * nr * max(k, 0), dtype=acc)
    if src.n > 0 and k > 0:
        acc_view = scatter_from_view(src, cfg.mr, cfg.nr)
        if transform.kind == PackTransform.IDENTITY:
            pack_b_block(buf, acc_view.buf, acc_view.rscat, acc_view.cscat, acc_view.cbs, 0, k, 0, src.n, nr)
        else:
            t = np.asarray(transform.t, dtype=acc)
            if t.shape != (src.m - 1,):
                raise ShapeError(
                    f"tridiag coefficient length {t.size} != source rows - 1 = {src.m - 1}"
                )
            pack_b_block_tridiag(
                buf, acc_view.buf, acc_view.rscat, acc_view.cscat, 0, k, 0, src.n, nr, t, k
            )
    return PackedPanel(buf, nr, k, n_panels, "B")
