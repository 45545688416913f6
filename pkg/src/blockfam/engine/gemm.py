"""Five-loop level-3 drivers: GEMM, GEMMT, SYRK, and the fused skew sandwich.

The driver walks nc -> kc -> mc cache blocks around the compiled macro
kernel. B blocks are packed once per (nc, kc) iteration; A blocks are packed
per mc block by the worker that owns that block. Parallelism (`ways`)
partitions the mc loop across a WorkerTeam with a barrier per kc block, so
every C micro-tile has a single writer and sees its kc updates in ascending
order - outputs are bit-identical for any ways.

All operands are addressed through scatter vectors; MatrixView inputs take
the affine fast path, block-scatter tensor facades gather per element.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import AliasingError, ShapeError
from ..views import DType, MatrixView, views_overlap
from .config import KernelConfig, default_config
from .kernels import (
    get_macro_kernel,
    pack_a_block,
    pack_b_block,
    pack_b_block_tridiag,
    scale_scatter,
)
from .packing import PackedPanel
from .team import WorkerTeam, chunk_evenly
from .workspace import workspace

__all__ = [
    "ScatterMatrix",
    "scatter_from_view",
    "gemm_scatter",
    "gemm",
    "gemmt_lower",
    "syrk_lower",
    "sandwich_skew",
    "microkernel",
]


@dataclass(frozen=True)
class ScatterMatrix:
    """Matrix facade for the engine: element (i, j) is buf[rscat[i] + cscat[j]].

    rbs/cbs summarize mr/nr-sized index blocks: the common stride within the
    block, or 0 when the block's offsets are not an arithmetic progression.
    """

    buf: np.ndarray
    rscat: np.ndarray
    cscat: np.ndarray
    rbs: np.ndarray
    cbs: np.ndarray
    m: int
    n: int
    dtype: DType


def scatter_from_view(v: MatrixView, mr: int, nr: int) -> ScatterMatrix:
    if v.rs < 0 or v.cs < 0:
        raise ShapeError("engine packing requires non-negative strides (use transposed views)")
    rscat = v.offset + np.arange(v.m, dtype=np.int64) * v.rs
    cscat = np.arange(v.n, dtype=np.int64) * v.cs
    rbs = np.full(max(1, (v.m + mr - 1) // mr), v.rs, dtype=np.int64)
    cbs = np.full(max(1, (v.n + nr - 1) // nr), v.cs, dtype=np.int64)
    return ScatterMatrix(v.storage, rscat, cscat, rbs, cbs, v.m, v.n, v.dtype)


def gemm_scatter(
    alpha: float,
    a: ScatterMatrix,
    b: ScatterMatrix,
    beta: float,
    c: ScatterMatrix,
    cfg: KernelConfig,
    ways: int = 1,
    lower_only: bool = False,
    tridiag_t: Optional[np.ndarray] = None,
) -> None:
    """c := beta*c + alpha*a*b (optionally only the lower triangle of c).

    When tridiag_t is given, the B operand is read through the pack-time
    transform W = T*b, so the product computed is alpha*a*(T*b) with no
    intermediate W ever allocated.
    """
    m, k = a.m, a.n
    n = b.n
    if b.m != k or c.m != m or c.n != n:
        raise ShapeError(
            f"gemm dims mismatch: a {a.m}x{a.n}, b {b.m}x{b.n}, c {c.m}x{c.n}"
        )
    if m == 0 or n == 0:
        return
    acc = cfg.acc_dtype.np
    alpha_t = acc.type(alpha)
    beta_t = acc.type(beta)
    one = acc.type(1.0)
    if alpha_t == 0.0 and beta_t == 1.0:
        return
    if k == 0 or alpha_t == 0.0:
        if beta_t != 1.0:
            scale_scatter(c.buf, c.rscat, c.cscat, m, n, beta_t, lower_only)
        return

    mr, nr, mc, kc, nc = cfg.mr, cfg.nr, cfg.mc, cfg.kc, cfg.nc
    macro = get_macro_kernel(mr, nr)
    tvec = None if tridiag_t is None else np.asarray(tridiag_t, dtype=acc)

    ic_starts = list(range(0, m, mc))
    n_workers = max(1, min(ways, len(ic_starts)))
    chunks = chunk_evenly(ic_starts, n_workers)
    bbuf = workspace.checkout(kc * nc, acc)
    abufs = [workspace.checkout(mc * kc, acc) for _ in chunks]
    tiles = [np.empty(mr * nr, dtype=acc) for _ in chunks]
    team = WorkerTeam(len(chunks))
    try:
        for j0 in range(0, n, nc):
            n_eff = min(nc, n - j0)
            for pidx, k0 in enumerate(range(0, k, kc)):
                k_eff = min(kc, k - k0)
                beta_eff = beta_t if pidx == 0 else one
                if tvec is None:
                    pack_b_block(bbuf, b.buf, b.rscat, b.cscat, b.cbs, k0, k_eff, j0, n_eff, nr)
                else:
                    pack_b_block_tridiag(
                        bbuf, b.buf, b.rscat, b.cscat, k0, k_eff, j0, n_eff, nr, tvec, k
                    )

                def run_chunk(
                    chunk=None, abuf=None, tile=None,
                    j0=j0, n_eff=n_eff, k0=k0, k_eff=k_eff, beta_eff=beta_eff,
                ):
                    for i0 in chunk:
                        m_eff = min(mc, m - i0)
                        if lower_only and i0 + m_eff - 1 < j0:
                            continue
                        pack_a_block(
                            abuf, a.buf, a.rscat, a.cscat, a.rbs, i0, m_eff, k0, k_eff, mr
                        )
                        macro(
                            abuf, bbuf, k_eff, m_eff, n_eff,
                            c.buf, c.rscat, c.cscat, i0, j0,
                            alpha_t, beta_eff, lower_only, tile,
                        )

                tasks = [
                    (lambda ch=ch, ab=ab, tl=tl: run_chunk(ch, ab, tl))
                    for ch, ab, tl in zip(chunks, abufs, tiles)
                ]
                team.run(tasks)
    finally:
        team.close()
        for abuf in abufs:
            workspace.checkin(abuf)
        workspace.checkin(bbuf)


def _resolve_cfg(cfg: Optional[KernelConfig], dtype: DType) -> KernelConfig:
    if cfg is None:
        return default_config(dtype)
    if cfg.dtype is not dtype:
        raise ShapeError(f"kernel config dtype {cfg.dtype} != operand dtype {dtype}")
    return cfg


def _check_operands(c: MatrixView, *inputs: MatrixView) -> None:
    for x in inputs:
        if x.dtype is not c.dtype:
            raise ShapeError("mixed operand dtypes are not supported")
        if views_overlap(c, x):
            raise AliasingError("output view aliases an input operand")


def gemm(
    alpha: float,
    a: MatrixView,
    b: MatrixView,
    beta: float,
    c: MatrixView,
    cfg: Optional[KernelConfig] = None,
    ways: int = 1,
) -> None:
    """c := beta*c + alpha*a*b."""
    if a.n != b.m or c.m != a.m or c.n != b.n:
        raise ShapeError(f"gemm dims mismatch: a {a.shape}, b {b.shape}, c {c.shape}")
    _check_operands(c, a, b)
    cfg = _resolve_cfg(cfg, c.dtype)
    gemm_scatter(
        alpha,
        scatter_from_view(a, cfg.mr, cfg.nr),
        scatter_from_view(b, cfg.mr, cfg.nr),
        beta,
        scatter_from_view(c, cfg.mr, cfg.nr),
        cfg,
        ways=ways,
    )


def gemmt_lower(
    alpha: float,
    a: MatrixView,
    b: MatrixView,
    beta: float,
    c: MatrixView,
    cfg: Optional[KernelConfig] = None,
    ways: int = 1,
) -> None:
    """Lower triangle of c := beta*c + alpha*a*b; the strict upper triangle
    is left bit-identical to its prior contents."""
    if c.m != c.n:
        raise ShapeError(f"gemmt needs square c, got {c.shape}")
    if a.n != b.m or c.m != a.m or c.n != b.n:
        raise ShapeError(f"gemmt dims mismatch: a {a.shape}, b {b.shape}, c {c.shape}")
    _check_operands(c, a, b)
    cfg = _resolve_cfg(cfg, c.dtype)
    gemm_scatter(
        alpha,
        scatter_from_view(a, cfg.mr, cfg.nr),
        scatter_from_view(b, cfg.mr, cfg.nr),
        beta,
        scatter_from_view(c, cfg.mr, cfg.nr),
        cfg,
        ways=ways,
        lower_only=True,
    )


def syrk_lower(
    alpha: float,
    a: MatrixView,
    beta: float,
    c: MatrixView,
    cfg: Optional[KernelConfig] = None,
    ways: int = 1,
) -> None:
    """Lower triangle of c := beta*c + alpha*a*a^T."""
    gemmt_lower(alpha, a, a.transposed(), beta, c, cfg=cfg, ways=ways)


def sandwich_skew(
    c: MatrixView,
    a: MatrixView,
    t: np.ndarray,
    cfg: Optional[KernelConfig] = None,
    ways: int = 1,
) -> None:
    """Lower triangle of c := c - a * T * a^T with T skew tridiagonal.

    T has subdiagonal t (T[i+1,i] = t[i] = -T[i,i+1]). The product T*a^T is
    absorbed into the packing of the B operand: peak workspace stays at one
    packed A block plus one packed B block.
    """
    if c.m != c.n:
        raise ShapeError(f"sandwich needs square c, got {c.shape}")
    if a.m != c.m:
        raise ShapeError(f"sandwich dims mismatch: c {c.shape}, a {a.shape}")
    kt = a.n
    t = np.asarray(t, dtype=np.float64)
    if t.shape != (max(kt - 1, 0),):
        raise ShapeError(f"tridiag vector length {t.size} != k - 1 = {kt - 1}")
    _check_operands(c, a)
    cfg = _resolve_cfg(cfg, c.dtype)
    if kt == 0:
        return
    gemm_scatter(
        -1.0,
        scatter_from_view(a, cfg.mr, cfg.nr),
        scatter_from_view(a.transposed(), cfg.mr, cfg.nr),
        1.0,
        scatter_from_view(c, cfg.mr, cfg.nr),
        cfg,
        ways=ways,
        lower_only=True,
        tridiag_t=t,
    )


def microkernel(
    k: int,
    alpha: float,
    a_panel: PackedPanel,
    b_panel: PackedPanel,
    beta: float,
    c: MatrixView,
) -> None:
    """One micro-tile update c := beta*c + alpha*(a_panel . b_panel).

    Panels must each hold a single micro-panel of inner length k; c is the
    mr x nr target with arbitrary strides. The k loop runs in ascending
    order (fixed summation order).
    """
    if a_panel.side != "A" or b_panel.side != "B":
        raise ShapeError("microkernel expects an A panel and a B panel")
    if a_panel.n_panels != 1 or b_panel.n_panels != 1:
        raise ShapeError("microkernel operates on single micro-panels")
    if a_panel.k != k or b_panel.k != k:
        raise ShapeError(f"panel inner length != k = {k}")
    mr, nr = a_panel.panel_dim, b_panel.panel_dim
    if c.shape != (mr, nr):
        raise ShapeError(f"c must be {mr}x{nr}, got {c.shape}")
    if a_panel.buffer.dtype != b_panel.buffer.dtype:
        raise ShapeError("panel dtypes differ")
    acc = a_panel.buffer.dtype.type
    alpha_t, beta_t = acc(alpha), acc(beta)
    if alpha_t == 0.0 and beta_t == 1.0:
        return
    sc = scatter_from_view(c, mr, nr)
    if k == 0 or alpha_t == 0.0:
        if beta_t != 1.0:
            scale_scatter(sc.buf, sc.rscat, sc.cscat, mr, nr, beta_t, False)
        return
    tile = np.empty(mr * nr, dtype=a_panel.buffer.dtype)
    macro = get_macro_kernel(mr, nr)
    macro(
        a_panel.buffer, b_panel.buffer, k, mr, nr,
        sc.buf, sc.rscat, sc.cscat, 0, 0,
        alpha_t, beta_t, False, tile,
    )
