"""Triangular solves, blocked recursively over the engine's GEMM.

Only the two cases the factorizations need:
  right_lower_trans_nonunit : solve X * tril(tri)^T = alpha*b
  left_lower_notrans_unit   : solve unit_tril(tri) * X = alpha*b
b is overwritten with X. Above a 32x32 base case (direct substitution) the
triangle is split in half and the off-diagonal block is applied with gemm,
so parallelism and blocking come from the layer below.
"""
from __future__ import annotations

from typing import Optional

from numba import njit

from ..errors import ShapeError, SingularMatrixError
from ..views import MatrixView, Range
from .config import KernelConfig
from .gemm import gemm

__all__ = ["trsm", "RIGHT_LOWER_TRANS_NONUNIT", "LEFT_LOWER_NOTRANS_UNIT"]

RIGHT_LOWER_TRANS_NONUNIT = "right_lower_trans_nonunit"
LEFT_LOWER_NOTRANS_UNIT = "left_lower_notrans_unit"

_BASE = 32


def trsm(
    case: str,
    alpha: float,
    tri: MatrixView,
    b: MatrixView,
    cfg: Optional[KernelConfig] = None,
    ways: int = 1,
) -> None:
    if tri.m != tri.n:
        raise ShapeError(f"triangular operand must be square, got {tri.shape}")
    if case == RIGHT_LOWER_TRANS_NONUNIT:
        if b.n != tri.n:
            raise ShapeError(f"right solve dims mismatch: b {b.shape}, tri {tri.shape}")
        _solve_right(alpha, tri, b, cfg, ways)
    elif case == LEFT_LOWER_NOTRANS_UNIT:
        if b.m != tri.n:
            raise ShapeError(f"left solve dims mismatch: b {b.shape}, tri {tri.shape}")
        _solve_left(alpha, tri, b, cfg, ways)
    else:
        raise ValueError(f"unknown trsm case {case!r}")


def _solve_right(alpha, tri, b, cfg, ways) -> None:
    n = tri.n
    if b.m == 0 or n == 0:
        return
    if n <= _BASE:
        _base_right(alpha, tri, b)
        return
    n1 = n // 2
    r1, r2 = Range(0, n1), Range.span(n1, n)
    full = Range(0, b.m)
    l11 = tri.subview(r1, r1)
    l21 = tri.subview(r2, r1)
    l22 = tri.subview(r2, r2)
    b1 = b.subview(full, r1)
    b2 = b.subview(full, r2)
    _solve_right(alpha, l11, b1, cfg, ways)
    gemm(-1.0, b1, l21.transposed(), alpha, b2, cfg=cfg, ways=ways)
    _solve_right(1.0, l22, b2, cfg, ways)


def _solve_left(alpha, tri, b, cfg, ways) -> None:
    n = tri.n
    if b.n == 0 or n == 0:
        return
    if n <= _BASE:
        _base_left(alpha, tri, b)
        return
    n1 = n // 2
    r1, r2 = Range(0, n1), Range.span(n1, n)
    full = Range(0, b.n)
    l11 = tri.subview(r1, r1)
    l21 = tri.subview(r2, r1)
    l22 = tri.subview(r2, r2)
    b1 = b.subview(r1, full)
    b2 = b.subview(r2, full)
    _solve_left(alpha, l11, b1, cfg, ways)
    gemm(-1.0, l21, b1, alpha, b2, cfg=cfg, ways=ways)
    _solve_left(1.0, l22, b2, cfg, ways)


# Base cases run as compiled scalar loops with a fixed evaluation order so
# the arithmetic is identical for any operand strides (an implicitly
# transposed problem solves bit-identically to its row-major twin).


@njit(cache=True)
def _base_right_kernel(tbuf, toff, trs, tcs, bbuf, boff, brs, bcs, m, n, alpha):
    if alpha != 1.0:
        for i in range(m):
            for j in range(n):
                bbuf[boff + i * brs + j * bcs] *= alpha
    for j in range(n):
        d = tbuf[toff + j * trs + j * tcs]
        if d == 0.0:
            return j
        for i in range(m):
            acc = bbuf[boff + i * brs + j * bcs]
            for p in range(j):
                acc -= bbuf[boff + i * brs + p * bcs] * tbuf[toff + j * trs + p * tcs]
            bbuf[boff + i * brs + j * bcs] = acc / d
    return -1


@njit(cache=True)
def _base_left_kernel(tbuf, toff, trs, tcs, bbuf, boff, brs, bcs, n, ncols, alpha):
    if alpha != 1.0:
        for i in range(n):
            for c in range(ncols):
                bbuf[boff + i * brs + c * bcs] *= alpha
    for i in range(1, n):
        for c in range(ncols):
            acc = bbuf[boff + i * brs + c * bcs]
            for p in range(i):
                acc -= tbuf[toff + i * trs + p * tcs] * bbuf[boff + p * brs + c * bcs]
            bbuf[boff + i * brs + c * bcs] = acc


def _base_right(alpha, tri, b) -> None:
    bad = _base_right_kernel(
        tri.storage, tri.offset, tri.rs, tri.cs,
        b.storage, b.offset, b.rs, b.cs,
        b.m, tri.n, float(alpha),
    )
    if bad >= 0:
        raise SingularMatrixError(bad)


def _base_left(alpha, tri, b) -> None:
    _base_left_kernel(
        tri.storage, tri.offset, tri.rs, tri.cs,
        b.storage, b.offset, b.rs, b.cs,
        tri.n, b.n, float(alpha),
    )
