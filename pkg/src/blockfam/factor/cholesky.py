"""The Cholesky family: three unblocked and three blocked variants.

All variants run on the lower triangle; an upper factorization is the same
code on the transposed view (stride swap), which makes the two bitwise
consistent. The blocked step on ranges (R0 processed, R1 active, R2 rest):

  variant 1 (bordered):     A10 := A10 * tril(A00)^-T ; A11 -= A10*A10^T ; A11 := chol(A11)
  variant 2 (left-looking): A11 -= A10*A10^T ; A11 := chol(A11) ;
                            A21 -= A20*A10^T ; A21 := A21 * tril(A11)^-T
  variant 3 (right-looking): A11 := chol(A11) ; A21 := A21 * tril(A11)^-T ;
                            A22 -= A21*A21^T

Unblocked variants are the bs=1 specializations, compiled as scalar loops.
The recursion on A11 dispatches through the control tree's child node.
"""
from __future__ import annotations

import math
from typing import Optional

from numba import njit

from ..control import ControlNode, check_valid, default_tree, resolve_config
from ..engine import RIGHT_LOWER_TRANS_NONUNIT, KernelConfig, gemm, syrk_lower, trsm
from ..errors import NotPositiveDefiniteError, ShapeError
from ..views import MatrixView, partition_steps

__all__ = ["cholesky"]


@njit(cache=True)
def _chol_unblocked1(buf, off, rs, cs, n):
    # bordered: solve the new row against the factored triangle, then sqrt
    for k in range(n):
        for j in range(k):
            s = 0.0
            for p in range(j):
                s += buf[off + k * rs + p * cs] * buf[off + j * rs + p * cs]
            buf[off + k * rs + j * cs] = (buf[off + k * rs + j * cs] - s) / buf[
                off + j * rs + j * cs
            ]
        s = 0.0
        for p in range(k):
            v = buf[off + k * rs + p * cs]
            s += v * v
        d = buf[off + k * rs + k * cs] - s
        if not (d > 0.0):
            return k
        buf[off + k * rs + k * cs] = math.sqrt(d)
    return -1


@njit(cache=True)
def _chol_unblocked2(buf, off, rs, cs, n):
    # left-looking: fold previous columns into the active column, then scale
    for k in range(n):
        s = 0.0
        for p in range(k):
            v = buf[off + k * rs + p * cs]
            s += v * v
        d = buf[off + k * rs + k * cs] - s
        if not (d > 0.0):
            return k
        d = math.sqrt(d)
        buf[off + k * rs + k * cs] = d
        for i in range(k + 1, n):
            s = 0.0
            for p in range(k):
                s += buf[off + i * rs + p * cs] * buf[off + k * rs + p * cs]
            buf[off + i * rs + k * cs] = (buf[off + i * rs + k * cs] - s) / d
    return -1


@njit(cache=True)
def _chol_unblocked3(buf, off, rs, cs, n):
    # right-looking: scale the column, rank-1 update of the trailing triangle
    for k in range(n):
        d = buf[off + k * rs + k * cs]
        if not (d > 0.0):
            return k
        d = math.sqrt(d)
        buf[off + k * rs + k * cs] = d
        for i in range(k + 1, n):
            buf[off + i * rs + k * cs] /= d
        for j in range(k + 1, n):
            ajk = buf[off + j * rs + k * cs]
            for i in range(j, n):
                buf[off + i * rs + j * cs] -= buf[off + i * rs + k * cs] * ajk
    return -1


_UNBLOCKED = {
    "unblocked1": _chol_unblocked1,
    "unblocked2": _chol_unblocked2,
    "unblocked3": _chol_unblocked3,
}


def cholesky(a: MatrixView, uplo: str = "lower", tree: Optional[ControlNode] = None) -> None:
    """In-place Cholesky: tril(a) := L with a = L*L^T (uplo="lower").

    Only the uplo triangle is read or written; the other triangle is left
    bit-identical. uplo="upper" factors a = U^T*U by running the identical
    lower algorithm on the transposed view.
    """
    if a.m != a.n:
        raise ShapeError(f"square matrix required, got {a.shape}")
    if uplo == "upper":
        a = a.transposed()
    elif uplo != "lower":
        raise ValueError(f"uplo must be 'lower' or 'upper', got {uplo!r}")
    if tree is None:
        tree = default_tree("cholesky", a.n, a.dtype)
    check_valid(tree, op="cholesky")
    _run(a, tree, resolve_config(tree, a.dtype), 0)


def _run(a: MatrixView, node: ControlNode, cfg: KernelConfig, base: int) -> None:
    n = a.n
    if n == 0:
        return
    if not node.is_blocked:
        bad = _UNBLOCKED[node.variant](a.storage, a.offset, a.rs, a.cs, n)
        if bad >= 0:
            raise NotPositiveDefiniteError(base + bad)
        return

    ways = node.ways
    for step in partition_steps(n, node.bs):
        r0, r1, r2 = step.r0, step.r1, step.r2
        a00 = a.subview(r0, r0)
        a10 = a.subview(r1, r0)
        a11 = a.subview(r1, r1)
        a20 = a.subview(r2, r0)
        a21 = a.subview(r2, r1)
        a22 = a.subview(r2, r2)
        if node.variant == 1:
            trsm(RIGHT_LOWER_TRANS_NONUNIT, 1.0, a00, a10, cfg=cfg, ways=ways)
            syrk_lower(-1.0, a10, 1.0, a11, cfg=cfg, ways=ways)
            _recurse(a11, node, cfg, base + r1.start)
        elif node.variant == 2:
            syrk_lower(-1.0, a10, 1.0, a11, cfg=cfg, ways=ways)
            _recurse(a11, node, cfg, base + r1.start)
            gemm(-1.0, a20, a10.transposed(), 1.0, a21, cfg=cfg, ways=ways)
            trsm(RIGHT_LOWER_TRANS_NONUNIT, 1.0, a11, a21, cfg=cfg, ways=ways)
        elif node.variant == 3:
            _recurse(a11, node, cfg, base + r1.start)
            trsm(RIGHT_LOWER_TRANS_NONUNIT, 1.0, a11, a21, cfg=cfg, ways=ways)
            syrk_lower(-1.0, a21, 1.0, a22, cfg=cfg, ways=ways)
        else:
            raise ValueError(f"unknown blocked variant {node.variant!r}")


def _recurse(a11: MatrixView, node: ControlNode, cfg: KernelConfig, base: int) -> None:
    child = node.child
    if child is None:
        child = ControlNode(op="cholesky", variant="unblocked3")
    _run(a11, child, child.effective_config(cfg), base)
