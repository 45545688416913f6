"""LU with partial pivoting and the paired triangular solves."""
from __future__ import annotations

import warnings
from typing import Optional

import numpy as np
from numba import njit

from ..control import ControlNode, check_valid, default_tree, resolve_config
from ..engine import LEFT_LOWER_NOTRANS_UNIT, KernelConfig, gemm, trsm
from ..errors import ShapeError, SingularFactorWarning, SingularMatrixError
from ..views import MatrixView, Range, partition_steps
from .pivots import PivotVector, apply_pivots

__all__ = ["lu_partial", "lu_solve"]


@njit(cache=True)
def _lu_unblocked(buf, off, rs, cs, m, n, piv):
    """Partial-pivoted elimination; ties take the smallest row index.

    Returns the first exactly-zero pivot column, or -1. A zero pivot leaves
    U[k,k]=0 and elimination continues with the remaining columns.
    """
    sing = -1
    steps = min(m, n)
    for k in range(steps):
        p = k
        best = abs(buf[off + k * rs + k * cs])
        for i in range(k + 1, m):
            v = abs(buf[off + i * rs + k * cs])
            if v > best:
                best = v
                p = i
        piv[k] = p
        if best == 0.0:
            if sing < 0:
                sing = k
            continue
        if p != k:
            for j in range(n):
                tmp = buf[off + k * rs + j * cs]
                buf[off + k * rs + j * cs] = buf[off + p * rs + j * cs]
                buf[off + p * rs + j * cs] = tmp
        d = buf[off + k * rs + k * cs]
        for i in range(k + 1, m):
            buf[off + i * rs + k * cs] /= d
        for j in range(k + 1, n):
            u = buf[off + k * rs + j * cs]
            for i in range(k + 1, m):
                buf[off + i * rs + j * cs] -= buf[off + i * rs + k * cs] * u
    return sing


def lu_partial(a: MatrixView, tree: Optional[ControlNode] = None) -> PivotVector:
    """Factor P*a = L*U in place: unit-lower L below the diagonal, U on and
    above. Returns the pivot vector; warns on exactly-zero pivot columns."""
    m, n = a.shape
    steps = min(m, n)
    if tree is None:
        tree = default_tree("lu", steps, a.dtype)
    check_valid(tree, op="lu")
    piv = np.arange(steps, dtype=np.int64)
    sing = _run(a, tree, resolve_config(tree, a.dtype), piv, 0)
    if sing >= 0:
        warnings.warn(
            f"exactly-zero pivot column {sing}: U is singular there",
            SingularFactorWarning,
            stacklevel=2,
        )
    return PivotVector(piv)


def _run(a: MatrixView, node: ControlNode, cfg: KernelConfig, piv: np.ndarray, base: int) -> int:
    m, n = a.shape
    steps = min(m, n)
    if steps == 0:
        return -1
    if not node.is_blocked:
        local = np.empty(steps, dtype=np.int64)
        sing = _lu_unblocked(a.storage, a.offset, a.rs, a.cs, m, n, local)
        piv[:steps] = local
        return -1 if sing < 0 else base + sing
    ways = node.ways
    first_sing = -1
    for step in partition_steps(steps, node.bs):
        k, b = step.r1.start, step.r1.len
        rows = Range.span(k, m)
        panel = a.subview(rows, step.r1)
        child = node.child or ControlNode(op="lu", variant="unblocked")
        piv_local = np.arange(b, dtype=np.int64)
        sing = _run(panel, child, child.effective_config(cfg), piv_local, base + k)
        if sing >= 0 and first_sing < 0:
            first_sing = sing
        piv[k : k + b] = k + piv_local
        left = a.subview(rows, Range(0, k))
        right = a.subview(rows, Range.span(k + b, n))
        local_piv = PivotVector(piv_local)
        apply_pivots(left, local_piv)
        apply_pivots(right, local_piv)
        if k + b < n:
            a11 = a.subview(step.r1, step.r1)
            a12 = a.subview(step.r1, Range.span(k + b, n))
            trsm(LEFT_LOWER_NOTRANS_UNIT, 1.0, a11, a12, cfg=cfg, ways=ways)
            if k + b < m:
                a21 = a.subview(Range.span(k + b, m), step.r1)
                a22 = a.subview(Range.span(k + b, m), Range.span(k + b, n))
                gemm(-1.0, a21, a12, 1.0, a22, cfg=cfg, ways=ways)
    return first_sing


def lu_solve(factored: MatrixView, piv: PivotVector, b: MatrixView, ways: int = 1) -> None:
    """b := A^-1 b given the in-place LU of the square matrix A."""
    n = factored.m
    if factored.n != n:
        raise ShapeError(f"solve needs a square factor, got {factored.shape}")
    if b.m != n:
        raise ShapeError(f"rhs rows {b.m} != {n}")
    apply_pivots(b, piv, "forward")
    trsm(LEFT_LOWER_NOTRANS_UNIT, 1.0, factored, b, ways=ways)
    un = factored.to_numpy()
    bn = b.to_numpy()
    for i in range(n - 1, -1, -1):
        d = un[i, i]
        if d == 0.0:
            raise SingularMatrixError(i, "U factor")
        if i + 1 < n:
            bn[i, :] -= un[i, i + 1 :] @ bn[i + 1 :, :]
        bn[i, :] /= d
