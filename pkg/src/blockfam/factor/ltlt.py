"""Pivoted factorization of skew-symmetric matrices and the Pfaffian.

Factors P*X*P^T = L*T*L^T with L unit lower triangular (first column e_1)
and T tridiagonal skew-symmetric. Only the strict lower triangle of x is
read; the strict upper is implied by negation and never touched.

Elimination j pivots the largest |X[i,j]| (i > j) into row j+1 with a
two-sided symmetric swap, divides out the Gauss multipliers m (stored as
column j+1 of L, physically in column j of x), and applies the two-sided
rank-2 update X[i,c] += m[i]*w[c] - w[i]*m[c] (w is column j+1). The
unblocked stepper applies that update right-looking across the trailing
matrix.

The blocked form defers every rank-2 update instead: within a panel of
eliminations k..k+b-1 each column is brought up to date only when the
stepper is about to use it (a small multiply against the panel's recorded
m/w history, whose rows are swapped together with the matrix so pivoting
stays consistent), and after the panel the entire pending trailing update
collapses to one sandwich product

    X_22 := X_22 - A * That * A^T,

where A is the stored multiplier block plus the lookahead column
(x[k+b+1:, k:k+b+1], one contiguous subview) and That has subdiagonal
(t[k+1], ..., t[k+b-1], 1). This is where the pack-fused engine earns its
keep: T*A^T is absorbed into packing, so no k-by-n intermediate exists.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from ..control import ControlNode, check_valid, default_tree, resolve_config
from ..engine import sandwich_skew
from ..errors import ShapeError, SkewSymmetryError
from ..views import MatrixView, Range, partition_steps
from .pivots import PivotVector

__all__ = ["TridiagSkew", "ltlt_pivoted", "pfaffian", "unit_lower_from_storage"]


@dataclass(frozen=True)
class TridiagSkew:
    """T[i+1,i] = t[i] = -T[i,i+1], zero elsewhere."""

    t: np.ndarray
    n: int

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n))
        for i, v in enumerate(np.asarray(self.t, dtype=np.float64)):
            dense[i + 1, i] = v
            dense[i, i + 1] = -v
        return dense


@njit(cache=True)
def _skew_rank2_update(buf, off, rs, cs, n, c_lo, c_hi, mvec, wvec):
    # x[i,c] += m[i]*w[c] - w[i]*m[c] on the stored lower triangle
    for c in range(c_lo, c_hi + 1):
        wc = wvec[c]
        mc = mvec[c]
        for i in range(c + 1, n):
            buf[off + i * rs + c * cs] += mvec[i] * wc - wvec[i] * mc


def _swap_lower(xn: np.ndarray, a: int, b: int) -> None:
    """Two-sided symmetric swap of indices a < b on lower-stored skew data.

    Also swaps the already-stored multiplier columns (they live to the left
    of the active column, in the same rows)."""
    if a == b:
        return
    tmp = xn[a, :a].copy()
    xn[a, :a] = xn[b, :a]
    xn[b, :a] = tmp
    mid = xn[a + 1 : b, a].copy()
    xn[a + 1 : b, a] = -xn[b, a + 1 : b]
    xn[b, a + 1 : b] = -mid
    xn[b, a] = -xn[b, a]
    tmp = xn[b + 1 :, a].copy()
    xn[b + 1 :, a] = xn[b + 1 :, b]
    xn[b + 1 :, b] = tmp


def ltlt_pivoted(
    x: MatrixView, tree: Optional[ControlNode] = None
) -> tuple[PivotVector, TridiagSkew]:
    """Factor P*X*P^T = L*T*L^T in place; returns (pivots, T).

    L's subdiagonal columns overwrite x shifted one column left (column j+1
    of L sits in column j of x); use unit_lower_from_storage to expand it.
    """
    n = x.n
    if x.m != n:
        raise ShapeError(f"square matrix required, got {x.shape}")
    if tree is None:
        tree = default_tree("ltlt", n, x.dtype)
    check_valid(tree, op="ltlt")
    cfg = resolve_config(tree, x.dtype)
    piv = np.arange(n, dtype=np.int64)
    t = np.zeros(max(n - 1, 0), dtype=x.dtype.np)
    if n <= 1:
        return PivotVector(piv), TridiagSkew(t, n)

    xn = x.to_numpy()
    n_elims = n - 1
    if not tree.is_blocked:
        _unblocked_rightlooking(x, xn, piv, t)
        return PivotVector(piv), TridiagSkew(t, n)

    wbuf = np.zeros((n, min(tree.bs, n_elims)), dtype=x.dtype.np)
    for step in partition_steps(n_elims, tree.bs):
        k, b = step.r1.start, step.r1.len
        for j in range(k, k + b):
            p = j + 1 + int(np.argmax(np.abs(xn[j + 1 :, j])))
            if p != j + 1:
                _swap_lower(xn, j + 1, p)
                wbuf[[j + 1, p], :] = wbuf[[p, j + 1], :]
                piv[j + 1] = p
            h = j - k
            if h > 0 and j + 2 <= n - 1:
                # bring column j+1 current against the panel's m/w history
                xn[j + 2 :, j + 1] += xn[j + 2 :, k:j] @ wbuf[j + 1, :h]
                xn[j + 2 :, j + 1] -= wbuf[j + 2 :, :h] @ xn[j + 1, k:j]
            alpha = xn[j + 1, j]
            t[j] = alpha
            if j + 2 >= n:
                continue
            if alpha != 0.0:
                m_col = xn[j + 2 :, j] / alpha
            else:
                m_col = np.zeros(n - j - 2, dtype=xn.dtype)
            wbuf[j + 2 :, h] = xn[j + 2 :, j + 1]
            xn[j + 2 :, j] = m_col  # L column j+1, stored shifted
        trail = step.r1.end + 1
        if trail < n:
            c22 = x.subview(Range.span(trail, n), Range.span(trail, n))
            a_blk = x.subview(Range.span(trail, n), Range.span(k, step.r1.end + 1))
            that = np.empty(b, dtype=np.float64)
            that[: b - 1] = t[k + 1 : k + b]
            that[b - 1] = 1.0
            sandwich_skew(c22, a_blk, that, cfg=cfg, ways=tree.ways)
    return PivotVector(piv), TridiagSkew(t, n)


def _unblocked_rightlooking(x: MatrixView, xn: np.ndarray, piv: np.ndarray, t: np.ndarray) -> None:
    n = x.n
    mvec = np.zeros(n, dtype=x.dtype.np)
    wvec = np.zeros(n, dtype=x.dtype.np)
    for j in range(n - 1):
        p = j + 1 + int(np.argmax(np.abs(xn[j + 1 :, j])))
        if p != j + 1:
            _swap_lower(xn, j + 1, p)
            piv[j + 1] = p
        alpha = xn[j + 1, j]
        t[j] = alpha
        if j + 2 >= n:
            continue
        if alpha != 0.0:
            m_col = xn[j + 2 :, j] / alpha
        else:
            m_col = np.zeros(n - j - 2, dtype=xn.dtype)
        mvec[j + 2 :] = m_col
        wvec[j + 2 :] = xn[j + 2 :, j + 1]
        xn[j + 2 :, j] = m_col  # L column j+1, stored shifted
        if alpha != 0.0 and j + 2 <= n - 1:
            _skew_rank2_update(x.storage, x.offset, x.rs, x.cs, n, j + 2, n - 1, mvec, wvec)


def unit_lower_from_storage(x: MatrixView) -> np.ndarray:
    """Expand the shifted in-place L storage into a dense unit lower L."""
    n = x.n
    xn = x.to_numpy()
    ell = np.eye(n, dtype=np.float64)
    for j in range(1, n):
        ell[j + 1 :, j] = xn[j + 1 :, j - 1]
    return ell


def pfaffian(x: MatrixView, tree: Optional[ControlNode] = None) -> float:
    """Pfaffian of an even-order skew-symmetric matrix (odd order gives 0).

    Uses the pivoted tridiagonal factorization on a copy of x:
    pf(X) = det(P) * pf(T), and pf of the skew tridiagonal is the product
    of its odd-position superdiagonal entries, prod over even i of -t[i].
    """
    n = x.n
    if x.m != n:
        raise ShapeError(f"square matrix required, got {x.shape}")
    xn = x.to_numpy()
    scale = float(np.max(np.abs(xn))) if n else 0.0
    if n and float(np.max(np.abs(xn + xn.T))) > n * x.dtype.eps * scale:
        raise SkewSymmetryError("input is not skew-symmetric to working precision")
    if n % 2 == 1:
        return 0.0
    if n == 0:
        return 1.0
    from ..views import make_view

    work = make_view(n, n, x.dtype, fill=xn)
    piv, tri = ltlt_pivoted(work, tree)
    pf_t = 1.0
    for i in range(0, n - 1, 2):
        pf_t *= -float(tri.t[i])
    return piv.sign() * pf_t
