"""Householder QR: unblocked column sweeps and compact-WY blocked panels.

The factored matrix holds R in its upper triangle and the reflector vectors
(implicit leading 1) below the diagonal; H_j = I - tau_j v_j v_j^T. The
blocked form factors a bs-column panel unblocked, accumulates the panel's
triangular T, and applies (I - V T V^T)^T to the trailing matrix with two
engine GEMMs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..control import ControlNode, check_valid, default_tree, resolve_config
from ..engine import KernelConfig, gemm
from ..errors import ShapeError
from ..views import MatrixView, Range, from_numpy, partition_steps

__all__ = ["Reflectors", "qr_householder", "apply_q", "form_q"]


@dataclass(frozen=True)
class Reflectors:
    """Scalars tau per reflector plus, for blocked panels, (start, T) pairs."""

    taus: np.ndarray
    panels: tuple[tuple[int, np.ndarray], ...] = ()


def qr_householder(a: MatrixView, tree: Optional[ControlNode] = None) -> Reflectors:
    """Factor a = Q*R in place (m >= n); returns the reflector data."""
    m, n = a.shape
    if m < n:
        raise ShapeError(f"qr requires m >= n, got {a.shape}")
    if tree is None:
        tree = default_tree("qr", n, a.dtype)
    check_valid(tree, op="qr")
    cfg = resolve_config(tree, a.dtype)
    taus = np.zeros(n, dtype=a.dtype.np)
    panels: list[tuple[int, np.ndarray]] = []
    if not tree.is_blocked:
        _qr_unblocked(a.to_numpy(), taus)
        return Reflectors(taus)
    for step in partition_steps(n, tree.bs):
        k, b = step.r1.start, step.r1.len
        rows = Range.span(k, m)
        panel = a.subview(rows, step.r1).to_numpy()
        _qr_unblocked(panel, taus[k : k + b])
        t_mat = _panel_t(panel, taus[k : k + b])
        panels.append((k, t_mat))
        if step.r2.len > 0:
            _apply_panel_t(a, rows, step, panel, t_mat, cfg, tree.ways)
    return Reflectors(taus, tuple(panels))


def _qr_unblocked(pn: np.ndarray, taus: np.ndarray) -> None:
    m, b = pn.shape
    for j in range(min(m, b)):
        x0 = pn[j, j]
        nrm = float(np.linalg.norm(pn[j:, j]))
        if nrm == 0.0:
            taus[j] = 0.0
            continue
        beta = -np.copysign(nrm, x0)
        tau = (beta - x0) / beta
        if j + 1 < m:
            pn[j + 1 :, j] /= x0 - beta
        pn[j, j] = beta
        taus[j] = tau
        if j + 1 <= b - 1:
            v_tail = pn[j + 1 :, j]
            w = pn[j, j + 1 :] + v_tail @ pn[j + 1 :, j + 1 :]
            pn[j, j + 1 :] -= tau * w
            pn[j + 1 :, j + 1 :] -= tau * np.outer(v_tail, w)


def _panel_t(panel: np.ndarray, taus: np.ndarray) -> np.ndarray:
    """Upper-triangular T with I - V T V^T = H_0 ... H_{b-1} for this panel."""
    mrows, b = panel.shape
    t_mat = np.zeros((b, b), dtype=panel.dtype)
    for j in range(b):
        tau = taus[j]
        t_mat[j, j] = tau
        if j > 0 and tau != 0.0:
            v_full = np.zeros(mrows - j, dtype=panel.dtype)
            v_full[0] = 1.0
            v_full[1:] = panel[j + 1 :, j]
            z = panel[j:, :j].T @ v_full
            t_mat[:j, j] = -tau * (t_mat[:j, :j] @ z)
    return t_mat


def _explicit_v(panel: np.ndarray) -> np.ndarray:
    mrows, b = panel.shape
    v = np.tril(panel, -1)[:, :b].copy()
    for j in range(min(mrows, b)):
        v[j, j] = 1.0
    return v


def _apply_panel_t(
    a: MatrixView,
    rows: Range,
    step,
    panel: np.ndarray,
    t_mat: np.ndarray,
    cfg: KernelConfig,
    ways: int,
) -> None:
    # trailing := (I - V T V^T)^T trailing = trailing - V (T^T (V^T trailing))
    trailing = a.subview(rows, step.r2)
    v = _explicit_v(panel)
    b = v.shape[1]
    w = np.zeros((b, step.r2.len), dtype=panel.dtype)
    vv = from_numpy(v)
    wv = from_numpy(w)
    gemm(1.0, vv.transposed(), trailing, 0.0, wv, cfg=cfg, ways=ways)
    w[...] = t_mat.T @ w
    gemm(-1.0, vv, wv, 1.0, trailing, cfg=cfg, ways=ways)


def apply_q(a: MatrixView, refl: Reflectors, c: MatrixView, transpose: bool = False) -> None:
    """c := Q c (or Q^T c) by applying the stored reflectors one at a time."""
    if c.m != a.m:
        raise ShapeError(f"c rows {c.m} != {a.m}")
    an = a.to_numpy()
    cn = c.to_numpy()
    n = len(refl.taus)
    order = range(n) if transpose else range(n - 1, -1, -1)
    for j in order:
        tau = refl.taus[j]
        if tau == 0.0:
            continue
        v = np.empty(a.m - j, dtype=an.dtype)
        v[0] = 1.0
        v[1:] = an[j + 1 :, j]
        w = tau * (v @ cn[j:, :])
        cn[j:, :] -= np.outer(v, w)


def form_q(a: MatrixView, refl: Reflectors) -> np.ndarray:
    """Dense m-by-m Q obtained by applying the reflectors to the identity."""
    from ..views import make_view

    q = make_view(a.m, a.m, a.dtype, fill=np.eye(a.m, dtype=a.dtype.np))
    apply_q(a, refl, q)
    return q.to_numpy().copy()
