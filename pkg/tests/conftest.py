"""Shared fixtures: one session-level warm-up so JIT compilation cost is
paid before any timed assertions run."""
from __future__ import annotations

import numpy as np
import pytest

from blockfam.control import ControlNode
from blockfam.engine import gemm, sandwich_skew, trsm, RIGHT_LOWER_TRANS_NONUNIT
from blockfam.factor import cholesky, ltlt_pivoted, lu_partial, qr_householder
from blockfam.oracle import gemm_naive
from blockfam.views import DType, make_view


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    rng = np.random.default_rng(0)
    for dtype in (DType.F64, DType.F32):
        a = make_view(9, 7, dtype, fill=rng.uniform(-1, 1, (9, 7)))
        b = make_view(7, 9, dtype, fill=rng.uniform(-1, 1, (7, 9)))
        c = make_view(9, 9, dtype)
        gemm(1.0, a, b, 0.0, c)
        gemm_naive(1.0, a, b, 0.0, c)
    spd = make_view(12, 12, fill=np.eye(12) * 4.0)
    for variant in ("unblocked1", "unblocked2", "unblocked3"):
        w = make_view(12, 12, fill=spd.to_numpy())
        cholesky(w, tree=ControlNode("cholesky", variant))
    w = make_view(12, 12, fill=rng.uniform(-1, 1, (12, 12)) + 12 * np.eye(12))
    lu_partial(w)
    w = make_view(12, 8, fill=rng.uniform(-1, 1, (12, 8)))
    qr_householder(w)
    m = rng.uniform(-1, 1, (10, 10))
    w = make_view(10, 10, fill=m - m.T)
    ltlt_pivoted(w)
    tri = make_view(4, 4, fill=np.tril(rng.uniform(1, 2, (4, 4))))
    rhs = make_view(3, 4, fill=rng.uniform(-1, 1, (3, 4)))
    trsm(RIGHT_LOWER_TRANS_NONUNIT, 1.0, tri, rhs)
    cs = make_view(6, 6)
    aa = make_view(6, 5, fill=rng.uniform(-1, 1, (6, 5)))
    sandwich_skew(cs, aa, rng.uniform(-1, 1, 4))
    yield
