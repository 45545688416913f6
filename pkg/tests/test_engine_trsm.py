"""Triangular solves: the two cases the factorizations need."""
from __future__ import annotations

import numpy as np
import pytest

from blockfam.engine import LEFT_LOWER_NOTRANS_UNIT, RIGHT_LOWER_TRANS_NONUNIT, trsm
from blockfam.errors import ShapeError, SingularMatrixError
from blockfam.views import DType, make_view


def back_substitute_right(tri: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Oracle for X * tril(tri)^T = b, solved column by column."""
    n = tri.shape[0]
    x = np.zeros_like(b)
    for j in range(n):
        acc = b[:, j].copy()
        for p in range(j):
            acc -= x[:, p] * tri[j, p]
        x[:, j] = acc / tri[j, j]
    return x


class TestRightLowerTrans:
    def test_hand_example(self):
        tri = make_view(2, 2, fill=[[2, 0], [1, 2]])
        b = make_view(1, 2, fill=[[2, 5]])
        trsm(RIGHT_LOWER_TRANS_NONUNIT, 1.0, tri, b)
        # oracle: x0*2 = 2; x0*1 + x1*2 = 5
        assert b.to_numpy().tolist() == [[1, 2]]

    def test_identity_triangle(self):
        b0 = np.arange(6.0).reshape(2, 3)
        tri = make_view(3, 3, fill=np.eye(3))
        b = make_view(2, 3, fill=b0)
        trsm(RIGHT_LOWER_TRANS_NONUNIT, 2.0, tri, b)
        assert np.array_equal(b.to_numpy(), 2.0 * b0)

    def test_zero_rhs(self):
        tri = make_view(3, 3, fill=np.tril(np.ones((3, 3))) + np.eye(3))
        b = make_view(2, 3)
        trsm(RIGHT_LOWER_TRANS_NONUNIT, 1.0, tri, b)
        assert np.array_equal(b.to_numpy(), np.zeros((2, 3)))

    def test_matches_oracle_and_residual(self):
        rng = np.random.default_rng(3)
        for n, m in [(5, 3), (33, 10), (70, 64), (129, 40)]:
            tn = np.tril(rng.uniform(-1, 1, (n, n))) + n * np.eye(n)
            b0 = rng.uniform(-1, 1, (m, n))
            tri = make_view(n, n, fill=tn)
            b = make_view(m, n, fill=b0)
            alpha = 1.5
            trsm(RIGHT_LOWER_TRANS_NONUNIT, alpha, tri, b)
            x = b.to_numpy()
            xo = back_substitute_right(tn, alpha * b0)
            assert np.allclose(x, xo, rtol=0, atol=8 * n * DType.F64.eps * np.abs(xo).max())
            resid = np.linalg.norm(x @ np.tril(tn).T - alpha * b0)
            assert resid <= 8 * n * DType.F64.eps * np.linalg.norm(alpha * b0)

    def test_zero_diagonal_reported(self):
        tri = make_view(2, 2, fill=[[1, 0], [1, 0]])
        b = make_view(1, 2, fill=[[1, 1]])
        with pytest.raises(SingularMatrixError):
            trsm(RIGHT_LOWER_TRANS_NONUNIT, 1.0, tri, b)


class TestLeftLowerUnit:
    def test_unit_diagonal_ignores_diag_values(self):
        tri = make_view(2, 2, fill=[[99, 0], [2, 99]])
        b = make_view(2, 1, fill=[[1], [4]])
        trsm(LEFT_LOWER_NOTRANS_UNIT, 1.0, tri, b)
        # x0 = 1; x1 = 4 - 2*1
        assert b.to_numpy().tolist() == [[1], [2]]

    def test_residual_blocked(self):
        # well-conditioned unit triangle: scaled-down strict lower part
        rng = np.random.default_rng(5)
        n, m = 100, 17
        tn = np.tril(rng.uniform(-1, 1, (n, n)), -1) / n + np.eye(n)
        b0 = rng.uniform(-1, 1, (n, m))
        tri = make_view(n, n, fill=tn)
        b = make_view(n, m, fill=b0)
        trsm(LEFT_LOWER_NOTRANS_UNIT, 1.0, tri, b)
        resid = np.linalg.norm(tn @ b.to_numpy() - b0)
        assert resid <= 8 * n * DType.F64.eps * np.linalg.norm(b0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            trsm(LEFT_LOWER_NOTRANS_UNIT, 1.0, make_view(3, 3), make_view(2, 3))
