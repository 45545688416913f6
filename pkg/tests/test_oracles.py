"""The brute-force references themselves, pinned on hand-derived values."""
from __future__ import annotations

import numpy as np
import pytest

from blockfam.errors import NotPositiveDefiniteError
from blockfam.oracle import (
    chol_scalar,
    contract_naive,
    gemm_naive,
    lu_scalar,
    pfaffian_combinatorial,
)
from blockfam.tensor import ContractionSpec, make_tensor
from blockfam.views import DType, make_view


class TestGemmNaive:
    def test_hand_example(self):
        a = make_view(2, 2, fill=[[1, 2], [3, 4]])
        b = make_view(2, 2, fill=[[5, 6], [7, 8]])
        c = make_view(2, 2)
        gemm_naive(1.0, a, b, 0.0, c)
        assert c.to_numpy().tolist() == [[19, 22], [43, 50]]

    def test_identity_operand(self):
        a = make_view(3, 3, fill="sequence")
        c = make_view(3, 3)
        gemm_naive(1.0, a, make_view(3, 3, fill=np.eye(3)), 0.0, c)
        assert np.array_equal(c.to_numpy(), a.to_numpy())

    def test_k_zero_beta_zero_clears(self):
        a = make_view(2, 0)
        b = make_view(0, 2)
        c = make_view(2, 2, fill=[[1, 1], [1, 1]])
        gemm_naive(1.0, a, b, 0.0, c)
        assert c.to_numpy().tolist() == [[0, 0], [0, 0]]

    def test_f32_inputs_accumulate_in_f64(self):
        # catastrophic f32 cancellation would lose the tiny term entirely
        a = make_view(1, 3, DType.F32, fill=[[1e8, 1.0, -1e8]])
        b = make_view(3, 1, DType.F32, fill=[[1.0], [1.0], [1.0]])
        c = make_view(1, 1, DType.F32)
        gemm_naive(1.0, a, b, 0.0, c)
        assert c.item(0, 0) == 1.0


class TestCholScalar:
    def test_hand_example(self):
        a = make_view(2, 2, fill=[[4, 2], [2, 5]])
        chol_scalar(a)
        assert a.to_numpy()[1].tolist() == [1, 2]
        assert a.item(0, 0) == 2.0

    def test_identity(self):
        a = make_view(4, 4, fill=np.eye(4))
        chol_scalar(a)
        assert np.array_equal(a.to_numpy(), np.eye(4))

    def test_scalar_sqrt(self):
        a = make_view(1, 1, fill=[[9.0]])
        chol_scalar(a)
        assert a.item(0, 0) == 3.0

    def test_rejects_indefinite(self):
        a = make_view(2, 2, fill=[[1, 0], [0, -1]])
        with pytest.raises(NotPositiveDefiniteError) as exc:
            chol_scalar(a)
        assert exc.value.index == 1


class TestLuScalar:
    def test_hand_example(self):
        a = make_view(2, 2, fill=[[0, 1], [2, 3]])
        piv = lu_scalar(a)
        assert piv.tolist() == [1, 1]
        assert a.to_numpy().tolist() == [[2, 3], [0, 1]]

    def test_identity(self):
        a = make_view(3, 3, fill=np.eye(3))
        piv = lu_scalar(a)
        assert piv.tolist() == [0, 1, 2]

    def test_single_row(self):
        a = make_view(1, 4, fill=[[3, 1, 4, 1]])
        piv = lu_scalar(a)
        assert piv.tolist() == [0]

    def test_tie_takes_smallest_row(self):
        a = make_view(3, 3, fill=[[1, 0, 0], [-1, 1, 0], [1, 0, 1]])
        piv = lu_scalar(a)
        assert piv[0] == 0


class TestPfaffianCombinatorial:
    def test_two_by_two(self):
        assert pfaffian_combinatorial(np.array([[0.0, 5.0], [-5.0, 0.0]])) == 5.0

    def test_four_by_four_matching_sum(self):
        x = np.array(
            [
                [0.0, 1, 2, 3],
                [-1, 0, 4, 5],
                [-2, -4, 0, 6],
                [-3, -5, -6, 0],
            ]
        )
        # 1*6 - 2*5 + 3*4
        assert pfaffian_combinatorial(x) == 8.0

    def test_odd_order_is_zero(self):
        x = np.zeros((3, 3))
        assert pfaffian_combinatorial(x) == 0.0

    def test_order_cap(self):
        with pytest.raises(ValueError):
            pfaffian_combinatorial(np.zeros((14, 14)))


class TestContractNaive:
    def test_matrix_case_reduces_to_gemm(self):
        spec = ContractionSpec.parse("ik,kj->ij")
        a = make_tensor((2, 2), fill=np.array([[1.0, 2], [3, 4]]))
        b = make_tensor((2, 2), fill=np.array([[5.0, 6], [7, 8]]))
        c = make_tensor((2, 2))
        contract_naive(1.0, a, b, 0.0, c, spec)
        assert c.to_numpy().tolist() == [[19, 22], [43, 50]]

    def test_alpha_zero_beta_one_unchanged(self):
        spec = ContractionSpec.parse("i,j->ij")
        a = make_tensor((2,), fill=np.array([1.0, 2.0]))
        b = make_tensor((2,), fill=np.array([3.0, 4.0]))
        c0 = np.array([[0.5, -0.0], [1.5, 2.5]])
        c = make_tensor((2, 2), fill=c0)
        contract_naive(0.0, a, b, 1.0, c, spec)
        assert c.to_numpy().tobytes() == c0.tobytes()

    def test_full_contraction_to_scalar(self):
        spec = ContractionSpec.parse("k,k->")
        a = make_tensor((3,), fill=np.array([1.0, 2.0, 3.0]))
        b = make_tensor((3,), fill=np.array([4.0, 5.0, 6.0]))
        c = make_tensor(())
        contract_naive(1.0, a, b, 0.0, c, spec)
        assert c.item(()) == 32.0


def test_oracles_do_not_import_the_compute_modules():
    # independence is the point: references may reach the view types only
    import inspect

    import blockfam.oracle.reference as ref

    src = inspect.getsource(ref)
    assert "from ..engine" not in src and "from ..factor" not in src
    assert "import blockfam.engine" not in src and "import blockfam.factor" not in src
