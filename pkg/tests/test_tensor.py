"""Block-scatter views and tensor contraction through the matrix engine."""
from __future__ import annotations

import itertools

import numpy as np
import pytest

from blockfam.errors import AliasingError, ShapeError
from blockfam.oracle import contract_naive
from blockfam.tensor import (
    ContractionSpec,
    TensorView,
    block_scatter,
    contract,
    make_tensor,
    plan_contraction,
)
from blockfam.views import DType, from_numpy, make_view
from blockfam.engine import gemm


class TestContractionSpec:
    def test_parse(self):
        spec = ContractionSpec.parse("abk,kc->abc")
        assert (spec.labels_a, spec.labels_b, spec.labels_c) == ("abk", "kc", "abc")
        assert spec.contracted == "k"

    def test_repeated_label_rejected(self):
        with pytest.raises(ValueError):
            ContractionSpec("aa", "b", "ab")

    def test_output_label_in_both_inputs_rejected(self):
        with pytest.raises(ValueError):
            ContractionSpec("ik", "kj", "ik")

    def test_output_label_in_neither_rejected(self):
        with pytest.raises(ValueError):
            ContractionSpec("ik", "kj", "iz")

    def test_unclassifiable_input_label_rejected(self):
        with pytest.raises(ValueError):
            ContractionSpec("ikz", "kj", "ij")


class TestTensorView:
    def test_out_of_bounds_addresses_rejected(self):
        with pytest.raises(ShapeError):
            TensorView(np.zeros(5), 0, (2, 3), (3, 1), DType.F64)

    def test_rank_cap(self):
        with pytest.raises(ShapeError):
            TensorView(np.zeros(1), 0, (1,) * 9, (0,) * 9, DType.F64)

    def test_empty_tensor_valid(self):
        t = TensorView(np.zeros(0), 0, (0, 4), (4, 1), DType.F64)
        assert t.size == 0


class TestBlockScatter:
    def test_offset_formula_by_hand(self):
        t = make_tensor((2, 2, 2))
        bsv = block_scatter(t, [0, 2], [1], 8, 6)
        assert bsv.rscat.tolist() == [0, 1, 4, 5]
        assert bsv.cscat.tolist() == [0, 2]

    def test_affine_matrix_case(self):
        t = make_tensor((4, 4))
        bsv = block_scatter(t, [0], [1], 2, 2)
        assert bsv.rbs.tolist() == [4, 4]
        assert bsv.cbs.tolist() == [1, 1]

    def test_single_tail_block_reports_mode_stride(self):
        tv = TensorView(np.zeros(15), 0, (3,), (5,), DType.F64)
        bsv = block_scatter(tv, [0], [], 2, 2)
        assert bsv.rscat.tolist() == [0, 5, 10]
        assert bsv.rbs.tolist() == [5, 5]

    def test_non_affine_block_is_zero(self):
        # two modes interleave: offsets within a 4-row block are not affine
        t = make_tensor((2, 3, 2))
        bsv = block_scatter(t, [0, 2], [1], 4, 4)
        assert bsv.rscat.tolist() == [0, 1, 6, 7]
        assert bsv.rbs.tolist() == [0]

    def test_mode_partition_enforced(self):
        t = make_tensor((2, 2))
        with pytest.raises(ShapeError):
            block_scatter(t, [0], [], 2, 2)

    def test_scatter_addressing_exhaustive_small(self):
        rng = np.random.default_rng(12)
        for dims in itertools.product([1, 2, 3, 4], repeat=3):
            t = make_tensor(dims, fill=rng.uniform(-1, 1, dims))
            bsv = block_scatter(t, [0, 2], [1], 4, 4)
            for i in range(bsv.m):
                i0, i2 = divmod(i, dims[2])
                for j in range(bsv.n):
                    direct = t.item((i0, j, i2))
                    assert t.storage[bsv.rscat[i] + bsv.cscat[j]] == direct


class TestPlan:
    def test_matrix_case_is_plain_gemm(self):
        spec = ContractionSpec.parse("ik,kj->ij")
        a, b, c = make_tensor((3, 4)), make_tensor((4, 5)), make_tensor((3, 5))
        plan = plan_contraction(spec, a, b, c)
        assert plan.m_groups == ("i",) and plan.n_groups == ("j",) and plan.k_groups == ("k",)
        assert (plan.m_size, plan.n_size, plan.k_size) == (3, 5, 4)
        assert all(s != 0 for s in plan.a_view.rbs)

    def test_row_major_m_modes_fold(self):
        spec = ContractionSpec.parse("abc,cd->abd")
        a = make_tensor((3, 4, 5))
        b = make_tensor((5, 2))
        c = make_tensor((3, 4, 2))
        plan = plan_contraction(spec, a, b, c)
        assert plan.m_groups == ("ab",)
        assert plan.m_size == 12

    def test_fold_disabled_keeps_modes_separate(self):
        spec = ContractionSpec.parse("abc,cd->abd")
        plan = plan_contraction(
            spec, make_tensor((3, 4, 5)), make_tensor((5, 2)), make_tensor((3, 4, 2)), fold=False
        )
        assert plan.m_groups == ("a", "b")

    def test_shared_label_size_mismatch(self):
        spec = ContractionSpec.parse("ik,kj->ij")
        with pytest.raises(ShapeError):
            plan_contraction(spec, make_tensor((3, 4)), make_tensor((5, 5)), make_tensor((3, 5)))


class TestContract:
    def test_matrix_example(self):
        spec = ContractionSpec.parse("ik,kj->ij")
        a = make_tensor((2, 2), fill=np.array([[1.0, 2], [3, 4]]))
        b = make_tensor((2, 2), fill=np.array([[5.0, 6], [7, 8]]))
        c = make_tensor((2, 2))
        contract(1.0, a, b, 0.0, c, spec)
        assert c.to_numpy().tolist() == [[19, 22], [43, 50]]

    def test_alpha_zero_beta_one_bitwise(self):
        spec = ContractionSpec.parse("ik,kj->ij")
        a, b = make_tensor((2, 2), fill="sequence"), make_tensor((2, 2), fill="sequence")
        c0 = np.array([[1.5, -0.0], [2.5, np.inf]])
        c = make_tensor((2, 2), fill=c0)
        contract(0.0, a, b, 1.0, c, spec)
        assert c.to_numpy().tobytes() == c0.tobytes()

    def test_k_transposed_layout(self):
        spec = ContractionSpec.parse("ab,cb->ac")
        rng = np.random.default_rng(3)
        a = make_tensor((4, 5), fill=rng.uniform(-1, 1, (4, 5)))
        b = make_tensor((3, 5), fill=rng.uniform(-1, 1, (3, 5)))
        c = make_tensor((4, 3))
        cref = make_tensor((4, 3))
        contract(1.0, a, b, 0.0, c, spec)
        contract_naive(1.0, a, b, 0.0, cref, spec)
        assert np.allclose(c.to_numpy(), cref.to_numpy(), atol=4 * 5 * DType.F64.eps)

    def test_aliased_output_rejected(self):
        spec = ContractionSpec.parse("ik,kj->ij")
        a = make_tensor((2, 2))
        with pytest.raises(AliasingError):
            contract(1.0, a, make_tensor((2, 2)), 0.0, a, spec)

    @pytest.mark.parametrize("spec_text,dims", [
        ("abk,kc->abc", {"a": 3, "b": 4, "k": 5, "c": 2}),
        ("kab,ck->abc", {"a": 2, "b": 5, "k": 4, "c": 3}),
        ("ak,bk->ab", {"a": 5, "b": 4, "k": 3}),
        ("apq,qpb->ab", {"a": 3, "p": 2, "q": 4, "b": 5}),
    ])
    def test_against_naive(self, spec_text, dims):
        import zlib

        spec = ContractionSpec.parse(spec_text)
        rng = np.random.default_rng(zlib.crc32(spec_text.encode()))
        da = [dims[l] for l in spec.labels_a]
        db = [dims[l] for l in spec.labels_b]
        dc = [dims[l] for l in spec.labels_c]
        a = make_tensor(da, fill=rng.uniform(-1, 1, da))
        b = make_tensor(db, fill=rng.uniform(-1, 1, db))
        c0 = rng.uniform(-1, 1, dc)
        c = make_tensor(dc, fill=c0)
        cref = make_tensor(dc, fill=c0)
        contract(1.7, a, b, -0.3, c, spec)
        contract_naive(1.7, a, b, -0.3, cref, spec)
        ksz = int(np.prod([dims[l] for l in spec.contracted])) if spec.contracted else 1
        assert np.abs(c.to_numpy() - cref.to_numpy()).max() <= 4 * ksz * DType.F64.eps * 4

    def test_fold_invariance_bitwise(self):
        spec = ContractionSpec.parse("abc,cd->abd")
        rng = np.random.default_rng(8)
        a = make_tensor((3, 4, 5), fill=rng.uniform(-1, 1, (3, 4, 5)))
        b = make_tensor((5, 2), fill=rng.uniform(-1, 1, (5, 2)))
        c1 = make_tensor((3, 4, 2))
        c2 = make_tensor((3, 4, 2))
        contract(1.0, a, b, 0.0, c1, spec)
        contract(1.0, a, b, 0.0, c2, spec, fold=False)
        assert c1.to_numpy().tobytes() == c2.to_numpy().tobytes()

    def test_transpose_to_matrix_fallback_equivalence(self):
        # flattening the tensors to explicit matrices and running plain GEMM
        spec = ContractionSpec.parse("abk,kc->abc")
        rng = np.random.default_rng(10)
        a = make_tensor((3, 4, 5), fill=rng.uniform(-1, 1, (3, 4, 5)))
        b = make_tensor((5, 2), fill=rng.uniform(-1, 1, (5, 2)))
        c = make_tensor((3, 4, 2))
        contract(1.0, a, b, 0.0, c, spec)

        amat = from_numpy(a.to_numpy().reshape(12, 5).copy())
        bmat = from_numpy(b.to_numpy().copy())
        cmat = make_view(12, 2)
        gemm(1.0, amat, bmat, 0.0, cmat)
        assert np.abs(c.to_numpy().reshape(12, 2) - cmat.to_numpy()).max() <= 4 * 5 * DType.F64.eps
