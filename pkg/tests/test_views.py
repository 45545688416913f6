"""Views: strided windows, implicit transpose, range partitioning."""
from __future__ import annotations

import numpy as np
import pytest

from blockfam.errors import ShapeError
from blockfam.views import (
    DType,
    Range,
    from_numpy,
    make_view,
    partition_steps,
    subview,
    transposed,
    views_overlap,
)


class TestMakeView:
    def test_zero_fill_row_major(self):
        v = make_view(2, 2, DType.F64, "row-major", "zeros")
        assert (v.rs, v.cs) == (2, 1)
        assert v.to_numpy().tolist() == [[0.0, 0.0], [0.0, 0.0]]

    def test_sequence_row_major_linearization(self):
        v = make_view(2, 3, DType.F64, "row-major", "sequence")
        assert v.item(1, 2) == 6.0
        assert v.to_numpy().tolist() == [[1, 2, 3], [4, 5, 6]]

    def test_sequence_is_logical_for_col_major(self):
        v = make_view(2, 3, DType.F64, "col-major", "sequence")
        assert (v.rs, v.cs) == (1, 2)
        assert v.item(1, 2) == 6.0

    def test_empty_rows_valid(self):
        v = make_view(0, 5)
        assert v.m == 0 and v.n == 5
        assert v.to_numpy().shape == (0, 5)

    def test_supplied_values(self):
        v = make_view(2, 2, fill=[[1.0, 2.0], [3.0, 4.0]])
        assert v.item(1, 0) == 3.0

    def test_negative_dims_rejected(self):
        with pytest.raises(ShapeError):
            make_view(-1, 3)

    def test_f32_storage(self):
        v = make_view(2, 2, DType.F32, fill="sequence")
        assert v.storage.dtype == np.float32
        assert v.dtype.eps == pytest.approx(1.19e-7, rel=1e-2)


class TestSubview:
    def test_offset_arithmetic(self):
        v = make_view(4, 4, fill="sequence")
        s = subview(v, Range(1, 2), Range(1, 2))
        assert s.item(0, 0) == v.item(1, 1)
        assert s.shape == (2, 2)

    def test_identity_window(self):
        v = make_view(4, 4, fill="sequence")
        s = subview(v, Range(0, 4), Range(0, 4))
        assert (s.offset, s.m, s.n, s.rs, s.cs) == (v.offset, v.m, v.n, v.rs, v.cs)

    def test_empty_range_valid(self):
        v = make_view(4, 4)
        s = subview(v, Range(2, 0), Range(0, 4))
        assert s.shape == (0, 4)

    def test_no_copy(self):
        v = make_view(4, 4, fill="sequence")
        s = subview(v, Range(1, 3), Range(0, 2))
        assert s.storage is v.storage
        s.to_numpy()[0, 0] = -1.0
        assert v.item(1, 0) == -1.0

    def test_out_of_bounds(self):
        v = make_view(4, 4)
        with pytest.raises(ShapeError):
            subview(v, Range(3, 2), Range(0, 1))


class TestTransposed:
    def test_definition(self):
        v = make_view(2, 3, fill="sequence")
        t = transposed(v)
        assert t.shape == (3, 2)
        for i in range(3):
            for j in range(2):
                assert t.item(i, j) == v.item(j, i)

    def test_symmetric_matrix_equal(self):
        v = make_view(3, 3, fill=np.eye(3))
        assert np.array_equal(transposed(v).to_numpy(), v.to_numpy())

    def test_involution_bit_identical(self):
        v = make_view(5, 2, fill="sequence")
        t2 = transposed(transposed(v))
        assert (t2.offset, t2.m, t2.n, t2.rs, t2.cs) == (v.offset, v.m, v.n, v.rs, v.cs)
        assert t2.storage is v.storage


class TestPartitionSteps:
    def test_forced_by_definition(self):
        steps = list(partition_steps(5, 2))
        got = [((s.r0.start, s.r0.end), (s.r1.start, s.r1.end), (s.r2.start, s.r2.end)) for s in steps]
        assert got == [
            ((0, 0), (0, 2), (2, 5)),
            ((0, 2), (2, 4), (4, 5)),
            ((0, 4), (4, 5), (5, 5)),
        ]

    def test_single_block(self):
        steps = list(partition_steps(4, 4))
        assert len(steps) == 1
        s = steps[0]
        assert (s.r0.len, s.r1.len, s.r2.len) == (0, 4, 0)

    def test_lookahead_exposes_r1b(self):
        steps = list(partition_steps(5, 2, lookahead=1))
        assert (steps[0].r1b.start, steps[0].r1b.end) == (2, 3)
        assert (steps[-1].r1b.start, steps[-1].r1b.len) == (5, 0)

    def test_zero_block_size_rejected(self):
        with pytest.raises(ValueError):
            list(partition_steps(5, 0))

    @pytest.mark.parametrize("n,bs", [(0, 3), (1, 1), (7, 3), (12, 4), (100, 7)])
    def test_r1_concatenation_covers_exactly(self, n, bs):
        covered = []
        for s in partition_steps(n, bs):
            covered.extend(range(s.r1.start, s.r1.end))
            assert s.r0.end == s.r1.start and s.r1.end == s.r2.start
            assert s.r2.end == n
            assert s.r1.len <= bs
        assert covered == list(range(n))


class TestAddressMap:
    @pytest.mark.parametrize("layout", ["row-major", "col-major"])
    def test_injectivity_brute_force(self, layout):
        for m in range(1, 9):
            for n in range(1, 9):
                v = make_view(m, n, layout=layout)
                addrs = v.addresses().ravel().tolist()
                assert len(set(addrs)) == m * n
                t = transposed(v)
                addrs = t.addresses().ravel().tolist()
                assert len(set(addrs)) == m * n

    def test_subview_addresses_within_storage(self):
        v = make_view(6, 7, fill="sequence")
        s = subview(v, Range(2, 3), Range(4, 2))
        assert s.addresses().max() < v.storage.size


class TestOverlap:
    def test_disjoint_column_bands(self):
        v = make_view(8, 8)
        left = subview(v, Range(0, 8), Range(0, 4))
        right = subview(v, Range(0, 8), Range(4, 4))
        assert not views_overlap(left, right)

    def test_nested_windows_overlap(self):
        v = make_view(8, 8)
        a = subview(v, Range(1, 5), Range(1, 5))
        b = subview(v, Range(3, 3), Range(3, 3))
        assert views_overlap(a, b)

    def test_transposed_window_keeps_footprint(self):
        v = make_view(8, 8)
        a = subview(v, Range(0, 4), Range(0, 8))
        b = subview(v, Range(4, 4), Range(0, 8))
        assert not views_overlap(transposed(a), b)

    def test_different_storage_never_overlaps(self):
        assert not views_overlap(make_view(3, 3), make_view(3, 3))


def test_from_numpy_wraps_without_copy():
    arr = np.arange(6.0).reshape(2, 3)
    v = from_numpy(arr)
    v.to_numpy()[0, 0] = 42.0
    assert arr[0, 0] == 42.0
