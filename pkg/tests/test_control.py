"""Control trees: parsing, validation, defaults, enumeration."""
from __future__ import annotations

import numpy as np
import pytest

from blockfam.control import (
    ControlNode,
    default_tree,
    enumerate_trees,
    parse_tree,
    tree_descriptor,
    tree_to_json,
    validate,
)
from blockfam.errors import TreeParseError, TreeValidationError
from blockfam.factor import cholesky
from blockfam.views import DType, make_view

from util import spd_matrix


class TestParse:
    def test_depth_two_document(self):
        node = parse_tree(
            '{"op":"cholesky","variant":3,"bs":128,'
            '"child":{"op":"cholesky","variant":"unblocked1"}}'
        )
        assert node.depth() == 2
        assert node.variant == 3 and node.bs == 128
        assert node.child.variant == "unblocked1"

    def test_bs_on_unblocked_rejected(self):
        with pytest.raises(TreeValidationError) as exc:
            parse_tree('{"op":"cholesky","variant":"unblocked1","bs":8}')
        assert any("bs" in path for path, _ in exc.value.violations)

    def test_syntax_error_reports_position(self):
        with pytest.raises(TreeParseError) as exc:
            parse_tree('{"op": "cholesky",')
        assert "line 1" in str(exc.value)

    def test_unknown_field_rejected(self):
        with pytest.raises(TreeValidationError) as exc:
            parse_tree('{"op":"cholesky","variant":3,"bs":8,"bogus":1}')
        assert any("bogus" in path for path, _ in exc.value.violations)

    def test_unknown_kernel_field_rejected(self):
        with pytest.raises(TreeValidationError):
            parse_tree('{"op":"gemm","variant":"blocked","kernel":{"zz":4}}')

    def test_round_trip_random_trees(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            depth = int(rng.integers(1, 4))
            node = ControlNode("cholesky", "unblocked2")
            for _ in range(depth - 1):
                node = ControlNode(
                    "cholesky",
                    int(rng.integers(1, 4)),
                    bs=int(rng.integers(1, 200)),
                    ways=int(rng.integers(1, 5)),
                    kernel={"kc": int(rng.integers(8, 64))} if rng.random() < 0.5 else None,
                    child=node,
                )
            assert parse_tree(tree_to_json(node)) == node


class TestValidate:
    def test_valid_tree_for_problem(self):
        node = default_tree("cholesky", 500)
        assert validate(node, op="cholesky") == []

    def test_child_op_mismatch(self):
        node = ControlNode("cholesky", 3, bs=8, child=ControlNode("lu", "unblocked"))
        problems = validate(node)
        assert any(path.endswith("child.op") for path, _ in problems)

    def test_depth_17_rejected(self):
        node = ControlNode("cholesky", "unblocked3")
        for _ in range(16):
            node = ControlNode("cholesky", 3, bs=4, child=node)
        problems = validate(node)
        assert any("depth" in reason for _, reason in problems)

    def test_oversize_bs_is_allowed(self):
        node = ControlNode("cholesky", 3, bs=10_000, child=ControlNode("cholesky", "unblocked3"))
        assert validate(node, op="cholesky") == []

    def test_blocked_without_bs_rejected(self):
        node = ControlNode("cholesky", 2)
        assert any("bs" in path for path, _ in validate(node))

    def test_ltlt_blocked_child_must_be_unblocked(self):
        inner = ControlNode("ltlt", "blocked", bs=2, child=ControlNode("ltlt", "unblocked"))
        node = ControlNode("ltlt", "blocked", bs=8, child=inner)
        assert validate(node) != []


class TestDefaultTree:
    def test_large_cholesky(self):
        node = default_tree("cholesky", 1000, DType.F64)
        assert node.variant == 3 and node.bs == 128
        assert node.child.variant == "unblocked3"

    def test_small_cholesky_goes_unblocked(self):
        node = default_tree("cholesky", 64, DType.F64)
        assert node.variant == "unblocked3" and node.child is None

    def test_large_lu(self):
        node = default_tree("lu", 1000, DType.F64)
        assert node.variant == "blocked" and node.bs == 128
        assert node.child.variant == "unblocked"


class TestEnumerate:
    def test_counting_example(self):
        trees = list(enumerate_trees("cholesky", (1, 2, 3), (64, 128), 1))
        assert len(trees) == 18  # 3 variants * 2 block sizes * 3 leaf variants

    def test_single_variant_three_leaves(self):
        trees = list(enumerate_trees("cholesky", (3,), (32,), 1))
        assert len(trees) == 3
        assert {t.child.variant for t in trees} == {"unblocked1", "unblocked2", "unblocked3"}

    def test_every_tree_validates(self):
        for tree in enumerate_trees("cholesky", (1, 2, 3), (16, 64), 2):
            assert validate(tree, op="cholesky") == []

    def test_depth_two_count(self):
        trees = list(enumerate_trees("cholesky", (1, 3), (32, 64), 2))
        assert len(trees) == (2 * 2) ** 2 * 3

    def test_empty_sets_rejected(self):
        with pytest.raises(ValueError):
            list(enumerate_trees("cholesky", (), (64,), 1))

    def test_gemm_trees_override_kc(self):
        trees = list(enumerate_trees("gemm", (), (128, 256), 1))
        assert [t.kernel["kc"] for t in trees] == [128, 256]

    def test_descriptor_has_no_commas(self):
        for tree in enumerate_trees("cholesky", (1, 2, 3), (64, 128), 1):
            assert "," not in tree_descriptor(tree)


class TestResultInvariance:
    def test_cholesky_factor_unique_across_trees(self):
        rng = np.random.default_rng(4)
        n = 72
        a0 = spd_matrix(rng, n)
        ref = make_view(n, n, fill=a0)
        cholesky(ref, tree=ControlNode("cholesky", "unblocked3"))
        lref = np.tril(ref.to_numpy())
        tol = 100 * n * DType.F64.eps * np.linalg.norm(a0) / n
        for tree in enumerate_trees("cholesky", (1, 2, 3), (7, 32), 1):
            w = make_view(n, n, fill=a0)
            cholesky(w, tree=tree)
            assert np.abs(np.tril(w.to_numpy()) - lref).max() <= tol, tree_descriptor(tree)
