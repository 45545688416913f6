"""Control trees: hierarchical selection of variant, block size, parallelism,
and kernel parameters at every recursion level.

The concrete syntax is JSON. Each node carries an operation name, a variant
(integers 1..3 for the blocked Cholesky family, "unblockedN" for its leaves,
"blocked"/"unblocked" for lu/qr/ltlt, "blocked" for gemm), an optional block
size, a parallelism width, optional kernel overrides, and an optional child
describing the recursive sub-problem. Kernel overrides nest: a node's
overrides apply to every level-3 call it issues unless a deeper node
overrides them again.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Sequence, Union

from .engine import KernelConfig, default_config
from .errors import TreeParseError, TreeValidationError
from .views import DType

__all__ = [
    "ControlNode",
    "OPS",
    "parse_tree",
    "parse_tree_dict",
    "serialize_tree",
    "tree_to_json",
    "validate",
    "check_valid",
    "default_tree",
    "enumerate_trees",
    "tree_descriptor",
    "MAX_DEPTH",
]

OPS = ("cholesky", "lu", "qr", "ltlt", "gemm")
MAX_DEPTH = 16

_CHOLESKY_BLOCKED = (1, 2, 3)
_CHOLESKY_UNBLOCKED = ("unblocked1", "unblocked2", "unblocked3")
_KERNEL_FIELDS = ("mr", "nr", "mc", "kc", "nc")
_NODE_FIELDS = ("op", "variant", "bs", "ways", "kernel", "child")


@dataclass(frozen=True)
class ControlNode:
    op: str
    variant: Union[int, str]
    bs: Optional[int] = None
    ways: int = 1
    kernel: Optional[dict] = None
    child: Optional["ControlNode"] = None

    @property
    def is_blocked(self) -> bool:
        return isinstance(self.variant, int) or self.variant == "blocked"

    def depth(self) -> int:
        d, node = 1, self
        while node.child is not None:
            d += 1
            node = node.child
        return d

    def effective_config(self, parent: KernelConfig) -> KernelConfig:
        return parent.with_overrides(self.kernel)

    def with_ways(self, ways: int) -> "ControlNode":
        return replace(self, ways=ways)


def _variant_ok(op: str, variant) -> bool:
    if op == "cholesky":
        return (isinstance(variant, int) and variant in _CHOLESKY_BLOCKED) or (
            variant in _CHOLESKY_UNBLOCKED
        )
    if op == "gemm":
        return variant == "blocked"
    return variant in ("blocked", "unblocked")


def parse_tree_dict(doc: dict, path: str = "$") -> ControlNode:
    """Build a node from a parsed JSON object, rejecting unknown fields."""
    if not isinstance(doc, dict):
        raise TreeValidationError([(path, f"expected an object, got {type(doc).__name__}")])
    unknown = set(doc) - set(_NODE_FIELDS)
    if unknown:
        raise TreeValidationError([(f"{path}.{k}", "unknown field") for k in sorted(unknown)])
    problems: list[tuple[str, str]] = []
    op = doc.get("op")
    if op not in OPS:
        problems.append((f"{path}.op", f"must be one of {list(OPS)}, got {op!r}"))
    variant = doc.get("variant")
    if variant is None:
        problems.append((f"{path}.variant", "required"))
    elif isinstance(variant, bool) or not isinstance(variant, (int, str)):
        problems.append((f"{path}.variant", f"must be an integer or string, got {variant!r}"))
    bs = doc.get("bs")
    if bs is not None and (isinstance(bs, bool) or not isinstance(bs, int) or bs < 1):
        problems.append((f"{path}.bs", f"must be an integer >= 1, got {bs!r}"))
    ways = doc.get("ways", 1)
    if isinstance(ways, bool) or not isinstance(ways, int) or ways < 1:
        problems.append((f"{path}.ways", f"must be an integer >= 1, got {ways!r}"))
    kernel = doc.get("kernel")
    if kernel is not None:
        if not isinstance(kernel, dict):
            problems.append((f"{path}.kernel", "must be an object"))
        else:
            for key, val in kernel.items():
                if key not in _KERNEL_FIELDS:
                    problems.append((f"{path}.kernel.{key}", "unknown kernel field"))
                elif isinstance(val, bool) or not isinstance(val, int) or val < 1:
                    problems.append((f"{path}.kernel.{key}", f"must be an integer >= 1, got {val!r}"))
    if problems:
        raise TreeValidationError(problems)
    child = None
    if doc.get("child") is not None:
        child = parse_tree_dict(doc["child"], path=f"{path}.child")
    node = ControlNode(op=op, variant=variant, bs=bs, ways=ways, kernel=kernel, child=child)
    if path == "$":
        check_valid(node)
    return node


def parse_tree(text: str) -> ControlNode:
    """Parse a control-tree JSON document; syntax errors report the position."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise TreeParseError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    return parse_tree_dict(doc)


def serialize_tree(node: ControlNode) -> dict:
    doc: dict = {"op": node.op, "variant": node.variant}
    if node.bs is not None:
        doc["bs"] = node.bs
    if node.ways != 1:
        doc["ways"] = node.ways
    if node.kernel:
        doc["kernel"] = dict(node.kernel)
    if node.child is not None:
        doc["child"] = serialize_tree(node.child)
    return doc


def tree_to_json(node: ControlNode) -> str:
    return json.dumps(serialize_tree(node))


def validate(node: ControlNode, op: Optional[str] = None, path: str = "$") -> list[tuple[str, str]]:
    """Structural and problem-compatibility diagnostics (empty list = valid).

    A block size larger than the remaining dimension is allowed; it simply
    yields a single partition step.
    """
    problems: list[tuple[str, str]] = []
    if node.op not in OPS:
        problems.append((f"{path}.op", f"unknown op {node.op!r}"))
    elif op is not None and node.op != op:
        problems.append((f"{path}.op", f"expected op {op!r}, found {node.op!r}"))
    elif not _variant_ok(node.op, node.variant):
        problems.append((f"{path}.variant", f"invalid variant {node.variant!r} for op {node.op!r}"))
    if node.ways < 1:
        problems.append((f"{path}.ways", "ways must be >= 1"))
    if node.is_blocked:
        if node.bs is None and node.op != "gemm":
            problems.append((f"{path}.bs", "blocked node requires a block size"))
        if node.bs is not None and node.bs < 1:
            problems.append((f"{path}.bs", "block size must be >= 1"))
    else:
        if node.bs is not None:
            problems.append((f"{path}.bs", "unblocked node must not carry a block size"))
        if node.child is not None:
            problems.append((f"{path}.child", "unblocked node must not have a child"))
    if node.kernel:
        for key in node.kernel:
            if key not in _KERNEL_FIELDS:
                problems.append((f"{path}.kernel.{key}", "unknown kernel field"))
    if node.depth() > MAX_DEPTH:
        problems.append((f"{path}", f"tree depth {node.depth()} exceeds {MAX_DEPTH}"))
    if node.child is not None:
        if node.child.op != node.op:
            problems.append(
                (f"{path}.child.op", f"child op {node.child.op!r} incompatible with {node.op!r}")
            )
        if node.op == "ltlt" and node.child.is_blocked:
            problems.append((f"{path}.child", "ltlt panels recurse on the unblocked stepper only"))
        problems.extend(validate(node.child, op=node.op, path=f"{path}.child"))
    return problems


def check_valid(node: ControlNode, op: Optional[str] = None) -> None:
    problems = validate(node, op=op)
    if problems:
        raise TreeValidationError(problems)


_UNBLOCKED_LEAF = {
    "cholesky": "unblocked3",
    "lu": "unblocked",
    "qr": "unblocked",
    "ltlt": "unblocked",
}

_DEFAULT_BS = 128
_UNBLOCKED_THRESHOLD = 128


def default_tree(op: str, n: int, dtype: DType = DType.F64) -> ControlNode:
    """Two-level default: blocked right-looking with bs=128 over an unblocked
    leaf; problems with n <= 128 go straight to the unblocked leaf."""
    if op == "gemm":
        return ControlNode(op="gemm", variant="blocked")
    if op not in OPS:
        raise ValueError(f"unknown op {op!r}")
    leaf = ControlNode(op=op, variant=_UNBLOCKED_LEAF[op])
    if n <= _UNBLOCKED_THRESHOLD:
        return leaf
    blocked_variant: Union[int, str] = 3 if op == "cholesky" else "blocked"
    return ControlNode(op=op, variant=blocked_variant, bs=_DEFAULT_BS, child=leaf)


def enumerate_trees(
    op: str,
    variants: Sequence[Union[int, str]],
    block_sizes: Sequence[int],
    depth: int = 1,
) -> Iterator[ControlNode]:
    """All trees with `depth` blocked levels drawn from variants x block
    sizes, terminated by every unblocked leaf variant of the op.

    For gemm the sweep dimension is the kc cache block: one childless tree
    per entry of block_sizes carrying a {"kc": bs} kernel override.
    """
    if depth not in (1, 2, 3):
        raise ValueError(f"depth must be 1, 2, or 3, got {depth}")
    if op == "gemm":
        if not block_sizes:
            raise ValueError("empty block size set")
        for b in block_sizes:
            yield ControlNode(op="gemm", variant="blocked", kernel={"kc": int(b)})
        return
    if op not in OPS:
        raise ValueError(f"unknown op {op!r}")
    if not variants or not block_sizes:
        raise ValueError("empty variant or block size set")
    if op == "ltlt" and depth > 1:
        raise ValueError("ltlt supports a single blocked level")
    if op == "cholesky":
        leaves = [ControlNode(op=op, variant=v) for v in _CHOLESKY_UNBLOCKED]
        blocked = [int(v) for v in variants]
    else:
        leaves = [ControlNode(op=op, variant="unblocked")]
        blocked = ["blocked"]

    def build(level: int) -> Iterator[ControlNode]:
        if level == depth:
            yield from leaves
            return
        for v, b, child in itertools.product(blocked, block_sizes, build(level + 1)):
            yield ControlNode(op=op, variant=v, bs=int(b), child=child)

    for tree in build(0):
        check_valid(tree, op=op)
        yield tree


def tree_descriptor(node: ControlNode) -> str:
    """Compact one-line path of variant/bs per level, e.g. 'v3:bs128/unblocked3'."""
    parts = []
    cur: Optional[ControlNode] = node
    while cur is not None:
        name = f"v{cur.variant}" if isinstance(cur.variant, int) else str(cur.variant)
        if cur.is_blocked:
            if cur.bs is not None:
                name += f":bs{cur.bs}"
            if cur.kernel:
                name += ":" + ".".join(f"{k}{v}" for k, v in sorted(cur.kernel.items()))
        parts.append(name)
        cur = cur.child
    return "/".join(parts)


def resolve_config(
    node: ControlNode, dtype: DType, parent: Optional[KernelConfig] = None
) -> KernelConfig:
    base = parent if parent is not None else default_config(dtype)
    return node.effective_config(base)
