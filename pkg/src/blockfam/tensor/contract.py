"""Tensor contraction planned as a single block-scatter matrix multiply.

Modes are classified M (a and c), N (b and c), K (a and b, contracted),
ordered by the output's (resp. a's, for K) memory order, folded where
adjacent modes are stride-contiguous in every operand that carries them,
and handed to the engine as three block-scatter facades. Packing gathers
non-contiguous blocks element-wise, so no operand is ever re-laid-out.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..engine import KernelConfig, ScatterMatrix, default_config, gemm_scatter
from ..errors import AliasingError, ShapeError
from .scatter import BlockScatterView, block_scatter
from .types import ContractionSpec, TensorView

__all__ = ["ContractionPlan", "plan_contraction", "contract"]


@dataclass(frozen=True)
class ContractionPlan:
    spec: ContractionSpec
    m_groups: tuple[str, ...]
    n_groups: tuple[str, ...]
    k_groups: tuple[str, ...]
    m_size: int
    n_size: int
    k_size: int
    a_view: BlockScatterView
    b_view: BlockScatterView
    c_view: BlockScatterView
    folded: bool


def _label_sizes(spec: ContractionSpec, a: TensorView, b: TensorView, c: TensorView) -> dict:
    sizes: dict[str, int] = {}
    for labels, t, name in (
        (spec.labels_a, a, "a"),
        (spec.labels_b, b, "b"),
        (spec.labels_c, c, "c"),
    ):
        if len(labels) != len(t.dims):
            raise ShapeError(
                f"operand {name} rank {len(t.dims)} does not match labels {labels!r}"
            )
        for l, d in zip(labels, t.dims):
            if sizes.setdefault(l, d) != d:
                raise ShapeError(
                    f"inconsistent sizes for label {l!r}: {sizes[l]} vs {d}"
                )
    return sizes


def _memory_order(labels: set, ordering_labels: str, ordering_strides: tuple) -> list:
    """Sort labels slowest-to-fastest by |stride| in the ordering operand."""
    pos = {l: i for i, l in enumerate(ordering_labels)}
    stride = {l: ordering_strides[pos[l]] for l in labels}
    return sorted(labels, key=lambda l: (-abs(stride[l]), pos[l]))


def _fold_groups(ordered, owners, fold: bool) -> list:
    """Greedily merge stride-contiguous neighbors (checked in every owner).

    owners maps each operand name to its (label -> (dim, stride)) table.
    """
    if not ordered:
        return []
    groups = [[ordered[0]]]
    for label in ordered[1:]:
        prev = groups[-1][-1]
        contiguous = fold and all(
            table[prev][1] == table[label][1] * table[label][0]
            for table in owners.values()
        )
        if contiguous:
            groups[-1].append(label)
        else:
            groups.append([label])
    return groups


def _group_table(labels: str, t: TensorView) -> dict:
    return {l: (t.dims[i], t.strides[i]) for i, l in enumerate(labels)}


def _facade(t: TensorView, row_groups, col_groups, table, mr: int, nr: int) -> BlockScatterView:
    dims = []
    strides = []
    for g in row_groups + col_groups:
        d = 1
        for l in g:
            d *= table[l][0]
        dims.append(d)
        strides.append(table[g[-1]][1])
    synth = TensorView(t.storage, t.offset, tuple(dims), tuple(strides), t.dtype)
    rows = list(range(len(row_groups)))
    cols = list(range(len(row_groups), len(row_groups) + len(col_groups)))
    return block_scatter(synth, rows, cols, mr, nr)


def plan_contraction(
    spec: ContractionSpec,
    a: TensorView,
    b: TensorView,
    c: TensorView,
    cfg: Optional[KernelConfig] = None,
    fold: bool = True,
) -> ContractionPlan:
    """Classify, order, and fold modes; emit block-scatter matrix facades."""
    sizes = _label_sizes(spec, a, b, c)
    cfg = cfg if cfg is not None else default_config(c.dtype)
    sa, sb, sc = set(spec.labels_a), set(spec.labels_b), set(spec.labels_c)
    m_labels = sa & sc
    n_labels = sb & sc
    k_labels = (sa & sb) - sc

    m_order = _memory_order(m_labels, spec.labels_c, c.strides)
    n_order = _memory_order(n_labels, spec.labels_c, c.strides)
    k_order = _memory_order(k_labels, spec.labels_a, a.strides)

    ta, tb, tc = (
        _group_table(spec.labels_a, a),
        _group_table(spec.labels_b, b),
        _group_table(spec.labels_c, c),
    )
    m_groups = _fold_groups(m_order, {"a": ta, "c": tc}, fold)
    n_groups = _fold_groups(n_order, {"b": tb, "c": tc}, fold)
    k_groups = _fold_groups(k_order, {"a": ta, "b": tb}, fold)

    def prod(labels) -> int:
        p = 1
        for l in labels:
            p *= sizes[l]
        return p

    return ContractionPlan(
        spec=spec,
        m_groups=tuple("".join(g) for g in m_groups),
        n_groups=tuple("".join(g) for g in n_groups),
        k_groups=tuple("".join(g) for g in k_groups),
        m_size=prod(m_labels),
        n_size=prod(n_labels),
        k_size=prod(k_labels),
        a_view=_facade(a, m_groups, k_groups, ta, cfg.mr, cfg.nr),
        b_view=_facade(b, k_groups, n_groups, tb, cfg.mr, cfg.nr),
        c_view=_facade(c, m_groups, n_groups, tc, cfg.mr, cfg.nr),
        folded=fold,
    )


def _to_engine(v: BlockScatterView) -> ScatterMatrix:
    return ScatterMatrix(v.storage, v.rscat, v.cscat, v.rbs, v.cbs, v.m, v.n, v.dtype)


def contract(
    alpha: float,
    a: TensorView,
    b: TensorView,
    beta: float,
    c: TensorView,
    spec: ContractionSpec,
    cfg: Optional[KernelConfig] = None,
    ways: int = 1,
    fold: bool = True,
) -> None:
    """c := beta*c + alpha * contraction(a, b) per the einsum-style spec."""
    if c.storage is a.storage or c.storage is b.storage:
        raise AliasingError("contraction output must not share storage with an input")
    if a.dtype is not c.dtype or b.dtype is not c.dtype:
        raise ShapeError("mixed operand dtypes are not supported")
    cfg = cfg if cfg is not None else default_config(c.dtype)
    plan = plan_contraction(spec, a, b, c, cfg=cfg, fold=fold)
    gemm_scatter(
        alpha,
        _to_engine(plan.a_view),
        _to_engine(plan.b_view),
        beta,
        _to_engine(plan.c_view),
        cfg,
        ways=ways,
    )
