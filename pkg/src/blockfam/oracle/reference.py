"""Brute-force oracles. Slow and obvious on purpose."""
from __future__ import annotations

import itertools
from typing import Union

import numpy as np
from numba import njit

from ..errors import NotPositiveDefiniteError, ShapeError
from ..tensor.types import ContractionSpec, TensorView
from ..views import MatrixView

__all__ = [
    "gemm_naive",
    "chol_scalar",
    "lu_scalar",
    "pfaffian_combinatorial",
    "contract_naive",
]


@njit(cache=True)
def _gemm_triple_loop(
    abuf, aoff, ars, acs, bbuf, boff, brs, bcs, cbuf, coff, crs, ccs,
    m, n, k, alpha, beta,
):
    for i in range(m):
        for j in range(n):
            acc = 0.0
            for p in range(k):
                av = np.float64(abuf[aoff + i * ars + p * acs])
                bv = np.float64(bbuf[boff + p * brs + j * bcs])
                acc += av * bv
            ca = coff + i * crs + j * ccs
            if beta == 0.0:
                cbuf[ca] = alpha * acc
            else:
                cbuf[ca] = beta * np.float64(cbuf[ca]) + alpha * acc


def gemm_naive(alpha: float, a: MatrixView, b: MatrixView, beta: float, c: MatrixView) -> None:
    """Textbook c := beta*c + alpha*a*b, ascending i, j, k, f64 accumulation."""
    if a.n != b.m or c.m != a.m or c.n != b.n:
        raise ShapeError(f"gemm dims mismatch: a {a.shape}, b {b.shape}, c {c.shape}")
    if c.m == 0 or c.n == 0 or (alpha == 0.0 and beta == 1.0):
        return
    _gemm_triple_loop(
        a.storage, a.offset, a.rs, a.cs,
        b.storage, b.offset, b.rs, b.cs,
        c.storage, c.offset, c.rs, c.cs,
        c.m, c.n, a.n, float(alpha), float(beta),
    )


def chol_scalar(a: MatrixView) -> None:
    """Scalar right-looking Cholesky with positive diagonal, in place.

    Touches only the lower triangle; bs=1 reference for the blocked family.
    """
    if a.m != a.n:
        raise ShapeError(f"square matrix required, got {a.shape}")
    an = a.to_numpy()
    n = a.n
    for k in range(n):
        d = an[k, k]
        if not d > 0.0:
            raise NotPositiveDefiniteError(k)
        d = np.sqrt(d)
        an[k, k] = d
        if k + 1 < n:
            an[k + 1 :, k] /= d
            for j in range(k + 1, n):
                an[j:, j] -= an[j:, k] * an[j, k]


def lu_scalar(a: MatrixView) -> np.ndarray:
    """Scalar partially pivoted elimination; returns the pivot vector.

    Pivot k maximizes |column k| over rows >= k, ties broken by the
    smallest row index. An exactly-zero pivot leaves U[k,k]=0 and moves on.
    """
    an = a.to_numpy()
    m, n = a.shape
    steps = min(m, n)
    piv = np.zeros(steps, dtype=np.int64)
    for k in range(steps):
        p = k + int(np.argmax(np.abs(an[k:, k])))
        piv[k] = p
        if p != k:
            an[[k, p], :] = an[[p, k], :]
        d = an[k, k]
        if d == 0.0:
            continue
        if k + 1 < m:
            an[k + 1 :, k] /= d
            an[k + 1 :, k + 1 :] -= np.outer(an[k + 1 :, k], an[k, k + 1 :])
    return piv


def pfaffian_combinatorial(x: Union[MatrixView, np.ndarray]) -> float:
    """Signed sum over perfect matchings; exact up to f64 rounding.

    Double-factorial cost, so the order is capped at 12.
    """
    xn = x.to_numpy() if isinstance(x, MatrixView) else np.asarray(x, dtype=np.float64)
    if xn.ndim != 2 or xn.shape[0] != xn.shape[1]:
        raise ShapeError(f"square matrix required, got shape {xn.shape}")
    n = xn.shape[0]
    if n > 12:
        raise ValueError(f"combinatorial pfaffian capped at n=12, got {n}")
    if n % 2 == 1:
        return 0.0
    return _pf_expand(tuple(range(n)), xn)


def _pf_expand(idx: tuple, xn: np.ndarray) -> float:
    if not idx:
        return 1.0
    i0, rest = idx[0], idx[1:]
    total = 0.0
    sign = 1.0
    for pos, j in enumerate(rest):
        sub = rest[:pos] + rest[pos + 1 :]
        total += sign * float(xn[i0, j]) * _pf_expand(sub, xn)
        sign = -sign
    return total


def contract_naive(
    alpha: float,
    a: TensorView,
    b: TensorView,
    beta: float,
    c: TensorView,
    spec: ContractionSpec,
) -> None:
    """c := beta*c + alpha*contraction by nested loops over label values.

    Contracted labels are summed in ascending alphabetical order; everything
    accumulates in f64.
    """
    sizes = _label_sizes(spec, a, b, c)
    if alpha == 0.0 and beta == 1.0:
        return
    contracted = sorted(set(spec.labels_a) & set(spec.labels_b) - set(spec.labels_c))
    free = list(spec.labels_c)
    for assignment in itertools.product(*(range(sizes[l]) for l in free)):
        env = dict(zip(free, assignment))
        acc = 0.0
        for inner in itertools.product(*(range(sizes[l]) for l in contracted)):
            env.update(zip(contracted, inner))
            av = a.item(tuple(env[l] for l in spec.labels_a))
            bv = b.item(tuple(env[l] for l in spec.labels_b))
            acc += av * bv
        ci = tuple(env[l] for l in spec.labels_c)
        if beta == 0.0:
            c.set_item(ci, alpha * acc)
        else:
            c.set_item(ci, beta * c.item(ci) + alpha * acc)


def _label_sizes(spec: ContractionSpec, a: TensorView, b: TensorView, c: TensorView) -> dict:
    sizes: dict[str, int] = {}
    for labels, t in ((spec.labels_a, a), (spec.labels_b, b), (spec.labels_c, c)):
        if len(labels) != len(t.dims):
            raise ShapeError(f"labels {labels!r} do not match rank {len(t.dims)}")
        for l, d in zip(labels, t.dims):
            if sizes.setdefault(l, d) != d:
                raise ShapeError(f"inconsistent sizes for label {l!r}")
    return sizes
