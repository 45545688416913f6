"""Strided matrix views and range-based partitioning.

A MatrixView is a rectangular window (offset, dims, row/col strides) into a
shared 1-D element buffer. Views never copy: subview() is offset arithmetic,
transposed() is a stride swap. Blocked traversal is expressed with half-open
Ranges produced by partition_steps(), which exposes the processed part (r0),
the active block (r1), the remainder (r2), and optionally a lookahead slice
(r1b) for algorithms on tridiagonal structure.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from .errors import ShapeError

__all__ = [
    "DType",
    "Range",
    "PartitionStep",
    "MatrixView",
    "make_view",
    "from_numpy",
    "subview",
    "transposed",
    "partition_steps",
    "views_overlap",
]


class DType(enum.Enum):
    """Element precision tag with its IEEE-754 unit roundoff."""

    F32 = "f32"
    F64 = "f64"

    @property
    def np(self) -> np.dtype:
        return np.dtype(np.float32 if self is DType.F32 else np.float64)

    @property
    def eps(self) -> float:
        return float(np.finfo(self.np).eps)

    @property
    def itemsize(self) -> int:
        return self.np.itemsize

    @classmethod
    def parse(cls, name: str) -> "DType":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown dtype {name!r}; expected 'f32' or 'f64'") from None

    @classmethod
    def of(cls, arr: np.ndarray) -> "DType":
        if arr.dtype == np.float32:
            return cls.F32
        if arr.dtype == np.float64:
            return cls.F64
        raise ValueError(f"unsupported element dtype {arr.dtype}")


@dataclass(frozen=True)
class Range:
    """Half-open index interval [start, start+len)."""

    start: int
    len: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.len < 0:
            raise ValueError(f"invalid range start={self.start} len={self.len}")

    @property
    def end(self) -> int:
        return self.start + self.len

    @property
    def empty(self) -> bool:
        return self.len == 0

    def slice(self) -> slice:
        return slice(self.start, self.end)

    @classmethod
    def span(cls, start: int, end: int) -> "Range":
        return cls(start, end - start)


@dataclass(frozen=True)
class PartitionStep:
    """One repartitioning step: r0 processed, r1 active, r2 remainder.

    r1b, when present, is the first min(lookahead, r2.len) indices of r2;
    it exposes the extra part needed by algorithms that couple adjacent
    blocks (tridiagonal updates).
    """

    r0: Range
    r1: Range
    r2: Range
    r1b: Optional[Range] = None


def partition_steps(n: int, bs: int, lookahead: int = 0) -> Iterator[PartitionStep]:
    """Yield blocked traversal steps over [0, n) with block size bs.

    The step sequence ends when the active range r1 would be empty, so the
    r1 ranges concatenate to exactly [0, n).
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if bs < 1:
        raise ValueError(f"block size must be >= 1, got {bs}")
    if lookahead < 0:
        raise ValueError(f"lookahead must be >= 0, got {lookahead}")
    done = 0
    while done < n:
        b = min(bs, n - done)
        r2 = Range.span(done + b, n)
        r1b = Range(r2.start, min(lookahead, r2.len)) if lookahead > 0 else None
        yield PartitionStep(Range(0, done), Range(done, b), r2, r1b)
        done += b


@dataclass(frozen=True, eq=False)
class MatrixView:
    """Strided m-by-n window into a shared 1-D element buffer.

    Element (i, j) lives at storage[offset + i*rs + j*cs]. Views are
    immutable descriptors and freely shareable; writers coordinate
    disjointness themselves (the engine guarantees disjoint partitions).
    """

    storage: np.ndarray = field(repr=False)
    offset: int
    m: int
    n: int
    rs: int
    cs: int
    dtype: DType

    def __post_init__(self) -> None:
        if self.m < 0 or self.n < 0:
            raise ShapeError(f"negative dims {self.m}x{self.n}")
        if self.m > 0 and self.n > 0:
            lo, hi = self._addr_bounds()
            if lo < 0 or hi >= self.storage.size:
                raise ShapeError(
                    f"view addresses [{lo}, {hi}] fall outside storage of "
                    f"size {self.storage.size}"
                )

    def _addr_bounds(self) -> tuple[int, int]:
        corners = [
            self.offset,
            self.offset + (self.m - 1) * self.rs,
            self.offset + (self.n - 1) * self.cs,
            self.offset + (self.m - 1) * self.rs + (self.n - 1) * self.cs,
        ]
        return min(corners), max(corners)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    def subview(self, rows: Range, cols: Range) -> "MatrixView":
        """Aliasing window onto rows x cols; no copy."""
        if rows.start < 0 or rows.end > self.m or cols.start < 0 or cols.end > self.n:
            raise ShapeError(
                f"subview rows [{rows.start},{rows.end}) cols [{cols.start},{cols.end}) "
                f"out of bounds for {self.m}x{self.n}"
            )
        return MatrixView(
            storage=self.storage,
            offset=self.offset + rows.start * self.rs + cols.start * self.cs,
            m=rows.len,
            n=cols.len,
            rs=self.rs,
            cs=self.cs,
            dtype=self.dtype,
        )

    def transposed(self) -> "MatrixView":
        """Implicit transpose: swap dims and strides; no copy."""
        return MatrixView(
            storage=self.storage,
            offset=self.offset,
            m=self.n,
            n=self.m,
            rs=self.cs,
            cs=self.rs,
            dtype=self.dtype,
        )

    def to_numpy(self) -> np.ndarray:
        """Writable numpy alias of the viewed elements (no copy)."""
        if self.m == 0 or self.n == 0:
            return np.empty((self.m, self.n), dtype=self.dtype.np)
        itemsize = self.dtype.itemsize
        return np.lib.stride_tricks.as_strided(
            self.storage[self.offset :],
            shape=(self.m, self.n),
            strides=(self.rs * itemsize, self.cs * itemsize),
        )

    def copy_from(self, values: np.ndarray) -> None:
        self.to_numpy()[...] = values

    def item(self, i: int, j: int) -> float:
        return float(self.storage[self.offset + i * self.rs + j * self.cs])

    def addresses(self) -> np.ndarray:
        """All element offsets as an m-by-n array (testing aid)."""
        i = np.arange(self.m)[:, None] * self.rs
        j = np.arange(self.n)[None, :] * self.cs
        return self.offset + i + j


def make_view(
    m: int,
    n: int,
    dtype: DType = DType.F64,
    layout: str = "row-major",
    fill: Union[str, np.ndarray, Sequence[Sequence[float]]] = "zeros",
) -> MatrixView:
    """Allocate fresh storage for an m-by-n matrix and return a view of it.

    fill is "zeros", "sequence" (1..m*n in logical row-major order), or an
    array of values with shape (m, n).
    """
    if m < 0 or n < 0:
        raise ShapeError(f"negative dims {m}x{n}")
    storage = np.zeros(m * n, dtype=dtype.np)
    if layout == "row-major":
        rs, cs = n, 1
    elif layout == "col-major":
        rs, cs = 1, m
    else:
        raise ValueError(f"unknown layout {layout!r}")
    view = MatrixView(storage=storage, offset=0, m=m, n=n, rs=rs, cs=cs, dtype=dtype)
    if isinstance(fill, str):
        if fill == "zeros":
            pass
        elif fill == "sequence":
            if m > 0 and n > 0:
                seq = np.arange(1, m * n + 1, dtype=dtype.np).reshape(m, n)
                view.to_numpy()[...] = seq
        else:
            raise ValueError(f"unknown fill {fill!r}")
    else:
        values = np.asarray(fill, dtype=dtype.np)
        if values.shape != (m, n):
            raise ShapeError(f"fill shape {values.shape} != ({m}, {n})")
        if m > 0 and n > 0:
            view.to_numpy()[...] = values
    return view


def from_numpy(arr: np.ndarray) -> MatrixView:
    """Wrap a 2-D C-contiguous array as a view of its own buffer (no copy)."""
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D array, got ndim={arr.ndim}")
    if not arr.flags.c_contiguous:
        arr = np.ascontiguousarray(arr)
    m, n = arr.shape
    return MatrixView(
        storage=arr.reshape(-1),
        offset=0,
        m=m,
        n=n,
        rs=n,
        cs=1,
        dtype=DType.of(arr),
    )


def subview(a: MatrixView, rows: Range, cols: Range) -> MatrixView:
    return a.subview(rows, cols)


def transposed(a: MatrixView) -> MatrixView:
    return a.transposed()


def _parent_box(v: MatrixView) -> Optional[tuple[int, int, int, int]]:
    """(row_lo, row_hi, col_lo, col_hi) in major-stride coordinates.

    Interprets the view's addresses against the dominant stride of its
    storage so that two windows into the same allocation can be compared as
    rectangles. Returns None when the geometry is not box-representable.
    """
    if v.m == 0 or v.n == 0:
        return None
    major = max(abs(v.rs), abs(v.cs))
    if major == 0:
        return None
    if abs(v.rs) >= abs(v.cs):
        n_major, s_major = v.m, v.rs
        n_minor, s_minor = v.n, v.cs
    else:
        n_major, s_major = v.n, v.cs
        n_minor, s_minor = v.m, v.rs
    if s_major < 0 or s_minor < 0:
        return None
    if n_minor > 0 and (n_minor - 1) * s_minor >= major:
        return None  # minor extent spills into the next major line
    row_lo = v.offset // major
    col_lo = v.offset % major
    row_hi = row_lo + (n_major - 1) * (s_major // major)
    col_hi = col_lo + (n_minor - 1) * s_minor
    return (row_lo, row_hi, col_lo, col_hi)


def views_overlap(a: MatrixView, b: MatrixView) -> bool:
    """Whether two views can address a common element.

    Exact for windows into the same allocation whose minor extent stays
    within one major line (every view produced by make_view/subview/
    transposed); conservative (reports overlap) otherwise.
    """
    if a.storage is not b.storage:
        return False
    if a.m == 0 or a.n == 0 or b.m == 0 or b.n == 0:
        return False
    box_a, box_b = _parent_box(a), _parent_box(b)
    if box_a is None or box_b is None:
        lo_a, hi_a = a._addr_bounds()
        lo_b, hi_b = b._addr_bounds()
        return not (hi_a < lo_b or hi_b < lo_a)
    ar0, ar1, ac0, ac1 = box_a
    br0, br1, bc0, bc1 = box_b
    return not (ar1 < br0 or br1 < ar0 or ac1 < bc0 or bc1 < ac0)
