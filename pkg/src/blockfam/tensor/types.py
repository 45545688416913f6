"""Dense tensor views and einsum-style contraction specs.

Kept free of engine imports so reference implementations can use these
types without touching the compute path.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from ..errors import ShapeError
from ..views import DType

__all__ = ["TensorView", "make_tensor", "ContractionSpec", "MAX_RANK"]

MAX_RANK = 8


@dataclass(frozen=True, eq=False)
class TensorView:
    """Strided window into a flat buffer; element at offset + idx . strides."""

    storage: np.ndarray = field(repr=False)
    offset: int
    dims: tuple[int, ...]
    strides: tuple[int, ...]
    dtype: DType

    def __post_init__(self) -> None:
        if len(self.dims) != len(self.strides):
            raise ShapeError("dims and strides must have equal rank")
        if len(self.dims) > MAX_RANK:
            raise ShapeError(f"rank {len(self.dims)} exceeds cap {MAX_RANK}")
        if any(d < 0 for d in self.dims):
            raise ShapeError(f"negative dims {self.dims}")
        if self.size > 0:
            lo = self.offset + sum(min(0, (d - 1) * s) for d, s in zip(self.dims, self.strides))
            hi = self.offset + sum(max(0, (d - 1) * s) for d, s in zip(self.dims, self.strides))
            if lo < 0 or hi >= self.storage.size:
                raise ShapeError(
                    f"tensor addresses [{lo}, {hi}] fall outside storage of size {self.storage.size}"
                )

    @property
    def rank(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        size = 1
        for d in self.dims:
            size *= d
        return size

    def addr(self, idx: Sequence[int]) -> int:
        a = self.offset
        for i, s in zip(idx, self.strides):
            a += i * s
        return a

    def item(self, idx: Sequence[int]) -> float:
        return float(self.storage[self.addr(idx)])

    def set_item(self, idx: Sequence[int], value: float) -> None:
        self.storage[self.addr(idx)] = value

    def to_numpy(self) -> np.ndarray:
        if self.size == 0:
            return np.empty(self.dims, dtype=self.dtype.np)
        itemsize = self.dtype.itemsize
        return np.lib.stride_tricks.as_strided(
            self.storage[self.offset :],
            shape=self.dims,
            strides=tuple(s * itemsize for s in self.strides),
        )


def make_tensor(
    dims: Sequence[int],
    dtype: DType = DType.F64,
    fill: Union[str, np.ndarray] = "zeros",
) -> TensorView:
    """Allocate a fresh row-major tensor."""
    dims = tuple(int(d) for d in dims)
    size = 1
    for d in dims:
        size *= d
    storage = np.zeros(size, dtype=dtype.np)
    strides = []
    s = 1
    for d in reversed(dims):
        strides.append(s)
        s *= d
    t = TensorView(storage, 0, dims, tuple(reversed(strides)), dtype)
    if isinstance(fill, str):
        if fill == "sequence":
            storage[:] = np.arange(1, size + 1, dtype=dtype.np)
        elif fill != "zeros":
            raise ValueError(f"unknown fill {fill!r}")
    else:
        values = np.asarray(fill, dtype=dtype.np)
        if values.shape != dims:
            raise ShapeError(f"fill shape {values.shape} != {dims}")
        if size:
            t.to_numpy()[...] = values
    return t


@dataclass(frozen=True)
class ContractionSpec:
    """Einsum-style labels: labels_a,labels_b->labels_c over letters a-z.

    Every output label must come from exactly one input; labels shared by
    both inputs and absent from the output are contracted; a label may not
    repeat within one operand, and every input label must be classifiable
    (appear in the other input or in the output).
    """

    labels_a: str
    labels_b: str
    labels_c: str

    def __post_init__(self) -> None:
        for name, labels in (("a", self.labels_a), ("b", self.labels_b), ("c", self.labels_c)):
            if not all("a" <= ch <= "z" for ch in labels):
                raise ValueError(f"operand {name} labels {labels!r} must be letters a-z")
            if len(set(labels)) != len(labels):
                raise ValueError(f"repeated label within operand {name}: {labels!r}")
        sa, sb = set(self.labels_a), set(self.labels_b)
        for ch in self.labels_c:
            in_a, in_b = ch in sa, ch in sb
            if in_a and in_b:
                raise ValueError(f"output label {ch!r} appears in both inputs")
            if not (in_a or in_b):
                raise ValueError(f"output label {ch!r} appears in neither input")
        sc = set(self.labels_c)
        for name, labels, other in (("a", self.labels_a, sb), ("b", self.labels_b, sa)):
            for ch in labels:
                if ch not in other and ch not in sc:
                    raise ValueError(
                        f"label {ch!r} of operand {name} is neither contracted nor free"
                    )

    @classmethod
    def parse(cls, text: str) -> "ContractionSpec":
        try:
            inputs, out = text.replace(" ", "").split("->")
            la, lb = inputs.split(",")
        except ValueError:
            raise ValueError(f"expected 'labels_a,labels_b->labels_c', got {text!r}") from None
        return cls(la, lb, out)

    @property
    def contracted(self) -> str:
        return "".join(
            ch for ch in self.labels_a if ch in self.labels_b and ch not in self.labels_c
        )

    def __str__(self) -> str:
        return f"{self.labels_a},{self.labels_b}->{self.labels_c}"
