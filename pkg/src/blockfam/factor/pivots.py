"""Row-pivot bookkeeping shared by the pivoted factorizations."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..views import MatrixView

__all__ = ["PivotVector", "apply_pivots"]


@dataclass(frozen=True)
class PivotVector:
    """LAPACK-style swap list: piv[k] is the row swapped with row k at step k."""

    piv: np.ndarray = field()

    def __post_init__(self) -> None:
        p = np.asarray(self.piv, dtype=np.int64)
        object.__setattr__(self, "piv", p)
        for k, v in enumerate(p):
            if v < k:
                raise ValueError(f"piv[{k}]={v} must be >= {k}")

    def __len__(self) -> int:
        return len(self.piv)

    def __getitem__(self, k: int) -> int:
        return int(self.piv[k])

    def permutation(self, n: int) -> np.ndarray:
        """Index array perm with (P @ A) == A[perm]."""
        perm = np.arange(n)
        for k, p in enumerate(self.piv):
            if p != k:
                perm[[k, p]] = perm[[p, k]]
        return perm

    def sign(self) -> int:
        """det(P): parity of the non-trivial swaps."""
        flips = int(np.count_nonzero(self.piv != np.arange(len(self.piv))))
        return -1 if flips % 2 else 1


def apply_pivots(a: MatrixView, piv: PivotVector, direction: str = "forward") -> None:
    """Apply the row swaps to a, ascending (forward) or descending (backward).

    backward(forward(a)) restores a exactly.
    """
    an = a.to_numpy()
    if direction == "forward":
        order = range(len(piv))
    elif direction == "backward":
        order = range(len(piv) - 1, -1, -1)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    for k in order:
        p = piv[k]
        if p != k:
            an[[k, p], :] = an[[p, k], :]
