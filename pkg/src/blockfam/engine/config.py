"""Kernel configuration: micro-tile and cache-block dimensions."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Optional

from ..views import DType

__all__ = ["KernelConfig", "default_config"]

_OVERRIDE_FIELDS = ("mr", "nr", "mc", "kc", "nc")


@dataclass(frozen=True)
class KernelConfig:
    """Blocking parameters for the level-3 engine.

    mr x nr is the micro-tile computed by the inner kernel; mc/kc/nc are the
    cache block sizes of the three outer loops. mc and nc are rounded up to
    multiples of mr and nr at construction so packed blocks tile cleanly.
    acc_dtype is the accumulation precision and must not be narrower than
    dtype (f32 operands with f64 accumulation is the supported mixed mode).
    """

    mr: int
    nr: int
    mc: int
    kc: int
    nc: int
    dtype: DType
    acc_dtype: DType

    def __post_init__(self) -> None:
        for name in ("mr", "nr", "mc", "kc", "nc"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        object.__setattr__(self, "mc", _round_up(self.mc, self.mr))
        object.__setattr__(self, "nc", _round_up(self.nc, self.nr))
        if self.dtype is DType.F64 and self.acc_dtype is DType.F32:
            raise ValueError("accumulation dtype must be at least as wide as the operand dtype")

    def with_overrides(self, overrides: Optional[Mapping[str, int]]) -> "KernelConfig":
        if not overrides:
            return self
        unknown = set(overrides) - set(_OVERRIDE_FIELDS)
        if unknown:
            raise ValueError(f"unknown kernel override fields {sorted(unknown)}")
        return replace(self, **dict(overrides))


def _round_up(value: int, unit: int) -> int:
    return ((value + unit - 1) // unit) * unit


def default_config(dtype: DType = DType.F64, acc_dtype: Optional[DType] = None) -> KernelConfig:
    """Standard cache-fit blocking: mr=8, nr=6, mc=64, kc=256, nc=2048.

    f32 doubles kc (half-width elements, same cache footprint). Accumulation
    defaults to the operand dtype.
    """
    return KernelConfig(
        mr=8,
        nr=6,
        mc=64,
        kc=512 if dtype is DType.F32 else 256,
        nc=2048,
        dtype=dtype,
        acc_dtype=acc_dtype if acc_dtype is not None else dtype,
    )
