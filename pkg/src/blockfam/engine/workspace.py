"""Pack-buffer pool with allocation accounting.

Every packing buffer the engine uses is checked out of this pool, so tests
can assert workspace bounds (e.g. that the fused sandwich product never
materializes a k-by-n intermediate). Buffers are recycled; the accounting
tracks elements currently checked out and the high-water mark since the
last reset.
"""
from __future__ import annotations

import threading

import numpy as np

__all__ = ["Workspace", "workspace"]


class Workspace:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._free: dict[tuple[str, int], list[np.ndarray]] = {}
        self._live = 0
        self._peak = 0

    def checkout(self, n_elements: int, dtype: np.dtype) -> np.ndarray:
        key = (np.dtype(dtype).str, n_elements)
        with self._lock:
            stack = self._free.get(key)
            buf = stack.pop() if stack else None
            self._live += n_elements
            if self._live > self._peak:
                self._peak = self._live
        if buf is None:
            buf = np.empty(n_elements, dtype=dtype)
        return buf

    def checkin(self, buf: np.ndarray) -> None:
        key = (buf.dtype.str, buf.size)
        with self._lock:
            self._free.setdefault(key, []).append(buf)
            self._live -= buf.size

    def reset_peak(self) -> None:
        with self._lock:
            self._peak = self._live

    @property
    def live_elements(self) -> int:
        return self._live

    @property
    def peak_elements(self) -> int:
        return self._peak


workspace = Workspace()
