"""Deterministic matrix generators shared across the test modules."""
from __future__ import annotations

import numpy as np


def spd_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    m = rng.uniform(-1, 1, (n, n))
    return m @ m.T + n * np.eye(n)


def skew_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    m = rng.uniform(-1, 1, (n, n))
    return m - m.T


def diag_dominant(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(-1, 1, (n, n)) + n * np.eye(n)


def skew_tridiag_dense(t: np.ndarray, n: int) -> np.ndarray:
    dense = np.zeros((n, n))
    for i, v in enumerate(t):
        dense[i + 1, i] = v
        dense[i, i + 1] = -v
    return dense
