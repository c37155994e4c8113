"""Shared helpers for the test suite, including independent oracles."""

import numpy as np
import pytest


def gaussian_rank(mat, tol: float = 1e-9) -> int:
    """Rank by row reduction with partial pivoting; independent of the SVD path."""
    a = np.array(mat, dtype=np.complex128)
    if a.size == 0:
        return 0
    scale = np.max(np.abs(a))
    if scale == 0:
        return 0
    rows, cols = a.shape
    rank = 0
    for col in range(cols):
        if rank >= rows:
            break
        pivot = rank + int(np.argmax(np.abs(a[rank:, col])))
        if abs(a[pivot, col]) <= tol * scale:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        a[rank] = a[rank] / a[rank, col]
        for r in range(rows):
            if r != rank:
                a[r] = a[r] - a[r, col] * a[rank]
        rank += 1
    return rank


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
