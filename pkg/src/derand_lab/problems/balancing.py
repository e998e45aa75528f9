"""Balancing sign vectors against binary matrices."""
from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError, DimensionMismatch
from ..lll import BadEvent, ConstraintSystem


def threshold(n: int) -> float:
    """4 sqrt(n ln n)."""
    return 4 * math.sqrt(n * math.log(n))


def check_binary_matrix(matrix) -> np.ndarray:
    arr = np.asarray(matrix, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionMismatch("expected a nonempty square matrix")
    if np.any((arr != 0) & (arr != 1)):
        raise ConfigError("matrix entries must be 0 or 1")
    return arr


def check_sign_vector(b) -> np.ndarray:
    arr = np.asarray(b, dtype=np.int64)
    if arr.ndim != 1 or np.any(np.abs(arr) != 1):
        raise ConfigError("sign vector entries must be -1 or +1")
    return arr


def gen_binary_matrix(n: int, stream: np.random.Generator, density: float = 0.5) -> np.ndarray:
    return (stream.random((n, n)) < density).astype(np.int64)


def discrepancy(matrix, b) -> int:
    return int(np.max(np.abs(check_binary_matrix(matrix) @ check_sign_vector(b))))


def verify_balancing(matrix, b) -> bool:
    """max_i |sum_j M_ij b_j| <= 4 sqrt(n ln n)."""
    m = check_binary_matrix(matrix)
    b = check_sign_vector(b)
    if b.size != m.shape[1]:
        raise DimensionMismatch(f"vector length {b.size}, matrix is {m.shape[0]}x{m.shape[1]}")
    return int(np.max(np.abs(m @ b))) <= threshold(m.shape[0])


def balancing_pass_batch(matrix: np.ndarray, signs: np.ndarray) -> np.ndarray:
    sums = np.abs(np.atleast_2d(signs) @ matrix.T)
    return sums.max(axis=1) <= threshold(matrix.shape[0])


def failure_rate(matrix, trials: int, stream: np.random.Generator, chunk: int = 10_000) -> float:
    """Fraction of uniform sign vectors that fail the balancing verifier."""
    m = check_binary_matrix(matrix)
    fails = 0
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        signs = 2 * stream.integers(0, 2, (size, m.shape[0])) - 1
        fails += int((~balancing_pass_batch(m, signs)).sum())
        done += size
    return fails / trials


def chernoff_row_bound(n: int, row_weight: int) -> float:
    """2 exp(-tau^2 / 2m) for tau = 4 sqrt(n ln n)."""
    if row_weight == 0:
        return 0.0
    return min(1.0, 2 * math.exp(-threshold(n) ** 2 / (2 * row_weight)))


def signs_from_bits(bits) -> np.ndarray:
    """Bit 1 -> +1, bit 0 -> -1."""
    return 2 * np.asarray(bits, dtype=np.int64) - 1


def bits_from_signs(b) -> np.ndarray:
    return (check_sign_vector(b) > 0).astype(np.uint8)


def balancing_system(matrix) -> ConstraintSystem:
    """One bad event per nonzero row: |<row, b>| > 4 sqrt(n ln n).  Variables are sign bits."""
    m = check_binary_matrix(matrix)
    n = m.shape[0]
    tau = threshold(n)
    events = []
    for row in m:
        support = tuple(np.flatnonzero(row).tolist())
        if not support:
            continue

        def violated(vals, tau=tau):
            return abs(int(np.sum(2 * vals - 1))) > tau

        def violated_batch(vals, tau=tau):
            return np.abs((2 * vals - 1).sum(axis=1)) > tau

        events.append(BadEvent(support, violated, chernoff_row_bound(n, len(support)),
                               violated_batch))
    return ConstraintSystem(np.full(n, 2), events)
