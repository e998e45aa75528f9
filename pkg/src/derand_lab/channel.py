"""Discrete memoryless channels: validation, entropies, simulation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NegativeEntry, NonStochasticRow, SymbolOutOfRange

PROB_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic transition matrix ``transition[x, y] = p(y|x)``."""

    transition: np.ndarray

    @property
    def input_alphabet_size(self) -> int:
        return self.transition.shape[0]

    @property
    def output_alphabet_size(self) -> int:
        return self.transition.shape[1]

    @property
    def cdf(self) -> np.ndarray:
        return np.cumsum(self.transition, axis=1)

    def __eq__(self, other):
        return isinstance(other, Channel) and np.array_equal(self.transition, other.transition)

    def __hash__(self):
        return hash(self.transition.tobytes())


def _check_probabilities(arr: np.ndarray, what: str) -> np.ndarray:
    if np.any(np.isnan(arr)):
        raise NegativeEntry(f"{what} contains NaN")
    if np.any(arr < 0):
        raise NegativeEntry(f"{what} has a negative entry")
    if np.any(arr > 1):
        raise NonStochasticRow(f"{what} has an entry above 1")
    sums = arr.sum(axis=-1, keepdims=True)
    dev = np.abs(sums - 1.0)
    if np.any(dev > PROB_TOL):
        bad = np.flatnonzero(dev.ravel() > PROB_TOL)[0]
        raise NonStochasticRow(f"{what} row {bad} sums to {float(sums.ravel()[bad]):.12g}")
    return arr / sums


def validate_channel(matrix) -> Channel:
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionMismatch("channel matrix must be a nonempty rectangular 2-d array")
    arr = _check_probabilities(arr, "channel matrix")
    arr.setflags(write=False)
    return Channel(arr)


def validate_distribution(probs, size: int | None = None) -> np.ndarray:
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionMismatch("distribution must be a nonempty vector")
    if size is not None and arr.size != size:
        raise DimensionMismatch(f"distribution has {arr.size} entries, expected {size}")
    return _check_probabilities(arr, "distribution")


def bsc(p: float) -> Channel:
    return validate_channel([[1 - p, p], [p, 1 - p]])


def uniform(size: int) -> np.ndarray:
    return np.full(size, 1.0 / size)


def entropy(dist) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    p = np.asarray(dist, dtype=np.float64).ravel()
    p = p[p > 0]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def output_distribution(channel: Channel, q) -> np.ndarray:
    q = validate_distribution(q, channel.input_alphabet_size)
    return q @ channel.transition


def joint_distribution(channel: Channel, q) -> np.ndarray:
    """p(x, y) = Q(x) p(y|x) as a |X| x |Y| matrix."""
    q = validate_distribution(q, channel.input_alphabet_size)
    return q[:, None] * channel.transition


def conditional_entropy(channel: Channel, q) -> float:
    q = validate_distribution(q, channel.input_alphabet_size)
    return float(sum(qx * entropy(row) for qx, row in zip(q, channel.transition) if qx > 0))


def capacity_for_input(channel: Channel, q) -> float:
    """Mutual information I(X;Y) in bits for X ~ q through ``channel``."""
    q = validate_distribution(q, channel.input_alphabet_size)
    support = channel.transition[q > 0]
    if np.all(support == support[0]):
        # output law independent of the input: exactly zero, no rounding residue
        return 0.0
    value = entropy(q @ channel.transition) - conditional_entropy(channel, q)
    return max(0.0, value)


def transmit(channel: Channel, x_block, rng_stream) -> np.ndarray:
    """Send ``x_block`` through the channel, one uniform draw per symbol.

    Output symbol i is the inverse-CDF image of the i-th uniform taken from
    ``rng_stream`` (anything with a ``random(size)`` method).
    """
    x = np.asarray(x_block, dtype=np.int64)
    if x.size and (x.min() < 0 or x.max() >= channel.input_alphabet_size):
        raise SymbolOutOfRange("input symbol outside the channel alphabet")
    u = rng_stream.random(x.size)
    y = (channel.cdf[x] <= u[:, None]).sum(axis=1)
    return np.minimum(y, channel.output_alphabet_size - 1)


def sample_symbols(probs, u) -> np.ndarray:
    """Inverse-CDF sampling of symbols from a distribution given uniforms."""
    cdf = np.cumsum(np.asarray(probs, dtype=np.float64))
    u = np.asarray(u)
    y = (cdf <= u[..., None]).sum(axis=-1)
    return np.minimum(y, cdf.size - 1)


def channel_info(channel: Channel, q) -> dict:
    q = validate_distribution(q, channel.input_alphabet_size)
    return {
        "H_X": entropy(q),
        "H_Y": entropy(q @ channel.transition),
        "H_Y_given_X": conditional_entropy(channel, q),
        "C_Q": capacity_for_input(channel, q),
    }
