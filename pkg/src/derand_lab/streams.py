"""Deterministic random streams.

Two kinds of stream are used:

* ``make_rng(seed, *labels)`` returns a ``numpy.random.Generator`` for
  sequential algorithms (graph pairing, resampling, hitting-set draws).
* ``CounterStream`` is a counter-based stream: the i-th uniform of a stream
  is a pure function of ``(key, i)``.  Monte Carlo trials get their own key
  via ``trial_key``, so results do not depend on evaluation order.  The same
  arithmetic is compiled into the numba kernels of ``codebook``.

Root seeds are hex strings, ints or bytes.  Labels are folded in with
BLAKE2b so that unrelated experiments never share a stream.
"""
from __future__ import annotations

import hashlib

import numpy as np
from numba import njit

from .errors import ConfigError

DEFAULT_SEED = "d3a4d0"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_SUB_SALT = np.uint64(0xA0761D6478BD642F)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0


def seed_bytes(seed) -> bytes:
    """Canonical byte form of a root seed (hex string, int or bytes)."""
    if isinstance(seed, (bytes, bytearray)):
        return bytes(seed)
    if isinstance(seed, (int, np.integer)):
        seed = int(seed)
        if seed < 0:
            raise ConfigError("seed must be nonnegative")
        return seed.to_bytes(max(1, (seed.bit_length() + 7) // 8), "big")
    if isinstance(seed, str):
        text = seed.strip().lower()
        if text.startswith("0x"):
            text = text[2:]
        if len(text) % 2:
            text = "0" + text
        try:
            return bytes.fromhex(text)
        except ValueError as exc:
            raise ConfigError(f"seed is not valid hex: {seed!r}") from exc
    raise ConfigError(f"unsupported seed type {type(seed).__name__}")


def _digest(seed, labels, size) -> bytes:
    h = hashlib.blake2b(digest_size=size, person=b"derand-lab")
    raw = seed_bytes(seed)
    h.update(len(raw).to_bytes(4, "big"))
    h.update(raw)
    for label in labels:
        text = repr(label).encode()
        h.update(len(text).to_bytes(4, "big"))
        h.update(text)
    return h.digest()


def root_key(seed, *labels) -> int:
    """64-bit key for a counter stream, derived from seed and labels."""
    return int.from_bytes(_digest(seed, labels, 8), "big")


def make_rng(seed, *labels) -> np.random.Generator:
    entropy = int.from_bytes(_digest(seed, labels, 16), "big")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


@njit(cache=True)
def mix64(z):
    z = np.uint64(z)
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def sub_key(key, index):
    """Key of child stream ``index`` of stream ``key``."""
    base = mix64(np.uint64(key) ^ _SUB_SALT)
    return mix64(base + (np.uint64(index) + _ONE) * _GOLDEN)


@njit(cache=True)
def trial_key(key, word, trial):
    return sub_key(sub_key(key, word), trial)


@njit(cache=True)
def uniform_at(key, counter):
    """The ``counter``-th uniform in [0, 1) of stream ``key``; 53-bit resolution."""
    z = mix64(np.uint64(key) + (np.uint64(counter) + _ONE) * _GOLDEN)
    return np.float64(z >> _S11) * _INV53


@njit(cache=True)
def _uniform_block(key, start, size):
    out = np.empty(size, dtype=np.float64)
    for i in range(size):
        out[i] = uniform_at(key, start + i)
    return out


class CounterStream:
    """Sequential view of a counter-based stream.

    Quacks like ``numpy.random.Generator.random`` so it can be handed to
    ``channel.transmit``.
    """

    def __init__(self, key: int, position: int = 0):
        self.key = int(key) & 0xFFFFFFFFFFFFFFFF
        self.position = int(position)

    @classmethod
    def for_trial(cls, key: int, word: int, trial: int) -> "CounterStream":
        return cls(int(trial_key(np.uint64(key), word, trial)))

    def random(self, size=None):
        count = 1 if size is None else int(np.prod(size))
        block = _uniform_block(np.uint64(self.key), self.position, count)
        self.position += count
        if size is None:
            return float(block[0])
        return block.reshape(size)
