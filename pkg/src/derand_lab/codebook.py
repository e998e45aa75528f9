"""Random codebooks, joint-typicality decoding and error-rate estimation.

Messages are numbered 1..M; row ``w - 1`` of ``Codebook.words`` is the
codeword of message ``w`` and the decoder returns 0 to declare an error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _typicality as kern
from .channel import (
    Channel,
    capacity_for_input,
    entropy,
    sample_symbols,
    transmit,
    validate_distribution,
)
from .elsearch import as_bitstring, bits_to_hex, derive_seed_bits, expand_bytes
from .errors import ConfigError, DimensionMismatch, EmptyAlphabet, RateTooLarge
from .streams import CounterStream, root_key

MAX_LOG_WORDS = 30
BITS_PER_SYMBOL = 32


@dataclass(frozen=True, eq=False)
class Codebook:
    n: int
    words: np.ndarray
    gen_seed: str | None = None
    q: tuple | None = None

    @property
    def num_words(self) -> int:
        return self.words.shape[0]

    @property
    def rate(self) -> float:
        return math.log2(self.num_words) / self.n

    def codeword(self, message: int) -> np.ndarray:
        return self.words[message - 1]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "M": self.num_words,
            "seed_hex": None if self.gen_seed is None else bits_to_hex(self.gen_seed),
            "seed_bits": None if self.gen_seed is None else len(self.gen_seed),
            "q": None if self.q is None else list(self.q),
            "rows": self.words.tolist(),
        }


def log_num_words(n: int, rate: float) -> int:
    # round first: 10 * 0.3 is 3.0000000000000004 in floating point
    return math.ceil(round(n * rate, 9))


def generate_codebook(q, n: int, rate: float, seed) -> Codebook:
    """M = 2^ceil(nR) codewords, every symbol i.i.d. from ``q``.

    Each symbol consumes 32 bits of ``expand(seed)`` read as a big-endian
    integer ``v``; the symbol is the inverse-CDF image of ``v / 2^32``.
    """
    if len(np.atleast_1d(q)) == 0:
        raise EmptyAlphabet("input distribution is empty")
    q = validate_distribution(q)
    if n < 1:
        raise ConfigError("block length must be >= 1")
    if not rate > 0:
        raise ConfigError("rate must be positive")
    k = log_num_words(n, rate)
    if k > MAX_LOG_WORDS:
        raise RateTooLarge(f"ceil(nR) = {k} exceeds {MAX_LOG_WORDS}")
    m = 1 << k
    seed = as_bitstring(seed)
    raw = np.frombuffer(expand_bytes(seed, m * n * BITS_PER_SYMBOL // 8), dtype=">u4")
    u = raw.astype(np.float64) / 2.0**32
    words = sample_symbols(q, u).reshape(m, n).astype(np.int64)
    words.setflags(write=False)
    return Codebook(n, words, seed, tuple(float(v) for v in q))


def regenerate(codebook: Codebook) -> Codebook:
    if codebook.gen_seed is None or codebook.q is None:
        raise ConfigError("codebook carries no generation seed")
    return generate_codebook(codebook.q, codebook.n, math.log2(codebook.num_words) / codebook.n,
                             codebook.gen_seed)


def _log2_or_neginf(p: np.ndarray) -> np.ndarray:
    out = np.full(p.shape, -np.inf)
    np.log2(p, out=out, where=p > 0)
    return out


@dataclass(frozen=True, eq=False)
class TypicalityParams:
    epsilon: float
    joint: np.ndarray
    n: int

    def __post_init__(self):
        joint = np.asarray(self.joint, dtype=np.float64)
        if joint.ndim != 2:
            raise DimensionMismatch("joint distribution must be a |X| x |Y| matrix")
        validate_distribution(joint.ravel())
        if self.epsilon < 0:
            raise ConfigError("epsilon must be nonnegative")
        if self.n < 1:
            raise ConfigError("block length must be >= 1")
        object.__setattr__(self, "joint", joint)

    @classmethod
    def from_channel(cls, channel: Channel, q, n: int, epsilon: float) -> "TypicalityParams":
        q = validate_distribution(q, channel.input_alphabet_size)
        return cls(float(epsilon), q[:, None] * channel.transition, int(n))

    @property
    def px(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    @property
    def py(self) -> np.ndarray:
        return self.joint.sum(axis=0)

    def kernel_args(self):
        return (
            _log2_or_neginf(self.px),
            _log2_or_neginf(self.py),
            _log2_or_neginf(self.joint),
            entropy(self.px),
            entropy(self.py),
            entropy(self.joint),
            float(self.epsilon),
        )


def _check_block(block, size, length, what):
    arr = np.asarray(block, dtype=np.int64)
    if arr.shape != (length,):
        raise DimensionMismatch(f"{what} must have length {length}")
    if arr.size and (arr.min() < 0 or arr.max() >= size):
        raise DimensionMismatch(f"{what} has a symbol outside the alphabet")
    return arr


def is_jointly_typical(x_block, y_block, params: TypicalityParams) -> bool:
    nx, ny = params.joint.shape
    x = _check_block(x_block, nx, params.n, "x block")
    y = _check_block(y_block, ny, params.n, "y block")
    counts = np.zeros((nx, ny), dtype=np.int64)
    np.add.at(counts, (x, y), 1)
    lpx, lpy, lpxy, hx, hy, hxy, eps = params.kernel_args()
    return bool(kern.typical_from_counts(counts, lpx, lpy, lpxy, hx, hy, hxy, eps, params.n))


def typical_rows(codebook: Codebook, y_block, params: TypicalityParams) -> np.ndarray:
    """Messages (1-based) whose codeword is jointly typical with ``y_block``."""
    nx, ny = params.joint.shape
    y = _check_block(y_block, ny, params.n, "y block")
    if codebook.n != params.n:
        raise DimensionMismatch("codebook and typicality block lengths differ")
    flags = kern.decode_counts_all(
        np.ascontiguousarray(codebook.words, dtype=np.int64), y, nx, ny, *params.kernel_args()
    )
    return np.flatnonzero(flags) + 1


def decode(codebook: Codebook, y_block, params: TypicalityParams) -> int:
    """Unique jointly typical message, or 0 if there are none or several."""
    hits = typical_rows(codebook, y_block, params)
    return int(hits[0]) if hits.size == 1 else 0


@dataclass(frozen=True)
class ErrorReport:
    per_word_error: np.ndarray
    average_error: float
    trials: int
    trials_per_word: int
    confidence_halfwidth: float


def _run_error_kernel(codebook, channel, params, trials_per_word, key, decoded, kernel):
    words = np.ascontiguousarray(codebook.words, dtype=np.int64)
    cdf = np.ascontiguousarray(channel.cdf)
    nx, ny = params.joint.shape
    args = params.kernel_args()
    if kernel in ("auto", "binary") and nx == 2 and ny == 2:
        errors, ok = kern.error_kernel_binary(words, cdf, *args, np.uint64(key),
                                              trials_per_word, decoded)
        if ok:
            return errors
        if kernel == "binary":
            raise ConfigError("typical ranges are not intervals; use the general kernel")
    elif kernel == "binary":
        raise ConfigError("binary kernel needs binary alphabets")
    return kern.error_kernel_general(words, cdf, nx, ny, *args, np.uint64(key),
                                     trials_per_word, decoded)


def estimate_error(
    codebook: Codebook,
    channel: Channel,
    params: TypicalityParams,
    trials_per_word: int,
    seed,
    kernel: str = "auto",
    return_decoded: bool = False,
):
    """Monte Carlo estimate of the per-word and average decoding error.

    Trial ``t`` of message ``w`` uses ``CounterStream.for_trial(key, w-1, t)``
    with ``key = root_key(seed, "estimate_error")``; the result is identical
    to running ``decode(transmit(...))`` trial by trial.
    """
    if trials_per_word < 1:
        raise ConfigError("trials_per_word must be >= 1")
    if params.joint.shape != channel.transition.shape:
        raise DimensionMismatch("typicality parameters do not match the channel")
    key = root_key(seed, "estimate_error")
    m = codebook.num_words
    decoded = np.zeros((m, trials_per_word) if return_decoded else (0, 0), dtype=np.int64)
    errors = _run_error_kernel(codebook, channel, params, trials_per_word, key, decoded, kernel)
    per_word = errors / trials_per_word
    total = m * trials_per_word
    avg = float(errors.sum() / total)
    report = ErrorReport(per_word, avg, total, trials_per_word,
                         1.96 * math.sqrt(avg * (1 - avg) / total))
    return (report, decoded) if return_decoded else report


def estimate_error_reference(codebook, channel, params, trials_per_word, seed) -> np.ndarray:
    """Pure-Python trial loop; decoded message per (word, trial)."""
    key = root_key(seed, "estimate_error")
    out = np.zeros((codebook.num_words, trials_per_word), dtype=np.int64)
    for w in range(codebook.num_words):
        for t in range(trials_per_word):
            y = transmit(channel, codebook.words[w], CounterStream.for_trial(key, w, t))
            out[w, t] = decode(codebook, y, params)
    return out


def empirical_joint_aep(params: TypicalityParams, channel: Channel, q, trials: int, seed):
    """(fraction of dependent pairs typical, fraction of independent pairs typical)."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    q = validate_distribution(q, channel.input_alphabet_size)
    if params.joint.shape != channel.transition.shape:
        raise DimensionMismatch("typicality parameters do not match the channel")
    qcdf = np.cumsum(q)
    cdf = np.ascontiguousarray(channel.cdf)
    ycdf = np.cumsum(q @ channel.transition)
    args = params.kernel_args()
    dep = kern.aep_kernel(qcdf, cdf, ycdf, *args, params.n,
                          np.uint64(root_key(seed, "aep", "dependent")), trials, False)
    ind = kern.aep_kernel(qcdf, cdf, ycdf, *args, params.n,
                          np.uint64(root_key(seed, "aep", "independent")), trials, True)
    return dep / trials, ind / trials


def aep_reference_trial(params, channel, q, seed, trial, independent=False) -> bool:
    """One AEP trial through the Python path (used to cross-check the kernel)."""
    label = "independent" if independent else "dependent"
    stream = CounterStream.for_trial(root_key(seed, "aep", label), 0, trial)
    q = validate_distribution(q, channel.input_alphabet_size)
    x = sample_symbols(q, stream.random(params.n))
    if independent:
        y = sample_symbols(q @ channel.transition, stream.random(params.n))
    else:
        y = transmit(channel, x, stream)
    return is_jointly_typical(x, y, params)


def tradeoff_experiment(
    channel: Channel,
    q,
    rates,
    block_lengths,
    seed_lengths,
    trials: int,
    seed,
    epsilon: float = 0.25,
    replication: int = 0,
) -> list[dict]:
    """Seed length / rate / block length sweep of the estimated error.

    The codebook for each row comes from a seed of exactly ``seed_length``
    bits derived from the root seed; rates at or above C_Q are run and
    flagged not achievable.
    """
    cap = capacity_for_input(channel, q)
    rows = []
    for rate in rates:
        for n in block_lengths:
            params = TypicalityParams.from_channel(channel, q, n, epsilon)
            for seed_len in seed_lengths:
                cb_seed = derive_seed_bits(seed, seed_len, "codebook", replication, rate, n, seed_len)
                codebook = generate_codebook(q, n, rate, cb_seed)
                trial_seed = bits_to_hex(derive_seed_bits(seed, 64, "trials", replication, rate, n,
                                                          seed_len))
                report = estimate_error(codebook, channel, params, trials, trial_seed)
                rows.append({
                    "rate": float(rate),
                    "n": int(n),
                    "seed_length": int(seed_len),
                    "M": codebook.num_words,
                    "epsilon": float(epsilon),
                    "error": report.average_error,
                    "halfwidth": report.confidence_halfwidth,
                    "capacity": cap,
                    "achievable": bool(rate < cap),
                })
    return rows
