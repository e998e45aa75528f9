"""Seed expansion and shortest-seed search.

The expansion function ``expand`` is a fixed, versioned scheme built on
AES-128 with a public key:

1. The seed (``L`` bits, MSB-first, zero-padded to whole 16-byte blocks) is
   prefixed by a header block holding ``L`` and the scheme id, and absorbed
   by AES-CBC-MAC into a 128-bit initial counter block.  The length header
   keeps seeds of different lengths apart (``""`` and ``"0"`` expand
   differently).
2. The output is the AES-CTR keystream from that counter block, truncated
   to the requested number of bits.  Outputs for different lengths are
   prefixes of each other.

Seed length is the reported complexity proxy; it is meaningful only
relative to this fixed scheme.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .errors import ConfigError, NotFound, OutputTooLong

ALGORITHM_ID = "aes128-cbcmac-ctr/v1"
MAX_OUTPUT_BITS = 1 << 31
EXHAUSTIVE_MAX_SEED_BITS = 32
LOG_CONSTANT = 2

_KEY = hashlib.sha256(b"derand-lab expansion key " + ALGORITHM_ID.encode()).digest()[:16]
_BLOCK = 16


@dataclass(frozen=True)
class ExpansionFunction:
    algorithm_id: str = ALGORITHM_ID
    max_output_bits: int = MAX_OUTPUT_BITS

    def __call__(self, seed, out_len: int) -> np.ndarray:
        return expand(seed, out_len)


# ---------------------------------------------------------------- bit helpers

def as_bitstring(seed) -> str:
    if isinstance(seed, str):
        if seed.strip("01"):
            raise ConfigError(f"bit string may only contain 0/1: {seed!r}")
        return seed
    arr = np.asarray(seed, dtype=np.uint8).ravel()
    if arr.size and arr.max() > 1:
        raise ConfigError("bit array may only contain 0/1")
    return "".join("1" if b else "0" for b in arr)


def bits_to_bytes(bits: str) -> bytes:
    if not bits:
        return b""
    padded = bits + "0" * (-len(bits) % 8)
    return int(padded, 2).to_bytes(len(padded) // 8, "big")


def bits_to_hex(bits) -> str:
    bits = as_bitstring(bits)
    if not bits:
        return ""
    padded = bits + "0" * (-len(bits) % 4)
    return format(int(padded, 2), f"0{len(padded) // 4}x")


def hex_to_bits(text: str, nbits: int | None = None) -> str:
    text = text.strip().lower()
    if text.startswith("0x"):
        text = text[2:]
    if not text:
        bits = ""
    else:
        try:
            bits = format(int(text, 16), f"0{4 * len(text)}b")
        except ValueError as exc:
            raise ConfigError(f"not a hex string: {text!r}") from exc
    if nbits is not None:
        if nbits > len(bits):
            raise ConfigError(f"hex string holds {len(bits)} bits, {nbits} required")
        bits = bits[:nbits]
    return bits


def bitarray(bits: str) -> np.ndarray:
    return np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")


# ---------------------------------------------------------------- expansion

def _counter_block(bits: str) -> bytes:
    header = len(bits).to_bytes(8, "big") + hashlib.sha256(ALGORITHM_ID.encode()).digest()[:8]
    body = bits_to_bytes(bits)
    body += b"\x00" * (-len(body) % _BLOCK)
    enc = Cipher(algorithms.AES(_KEY), modes.CBC(b"\x00" * _BLOCK)).encryptor()
    mac = enc.update(header + body) + enc.finalize()
    return mac[-_BLOCK:]


def expand_bytes(seed, nbytes: int) -> bytes:
    """First ``nbytes`` bytes of the expansion of ``seed``."""
    if nbytes < 0:
        raise ConfigError("output length must be nonnegative")
    if 8 * nbytes > MAX_OUTPUT_BITS:
        raise OutputTooLong(f"{8 * nbytes} bits requested, limit {MAX_OUTPUT_BITS}")
    bits = as_bitstring(seed)
    enc = Cipher(algorithms.AES(_KEY), modes.CTR(_counter_block(bits))).encryptor()
    return enc.update(b"\x00" * nbytes) + enc.finalize()


def expand(seed, out_len: int) -> np.ndarray:
    """Deterministic ``out_len``-bit expansion of ``seed`` as a 0/1 uint8 array."""
    if out_len > MAX_OUTPUT_BITS:
        raise OutputTooLong(f"{out_len} bits requested, limit {MAX_OUTPUT_BITS}")
    raw = np.frombuffer(expand_bytes(seed, (out_len + 7) // 8), dtype=np.uint8)
    return np.unpackbits(raw)[:out_len]


def derive_seed_bits(root_seed, nbits: int, *labels) -> str:
    """``nbits`` seed bits for a labelled sub-experiment of a root seed."""
    from .streams import seed_bytes

    h = hashlib.blake2b(seed_bytes(root_seed), digest_size=16, person=b"derand-seed")
    for label in labels:
        h.update(repr(label).encode() + b"\x00")
    base = format(int.from_bytes(h.digest(), "big"), "0128b")
    return as_bitstring(expand(base, nbits))


# ---------------------------------------------------------------- search

@dataclass(frozen=True)
class SamplerSpec:
    """Length-preserving map from raw ``length``-bit strings to candidates."""

    length: int
    decode: Callable[[np.ndarray], Any] = field(default=lambda bits: bits)
    name: str = "identity"

    def __call__(self, bits: np.ndarray):
        return self.decode(bits)


@dataclass(frozen=True)
class SeedCertificate:
    seed: str
    output_len: int
    verifier_id: str
    verified: bool = True
    algorithm_id: str = ALGORITHM_ID
    tried: int = 0

    @property
    def kp_proxy(self) -> int:
        return len(self.seed)

    @property
    def seed_hex(self) -> str:
        return bits_to_hex(self.seed)

    def to_dict(self) -> dict:
        return {
            "seed_hex": self.seed_hex,
            "bits": self.kp_proxy,
            "output_len": self.output_len,
            "verifier_id": self.verifier_id,
            "verified": self.verified,
            "algorithm_id": self.algorithm_id,
            "tried": self.tried,
        }


def _seeds_exhaustive(max_seed_len: int):
    for length in range(max_seed_len + 1):
        if length == 0:
            yield ""
            continue
        for value in range(1 << length):
            yield format(value, f"0{length}b")


def seed_search(
    verifier: Callable[[Any, Any], bool],
    instance,
    sampler: SamplerSpec,
    max_seed_len: int,
    strategy: str = "exhaustive",
    budget: int | None = None,
    rng: np.random.Generator | None = None,
    verifier_id: str = "",
) -> SeedCertificate:
    """Find a seed whose expansion, mapped through ``sampler``, passes ``verifier``.

    Exhaustive search visits seeds by length, then lexicographically, so the
    first hit is the shortest and then least seed.  Random search draws
    ``budget`` seeds of exactly ``max_seed_len`` bits from ``rng``.
    """
    if strategy == "exhaustive":
        if max_seed_len > EXHAUSTIVE_MAX_SEED_BITS:
            raise ConfigError(f"exhaustive search limited to {EXHAUSTIVE_MAX_SEED_BITS} seed bits")
        seeds = _seeds_exhaustive(max_seed_len)
    elif strategy == "random":
        if budget is None or rng is None:
            raise ConfigError("random strategy needs a budget and an rng")
        seeds = (
            "".join("1" if b else "0" for b in rng.integers(0, 2, max_seed_len))
            for _ in range(budget)
        )
    else:
        raise ConfigError(f"unknown strategy {strategy!r}")

    tried = 0
    for seed in seeds:
        if budget is not None and tried >= budget:
            break
        tried += 1
        if verifier(instance, sampler(expand(seed, sampler.length))):
            return SeedCertificate(seed, sampler.length, verifier_id, True, tried=tried)
    raise NotFound(f"no passing seed among {tried} candidates (max {max_seed_len} bits)")


def reverify(cert: SeedCertificate, verifier, instance, sampler: SamplerSpec) -> bool:
    return bool(verifier(instance, sampler(expand(cert.seed, cert.output_len))))


def predicted_seed_budget(delta_log: float, n: int, c: int = LOG_CONSTANT) -> int:
    """``ceil(delta_log) + c * ceil(log2 n)`` seed bits."""
    if delta_log < 0:
        raise ConfigError("delta_log must be nonnegative")
    return math.ceil(delta_log) + c * math.ceil(math.log2(n))


def instance_hash(*parts) -> str:
    h = hashlib.sha256()
    for part in parts:
        if isinstance(part, np.ndarray):
            h.update(str(part.dtype).encode() + str(part.shape).encode())
            h.update(np.ascontiguousarray(part).tobytes())
        else:
            h.update(repr(part).encode())
    return h.hexdigest()[:16]


# ---------------------------------------------------------------- hash pre-images

@dataclass(frozen=True)
class CompressingMap:
    """Length-preserving map from ``n``-bit to ``n - k``-bit strings."""

    n: int
    out_len: int
    fn: Callable[[np.ndarray], np.ndarray]
    name: str = "f"

    def __call__(self, bits: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(bits), dtype=np.uint8)


def drop_last_bit(n: int) -> CompressingMap:
    return CompressingMap(n, n - 1, lambda b: b[:-1], "drop-last")


def xor_fold(n: int) -> CompressingMap:
    if n % 2:
        raise ConfigError("xor-fold needs even n")
    half = n // 2
    return CompressingMap(n, half, lambda b: b[:half] ^ b[half:], "xor-fold")


def count_preimages(f: CompressingMap, target) -> int:
    """Brute-force |f^-1(target)|; only for ``f.n <= 20``."""
    if f.n > 20:
        raise ConfigError("pre-image counting limited to n <= 20")
    target = np.asarray(target, dtype=np.uint8)
    count = 0
    for value in range(1 << f.n):
        bits = bitarray(format(value, f"0{f.n}b"))
        if np.array_equal(f(bits), target):
            count += 1
    return count


@dataclass(frozen=True)
class PreimageReport:
    certificate: SeedCertificate
    preimage_count: int | None
    bound_bits: float | None

    @property
    def kp_proxy(self) -> int:
        return self.certificate.kp_proxy


def hash_preimage_search(
    f: CompressingMap, x, max_seed_len: int, c: int = LOG_CONSTANT
) -> PreimageReport:
    """Shortest seed whose expansion ``y`` satisfies ``f(y) == x``.

    For ``f.n <= 20`` also reports ``n - log2|f^-1(x)| + c * ceil(log2 n)``
    for comparison with the found seed length.
    """
    target = bitarray(as_bitstring(x)) if isinstance(x, str) else np.asarray(x, dtype=np.uint8)
    if target.size != f.out_len:
        raise ConfigError(f"target has {target.size} bits, map outputs {f.out_len}")
    count = bound = None
    if f.n <= 20:
        count = count_preimages(f, target)
        if count == 0:
            raise NotFound("target has no pre-image")
        bound = f.n - math.log2(count) + c * math.ceil(math.log2(f.n))
    cert = seed_search(
        lambda tgt, y: np.array_equal(f(y), tgt),
        target,
        SamplerSpec(f.n),
        max_seed_len,
        verifier_id=f"preimage:{f.name}:{bits_to_hex(target)}",
    )
    return PreimageReport(cert, count, bound)
