"""Hitting sets drawn from a measure, and the 4-part description of their elements.

A hitting set is ``ceil(beta / gamma)`` i.i.d. draws from ``P``.  Its miss
measure is the ``Q``-weight of the heavy sets (``P(D) >= gamma``) it fails
to intersect.  The construction keeps redrawing until the miss measure is at
most ``exp(-beta)`` (natural exponent).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .elsearch import bits_to_hex
from .errors import ConfigError, FamilyTooLarge, IndexOutOfRange, RetriesExhausted
from .streams import make_rng

FAMILY_LIMIT = 1 << 20
MASS_TOL = 1e-12
DEFAULT_RETRIES = 64


@dataclass(frozen=True, eq=False)
class HittingInstance:
    universe: tuple
    P: np.ndarray
    gamma: float
    beta: float
    family: tuple            # each member a frozenset of universe indices
    family_Q: np.ndarray
    _heavy: np.ndarray = field(default=None, repr=False)
    _masks: list = field(default=None, repr=False)

    def __post_init__(self):
        p = np.asarray(self.P, dtype=np.float64)
        q = np.asarray(self.family_Q, dtype=np.float64)
        if p.size != len(self.universe) or p.size == 0:
            raise ConfigError("P needs one weight per universe element")
        for name, arr in (("P", p), ("family_Q", q)):
            if np.any(arr < 0) or abs(arr.sum() - 1) > MASS_TOL:
                raise ConfigError(f"{name} is not a probability distribution")
        if not 0 < self.gamma <= 1:
            raise ConfigError("gamma must lie in (0, 1]")
        if not self.beta > 0:
            raise ConfigError("beta must be positive")
        if q.size != len(self.family):
            raise ConfigError("family_Q needs one weight per family member")
        if len(self.family) > FAMILY_LIMIT:
            raise FamilyTooLarge(f"{len(self.family)} sets exceed {FAMILY_LIMIT}")
        family = tuple(frozenset(int(i) for i in d) for d in self.family)
        for d in family:
            if d and (min(d) < 0 or max(d) >= p.size):
                raise ConfigError("family member refers to an unknown element")
        masses = np.array([math.fsum(p[list(d)]) for d in family])
        object.__setattr__(self, "P", p)
        object.__setattr__(self, "family_Q", q)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "_heavy", masses >= self.gamma - MASS_TOL)
        object.__setattr__(self, "_masks", [sum(1 << i for i in d) for d in family])

    @property
    def size(self) -> int:
        """ceil(beta / gamma)."""
        return math.ceil(round(self.beta / self.gamma, 9))

    @classmethod
    def all_subsets(cls, universe, P, gamma, beta, restrict_heavy=True) -> "HittingInstance":
        """Every subset of the universe, Q uniform (over the heavy ones if requested)."""
        n = len(universe)
        if (1 << n) > FAMILY_LIMIT:
            raise FamilyTooLarge(f"2^{n} subsets exceed {FAMILY_LIMIT}")
        P = np.asarray(P, dtype=np.float64)
        family = [frozenset(i for i in range(n) if mask >> i & 1) for mask in range(1 << n)]
        weights = np.ones(len(family))
        if restrict_heavy:
            weights = np.array([math.fsum(P[list(d)]) >= gamma - MASS_TOL for d in family], float)
        return cls(tuple(universe), P, gamma, beta, tuple(family), weights / weights.sum())

    def to_dict(self) -> dict:
        return {
            "universe": list(self.universe),
            "P": self.P.tolist(),
            "gamma": self.gamma,
            "beta": self.beta,
            "family": [{"set": [self.universe[i] for i in sorted(d)], "q": float(w)}
                       for d, w in zip(self.family, self.family_Q)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HittingInstance":
        try:
            universe = tuple(str(u) for u in data["universe"])
            index = {u: i for i, u in enumerate(universe)}
            family = tuple(frozenset(index[str(x)] for x in item["set"]) for item in data["family"])
            q = np.array([float(item["q"]) for item in data["family"]])
            return cls(universe, np.asarray(data["P"], float), float(data["gamma"]),
                       float(data["beta"]), family, q)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed hitting instance: {exc}") from exc


@dataclass(frozen=True)
class HittingSet:
    members: tuple           # universe indices, in draw order, duplicates kept
    draw_seed: str = ""
    attempts: int = 1

    def elements(self, inst: HittingInstance) -> list:
        return [inst.universe[i] for i in self.members]


def miss_measure(S, inst: HittingInstance) -> float:
    """Q({D : P(D) >= gamma and D disjoint from S}), by enumeration."""
    members = S.members if isinstance(S, HittingSet) else tuple(S)
    smask = 0
    for i in members:
        smask |= 1 << int(i)
    total = [w for w, heavy, dmask in zip(inst.family_Q, inst._heavy, inst._masks)
             if heavy and not dmask & smask]
    return math.fsum(total)


def draw_set(inst: HittingInstance, stream: np.random.Generator) -> tuple:
    return tuple(stream.choice(len(inst.universe), size=inst.size, p=inst.P).tolist())


def build_hitting_set(inst: HittingInstance, seed, max_retries: int = DEFAULT_RETRIES) -> HittingSet:
    """First draw (of up to ``max_retries``) whose miss measure is <= exp(-beta)."""
    limit = math.exp(-inst.beta)
    for attempt in range(max_retries):
        members = draw_set(inst, make_rng(seed, "hitting", attempt))
        if miss_measure(members, inst) <= limit:
            return HittingSet(members, seed if isinstance(seed, str) else bits_to_hex(seed),
                              attempt + 1)
    raise RetriesExhausted(f"no draw within exp(-beta) after {max_retries} attempts")


def mean_miss_measure(inst: HittingInstance, draws: int, seed) -> tuple[float, float]:
    """Mean and standard error of the miss measure over fresh unconditioned draws."""
    values = np.array([miss_measure(draw_set(inst, make_rng(seed, "hitting-mean", i)), inst)
                       for i in range(draws)])
    stderr = float(values.std(ddof=1) / math.sqrt(draws)) if draws > 1 else 0.0
    return float(values.mean()), stderr


# ---------------------------------------------------------------- descriptions

def prefix_len(v: int) -> int:
    """Length of ``prefix_code(v)``: L + 2*ceil(log2(L+1)) with L = ceil(log2(v+2))."""
    L = _clog2(v + 2)
    return L + 2 * _clog2(L + 1)


def _clog2(x: int) -> int:
    return (int(x) - 1).bit_length() if x > 1 else 0


def prefix_code(v: int) -> str:
    """Self-delimiting code of a nonnegative integer.

    B - 1 ones and a zero, then L in B bits, then v in L bits, where
    L = ceil(log2(v+2)) and B = ceil(log2(L+1)).
    """
    if v < 0:
        raise ConfigError("prefix code needs a nonnegative integer")
    L = _clog2(v + 2)
    B = _clog2(L + 1)
    return "1" * (B - 1) + "0" + format(L, f"0{B}b") + format(v, f"0{L}b")


def read_prefix_code(bits: str, pos: int = 0) -> tuple[int, int]:
    """Decode one ``prefix_code`` integer starting at ``pos``; returns (value, new pos)."""
    B = 1
    while bits[pos] == "1":
        B += 1
        pos += 1
    pos += 1
    L = int(bits[pos:pos + B], 2)
    pos += B
    v = int(bits[pos:pos + L], 2) if L else 0
    return v, pos + L


def index_bits(beta: float, s: int) -> int:
    """ceil(log2(ceil(beta / 2^-s)))."""
    return _clog2(math.ceil(round(beta * 2.0**s, 9)))


def four_part_description(S, element_index: int, alpha_bits: int, beta: float, s: int) -> int:
    """Total bits of the 4-part description of ``S[element_index]``.

    alpha_bits (description of Q) + prefix code of ceil(log2 beta)
    + prefix code of s + an index of ceil(log2 ceil(beta/gamma)) bits, gamma = 2^-s.
    """
    members = S.members if isinstance(S, HittingSet) else tuple(S)
    if not 0 <= element_index < len(members):
        raise IndexOutOfRange(f"index {element_index} outside a set of {len(members)}")
    log_beta = max(0, math.ceil(math.log2(beta)))
    return alpha_bits + prefix_len(log_beta) + prefix_len(s) + index_bits(beta, s)


def encode_element(S: Sequence, element_index: int, q_id: int, beta: float, s: int) -> str:
    """Concatenate prefix_code(q_id), prefix_code(ceil(log2 beta)), prefix_code(s), index."""
    members = S.members if isinstance(S, HittingSet) else tuple(S)
    if not 0 <= element_index < len(members):
        raise IndexOutOfRange(f"index {element_index} outside a set of {len(members)}")
    width = index_bits(beta, s)
    if _clog2(len(members)) != width:
        raise ConfigError(f"a set of {len(members)} needs {_clog2(len(members))} index bits, "
                          f"beta and s give {width}")
    log_beta = max(0, math.ceil(math.log2(beta)))
    index = format(element_index, f"0{width}b") if width else ""
    return prefix_code(q_id) + prefix_code(log_beta) + prefix_code(s) + index


def decode_element(bits: str, search: Callable[[int, int, int], Sequence]):
    """Invert ``encode_element``; ``search(q_id, log_beta, s)`` must rebuild the set S."""
    q_id, pos = read_prefix_code(bits, 0)
    log_beta, pos = read_prefix_code(bits, pos)
    s, pos = read_prefix_code(bits, pos)
    members = search(q_id, log_beta, s)
    members = members.members if isinstance(members, HittingSet) else tuple(members)
    width = _clog2(len(members))
    tail = bits[pos:pos + width]
    if len(tail) != width:
        raise ConfigError("description truncated")
    return members[int(tail, 2) if width else 0]
