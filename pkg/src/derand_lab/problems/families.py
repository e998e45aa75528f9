"""The three problem families packaged for seed search.

Each family knows how to generate an instance, the bit length of a proof,
how raw bits map to a candidate proof (the identity on the proof encoding),
the verifier, and a vectorised acceptance test for estimating the sampling
probability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from ..elsearch import SamplerSpec, instance_hash
from ..errors import ConfigError
from . import balancing, graphs, ksat
from .bounds import success_probability_bounds


@dataclass(frozen=True)
class Family:
    name: str
    generate: Callable[..., Any]
    proof_length: Callable[[Any], int]
    decode: Callable[[Any, np.ndarray], Any]
    verify: Callable[[Any, Any], bool]
    accept_batch: Callable[[Any, np.ndarray], np.ndarray]
    size: Callable[[Any], int]
    bound: Callable[[Any], float]
    fingerprint: Callable[[Any], str]

    def sampler(self, instance) -> SamplerSpec:
        return SamplerSpec(self.proof_length(instance), lambda bits: self.decode(instance, bits),
                           f"{self.name}-identity")

    def verifier_id(self, instance) -> str:
        return f"{self.name}:{self.fingerprint(instance)}"


def _cycles_generate(stream, n=100, k=20, **_):
    return graphs.gen_regular_graph(n, k, stream)


def _cycles_accept(graph, bits):
    c = graphs.component_count(graph.k)
    comps = graphs.decode_partitions(bits, graph.n, graph.k, c)
    return graphs.cycle_flags(graph, comps, c)


CYCLES = Family(
    name="cycles",
    generate=_cycles_generate,
    proof_length=lambda g: graphs.partition_length(g.n, g.k),
    decode=lambda g, bits: graphs.decode_partition(bits, g.n, g.k),
    verify=graphs.verify_cycle_partition,
    accept_batch=_cycles_accept,
    size=lambda g: g.n,
    bound=lambda g: success_probability_bounds("cycles", n=g.n, k=g.k),
    fingerprint=lambda g: instance_hash("cycles", g.n, g.k, g.adjacency),
)


def _balance_generate(stream, n=128, **_):
    return balancing.gen_binary_matrix(n, stream)


BALANCE = Family(
    name="balance",
    generate=_balance_generate,
    proof_length=lambda mat: mat.shape[0],
    decode=lambda mat, bits: balancing.signs_from_bits(bits),
    verify=balancing.verify_balancing,
    accept_batch=lambda mat, bits: balancing.balancing_pass_batch(mat, balancing.signs_from_bits(bits)),
    size=lambda mat: mat.shape[0],
    bound=lambda mat: success_probability_bounds("balance", n=mat.shape[0]),
    fingerprint=lambda mat: instance_hash("balance", np.asarray(mat, dtype=np.int64)),
)


def _ksat_generate(stream, n=100, k=8, m=120, **_):
    return ksat.gen_bounded_ksat(n, k, m, stream)


KSAT = Family(
    name="ksat",
    generate=_ksat_generate,
    proof_length=lambda f: f.n,
    decode=lambda f, bits: np.asarray(bits, dtype=bool),
    verify=ksat.verify_ksat,
    accept_batch=lambda f, bits: ksat.satisfied_batch(f, bits),
    size=lambda f: f.n,
    bound=lambda f: success_probability_bounds("ksat", m=f.m, k=f.k),
    fingerprint=lambda f: instance_hash("ksat", f.n, f.k, f.clauses),
)

FAMILIES = {f.name: f for f in (CYCLES, BALANCE, KSAT)}


def get_family(name: str) -> Family:
    try:
        return FAMILIES[name]
    except KeyError:
        raise ConfigError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None


def estimate_acceptance(family: Family, instance, trials: int, stream: np.random.Generator,
                        chunk: int = 5000) -> float:
    """Monte Carlo probability that uniform proof bits pass the verifier."""
    length = family.proof_length(instance)
    passed = 0
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        bits = stream.integers(0, 2, (size, length), dtype=np.uint8)
        passed += int(np.asarray(family.accept_batch(instance, bits)).sum())
        done += size
    return passed / trials


def delta_log_bits(delta_hat: float) -> float:
    """-log2 of an acceptance estimate (0 when every sample passed)."""
    if delta_hat <= 0:
        return math.inf
    return max(0.0, -math.log2(delta_hat))
