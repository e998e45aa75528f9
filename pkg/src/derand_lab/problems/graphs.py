"""k-regular graphs and partitions into components that each contain a cycle."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from decimal import Decimal, getcontext

import numpy as np
from numba import njit

from ..errors import (
    ComponentCountMismatch,
    ConfigError,
    DegreeTooSmall,
    InfeasibleDegreeSequence,
    LengthMismatch,
    RejectionBudgetExhausted,
)
from ..lll import BadEvent, ConstraintSystem

MIN_DEGREE = 5


@dataclass(frozen=True, eq=False)
class RegularGraph:
    n: int
    k: int
    adjacency: np.ndarray  # n x k, rows sorted

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=np.int64).reshape(self.n, self.k)
        object.__setattr__(self, "adjacency", adj)
        check_regular(self)

    def edges(self) -> np.ndarray:
        u = np.repeat(np.arange(self.n), self.k)
        v = self.adjacency.ravel()
        keep = u < v
        return np.stack([u[keep], v[keep]], axis=1)

    def __eq__(self, other):
        return (isinstance(other, RegularGraph) and self.n == other.n and self.k == other.k
                and np.array_equal(self.adjacency, other.adjacency))


def check_regular(graph: RegularGraph) -> None:
    adj = graph.adjacency
    if adj.size and (adj.min() < 0 or adj.max() >= graph.n):
        raise ConfigError("neighbour index out of range")
    for v in range(graph.n):
        row = adj[v]
        if np.any(row == v):
            raise ConfigError(f"self-loop at vertex {v}")
        if np.unique(row).size != graph.k:
            raise ConfigError(f"vertex {v} has repeated neighbours")
        if np.any(row[:-1] > row[1:]):
            raise ConfigError(f"neighbour list of vertex {v} is not sorted")
    for v in range(graph.n):
        for u in adj[v]:
            if v not in adj[u]:
                raise ConfigError(f"edge {v}-{u} is not symmetric")


def from_edges(n: int, k: int, edges) -> RegularGraph:
    nbrs = [[] for _ in range(n)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    if any(len(x) != k for x in nbrs):
        raise ConfigError("edge list is not k-regular")
    return RegularGraph(n, k, np.array([sorted(x) for x in nbrs], dtype=np.int64).reshape(n, k))


def component_count(k: int) -> int:
    """floor(k / (3 ln k)), recomputed in 50-digit decimal near integers."""
    if k < MIN_DEGREE:
        raise DegreeTooSmall(f"k = {k} < {MIN_DEGREE}")
    x = k / (3 * math.log(k))
    if abs(x - round(x)) < 1e-9:
        getcontext().prec = 50
        return int((Decimal(k) / (3 * Decimal(k).ln())).to_integral_value(rounding="ROUND_FLOOR"))
    return math.floor(x)


def _suitable(edges: set, potential: dict) -> bool:
    if not potential:
        return True
    nodes = list(potential)
    for i, s1 in enumerate(nodes):
        for s2 in nodes[:i]:
            a, b = (s1, s2) if s1 < s2 else (s2, s1)
            if (a, b) not in edges:
                return True
    return False


def _try_pairing(n: int, k: int, rng: np.random.Generator):
    edges: set = set()
    stubs = np.repeat(np.arange(n), k)
    while stubs.size:
        potential: dict = defaultdict(int)
        perm = rng.permutation(stubs)
        for s1, s2 in zip(perm[::2].tolist(), perm[1::2].tolist()):
            if s1 > s2:
                s1, s2 = s2, s1
            if s1 != s2 and (s1, s2) not in edges:
                edges.add((s1, s2))
            else:
                potential[s1] += 1
                potential[s2] += 1
        if not _suitable(edges, potential):
            return None
        stubs = np.array([v for v, c in sorted(potential.items()) for _ in range(c)], dtype=np.int64)
    return edges


def gen_regular_graph(n: int, k: int, stream: np.random.Generator,
                      max_attempts: int = 1000) -> RegularGraph:
    """Random simple k-regular graph from the pairing model.

    Stubs are paired uniformly; pairs forming loops or repeated edges go back
    into the pool and are re-paired.  A whole attempt is rejected when the
    pool can no longer be paired.
    """
    if n < 1 or k < 0 or k >= n or (n * k) % 2:
        raise InfeasibleDegreeSequence(f"no simple {k}-regular graph on {n} vertices")
    for _ in range(max_attempts):
        edges = _try_pairing(n, k, stream)
        if edges is not None:
            return from_edges(n, k, sorted(edges))
    raise RejectionBudgetExhausted(f"{max_attempts} pairing attempts failed")


@dataclass(frozen=True, eq=False)
class Partition:
    component_of: np.ndarray
    c: int

    def __post_init__(self):
        comp = np.asarray(self.component_of, dtype=np.int64)
        if self.c < 1:
            raise ConfigError("need at least one component")
        if comp.size and (comp.min() < 0 or comp.max() >= self.c):
            raise ConfigError("component label out of range")
        object.__setattr__(self, "component_of", comp)


def _check_partition(graph: RegularGraph, part: Partition) -> None:
    if part.component_of.size != graph.n:
        raise LengthMismatch(f"partition has {part.component_of.size} labels, graph {graph.n}")
    if graph.k >= MIN_DEGREE and part.c != component_count(graph.k):
        raise ComponentCountMismatch(f"c = {part.c}, expected {component_count(graph.k)}")


@njit(cache=True)
def _cycle_flags(edges, comps, c):
    """For each partition row: does every component's induced subgraph have a cycle?"""
    t_count, n = comps.shape
    out = np.zeros(t_count, dtype=np.bool_)
    parent = np.empty(n, dtype=np.int64)
    has = np.zeros(c, dtype=np.bool_)
    for t in range(t_count):
        for v in range(n):
            parent[v] = v
        has[:] = False
        found = 0
        for e in range(edges.shape[0]):
            u = edges[e, 0]
            v = edges[e, 1]
            cu = comps[t, u]
            if cu != comps[t, v] or has[cu]:
                continue
            while parent[u] != u:
                parent[u] = parent[parent[u]]
                u = parent[u]
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            if u == v:
                has[cu] = True
                found += 1
                if found == c:
                    break
            else:
                parent[u] = v
        out[t] = found == c
    return out


def cycle_flags(graph: RegularGraph, comps: np.ndarray, c: int) -> np.ndarray:
    return _cycle_flags(graph.edges(), np.atleast_2d(np.asarray(comps, dtype=np.int64)), c)


def verify_cycle_partition(graph: RegularGraph, part: Partition) -> bool:
    """True iff every component induces a subgraph containing a cycle."""
    _check_partition(graph, part)
    return bool(cycle_flags(graph, part.component_of, part.c)[0])


def neighbor_condition_batch(graph: RegularGraph, comps: np.ndarray) -> np.ndarray:
    comps = np.atleast_2d(comps)
    same = comps[:, graph.adjacency] == comps[:, :, None]
    return same.any(axis=2).all(axis=1)


def stronger_neighbor_condition(graph: RegularGraph, part: Partition) -> bool:
    """True iff every vertex has a neighbour in its own component."""
    _check_partition(graph, part)
    return bool(neighbor_condition_batch(graph, part.component_of)[0])


def neighbor_condition_rate(graph: RegularGraph, c: int, trials: int,
                            stream: np.random.Generator, chunk: int = 5000) -> float:
    """Monte Carlo pass rate of uniformly random partitions."""
    passed = 0
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        comps = stream.integers(0, c, (size, graph.n))
        passed += int(neighbor_condition_batch(graph, comps).sum())
        done += size
    return passed / trials


def cycles_system(graph: RegularGraph, c: int | None = None) -> ConstraintSystem:
    """Bad event A_v: no neighbour of v shares v's component."""
    c = component_count(graph.k) if c is None else c
    p = (1 - 1 / c) ** graph.k

    def violated(vals):
        return bool(np.all(vals[1:] != vals[0]))

    def violated_batch(vals):
        return np.all(vals[:, 1:] != vals[:, :1], axis=1)

    events = [BadEvent((v, *graph.adjacency[v].tolist()), violated, p, violated_batch)
              for v in range(graph.n)]
    return ConstraintSystem(np.full(graph.n, c), events)


# ---------------------------------------------------------------- encodings

def partition_field_bits(k: int) -> int:
    return math.ceil(math.log2(k))


def partition_length(n: int, k: int) -> int:
    return n * partition_field_bits(k)


def _fields(bits: np.ndarray, width: int, count: int) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape[-1] != width * count:
        raise LengthMismatch(f"expected {width * count} bits, got {bits.shape[-1]}")
    weights = 1 << np.arange(width - 1, -1, -1)
    return bits.reshape(*bits.shape[:-1], count, width) @ weights


def decode_partition(bits, n: int, k: int, c: int | None = None) -> Partition:
    """n fields of ceil(log2 k) bits, each read MSB-first and reduced mod c."""
    c = component_count(k) if c is None else c
    return Partition(_fields(bits, partition_field_bits(k), n) % c, c)


def decode_partitions(bits: np.ndarray, n: int, k: int, c: int) -> np.ndarray:
    return _fields(bits, partition_field_bits(k), n) % c


def encode_partition(part: Partition, k: int) -> np.ndarray:
    width = partition_field_bits(k)
    return _to_bits(part.component_of, width)


def _to_bits(values: np.ndarray, width: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(width - 1, -1, -1)
    return ((values[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def graph_field_bits(n: int) -> int:
    return max(1, math.ceil(math.log2(n)))


def encode_graph(graph: RegularGraph) -> np.ndarray:
    """k * n * ceil(log2 n) bits: each vertex's sorted neighbour list."""
    return _to_bits(graph.adjacency.ravel(), graph_field_bits(graph.n))


def decode_graph(bits, n: int, k: int) -> RegularGraph:
    return RegularGraph(n, k, _fields(bits, graph_field_bits(n), n * k).reshape(n, k))
