"""Lovász Local Lemma: condition check, dependency degree, resampling solver."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, Timeout

EXACT_LIMIT = 1 << 20
PROB_SAMPLES = 10_000


@dataclass(frozen=True, eq=False)
class BadEvent:
    """A bad event determined by the variables in ``scope``.

    ``violated`` receives the values of the scope variables (in scope order)
    as a 1-d array; ``violated_batch``, if given, receives a
    ``trials x len(scope)`` array and returns a boolean vector.
    """

    scope: tuple
    violated: Callable[[np.ndarray], bool]
    prob_bound: float | None = None
    violated_batch: Callable[[np.ndarray], np.ndarray] | None = None

    def batch(self, values: np.ndarray) -> np.ndarray:
        if self.violated_batch is not None:
            return np.asarray(self.violated_batch(values), dtype=bool)
        return np.fromiter((bool(self.violated(row)) for row in values), dtype=bool,
                           count=values.shape[0])


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    """Independent finite variables plus bad events over them.

    Variable ``i`` takes values ``0..domain_sizes[i]-1`` with probabilities
    ``probs[i]`` (uniform when ``probs`` is None).
    """

    domain_sizes: np.ndarray
    events: Sequence[BadEvent]
    probs: Sequence[np.ndarray] | None = None
    _cdfs: list = field(default=None, repr=False)

    def __post_init__(self):
        sizes = np.asarray(self.domain_sizes, dtype=np.int64)
        if sizes.ndim != 1 or np.any(sizes < 1):
            raise ConfigError("every variable needs a nonempty domain")
        object.__setattr__(self, "domain_sizes", sizes)
        for j, ev in enumerate(self.events):
            if len(ev.scope) == 0:
                raise ConfigError(f"event {j} has an empty scope")
            if min(ev.scope) < 0 or max(ev.scope) >= sizes.size:
                raise ConfigError(f"event {j} scope outside 0..{sizes.size - 1}")
        if self.probs is not None:
            if len(self.probs) != sizes.size:
                raise ConfigError("need one distribution per variable")
            cdfs = []
            for i, p in enumerate(self.probs):
                p = np.asarray(p, dtype=np.float64)
                if p.size != sizes[i] or abs(p.sum() - 1) > 1e-12 or np.any(p < 0):
                    raise ConfigError(f"bad distribution for variable {i}")
                cdfs.append(np.cumsum(p))
            object.__setattr__(self, "_cdfs", cdfs)

    @property
    def num_vars(self) -> int:
        return int(self.domain_sizes.size)

    @property
    def n_events(self) -> int:
        return len(self.events)

    def sample(self, rng: np.random.Generator, variables=None, size=None) -> np.ndarray:
        """Draw values for ``variables`` (all by default); ``size`` adds a leading axis."""
        idx = np.arange(self.num_vars) if variables is None else np.asarray(variables)
        shape = (idx.size,) if size is None else (size, idx.size)
        if self._cdfs is None:
            return np.floor(rng.random(shape) * self.domain_sizes[idx]).astype(np.int64)
        u = rng.random(shape)
        out = np.empty(shape, dtype=np.int64)
        for col, var in enumerate(idx):
            cdf = self._cdfs[var]
            out[..., col] = np.minimum((cdf <= u[..., col, None]).sum(axis=-1), cdf.size - 1)
        return out

    def violated_events(self, assignment: np.ndarray) -> list[int]:
        return [j for j, ev in enumerate(self.events)
                if ev.violated(assignment[list(ev.scope)])]

    def first_violated(self, assignment: np.ndarray) -> int:
        for j, ev in enumerate(self.events):
            if ev.violated(assignment[list(ev.scope)]):
                return j
        return -1


def dependency_neighbours(system: ConstraintSystem) -> list[set]:
    """For each event, the other events whose scopes meet its scope."""
    by_var: dict[int, list[int]] = {}
    for j, ev in enumerate(system.events):
        for v in set(ev.scope):
            by_var.setdefault(v, []).append(j)
    out = []
    for j, ev in enumerate(system.events):
        nb = set()
        for v in set(ev.scope):
            nb.update(by_var[v])
        nb.discard(j)
        out.append(nb)
    return out


def dependency_degree(system: ConstraintSystem) -> int:
    """Max number of other events sharing a variable with an event."""
    if system.n_events == 0:
        return 0
    return max(len(nb) for nb in dependency_neighbours(system))


def check_lll(p: float, d: float, n_events: int) -> tuple[bool, float]:
    """(e*p*(d+1) <= 1, (1 - 1/(d+1))^n_events)."""
    if not 0 <= p <= 1:
        raise ConfigError("p must lie in [0, 1]")
    if d < 0:
        raise ConfigError("d must be nonnegative")
    holds = math.e * p * (d + 1) <= 1
    return holds, (1 - 1 / (d + 1)) ** n_events


@dataclass(frozen=True)
class Solution:
    assignment: np.ndarray
    resamples: int


def default_budget(system: ConstraintSystem) -> int:
    return 100 * max(1, system.n_events)


def resample_solve(
    system: ConstraintSystem,
    stream: np.random.Generator,
    max_resamples: int | None = None,
    selection: str = "lowest",
) -> Solution:
    """Moser-Tardos resampling.

    Start from a full sample; while some event is violated, pick one
    (lowest index, or uniformly at random with ``selection="random"``) and
    redraw its scope.  Raises ``Timeout`` once ``max_resamples`` redraws
    have not sufficed.
    """
    if selection not in ("lowest", "random"):
        raise ConfigError(f"unknown selection rule {selection!r}")
    budget = default_budget(system) if max_resamples is None else max_resamples
    assignment = system.sample(stream)
    resamples = 0
    while True:
        if selection == "lowest":
            j = system.first_violated(assignment)
        else:
            bad = system.violated_events(assignment)
            j = -1 if not bad else bad[int(stream.integers(len(bad)))]
        if j < 0:
            break
        if resamples >= budget:
            raise Timeout(f"{budget} resamples exhausted", resamples)
        scope = list(system.events[j].scope)
        assignment[scope] = system.sample(stream, scope)
        resamples += 1
    if system.violated_events(assignment):
        raise RuntimeError("resampling returned a violating assignment")
    return Solution(assignment, resamples)


def _no_violation(system: ConstraintSystem, samples: np.ndarray) -> np.ndarray:
    ok = np.ones(samples.shape[0], dtype=bool)
    for ev in system.events:
        ok &= ~ev.batch(samples[:, list(ev.scope)])
    return ok


def exact_success_probability(system: ConstraintSystem) -> float:
    """Pr[no bad event] by enumerating every assignment (at most 2^20)."""
    total = int(np.prod(system.domain_sizes, dtype=object))
    if total > EXACT_LIMIT:
        raise ConfigError(f"{total} assignments exceed the enumeration limit {EXACT_LIMIT}")
    grids = np.array(list(itertools.product(*[range(s) for s in system.domain_sizes])),
                     dtype=np.int64).reshape(total, system.num_vars)
    if system.probs is None:
        weights = np.full(total, 1.0 / total)
    else:
        weights = np.ones(total)
        for i, p in enumerate(system.probs):
            weights *= np.asarray(p)[grids[:, i]]
    return float(weights[_no_violation(system, grids)].sum())


def estimate_success_probability(
    system: ConstraintSystem, trials: int, stream: np.random.Generator, chunk: int = 10_000
) -> float:
    """Fraction of i.i.d. full samples (no resampling) avoiding every bad event."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    good = 0
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        good += int(_no_violation(system, system.sample(stream, size=size)).sum())
        done += size
    return good / trials


def estimate_event_probability(system: ConstraintSystem, j: int, stream, samples=PROB_SAMPLES):
    ev = system.events[j]
    values = system.sample(stream, list(ev.scope), size=samples)
    return float(ev.batch(values).mean())


def event_probability_bound(system: ConstraintSystem, stream, samples=PROB_SAMPLES) -> float:
    """Max over events of ``prob_bound``, estimated by Monte Carlo where absent."""
    best = 0.0
    for j, ev in enumerate(system.events):
        p = ev.prob_bound
        if p is None:
            p = estimate_event_probability(system, j, stream, samples)
        best = max(best, p)
    return best
