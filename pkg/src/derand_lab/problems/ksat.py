"""k-SAT formulas where every variable occurs in boundedly many clauses."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, InfeasibleOccurrenceBound, LengthMismatch
from ..lll import BadEvent, ConstraintSystem


def occurrence_cap(k: int) -> int:
    """floor(2^k / (k e)) - 1."""
    return math.floor(2**k / (k * math.e)) - 1


@dataclass(frozen=True, eq=False)
class BoundedKSatFormula:
    n: int
    k: int
    clauses: np.ndarray  # m x k signed 1-based literals

    def __post_init__(self):
        cl = np.asarray(self.clauses, dtype=np.int64).reshape(-1, self.k)
        object.__setattr__(self, "clauses", cl)
        if cl.size and (np.any(cl == 0) or np.abs(cl).max() > self.n):
            raise ConfigError("literal outside 1..n")
        for row in np.abs(cl):
            if np.unique(row).size != self.k:
                raise ConfigError("clause repeats a variable")

    @property
    def m(self) -> int:
        return self.clauses.shape[0]

    @property
    def occurrence_bound(self) -> int:
        return occurrence_cap(self.k)

    def occurrences(self) -> np.ndarray:
        return np.bincount(np.abs(self.clauses).ravel() - 1, minlength=self.n)

    def respects_bound(self) -> bool:
        return self.m == 0 or int(self.occurrences().max()) <= self.occurrence_bound


def gen_bounded_ksat(n: int, k: int, m: int, stream: np.random.Generator,
                     max_attempts: int = 100) -> BoundedKSatFormula:
    """m random k-clauses, no variable in more than ``occurrence_cap(k)`` clauses.

    Variables are picked without replacement with probability proportional
    to their remaining capacity; polarities are fair coins.
    """
    cap = occurrence_cap(k)
    if cap < 1:
        raise InfeasibleOccurrenceBound(f"k = {k}: occurrence cap {cap} < 1")
    if k > n:
        raise InfeasibleOccurrenceBound(f"clause width {k} exceeds {n} variables")
    if m * k > n * cap:
        raise InfeasibleOccurrenceBound(f"m*k = {m * k} exceeds n*cap = {n * cap}")
    for _ in range(max_attempts):
        left = np.full(n, cap, dtype=np.int64)
        clauses = np.empty((m, k), dtype=np.int64)
        for j in range(m):
            avail = np.flatnonzero(left)
            if avail.size < k:
                break
            w = left[avail] / left[avail].sum()
            chosen = stream.choice(avail, size=k, replace=False, p=w)
            left[chosen] -= 1
            signs = np.where(stream.integers(0, 2, k) == 1, 1, -1)
            clauses[j] = signs * (chosen + 1)
        else:
            formula = BoundedKSatFormula(n, k, clauses)
            if not formula.respects_bound():
                raise RuntimeError("generator broke the occurrence bound")
            return formula
    raise InfeasibleOccurrenceBound(f"no formula found in {max_attempts} attempts")


def satisfied_batch(formula: BoundedKSatFormula, assignments: np.ndarray) -> np.ndarray:
    a = np.atleast_2d(np.asarray(assignments, dtype=bool))
    if formula.m == 0:
        return np.ones(a.shape[0], dtype=bool)
    var = np.abs(formula.clauses) - 1
    want = formula.clauses > 0
    lit_true = a[:, var] == want
    return lit_true.any(axis=2).all(axis=1)


def verify_ksat(formula: BoundedKSatFormula, assignment) -> bool:
    a = np.asarray(assignment)
    if a.ndim != 1 or a.size != formula.n:
        raise LengthMismatch(f"assignment length {a.size}, formula has {formula.n} variables")
    return bool(satisfied_batch(formula, a.astype(bool))[0])


def satisfaction_rate(formula: BoundedKSatFormula, trials: int, stream: np.random.Generator,
                      chunk: int = 10_000) -> float:
    good = 0
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        good += int(satisfied_batch(formula, stream.integers(0, 2, (size, formula.n))).sum())
        done += size
    return good / trials


def ksat_system(formula: BoundedKSatFormula) -> ConstraintSystem:
    """Bad event per clause: every literal false.  Variable value 1 means true."""
    events = []
    for clause in formula.clauses:
        scope = tuple((np.abs(clause) - 1).tolist())
        falsifying = (clause < 0).astype(np.int64)

        def violated(vals, f=falsifying):
            return bool(np.array_equal(vals, f))

        def violated_batch(vals, f=falsifying):
            return np.all(vals == f, axis=1)

        events.append(BadEvent(scope, violated, 2.0 ** -formula.k, violated_batch))
    return ConstraintSystem(np.full(formula.n, 2), events)
