"""Readers and writers for the on-disk formats.

Every reader raises ``ConfigError`` on malformed input so the CLI can map it
to exit code 2.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .channel import Channel, validate_channel
from .codebook import Codebook
from .elsearch import bitarray, bits_to_hex, hex_to_bits
from .errors import ConfigError
from .hitting import HittingInstance
from .problems.balancing import check_binary_matrix
from .problems.graphs import RegularGraph
from .problems.ksat import BoundedKSatFormula


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc


def _read_json(path) -> dict:
    try:
        data = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return data


def _ints(line: str, path) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError as exc:
        raise ConfigError(f"{path}: expected integers, got {line.strip()!r}") from exc


# ---------------------------------------------------------------- channels

def channel_to_dict(channel: Channel) -> dict:
    t = channel.transition
    return {"inputs": t.shape[0], "outputs": t.shape[1], "rows": t.tolist()}


def channel_from_dict(data: dict) -> Channel:
    try:
        rows = np.asarray(data["rows"], dtype=np.float64)
        k, m = int(data["inputs"]), int(data["outputs"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed channel: {exc}") from exc
    if rows.shape != (k, m):
        raise ConfigError(f"channel rows have shape {rows.shape}, header says ({k}, {m})")
    return validate_channel(rows)


def read_channel(path) -> Channel:
    return channel_from_dict(_read_json(path))


def write_channel(channel: Channel, path) -> None:
    Path(path).write_text(json.dumps(channel_to_dict(channel)) + "\n")


# ---------------------------------------------------------------- codebooks

def read_codebook(path) -> Codebook:
    data = _read_json(path)
    try:
        n, m = int(data["n"]), int(data["M"])
        words = np.asarray(data["rows"], dtype=np.int64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed codebook ({exc})") from exc
    if words.shape != (m, n):
        raise ConfigError(f"{path}: rows have shape {words.shape}, header says ({m}, {n})")
    if m < 1 or m & (m - 1):
        raise ConfigError(f"{path}: M = {m} is not a power of two")
    seed = data.get("seed_hex")
    if seed is not None:
        seed = hex_to_bits(seed, data.get("seed_bits"))
    q = data.get("q")
    words.setflags(write=False)
    return Codebook(n, words, seed, None if q is None else tuple(float(v) for v in q))


def write_codebook(codebook: Codebook, path) -> None:
    Path(path).write_text(json.dumps(codebook.to_dict()) + "\n")


# ---------------------------------------------------------------- problem instances

def graph_text(graph: RegularGraph) -> str:
    lines = [f"{graph.n} {graph.k}"]
    lines += [" ".join(map(str, row)) for row in graph.adjacency.tolist()]
    return "\n".join(lines) + "\n"


def write_graph(graph: RegularGraph, path) -> None:
    Path(path).write_text(graph_text(graph))


def read_graph(path) -> RegularGraph:
    lines = [ln for ln in _read_text(path).splitlines() if ln.strip()]
    if not lines:
        raise ConfigError(f"{path}: empty graph file")
    head = _ints(lines[0], path)
    if len(head) != 2:
        raise ConfigError(f"{path}: first line must be 'n k'")
    n, k = head
    rows = [_ints(ln, path) for ln in lines[1:]]
    if len(rows) != n or any(len(r) != k for r in rows):
        raise ConfigError(f"{path}: expected {n} lines of {k} neighbours")
    return RegularGraph(n, k, np.array([sorted(r) for r in rows], dtype=np.int64).reshape(n, k))


def matrix_text(matrix) -> str:
    mat = check_binary_matrix(matrix)
    lines = [str(mat.shape[0])] + [" ".join(map(str, row)) for row in mat.tolist()]
    return "\n".join(lines) + "\n"


def write_matrix(matrix, path) -> None:
    Path(path).write_text(matrix_text(matrix))


def read_matrix(path) -> np.ndarray:
    lines = [ln for ln in _read_text(path).splitlines() if ln.strip()]
    if not lines:
        raise ConfigError(f"{path}: empty matrix file")
    head = _ints(lines[0], path)
    if len(head) != 1:
        raise ConfigError(f"{path}: first line must be 'n'")
    n = head[0]
    rows = []
    for ln in lines[1:]:
        tokens = ln.split()
        # accept both "0 1 1" and "011"
        row = _ints(" ".join(tokens[0]) if len(tokens) == 1 else ln, path)
        rows.append(row)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ConfigError(f"{path}: expected {n} rows of {n} entries")
    return check_binary_matrix(rows)


def cnf_text(formula: BoundedKSatFormula) -> str:
    lines = [f"c bounded-occurrence {formula.k}-SAT", f"p cnf {formula.n} {formula.m}"]
    lines += [" ".join(map(str, clause)) + " 0" for clause in formula.clauses.tolist()]
    return "\n".join(lines) + "\n"


def write_cnf(formula: BoundedKSatFormula, path) -> None:
    Path(path).write_text(cnf_text(formula))


def read_cnf(path) -> BoundedKSatFormula:
    header = None
    literals: list[int] = []
    for ln in _read_text(path).splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("c") or ln.startswith("%"):
            continue
        if ln.startswith("p"):
            parts = ln.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ConfigError(f"{path}: bad problem line {ln!r}")
            header = _ints(" ".join(parts[2:]), path)
            continue
        literals += _ints(ln, path)
    if header is None:
        raise ConfigError(f"{path}: missing 'p cnf' line")
    n, m = header
    clauses, current = [], []
    for lit in literals:
        if lit == 0:
            clauses.append(current)
            current = []
        else:
            current.append(lit)
    if current:
        raise ConfigError(f"{path}: last clause is not terminated by 0")
    if len(clauses) != m:
        raise ConfigError(f"{path}: header promises {m} clauses, found {len(clauses)}")
    widths = {len(c) for c in clauses}
    if len(widths) > 1:
        raise ConfigError(f"{path}: clauses have mixed widths {sorted(widths)}")
    k = widths.pop() if widths else 1
    return BoundedKSatFormula(n, k, np.array(clauses, dtype=np.int64).reshape(m, k))


READERS = {"cycles": read_graph, "balance": read_matrix, "ksat": read_cnf}
FORMATTERS = {"cycles": graph_text, "balance": matrix_text, "ksat": cnf_text}


def read_instance(family: str, path):
    if family not in READERS:
        raise ConfigError(f"unknown family {family!r}")
    return READERS[family](path)


def instance_text(family: str, instance) -> str:
    if family not in FORMATTERS:
        raise ConfigError(f"unknown family {family!r}")
    return FORMATTERS[family](instance)


def write_instance(family: str, instance, path) -> None:
    Path(path).write_text(instance_text(family, instance))


# ---------------------------------------------------------------- proofs

def write_proof(bits, path) -> None:
    Path(path).write_text(bits_to_hex(bits) + "\n")


def read_proof(path, nbits: int) -> np.ndarray:
    return bitarray(hex_to_bits(_read_text(path), nbits))


# ---------------------------------------------------------------- hitting instances

def read_hitting_instance(path) -> HittingInstance:
    return HittingInstance.from_dict(_read_json(path))


def write_hitting_instance(inst: HittingInstance, path) -> None:
    Path(path).write_text(json.dumps(inst.to_dict()) + "\n")
