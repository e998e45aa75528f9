"""Deterministic experiment orchestration behind the command line.

A run is a pure function of its ``ExperimentConfig``: every random draw is
derived from ``config.seed``, so the emitted table (and file) is
bit-identical across invocations.  Wall time is kept on the table object
and never written out.
"""
from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np

from . import __version__
from . import io
from .channel import bsc, capacity_for_input, channel_info, uniform, validate_distribution
from .codebook import (
    TypicalityParams,
    decode,
    empirical_joint_aep,
    estimate_error,
    generate_codebook,
    tradeoff_experiment,
    typical_rows,
)
from .elsearch import (
    bits_to_hex,
    hex_to_bits,
    predicted_seed_budget,
    reverify,
    seed_search,
)
from .errors import ConfigError
from .hitting import build_hitting_set, mean_miss_measure, miss_measure
from .lll import check_lll, resample_solve
from .problems import balancing, graphs, ksat
from .problems.families import delta_log_bits, estimate_acceptance, get_family
from .streams import DEFAULT_SEED, make_rng, root_key, seed_bytes

TOOL = "derand-lab"


@dataclass(frozen=True)
class ExperimentConfig:
    command: str                          # e.g. "code tradeoff"
    params: dict = field(default_factory=dict)
    seed: str = DEFAULT_SEED
    out: str | None = None
    fmt: str | None = None                # csv | json; None picks the command's default
    replications: int = 1
    threads: int = 1

    def __post_init__(self):
        if self.command not in HANDLERS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.fmt not in (None, "csv", "json"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        seed_bytes(self.seed)

    def canonical(self) -> str:
        body = {"command": self.command, "params": self.params, "seed": self.seed}
        return json.dumps(body, sort_keys=True, separators=(",", ":"), default=str)

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


@dataclass
class ResultTable:
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)
    keys: tuple = ()                      # columns identifying a row across replications
    document: dict | None = None          # certificate-like payload, emitted as JSON
    text: str | None = None               # raw file payload (instances, proofs)
    wall_time: float = 0.0

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, row)) for row in self.rows]

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def header_lines(self) -> list[str]:
        lines = [f"# {TOOL} {self.meta.get('version', __version__)}"]
        for key in ("command", "config_hash", "seed", "replication", "config"):
            if key in self.meta:
                lines.append(f"# {key}: {self.meta[key]}")
        return lines

    def to_csv(self) -> str:
        buf = _io.StringIO()
        buf.write("\n".join(self.header_lines()) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        if self.document is not None:
            payload = {**self.document, "meta": self.meta}
        else:
            payload = {"meta": self.meta, "columns": self.columns,
                       "rows": [{c: _plain(v) for c, v in zip(self.columns, r)} for r in self.rows]}
        return json.dumps(payload, indent=2) + "\n"

    def render(self, fmt: str | None = None) -> str:
        if self.text is not None:
            return self.text
        if fmt == "json" or (fmt is None and self.document is not None):
            return self.to_json()
        return self.to_csv()


def _plain(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _cell(v) -> str:
    v = _plain(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _document_table(doc: dict) -> ResultTable:
    flat = [(k, ";".join(map(str, v)) if isinstance(v, (list, tuple)) else v) for k, v in doc.items()]
    return ResultTable(["field", "value"], flat, document=doc)


# ---------------------------------------------------------------- parameter parsing

def _get(params: dict, name: str, default=None, required=False):
    value = params.get(name)
    if value is None:
        if required:
            raise ConfigError(f"missing required parameter --{name.replace('_', '-')}")
        return default
    return value


def load_channel(spec: str):
    """A channel file, or ``bsc:<p>`` for a binary symmetric channel."""
    if spec.startswith("bsc:"):
        try:
            return bsc(float(spec[4:]))
        except ValueError as exc:
            raise ConfigError(f"bad channel spec {spec!r}") from exc
    return io.read_channel(spec)


def parse_q(spec: str | None, size: int | None) -> np.ndarray:
    """``uniform`` or comma-separated probabilities."""
    if spec is None or spec == "uniform":
        if size is None:
            raise ConfigError("--q uniform needs a channel to fix the alphabet size")
        return uniform(size)
    try:
        probs = np.array([float(v) for v in spec.split(",")])
    except ValueError as exc:
        raise ConfigError(f"bad input distribution {spec!r}") from exc
    if size is not None and probs.size != size:
        raise ConfigError(f"--q has {probs.size} entries, channel has {size} inputs")
    return validate_distribution(probs)


def parse_list(spec, kind=float) -> list:
    if isinstance(spec, (list, tuple)):
        return [kind(v) for v in spec]
    try:
        return [kind(v) for v in str(spec).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad list {spec!r}") from exc


def parse_symbols(spec: str) -> np.ndarray:
    text = spec.strip()
    parts = text.split(",") if "," in text else list(text)
    try:
        return np.array([int(p) for p in parts], dtype=np.int64)
    except ValueError as exc:
        raise ConfigError(f"bad symbol block {spec!r}") from exc


# ---------------------------------------------------------------- handlers

def _channel_info(p, seed):
    ch = load_channel(_get(p, "channel", required=True))
    q = parse_q(_get(p, "q"), ch.input_alphabet_size)
    info = channel_info(ch, q)
    cols = ["inputs", "outputs", "H_X", "H_Y", "H_Y_given_X", "C_Q"]
    row = (ch.input_alphabet_size, ch.output_alphabet_size, info["H_X"], info["H_Y"],
           info["H_Y_given_X"], info["C_Q"])
    return ResultTable(cols, [row])


def _code_q(p):
    spec = _get(p, "channel")
    ch = load_channel(spec) if spec else None
    q = parse_q(_get(p, "q"), ch.input_alphabet_size if ch else None)
    return ch, q


def _code_gen(p, seed):
    _, q = _code_q(p)
    n = int(_get(p, "n", required=True))
    rate = float(_get(p, "rate", required=True))
    cb = generate_codebook(q, n, rate, hex_to_bits(seed))
    table = ResultTable(["message", "codeword"],
                        [(i + 1, "".join(map(str, w))) for i, w in enumerate(cb.words.tolist())],
                        document=cb.to_dict())
    return table


def _load_or_generate_codebook(p, q, seed):
    path = _get(p, "codebook")
    if path:
        return io.read_codebook(path)
    n = int(_get(p, "n", required=True))
    rate = float(_get(p, "rate", required=True))
    return generate_codebook(q, n, rate, hex_to_bits(seed))


def _code_decode(p, seed):
    ch, q = _code_q(p)
    if ch is None:
        raise ConfigError("decoding needs --channel")
    cb = _load_or_generate_codebook(p, q, seed)
    y = parse_symbols(_get(p, "received", required=True))
    params = TypicalityParams.from_channel(ch, q, cb.n, float(_get(p, "epsilon", 0.25)))
    rows = typical_rows(cb, y, params)
    return ResultTable(["message", "typical_count"], [(decode(cb, y, params), int(rows.size))])


def _code_error(p, seed):
    ch, q = _code_q(p)
    if ch is None:
        raise ConfigError("error estimation needs --channel")
    cb = _load_or_generate_codebook(p, q, seed)
    eps = float(_get(p, "epsilon", 0.25))
    tpw = int(_get(p, "trials", 1000))
    params = TypicalityParams.from_channel(ch, q, cb.n, eps)
    rep = estimate_error(cb, ch, params, tpw, seed)
    cols = ["n", "M", "rate", "epsilon", "trials_per_word", "trials", "average_error", "halfwidth"]
    return ResultTable(cols, [(cb.n, cb.num_words, cb.rate, eps, tpw, rep.trials,
                               rep.average_error, rep.confidence_halfwidth)])


def _code_aep(p, seed):
    ch, q = _code_q(p)
    if ch is None:
        raise ConfigError("AEP estimation needs --channel")
    n = int(_get(p, "n", required=True))
    eps = float(_get(p, "epsilon", 0.1))
    trials = int(_get(p, "trials", 10_000))
    params = TypicalityParams.from_channel(ch, q, n, eps)
    dep, ind = empirical_joint_aep(params, ch, q, trials, seed)
    mi = capacity_for_input(ch, q)
    bound = 2 * 2.0 ** (-n * (mi - 3 * eps))
    cols = ["n", "epsilon", "trials", "dependent", "independent", "mutual_information",
            "independent_bound"]
    return ResultTable(cols, [(n, eps, trials, dep, ind, mi, bound)])


def _code_tradeoff(p, seed):
    ch, q = _code_q(p)
    if ch is None:
        raise ConfigError("tradeoff needs --channel")
    rows = tradeoff_experiment(
        ch, q,
        parse_list(_get(p, "rates", required=True)),
        parse_list(_get(p, "block_lengths", required=True), int),
        parse_list(_get(p, "seed_lengths", "64"), int),
        int(_get(p, "trials", 1000)),
        seed,
        epsilon=float(_get(p, "epsilon", 0.25)),
    )
    cols = list(rows[0]) if rows else []
    return ResultTable(cols, [tuple(r[c] for c in cols) for r in rows],
                       keys=("rate", "n", "seed_length"))


def _lll_check(p, seed):
    prob = float(_get(p, "p", required=True))
    d = float(_get(p, "d", required=True))
    n_events = int(_get(p, "n", 1))
    holds, lower = check_lll(prob, d, n_events)
    return ResultTable(["p", "d", "n_events", "product", "holds", "success_lower_bound"],
                       [(prob, d, n_events, math.e * prob * (d + 1), holds, lower)])


_FAMILY_PARAMS = {"cycles": ("n", "k"), "balance": ("n",), "ksat": ("n", "k", "m")}


def _family_instance(p, seed):
    fam = get_family(_get(p, "family", required=True))
    path = _get(p, "instance")
    if path:
        return fam, io.read_instance(fam.name, path)
    sizes = {k: int(p[k]) for k in _FAMILY_PARAMS[fam.name] if p.get(k) is not None}
    return fam, fam.generate(make_rng(seed, "problem", fam.name), **sizes)


def _problem_gen(p, seed):
    fam, inst = _family_instance({**p, "instance": None}, seed)
    return ResultTable([], [], text=io.instance_text(fam.name, inst))


def _problem_verify(p, seed):
    fam, inst = _family_instance(p, seed)
    length = fam.proof_length(inst)
    bits = io.read_proof(_get(p, "proof", required=True), length)
    ok = bool(fam.verify(inst, fam.decode(inst, bits)))
    return ResultTable(["family", "size", "proof_bits", "verified"],
                       [(fam.name, fam.size(inst), length, ok)])


def _problem_solve(p, seed):
    fam, inst = _family_instance(p, seed)
    if fam.name == "cycles":
        system = graphs.cycles_system(inst)
    elif fam.name == "balance":
        system = balancing.balancing_system(inst)
    else:
        system = ksat.ksat_system(inst)
    budget = _get(p, "budget")
    sol = resample_solve(system, make_rng(seed, "solve", fam.name),
                         None if budget is None else int(budget))
    if fam.name == "cycles":
        bits = graphs.encode_partition(graphs.Partition(sol.assignment, system.domain_sizes[0]),
                                       inst.k)
    else:
        bits = np.asarray(sol.assignment, dtype=np.uint8)
    return ResultTable([], [], text=bits_to_hex(bits) + "\n")


def _el_search(p, seed):
    fam, inst = _family_instance(p, seed)
    trials = int(_get(p, "trials", 10_000))
    delta_hat = estimate_acceptance(fam, inst, trials, make_rng(seed, "delta", fam.name))
    dlog = delta_log_bits(delta_hat)
    n = fam.size(inst)
    predicted = predicted_seed_budget(dlog, n) if math.isfinite(dlog) else None
    max_bits = _get(p, "max_seed_bits")
    if max_bits is None:
        if predicted is None:
            raise ConfigError("no sample passed; give --max-seed-bits explicitly")
        max_bits = predicted
    strategy = _get(p, "strategy", "exhaustive")
    budget = _get(p, "budget")
    sampler = fam.sampler(inst)
    cert = seed_search(fam.verify, inst, sampler, int(max_bits), strategy,
                       None if budget is None else int(budget),
                       make_rng(seed, "el-search", fam.name), fam.verifier_id(inst))
    doc = cert.to_dict()
    doc["verified"] = reverify(cert, fam.verify, inst, sampler)
    doc.update({"predicted_budget_bits": predicted,
                "delta_log_bits": dlog if math.isfinite(dlog) else None,
                "delta_hat": delta_hat, "acceptance_trials": trials})
    return _document_table(doc)


def _hitting_instance(p):
    return io.read_hitting_instance(_get(p, "instance", required=True))


def _hitting_build(p, seed):
    inst = _hitting_instance(p)
    hs = build_hitting_set(inst, seed, int(_get(p, "max_retries", 64)))
    doc = {
        "members": hs.elements(inst),
        "size": len(hs.members),
        "miss_measure": miss_measure(hs, inst),
        "bound": math.exp(-inst.beta),
        "attempts": hs.attempts,
        "draw_seed": hs.draw_seed,
    }
    return _document_table(doc)


def _hitting_measure(p, seed):
    inst = _hitting_instance(p)
    bound = math.exp(-inst.beta)
    members = _get(p, "members")
    if members is not None:
        index = {u: i for i, u in enumerate(inst.universe)}
        try:
            S = [index[m] for m in parse_list(members, str)]
        except KeyError as exc:
            raise ConfigError(f"unknown element {exc.args[0]!r}") from None
        return ResultTable(["size", "miss_measure", "bound"],
                           [(len(S), miss_measure(S, inst), bound)])
    draws = int(_get(p, "draws", 200))
    mean, stderr = mean_miss_measure(inst, draws, seed)
    return ResultTable(["draws", "mean_miss_measure", "stderr", "bound"],
                       [(draws, mean, stderr, bound)])


HANDLERS: dict[str, Callable[[dict, str], ResultTable]] = {
    "channel info": _channel_info,
    "code gen": _code_gen,
    "code decode": _code_decode,
    "code error": _code_error,
    "code aep": _code_aep,
    "code tradeoff": _code_tradeoff,
    "lll check": _lll_check,
    "problem gen": _problem_gen,
    "problem verify": _problem_verify,
    "problem solve": _problem_solve,
    "el search": _el_search,
    "hitting build": _hitting_build,
    "hitting measure": _hitting_measure,
}


# ---------------------------------------------------------------- orchestration

def run(config: ExperimentConfig, replication: int | None = None) -> ResultTable:
    start = time.perf_counter()
    table = HANDLERS[config.command](dict(config.params), config.seed)
    table.meta = {
        "tool": TOOL,
        "version": __version__,
        "command": config.command,
        "config_hash": config.config_hash,
        "seed": config.seed,
        "config": config.canonical(),
    }
    if replication is not None:
        table.meta["replication"] = replication
    table.wall_time = time.perf_counter() - start
    return table


def replication_seed(seed: str, r: int) -> str:
    """Replication 0 keeps the root seed; later ones get derived 64-bit seeds."""
    return seed if r == 0 else format(root_key(seed, "replication", r), "016x")


def replicate(config: ExperimentConfig, r: int) -> list[ResultTable]:
    """``r`` runs on derived seeds, in replication order, plus a mean/std summary table."""
    if r < 1:
        raise ConfigError("replication count must be >= 1")
    configs = [replace(config, seed=replication_seed(config.seed, i)) for i in range(r)]
    if config.threads > 1:
        with ThreadPoolExecutor(config.threads) as pool:
            tables = list(pool.map(run, configs, range(r)))
    else:
        tables = [run(c, i) for i, c in enumerate(configs)]
    return tables + [summarize(tables, config)]


def summarize(tables: list[ResultTable], config: ExperimentConfig) -> ResultTable:
    first = tables[0]
    if first.text is not None or first.document is not None:
        raise ConfigError(f"{config.command!r} output cannot be summarised across replications")
    keys = [c for c in first.keys if c in first.columns]
    values = [c for c in first.columns if c not in keys
              and all(isinstance(_plain(v), (int, float)) and not isinstance(_plain(v), bool)
                      for v in first.column(c))]
    cols = ["statistic"] + keys + [f"{c}_{s}" for c in values for s in ("mean", "std")]
    rows = []
    for i, row in enumerate(first.rows):
        out = ["summary"] + [row[first.columns.index(k)] for k in keys]
        for c in values:
            j = first.columns.index(c)
            xs = np.array([float(t.rows[i][j]) for t in tables])
            out += [float(xs.mean()), float(xs.std(ddof=1)) if xs.size > 1 else 0.0]
        rows.append(tuple(out))
    meta = {"tool": TOOL, "version": __version__, "command": config.command,
            "config_hash": config.config_hash, "seed": config.seed,
            "replication": "summary", "config": config.canonical()}
    return ResultTable(cols, rows, meta, tuple(keys))


def emit(tables: list[ResultTable], fmt: str | None, out: str | None) -> str:
    """Render tables (replications in index order) and write to ``out`` or return the text."""
    if len(tables) == 1:
        text = tables[0].render(fmt)
    elif fmt == "json":
        text = json.dumps([json.loads(t.to_json()) for t in tables], indent=2) + "\n"
    else:
        text = "\n".join(t.to_csv() for t in tables)
    if out:
        tmp = f"{out}.tmp{os.getpid()}"
        with open(tmp, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    return text


def entropy_seed() -> str:
    """Fresh 64-bit seed from system entropy, only used when explicitly requested."""
    return os.urandom(8).hex()
