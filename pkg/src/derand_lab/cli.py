"""``derand-lab`` command-line entry point.

Exit codes: 0 success, 1 a search or solver gave up (NotFound, Timeout,
RetriesExhausted), 2 bad configuration or input.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from .errors import DerandError, NotFound, RetriesExhausted, Timeout
from .experiments import ExperimentConfig, emit, entropy_seed, replicate, run
from .streams import DEFAULT_SEED

EXIT_OK, EXIT_GAVE_UP, EXIT_CONFIG = 0, 1, 2

# per-command options: (flag, type, help)
_CODE_COMMON = [
    ("--channel", str, "channel JSON file or bsc:<p>"),
    ("--q", str, "input distribution: uniform or comma-separated probabilities"),
    ("--epsilon", float, "typicality slack"),
]
COMMANDS = {
    "channel": {
        "info": [("channel", str, "channel JSON file or bsc:<p>"),
                 ("--q", str, "input distribution: uniform or comma-separated probabilities")],
    },
    "code": {
        "gen": _CODE_COMMON[:2] + [("--n", int, "block length"), ("--rate", float, "rate in bits")],
        "decode": _CODE_COMMON + [("--codebook", str, "codebook JSON file"),
                                  ("--n", int, "block length"), ("--rate", float, "rate"),
                                  ("--received", str, "received block, e.g. 0110 or 0,1,1,0")],
        "error": _CODE_COMMON + [("--codebook", str, "codebook JSON file"),
                                 ("--n", int, "block length"), ("--rate", float, "rate"),
                                 ("--trials", int, "trials per codeword")],
        "aep": _CODE_COMMON + [("--n", int, "block length"), ("--trials", int, "pairs drawn")],
        "tradeoff": _CODE_COMMON + [
            ("--rates", str, "comma-separated rates"),
            ("--block-lengths", str, "comma-separated block lengths"),
            ("--seed-lengths", str, "comma-separated codebook seed lengths in bits"),
            ("--trials", int, "trials per codeword"),
        ],
    },
    "lll": {
        "check": [("--p", float, "bad-event probability bound"),
                  ("--d", float, "dependency degree"),
                  ("--n", int, "number of events")],
    },
    "problem": {
        "gen": [("--family", str, "cycles | balance | ksat"), ("--n", int, "size"),
                ("--k", int, "degree or clause width"), ("--m", int, "clauses")],
        "verify": [("--family", str, "cycles | balance | ksat"),
                   ("--instance", str, "instance file"), ("--proof", str, "hex proof file")],
        "solve": [("--family", str, "cycles | balance | ksat"),
                  ("--instance", str, "instance file"), ("--budget", int, "resample budget")],
    },
    "el": {
        "search": [("--family", str, "cycles | balance | ksat"),
                   ("--instance", str, "instance file (generated from --seed if absent)"),
                   ("--n", int, "size of a generated instance"),
                   ("--k", int, "degree or clause width of a generated instance"),
                   ("--m", int, "clauses of a generated instance"),
                   ("--max-seed-bits", int, "longest seed tried (default: predicted budget)"),
                   ("--strategy", str, "exhaustive | random"),
                   ("--budget", int, "maximum seeds tried"),
                   ("--trials", int, "samples for the acceptance estimate")],
    },
    "hitting": {
        "build": [("--instance", str, "hitting instance JSON"),
                  ("--max-retries", int, "redraw limit")],
        "measure": [("--instance", str, "hitting instance JSON"),
                    ("--members", str, "comma-separated elements to measure"),
                    ("--draws", int, "fresh draws to average when --members is absent")],
    },
}


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    """The same flags at every level; subparsers must not clobber values given earlier."""
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", default=d(DEFAULT_SEED), help="root seed (hex)")
    parser.add_argument("--out", default=d(None), help="write output here instead of stdout")
    parser.add_argument("--format", dest="fmt", choices=("csv", "json"), default=d(None))
    parser.add_argument("--threads", type=int, default=d(1), help="parallel replications")
    parser.add_argument("--replications", type=int, default=d(1), help="runs on derived seeds")
    parser.add_argument("--entropy", action="store_true", default=d(False),
                        help="draw the root seed from system entropy (echoed in the output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="derand-lab",
                                     description="Randomized constructions and their seeds.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    groups = parser.add_subparsers(dest="group", required=True)
    for group, actions in COMMANDS.items():
        gp = groups.add_parser(group)
        sub = gp.add_subparsers(dest="action", required=True)
        for action, options in actions.items():
            ap = sub.add_parser(action)
            _global_flags(ap, suppress=True)
            for flag, kind, text in options:
                ap.add_argument(flag, type=kind, help=text)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    skip = {"group", "action", "seed", "out", "fmt", "threads", "replications", "entropy"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}
    seed = entropy_seed() if args.entropy else args.seed
    return ExperimentConfig(f"{args.group} {args.action}", params, seed, args.out, args.fmt,
                            args.replications, args.threads)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        if config.replications == 1:
            tables = [run(config)]
        else:
            tables = replicate(config, config.replications)
        text = emit(tables, config.fmt, config.out)
    except (NotFound, Timeout, RetriesExhausted) as exc:
        print(f"derand-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GAVE_UP
    except (DerandError, ValueError) as exc:
        print(f"derand-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not config.out:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
