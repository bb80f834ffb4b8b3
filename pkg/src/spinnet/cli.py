"""Command-line front end for spin-network experiments.

Subcommands wrap the library one-to-one: eval, join, exchange, angles,
geometry, stability, dynamics.  Networks are read from `.snet` files (or
stdin as `-`); results print as human-readable lines or as json-lines
(`--format jsonl`, one record per line, keys sorted, byte-deterministic
for a fixed seed).  Exact mode prints probabilities as `p/q`; `--numeric
float` switches to decimals.  Exit codes: 0 ok, 1 I/O, 2 usage or parse
errors, 3 domain violations (invalid or unsuitable network).

Free ends are named by edge id, with an optional `:side` suffix (`e1:0`)
when both sides of the edge are free.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dsl import parse_network
from .dynamics import approximate_unitary_search, default_ancilla_state
from .errors import SpinNetError
from .evaluator import evaluate_closed
from .experiments import (
    angle_matrix,
    exchange_experiment,
    geometry_consistency,
    join_free_ends,
    stability_measure,
)
from .hilbert import StateVector
from .model import End, SpinNetwork

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3

_GATES = {
    "identity": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "t": np.array([[1, 0], [0, complex(math.cos(math.pi / 4), math.sin(math.pi / 4))]]),
}


@dataclass(frozen=True)
class RunConfig:
    """Options shared by all subcommands."""

    format: str = "human"  # human | jsonl
    numeric: str = "exact"  # exact | float
    tol: float = 1e-9
    seed: int = 0
    jobs: int | None = None


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _rational(q: Fraction, cfg: RunConfig):
    if cfg.numeric == "exact":
        return f"{q.numerator}/{q.denominator}"
    return float(q)


def _load_network(path: str) -> SpinNetwork:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise _Failure(EXIT_IO, str(exc))
    result = parse_network(text)
    if isinstance(result, SpinNetwork):
        return result
    listing = "\n".join(f"{path}:{e}" for e in result)
    raise _Failure(EXIT_USAGE, listing)


def _resolve_end(net: SpinNetwork, text: str) -> End:
    edge_ids = {e.id for e in net.edges}
    if ":" in text:
        eid, _, side_text = text.rpartition(":")
        if eid not in edge_ids or side_text not in ("0", "1"):
            raise _Failure(EXIT_USAGE, f"unknown end {text!r}")
        return End(eid, int(side_text))
    if text not in edge_ids:
        raise _Failure(EXIT_USAGE, f"unknown end {text!r}")
    free = [side for side in (0, 1) if net.is_free(End(text, side))]
    if not free:
        raise _Failure(EXIT_USAGE, f"edge {text!r} has no free end")
    return End(text, free[0])


def _end_name(end: End) -> str:
    return f"{end.edge}:{end.side}"


def _emit(cfg: RunConfig, record: dict, human: str) -> None:
    if cfg.format == "jsonl":
        print(json.dumps(record, sort_keys=True))
    else:
        print(human)


# -- subcommands -----------------------------------------------------------


def _cmd_eval(cfg: RunConfig, args) -> int:
    value = evaluate_closed(_load_network(args.file))
    shown = _rational(value, cfg)
    _emit(cfg, {"value": shown}, str(shown))
    return EXIT_OK


def _cmd_join(cfg: RunConfig, args) -> int:
    net = _load_network(args.file)
    dist = join_free_ends(net, _resolve_end(net, args.end_a), _resolve_end(net, args.end_b))
    record = {str(label): _rational(p, cfg) for label, p in dist.entries.items()}
    human = " ".join(f"c={label} p={_rational(dist.entries[label], cfg)}" for label in dist.support)
    _emit(cfg, record, human)
    return EXIT_OK


def _cmd_exchange(cfg: RunConfig, args) -> int:
    net = _load_network(args.file)
    r = exchange_experiment(net, _resolve_end(net, args.end_a), _resolve_end(net, args.end_b))
    record = {
        "p_up": _rational(r.p_up, cfg),
        "p_down": _rational(r.p_down, cfg),
        "theta": r.theta,
    }
    human = (
        f"p_up={_rational(r.p_up, cfg)} p_down={_rational(r.p_down, cfg)} "
        f"theta={r.theta!r} rad ({math.degrees(r.theta):.6f} deg)"
    )
    _emit(cfg, record, human)
    return EXIT_OK


def _angles_for(cfg: RunConfig, args):
    net = _load_network(args.file)
    ends = [_resolve_end(net, text) for text in args.ends] or None
    return angle_matrix(net, ends, jobs=cfg.jobs)


def _cmd_angles(cfg: RunConfig, args) -> int:
    am = _angles_for(cfg, args)
    names = [_end_name(e) for e in am.ends]
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            _emit(
                cfg,
                {"end_a": names[i], "end_b": names[j], "theta": am.angles[i][j]},
                f"{names[i]} {names[j]} theta={am.angles[i][j]!r}",
            )
    return EXIT_OK


def _cmd_geometry(cfg: RunConfig, args) -> int:
    report = geometry_consistency(_angles_for(cfg, args), tol=cfg.tol)
    record = {
        "embeddable": report.embeddable,
        "residual": report.gram_residual,
        "embedding": [[float(x) for x in row] for row in report.embedding],
    }
    human = f"embeddable={'true' if report.embeddable else 'false'} residual={report.gram_residual:g}"
    _emit(cfg, record, human)
    return EXIT_OK


def _cmd_stability(cfg: RunConfig, args) -> int:
    net = _load_network(args.file)
    report = stability_measure(
        net,
        _resolve_end(net, args.end_a),
        _resolve_end(net, args.end_b),
        args.reps,
        cfg.seed,
    )
    for i, (theta, outcome) in enumerate(zip(report.angles, report.outcomes)):
        _emit(
            cfg,
            {"outcome": outcome, "rep": i, "theta": theta},
            f"rep={i} theta={theta!r} outcome={outcome}",
        )
    _emit(
        cfg,
        {"max_drift": report.max_drift, "repetitions": args.reps},
        f"max_drift={report.max_drift!r}",
    )
    return EXIT_OK


def _cmd_dynamics(cfg: RunConfig, args) -> int:
    ancillas = args.ancillas
    if args.ancilla_state == "singlets":
        anc = None
    elif args.ancilla_state == "plus":
        vec = np.ones(1 << ancillas, dtype=complex) / math.sqrt(1 << ancillas)
        anc = StateVector((1,) * ancillas, vec)
    else:  # "up"
        vec = np.zeros(1 << ancillas, dtype=complex)
        vec[0] = 1
        anc = StateVector((1,) * ancillas, vec)
    report = approximate_unitary_search(
        _GATES[args.target],
        ancillas,
        args.max_len,
        ancilla_state=anc,
        beam_width=args.beam_width,
        node_budget=args.node_budget,
    )
    steps = [
        {"pair": list(p.pair), "channel": p.channel.value}
        for p in report.best_sequence.steps
    ]
    record = {
        "fidelity": report.fidelity,
        "success_prob": report.success_prob,
        "sequence": steps,
        "best_by_length": list(report.best_by_length),
    }
    human_steps = " ".join(f"{s['channel']}({s['pair'][0]},{s['pair'][1]})" for s in steps)
    human = (
        f"fidelity={report.fidelity!r} success_prob={report.success_prob!r} "
        f"sequence=[{human_steps}]"
    )
    _emit(cfg, record, human)
    return EXIT_OK


# -- argument plumbing ------------------------------------------------------


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("tolerance must be > 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinnet",
        description="Exact combinatorial experiments on spin networks.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "jsonl"), default="human")
    common.add_argument("--numeric", choices=("exact", "float"), default="exact")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate a closed network")
    p.add_argument("file")
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("join", parents=[common], help="outcome distribution of joining two free ends")
    p.add_argument("file")
    p.add_argument("end_a")
    p.add_argument("end_b")
    p.set_defaults(handler=_cmd_join)

    p = sub.add_parser("exchange", parents=[common], help="unit-exchange probabilities and angle")
    p.add_argument("file")
    p.add_argument("end_a")
    p.add_argument("end_b")
    p.set_defaults(handler=_cmd_exchange)

    p = sub.add_parser("angles", parents=[common], help="pairwise emergent angles between free ends")
    p.add_argument("file")
    p.add_argument("ends", nargs="*")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(handler=_cmd_angles)

    p = sub.add_parser("geometry", parents=[common], help="rank-3 embeddability of the angle matrix")
    p.add_argument("file")
    p.add_argument("ends", nargs="*")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--tol", type=_positive_float, default=1e-9)
    p.set_defaults(handler=_cmd_geometry)

    p = sub.add_parser("stability", parents=[common], help="repeat committed exchanges and track the angle")
    p.add_argument("file")
    p.add_argument("end_a")
    p.add_argument("end_b")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_stability)

    p = sub.add_parser("dynamics", parents=[common], help="search postselection sequences for a target gate")
    p.add_argument("--target", choices=sorted(_GATES), default="x")
    p.add_argument("--ancillas", type=int, default=2)
    p.add_argument("--max-len", type=int, default=4)
    p.add_argument("--ancilla-state", choices=("singlets", "plus", "up"), default="singlets")
    p.add_argument("--beam-width", type=int, default=None)
    p.add_argument("--node-budget", type=int, default=200_000)
    p.set_defaults(handler=_cmd_dynamics)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = RunConfig(
        format=args.format,
        numeric=args.numeric,
        tol=getattr(args, "tol", 1e-9),
        seed=getattr(args, "seed", 0),
        jobs=getattr(args, "jobs", None),
    )
    try:
        return args.handler(cfg, args)
    except _Failure as exc:
        print(exc, file=sys.stderr)
        return exc.code
    except SpinNetError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
