"""Command-line interface: solve, verify, gen-hard, perturb, bench.

Exit codes: 0 success (or Found / SNE), 3 NonExistence / NotSNE,
4 Indeterminate, 5 Aborted, 1 usage error, 2 input/output error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import FORMAT_VERSION, __version__
from .equilibrium import EPS_NE
from .game import GameError, GameFormatError, atomic_write_text, game_to_json, load_game, load_profile
from .hard import HardSpec, gen_hard
from .pareto import DEFAULT_GRID_K, SneStatus, verify_sne
from .smoothed import (
    CSV_FIELDS,
    DEFAULT_STEP_BUDGET,
    Model,
    PerturbationSpec,
    perturb,
    records_to_csv_rows,
    run_experiment,
)
from .solver import Aborted, SolveStatus, sne_find, sne_find_pure_n

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NONE = 3
EXIT_INDETERMINATE = 4
EXIT_ABORTED = 5

_SOLVE_EXIT = {
    SolveStatus.FOUND: EXIT_OK,
    SolveStatus.NON_EXISTENCE: EXIT_NONE,
    SolveStatus.INDETERMINATE: EXIT_INDETERMINATE,
}
_VERIFY_EXIT = {
    SneStatus.SNE: EXIT_OK,
    SneStatus.NOT_SNE: EXIT_NONE,
    SneStatus.INDETERMINATE: EXIT_INDETERMINATE,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and np.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {text}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer seed: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2^64), got {v}")
    return v


def _add_common(p: argparse.ArgumentParser, defaults: bool) -> None:
    def d(value):
        return value if defaults else argparse.SUPPRESS

    p.add_argument("--eps", type=_positive_float, default=d(EPS_NE),
                   help="Nash and Pareto tolerance (default %(default)s)" if defaults else argparse.SUPPRESS)
    p.add_argument("--grid-k", type=_positive_int, default=d(DEFAULT_GRID_K),
                   help="falsifier grid resolution (default %(default)s)" if defaults else argparse.SUPPRESS)
    p.add_argument("--threads", type=_positive_int, default=d(1),
                   help="worker threads for support enumeration" if defaults else argparse.SUPPRESS)
    p.add_argument("--json", action="store_true", default=d(False),
                   help="machine-readable output" if defaults else argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="strongnash", description="Strong Nash equilibrium toolkit.")
    parser.add_argument("--version", action="version",
                        version=f"strongnash {__version__} (game format {FORMAT_VERSION})")
    _add_common(parser, defaults=True)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("solve", help="search a game for a strong Nash equilibrium")
    p.add_argument("game")
    p.add_argument("--budget", type=_positive_int, default=None, help="cap on support pairs tried")
    p.add_argument("--all", action="store_true", help="enumerate every SNE (one per support)")
    _add_common(p, defaults=False)

    p = sub.add_parser("verify", help="check whether a profile is a strong Nash equilibrium")
    p.add_argument("game")
    p.add_argument("profile")
    _add_common(p, defaults=False)

    p = sub.add_parser("gen-hard", help="write a hard instance and its known SNE")
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--mbar", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True)
    _add_common(p, defaults=False)

    p = sub.add_parser("perturb", help="add random noise to every payoff")
    p.add_argument("game")
    p.add_argument("--model", choices=[m.value for m in Model], default=Model.UNIFORM.value)
    p.add_argument("--sigma", type=_positive_float, required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True)
    _add_common(p, defaults=False)

    p = sub.add_parser("bench", help="solve perturbed hard instances, one CSV row per trial")
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--mbar", type=_positive_int, required=True)
    p.add_argument("--sigma", type=_positive_float, required=True)
    p.add_argument("--trials", type=_positive_int, required=True)
    p.add_argument("--csv", required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--model", choices=[m.value for m in Model], default=Model.UNIFORM.value)
    p.add_argument("--budget", type=_positive_int, default=DEFAULT_STEP_BUDGET)
    _add_common(p, defaults=False)
    return parser


def _dump(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2)


def _stable(stats: dict) -> dict:
    return {k: v for k, v in stats.items() if k != "wall_time"}


def _fmt_profile(profile) -> str:
    return " x ".join("(" + ", ".join(f"{p:.6g}" for p in x) + ")" for x in profile.probs)


def _cmd_solve(args, out) -> int:
    game = load_game(args.game)
    try:
        if game.n == 2:
            res = sne_find(game, eps=args.eps, grid_k=args.grid_k, budget=args.budget,
                           threads=args.threads, find_all=args.all)
        else:
            res = sne_find_pure_n(game, eps=args.eps, grid_k=args.grid_k)
    except Aborted as exc:
        if args.json:
            out.write(_dump({"status": "Aborted", "stats": _stable(exc.stats.to_json())}) + "\n")
        else:
            out.write(f"Aborted: {exc}\n")
        return EXIT_ABORTED
    if args.json:
        doc = res.to_json()
        doc["stats"] = _stable(doc["stats"])
        out.write(_dump(doc) + "\n")
    else:
        out.write(f"status: {res.status.value} (phase {res.phase})\n")
        if res.profile is not None:
            out.write(f"profile: {_fmt_profile(res.profile)}\n")
        for p in res.all_sne[1:]:
            out.write(f"also:    {_fmt_profile(p)}\n")
        for p in res.indeterminate:
            out.write(f"undecided candidate: {_fmt_profile(p)}\n")
        if res.mixed_ruled_out is not None:
            out.write(f"mixed SNE ruled out: {'yes' if res.mixed_ruled_out else 'no'}\n")
        s = res.stats
        out.write(f"pure profiles checked: {s.pure_profiles_checked}, "
                  f"sub-bimatrices scanned: {s.subbimatrices_scanned}, "
                  f"supports enumerated: {s.supports_enumerated}, "
                  f"time: {s.wall_time:.3f}s\n")
    return _SOLVE_EXIT[res.status]


def _cmd_verify(args, out) -> int:
    game = load_game(args.game)
    profile = load_profile(args.profile)
    status, ev = verify_sne(game, profile, eps=args.eps, grid_k=args.grid_k)
    if args.json:
        doc = {
            "status": status.value,
            "nash": ev.ne_ok,
            "max_violation": ev.certificate.max_violation,
            "utilities": ev.certificate.values.tolist(),
            "coalitions": {
                ",".join(map(str, c)): {
                    "correlated": v.status.value,
                    "mixed": ev.falsifier[c].status.value if c in ev.falsifier else None,
                }
                for c, v in ev.correlated.items()
            },
        }
        out.write(_dump(doc) + "\n")
    else:
        out.write(f"status: {status.value}\n")
        out.write(f"nash: {'yes' if ev.ne_ok else 'no'} (max violation {ev.certificate.max_violation:.3g})\n")
        for c, v in ev.correlated.items():
            line = f"coalition {set(c)}: correlated {v.status.value}"
            if c in ev.falsifier:
                line += f", mixed {ev.falsifier[c].status.value}"
            out.write(line + "\n")
    return _VERIFY_EXIT[status]


def _cmd_gen_hard(args, out) -> int:
    game, known = gen_hard(HardSpec(args.m, args.mbar, args.seed))
    sidecar = args.out + ".sne.json"
    atomic_write_text(args.out, json.dumps(game_to_json(game)) + "\n")
    atomic_write_text(sidecar, json.dumps(known.to_json()) + "\n")
    if args.json:
        out.write(_dump({"game": args.out, "known_sne": sidecar, "name": game.name}) + "\n")
    else:
        out.write(f"wrote {args.out} and {sidecar}\n")
    return EXIT_OK


def _cmd_perturb(args, out) -> int:
    game = load_game(args.game)
    noisy = perturb(game, PerturbationSpec(Model(args.model), args.sigma, args.seed))
    atomic_write_text(args.out, json.dumps(game_to_json(noisy)) + "\n")
    if args.json:
        out.write(_dump({"game": args.out}) + "\n")
    else:
        out.write(f"wrote {args.out}\n")
    return EXIT_OK


def _cmd_bench(args, out) -> int:
    spec = PerturbationSpec(Model(args.model), args.sigma, args.seed)
    report = run_experiment(HardSpec(args.m, args.mbar, args.seed), spec, args.trials,
                            budget=args.budget, grid_k=args.grid_k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(CSV_FIELDS), lineterminator="\n")
    writer.writeheader()
    writer.writerows(records_to_csv_rows(report.records))
    atomic_write_text(args.csv, buf.getvalue())
    if args.json:
        doc = report.to_json()
        for key in ("mean_time", "max_time", "smoothed_time_estimate"):
            doc.pop(key)
        out.write(_dump(doc) + "\n")
    else:
        hist = ", ".join(f"{k}: {v}" for k, v in report.to_json()["phase_histogram"].items())
        out.write(f"trials: {report.trials}; phases: {hist}; "
                  f"alignment hit rate: {report.alignment_hit_rate:.3f}; "
                  f"mean time: {report.mean_time:.4f}s\n")
    return EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "gen-hard": _cmd_gen_hard,
    "perturb": _cmd_perturb,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args, sys.stdout)
    except (OSError, GameFormatError) as exc:
        print(f"strongnash: {exc}", file=sys.stderr)
        return EXIT_IO
    except GameError as exc:
        print(f"strongnash: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
