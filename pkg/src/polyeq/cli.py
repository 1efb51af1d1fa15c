"""Command-line interface: ``polyeq generate | solve | bench``."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import bench
from .bayesian import build_bayesian, to_polymatrix
from .cancel import CancelToken
from .descent import DescentSolver
from .game import GameFormatError, GameStructureError, format_number, load_game, save_game
from .generators import CLASSES, GRAPH_KINDS, GenSpec, generate
from .lemke import CANCELLED, LemkeSolver, format_lcp, polymatrix_to_lcp

TIE_NAMES = {"one": "row", "random": "random"}


def _add_generate(sub):
    p = sub.add_parser("generate", help="write a seeded game instance")
    p.add_argument("--class", dest="cls", required=True,
                   choices=CLASSES + bench.BAYESIAN_CLASSES)
    p.add_argument("--graph", default="complete", choices=GRAPH_KINDS)
    p.add_argument("--players", type=int, default=3)
    p.add_argument("--actions", type=int, default=2)
    p.add_argument("--p", type=float, default=0.5, help="share of coordination edges")
    p.add_argument("--groups", type=int, default=2)
    p.add_argument("--colors", type=int, default=15)
    p.add_argument("--universe-mult", type=int, default=2)
    bay = p.add_argument_group("Bayesian classes")
    bay.add_argument("--rule", choices=("fp", "sp", "ap", "disc", "unif"))
    bay.add_argument("--valuation")
    bay.add_argument("--items", type=int)
    bay.add_argument("--types", type=int)
    bay.add_argument("--max", type=int)
    bay.add_argument("--min", type=int)
    bay.add_argument("--tie", choices=tuple(TIE_NAMES))
    bay.add_argument("--hills", type=int)
    bay.add_argument("--soldiers", type=int)
    bay.add_argument("--points", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)


def _add_solve(sub):
    p = sub.add_parser("solve", help="solve a game file")
    p.add_argument("--algo", required=True, choices=bench.ALGORITHMS)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True, help="profile CSV: player,action,probability")
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--dump-lcp", help="write the LCP (q, M, d) as exact rationals")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--ls-points", type=int, default=201)
    p.add_argument("--no-line-search", action="store_true")
    p.add_argument("--max-iters", type=int, default=100_000)
    p.add_argument("--random-start", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trace", help="write per-iteration f, alpha, gamma")


def _add_bench(sub):
    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("--suite", required=True, help="TOML suite description")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyeq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_generate(sub)
    _add_solve(sub)
    _add_bench(sub)
    return parser


def _bayesian_params(args) -> dict:
    keys = ("rule", "valuation", "items", "types", "max", "min", "hills", "soldiers", "points")
    params = {k: getattr(args, k) for k in keys if getattr(args, k) is not None}
    if args.tie is not None:
        params["tie"] = TIE_NAMES[args.tie]
    return params


def cmd_generate(args) -> int:
    out = Path(args.out)
    if args.cls in bench.BAYESIAN_CLASSES:
        inst = bench.InstanceSpec(args.cls, tuple(sorted(_bayesian_params(args).items())),
                                  args.seed)
        game, header = inst.build()
        save_game(game, out, comments=[header])
        Path(str(out) + ".meta").write_text(game.metadata["bayesian"].describe())
    else:
        spec = GenSpec(cls=args.cls, graph=args.graph, players=args.players,
                       actions=args.actions, p=args.p, groups=args.groups, colors=args.colors,
                       universe_mult=args.universe_mult, seed=args.seed)
        save_game(generate(spec), out, comments=[spec.header()])
    return 0


def _write_profile(path, profile):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("player", "action", "probability"))
        for i, x in enumerate(profile):
            for a, v in enumerate(x):
                w.writerow((i, a, format_number(v) if not isinstance(v, float) else repr(v)))


def cmd_solve(args) -> int:
    game = load_game(args.infile)
    token = CancelToken(args.timeout)
    if args.algo == "lemke":
        if args.dump_lcp:
            lcp, _ = polymatrix_to_lcp(game)
            Path(args.dump_lcp).write_text(format_lcp(lcp))
        est = LemkeSolver().fit(game, cancel=token)
        if est.profile_ is None:
            status = "timeout" if est.outcome_ == CANCELLED else est.outcome_
            print(f"lemke: {status} after {est.n_pivots_} pivots", file=sys.stderr)
            return 1
        _write_profile(args.out, est.profile_)
        print(f"lemke: solution pivots={est.n_pivots_} epsilon={est.epsilon_} "
              f"pure={int(est.pure_)} lcp_dim={est.lcp_dimension_}")
        return 0
    est = DescentSolver(delta=args.delta, line_search_points=args.ls_points,
                        line_search=not args.no_line_search, max_iter=args.max_iters,
                        random_start=args.random_start, seed=args.seed)
    est.fit(game, cancel=token)
    _write_profile(args.out, est.profile_)
    if args.trace:
        lines = ["# iteration f alpha gamma elapsed_s", f"0 {est.trace_.f0!r} 0 0 0"]
        for k, r in enumerate(est.trace_.records, 1):
            lines.append(f"{k} {r.f!r} {r.alpha!r} {r.gamma!r} {r.elapsed:.6f}")
        Path(args.trace).write_text("\n".join(lines) + "\n")
    print(f"descent: {est.termination_} iterations={est.n_iter_} "
          f"epsilon={bench.format_epsilon(est.epsilon_)} pure={int(est.pure_)}")
    return 0


def cmd_bench(args) -> int:
    suite = bench.load_suite(args.suite)
    records = bench.run_suite(suite, workers=args.workers)
    out = Path(args.out)
    bench.emit_csv(records, out / "records.csv")
    summaries = bench.summarize(records)
    bench.emit_csv(summaries, out / "summary.csv")
    bench.emit_plotdata(summaries, out / "plot")
    failed = sum(r.error is not None for r in records)
    print(f"bench: {len(records)} records, {failed} errors, written to {out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"generate": cmd_generate, "solve": cmd_solve, "bench": cmd_bench}[args.command]
    try:
        return handler(args)
    except GameFormatError as exc:
        print(f"polyeq: {args.infile}: {exc}", file=sys.stderr)
        return 2
    except (GameStructureError, ValueError, OSError) as exc:
        print(f"polyeq: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
