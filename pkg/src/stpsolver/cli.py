"""Command-line front end."""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Sequence

from . import bnb
from .construct import sph
from .core import Instance, SteinerTree, empty_tree, format_solution, format_stats, read_stp, validate
from .core.graph import InfeasibleError
from .core.stp import ParseError, format_stp, write_lines
from .dualascent import dual_ascent, saturated_subgraph
from .gms import run_gms
from .multistart import MS, MS2, MSK, MsConfig, run, run_timed
from .reduce import FULL, lift, preprocess
from .seeding import entropy_seed, stream

log = logging.getLogger("stpsolver")

MODES = ("ms", "ms2", "msk", "gms", "bb", "da", "reduce", "timed")
DEFAULT_ITERATIONS = 128
EXIT_OK, EXIT_INPUT, EXIT_LIMIT = 0, 2, 3


class LimitExceeded(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stpsolver", description="Steiner tree solver for SteinLib .stp files")
    p.add_argument("instance", help="path to a SteinLib .stp file")
    p.add_argument("--mode", choices=MODES, default="gms")
    p.add_argument("--iterations", type=int, help=f"multistart iterations (default {DEFAULT_ITERATIONS})")
    p.add_argument("--seed", type=int, help="random seed (default: fresh entropy)")
    p.add_argument("--time-limit", type=float, metavar="SECS")
    p.add_argument("--no-preprocess", action="store_true", help="skip the reduction tests")
    p.add_argument("--scatter", action="store_true", help="scatter branching in branch-and-bound")
    p.add_argument("--output", metavar="FILE", help="solution file (default: stdout)")
    p.add_argument("--stats", metavar="FILE", help="write a JSON stats record")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _check_flags(p: argparse.ArgumentParser, a: argparse.Namespace) -> None:
    if a.iterations is not None and a.mode in ("da", "bb", "reduce", "timed"):
        p.error(f"--iterations does not apply to --mode {a.mode}")
    if a.iterations is not None and a.iterations < 1:
        p.error("--iterations must be at least 1")
    if a.scatter and a.mode != "bb":
        p.error("--scatter requires --mode bb")
    if a.mode == "timed" and a.time_limit is None:
        p.error("--mode timed requires --time-limit")
    if a.time_limit is not None and a.time_limit <= 0:
        p.error("--time-limit must be positive")
    if a.mode == "reduce" and (a.no_preprocess or a.time_limit is not None):
        p.error("--mode reduce takes neither --no-preprocess nor --time-limit")
    if a.mode == "reduce" and not a.output:
        p.error("--mode reduce requires --output for the reduced instance")


def _solve(mode: str, inst: Instance, a: argparse.Namespace, seed: int, stats: dict) -> SteinerTree:
    iterations = a.iterations or DEFAULT_ITERATIONS
    deadline = None if a.time_limit is None else time.perf_counter() + a.time_limit
    if mode in (MS, MS2, MSK):
        stats["iterations"] = iterations
        try:
            res = run(inst, MsConfig(iterations, variant=mode, seed=seed), deadline=deadline,
                      keep_trace=False)
        except RuntimeError as exc:
            raise LimitExceeded(str(exc)) from exc
        stats["iterations"] = res.stats["iterations"]
        return res.tree
    if mode == "gms":
        res = run_gms(inst, iterations, seed, a.time_limit)
        stats.update(iterations=res.iterations, nodes=res.nodes, proved_optimal=res.optimal,
                     lower_bound=res.lower_bound, terminated_by=res.terminated_by,
                     cpu_ms=round(res.cpu_time * 1000, 3))
        if res.best_tree is None:
            raise LimitExceeded("no solution within the limits")
        return res.best_tree
    if mode == "bb":
        strategy = bnb.SCATTER if a.scatter else bnb.DEFAULT
        res = bnb.solve(inst, limits=bnb.Limits(deadline=deadline), strategy=strategy,
                        rng=stream(seed, "bnb"))
        stats.update(nodes=res.nodes_visited, proved_optimal=res.proved_optimal,
                     lower_bound=res.bound_at_stop, stop_reason=res.stop_reason)
        if res.best_tree is None:
            raise LimitExceeded("no solution within the limits")
        return res.best_tree
    if mode == "da":
        if len(inst.terminals) == 1:
            stats["lower_bound"] = 0
            return empty_tree()
        root = stream(seed, "da").choice(sorted(inst.terminals))
        state = dual_ascent(inst, root)
        stats.update(lower_bound=state.lower_bound, root=root + 1,
                     augmentations=state.augmentations, deactivations=state.deactivations)
        tree = sph(inst, None, root, saturated_subgraph(state))
        if tree is None:
            raise InfeasibleError("terminals are not mutually reachable")
        return tree
    raise ValueError(mode)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    _check_flags(parser, a)
    logging.basicConfig(level=logging.DEBUG if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    seed = a.seed if a.seed is not None else entropy_seed()
    stats: dict = {"mode": a.mode, "seed": seed}
    try:
        original = read_stp(a.instance)
        if not original.is_connected_on_terminals():
            raise InfeasibleError("terminals are not mutually reachable")
        if a.mode == "reduce":
            reduced, trace = preprocess(original, FULL)
            Path(a.output).write_text(format_stp(reduced, f"reduced from {original.name}"), encoding="utf-8")
            write_lines(str(a.output) + ".trace", trace.lines())
            stats.update(edges_before=original.m, edges_after=reduced.m)
            _write_stats(a, stats, t0)
            return EXIT_OK
        if a.mode == "timed":
            tree = _run_timed(original, a, seed, stats)
        else:
            if a.no_preprocess:
                tree = _solve(a.mode, original, a, seed, stats)
            else:
                reduced, trace = preprocess(original, FULL)
                stats.update(edges_before=original.m, edges_after=reduced.m)
                tree = lift(trace, _solve(a.mode, reduced, a, seed, stats), original)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LimitExceeded as exc:
        print(f"limit exceeded: {exc}", file=sys.stderr)
        stats["cost"] = None
        _write_stats(a, stats, t0)
        return EXIT_LIMIT
    stats["cost"] = validate(original, tree)
    _emit(a.output, format_solution(original, tree))
    _write_stats(a, stats, t0)
    return EXIT_OK


def _run_timed(original: Instance, a: argparse.Namespace, seed: int, stats: dict) -> SteinerTree:
    found: list[SteinerTree] = []

    def sink(tree: SteinerTree) -> None:
        validate(original, tree)
        found.append(tree)
        print(f"incumbent {tree.cost} at {time.perf_counter() - t0:.3f}s", file=sys.stderr)
        if a.output:
            _emit(a.output, format_solution(original, tree))

    t0 = time.perf_counter()
    res = run_timed(original, a.time_limit, sink, seed)
    stats.update(iterations=res["iterations"], incumbents=res["incumbents"])
    return found[-1]


def _emit(output: str | None, text: str) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_stats(a: argparse.Namespace, stats: dict, t0: float) -> None:
    stats["wall_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    if a.stats:
        Path(a.stats).write_text(format_stats(stats), encoding="utf-8")


if __name__ == "__main__":
    raise SystemExit(main())
