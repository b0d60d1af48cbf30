"""Command-line front end.

Subcommands: solve, unfold, check, mc, gen-reduction, stats. Exit codes:
0 = positive verdict (solution found / certificate valid / formula holds),
1 = negative verdict, 2 = usage error, document error, or unsupported input.
Output documents are UTF-8 JSON on stdout; warnings go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import ltl, reduction, synthesis
from .arena import (
    Arena,
    Lasso,
    lasso_trace,
    multi_energy_check_unbounded,
    parse_arena,
    serialize_arena,
    validate_lasso,
)
from .errors import CarefulSynthError
from .unfolding import to_dot, unfold, unfolded_to_arena
from .zerosum import ParityAutomaton, parse_dpa

EXIT_POSITIVE = 0
EXIT_NEGATIVE = 1
EXIT_ERROR = 2


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def _emit(doc: dict, pretty_extra: Optional[str] = None) -> None:
    print(json.dumps(doc, indent=2, sort_keys=False))
    if pretty_extra:
        print(pretty_extra)


def _parse_bounds_flag(text: str) -> tuple[int, ...]:
    try:
        bounds = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bounds must be comma-separated integers, got {text!r}"
        ) from None
    if any(v < 0 for v in bounds):
        raise argparse.ArgumentTypeError("bounds must be nonnegative")
    return bounds


def _resolve_bounds(a: Arena, flag: Optional[tuple[int, ...]]):
    if flag is not None:
        if a.bounds is not None and tuple(a.bounds) != flag:
            _warn(
                f"--bounds {','.join(map(str, flag))} overrides the arena's "
                f"bounds {','.join(map(str, a.bounds))}"
            )
        return flag
    return a.bounds


def _load_dpas(pairs: Sequence[str], a: Arena) -> dict[int, ParityAutomaton]:
    dpas: dict[int, ParityAutomaton] = {}
    for pair in pairs:
        player_str, _, path = pair.partition("=")
        if not path:
            raise CarefulSynthError(f"--dpa expects player=file, got {pair!r}")
        player = int(player_str)
        if not 1 <= player <= a.players:
            raise CarefulSynthError(f"--dpa player {player} out of range")
        dpas[player] = parse_dpa(_read(path))
    return dpas


def _saturation_caveat(a: Arena, bounds) -> None:
    """Bounded verdicts on instances designed for exact counting (e.g.
    generated hardness games) are only trustworthy when saturation never
    fires; warn whenever some reachable step was clipped."""
    u = unfold(a, bounds)
    for us in u.states:
        if not isinstance(us, tuple):
            continue
        s, c = us
        for t in a.successors(s):
            w = a.edges[(s, t)]
            if any(ci + wi > bi for ci, wi, bi in zip(c, w, bounds)):
                _warn(
                    "capacity saturation occurred in the reachable unfolding; "
                    "for generated reduction instances the verdict is a "
                    "semi-decision only"
                )
                return


def _pretty_outcome(profile: synthesis.StrategyProfile) -> str:
    lines = ["", "outcome (state @ resources):"]
    from .unfolding import render_ustate

    stem = " ".join(render_ustate(us) for us in profile.outcome_stem)
    loop = " ".join(render_ustate(us) for us in profile.outcome_loop)
    lines.append(f"  stem: {stem}")
    lines.append(f"  loop: ({loop})^omega")
    lines.append(f"  winners: {sorted(profile.winners)}")
    return "\n".join(lines)


def _cmd_solve(args) -> int:
    a = parse_arena(_read(args.arena))
    bounds = _resolve_bounds(a, args.bounds)
    if bounds is None:
        return _fail(
            "no capacity bounds given (neither --bounds nor the arena document); "
            "unbounded careful synthesis is undecidable and is refused"
        )
    dpas = _load_dpas(args.dpa, a)
    result = synthesis.solve(a, bounds, dpas=dpas, jobs=args.jobs)
    if result.status == synthesis.SolveResult.UNSUPPORTED:
        return _fail(f"unsupported objective: {result.reason}")
    _saturation_caveat(a, bounds)
    doc = synthesis.result_to_document(result)
    doc["bounds"] = list(bounds)
    pretty = None
    if args.pretty and result.profile is not None:
        pretty = _pretty_outcome(result.profile)
    _emit(doc, pretty)
    return EXIT_POSITIVE if result.status == synthesis.SolveResult.SOLUTION else EXIT_NEGATIVE


def _cmd_unfold(args) -> int:
    a = parse_arena(_read(args.arena))
    bounds = _resolve_bounds(a, args.bounds)
    if bounds is None:
        return _fail("unfold requires --bounds (or bounds in the arena document)")
    u = unfold(a, bounds)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as f:
            f.write(to_dot(u))
    print(serialize_arena(unfolded_to_arena(u)), end="")
    return EXIT_POSITIVE


def _cmd_check(args) -> int:
    a = parse_arena(_read(args.arena))
    bounds = _resolve_bounds(a, args.bounds)
    if bounds is None:
        return _fail("check requires --bounds (or bounds in the arena document)")
    dpas = _load_dpas(args.dpa, a)
    profile = synthesis.parse_profile(_read(args.profile))
    violations = synthesis.check_certificate(a, bounds, profile, dpas=dpas)
    doc = {
        "verdict": "ok" if not violations else "invalid",
        "violations": violations,
    }
    _emit(doc)
    return EXIT_POSITIVE if not violations else EXIT_NEGATIVE


def _parse_lasso_document(text: str) -> Lasso:
    doc = json.loads(text)
    return Lasso(stem=tuple(doc["stem"]), loop=tuple(doc["loop"]))


def _cmd_mc(args) -> int:
    a = parse_arena(_read(args.arena))
    bounds = _resolve_bounds(a, args.bounds)
    lasso = _parse_lasso_document(_read(args.lasso))
    validate_lasso(a, lasso)
    phi = ltl.parse_ltl(args.formula)
    stem_labels = [a.labels[s] for s in lasso.stem]
    loop_labels = [a.labels[s] for s in lasso.loop]
    holds = ltl.eval_on_lasso(phi, stem_labels, loop_labels, atoms=a.atoms)
    doc: dict = {
        "holds": holds,
        "energy": {"unbounded_careful": multi_energy_check_unbounded(a, lasso)},
    }
    if bounds is not None:
        trace = lasso_trace(a, lasso, bounds=bounds)
        doc["energy"]["bounded"] = {
            "bounds": list(bounds),
            "careful": all(v >= 0 for vec in trace for v in vec),
            "trace": [list(v) for v in trace],
        }
    pretty = None
    if args.pretty and bounds is not None:
        seq = list(lasso.stem) + list(lasso.loop)
        trace = lasso_trace(a, lasso, bounds=bounds)
        rendered = " ".join(
            f"{s}@{','.join(map(str, v))}" for s, v in zip(seq, trace)
        )
        pretty = f"\ntrace: {rendered}"
    _emit(doc, pretty)
    return EXIT_POSITIVE if holds else EXIT_NEGATIVE


def _cmd_gen_reduction(args) -> int:
    ca = reduction.parse_counter_automaton(_read(args.automaton))
    arena = reduction.build_game(ca)
    print(serialize_arena(arena), end="")
    return EXIT_POSITIVE


def _cmd_stats(args) -> int:
    a = parse_arena(_read(args.arena))
    bounds = _resolve_bounds(a, args.bounds)
    doc: dict = {
        "players": a.players,
        "dimensions": a.dimensions,
        "states": len(a.states),
        "edges": len(a.edges),
        "atoms": sorted(a.atoms),
    }
    if bounds is not None:
        u = unfold(a, bounds)
        doc["bounds"] = list(bounds)
        doc["unfolded_states"] = len(u.states)
        doc["unfolded_edges"] = sum(len(u.succ[s]) for s in u.states)
    _emit(doc)
    return EXIT_POSITIVE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carefulsynth",
        description=(
            "Careful cooperative rational synthesis on multi-player games "
            "with bounded shared resources"
        ),
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, bounds=True, pretty=True):
        if bounds:
            p.add_argument("--bounds", type=_parse_bounds_flag, default=None,
                           help="capacity vector, e.g. 3,3 (overrides the arena document)")
        if pretty:
            p.add_argument("--pretty", action="store_true",
                           help="append a human-readable trace rendering")

    p = sub.add_parser("solve", help="decide careful synthesis and emit a certificate")
    p.add_argument("arena")
    add_common(p)
    p.add_argument("--dpa", action="append", default=[], metavar="PLAYER=FILE",
                   help="deterministic parity automaton for a player's objective")
    p.add_argument("--jobs", type=int, default=None, help="worker cap for per-player solving")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("unfold", help="emit the reachable bounded unfolding")
    p.add_argument("arena")
    add_common(p, pretty=False)
    p.add_argument("--dot", default=None, metavar="FILE", help="also write DOT output")
    p.set_defaults(func=_cmd_unfold)

    p = sub.add_parser("check", help="verify a strategy-profile certificate")
    p.add_argument("arena")
    p.add_argument("profile")
    add_common(p, pretty=False)
    p.add_argument("--dpa", action="append", default=[], metavar="PLAYER=FILE")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("mc", help="model-check a formula on a lasso, with energy report")
    p.add_argument("arena")
    p.add_argument("lasso")
    p.add_argument("formula")
    add_common(p)
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("gen-reduction", help="encode a two-counter automaton as an arena")
    p.add_argument("automaton")
    p.set_defaults(func=_cmd_gen_reduction)

    p = sub.add_parser("stats", help="report arena and unfolding sizes")
    p.add_argument("arena")
    add_common(p, pretty=False)
    p.set_defaults(func=_cmd_stats)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except FileNotFoundError as e:
        return _fail(f"cannot read {e.filename}")
    except CarefulSynthError as e:
        return _fail(str(e))


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
