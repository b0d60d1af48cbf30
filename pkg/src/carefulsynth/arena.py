"""Game arenas: multi-player turn-based graphs with d-dimensional integer
edge costs, atomic-proposition labels, per-player LTL objectives, and an
optional capacity vector.

The textual format is UTF-8 JSON; serialization is canonical (states and
edges sorted lexicographically), so round-trips are byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from . import ltl
from .errors import (
    CostOverflowError,
    DocumentSemanticError,
    DocumentSyntaxError,
)

I64_MIN = -(2**63)
I64_MAX = 2**63 - 1

RESERVED_ATOM = "bot"  # claimed by the unfolding's sink state


@dataclass(frozen=True)
class Arena:
    players: int
    dimensions: int
    states: tuple[str, ...]  # sorted
    owner: Mapping[str, int]
    initial: str
    edges: Mapping[tuple[str, str], tuple[int, ...]]  # (src, dst) -> cost
    atoms: frozenset[str]
    labels: Mapping[str, frozenset[str]]
    system_objective: ltl.Formula
    player_objectives: tuple[ltl.Formula, ...]  # index i-1 for player i
    bounds: Optional[tuple[int, ...]]
    succ: Mapping[str, tuple[str, ...]] = field(repr=False, default=None)

    def successors(self, s: str) -> tuple[str, ...]:
        return self.succ[s]

    def cost(self, src: str, dst: str) -> tuple[int, ...]:
        return self.edges[(src, dst)]

    def objective_of(self, player: int) -> ltl.Formula:
        return self.player_objectives[player - 1]


def build_arena(
    *,
    players: int,
    dimensions: int,
    states: Sequence[str],
    owner: Mapping[str, int],
    initial: str,
    edges: Mapping[tuple[str, str], Sequence[int]],
    atoms: Sequence[str],
    labels: Mapping[str, Sequence[str]],
    system_objective: ltl.Formula,
    player_objectives: Sequence[ltl.Formula],
    bounds: Optional[Sequence[int]] = None,
    allow_reserved_atom: bool = False,
) -> Arena:
    """Validate and construct an Arena; raises DocumentSemanticError on any
    invariant violation."""
    if not isinstance(players, int) or players < 1:
        raise DocumentSemanticError(f"players must be a positive integer, got {players!r}")
    if not isinstance(dimensions, int) or dimensions < 1:
        raise DocumentSemanticError(f"dimensions must be a positive integer, got {dimensions!r}")

    state_list = list(states)
    if len(set(state_list)) != len(state_list):
        raise DocumentSemanticError("duplicate state ids")
    if not state_list:
        raise DocumentSemanticError("arena has no states")
    stateset = set(state_list)

    atomset = frozenset(atoms)
    if len(atomset) != len(list(atoms)):
        raise DocumentSemanticError("duplicate atoms")
    if RESERVED_ATOM in atomset and not allow_reserved_atom:
        raise DocumentSemanticError(f"atom name {RESERVED_ATOM!r} is reserved")

    if set(owner) != stateset:
        raise DocumentSemanticError("owner map must cover exactly the states")
    for s, p in owner.items():
        if not isinstance(p, int) or not 1 <= p <= players:
            raise DocumentSemanticError(f"state {s!r}: owner {p!r} not in 1..{players}")

    if initial not in stateset:
        raise DocumentSemanticError(f"initial state {initial!r} is not a state")

    lab: dict[str, frozenset[str]] = {}
    for s in state_list:
        ls = frozenset(labels.get(s, ()))
        bad = ls - atomset
        if bad:
            raise DocumentSemanticError(f"state {s!r}: unknown atom(s) {sorted(bad)}")
        lab[s] = ls

    edge_map: dict[tuple[str, str], tuple[int, ...]] = {}
    for (src, dst), cost in edges.items():
        if src not in stateset or dst not in stateset:
            raise DocumentSemanticError(f"edge ({src!r}, {dst!r}): dangling endpoint")
        c = tuple(cost)
        if len(c) != dimensions:
            raise DocumentSemanticError(
                f"edge ({src!r}, {dst!r}): cost has {len(c)} components, expected {dimensions}"
            )
        for v in c:
            if not isinstance(v, int) or not I64_MIN <= v <= I64_MAX:
                raise DocumentSemanticError(
                    f"edge ({src!r}, {dst!r}): cost component {v!r} not a 64-bit integer"
                )
        if (src, dst) in edge_map:
            raise DocumentSemanticError(f"duplicate edge ({src!r}, {dst!r})")
        edge_map[(src, dst)] = c

    succ: dict[str, tuple[str, ...]] = {
        s: tuple(sorted(d for (a, d) in edge_map if a == s)) for s in state_list
    }
    for s in state_list:
        if not succ[s]:
            raise DocumentSemanticError(f"state without successor: {s!r}")

    if bounds is not None:
        b = tuple(bounds)
        if len(b) != dimensions:
            raise DocumentSemanticError(
                f"bounds has {len(b)} components, expected {dimensions}"
            )
        for v in b:
            if not isinstance(v, int) or v < 0 or v > I64_MAX:
                raise DocumentSemanticError(f"bounds component {v!r} must be a nonnegative integer")
    else:
        b = None

    objs = tuple(player_objectives)
    if len(objs) != players:
        raise DocumentSemanticError(
            f"expected {players} player objectives, got {len(objs)}"
        )
    legal_atoms = atomset | ({RESERVED_ATOM} if allow_reserved_atom else set())
    for name, f in [("system", system_objective)] + [
        (f"player {i + 1}", g) for i, g in enumerate(objs)
    ]:
        bad = ltl.atoms_of(f) - legal_atoms
        if bad:
            raise DocumentSemanticError(
                f"{name} objective uses unknown atom(s) {sorted(bad)}"
            )

    return Arena(
        players=players,
        dimensions=dimensions,
        states=tuple(sorted(state_list)),
        owner=dict(owner),
        initial=initial,
        edges=edge_map,
        atoms=atomset,
        labels=lab,
        system_objective=system_objective,
        player_objectives=objs,
        bounds=b,
        succ=succ,
    )


# ---------------------------------------------------------------------------
# Document format


def parse_arena(text: str, *, allow_reserved_atom: bool = False) -> Arena:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentSyntaxError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise DocumentSemanticError("arena document must be a JSON object")

    required = {"players", "dimensions", "atoms", "states", "initial", "edges", "objectives"}
    missing = required - doc.keys()
    if missing:
        raise DocumentSemanticError(f"missing field(s): {sorted(missing)}")

    states, owner, labels = [], {}, {}
    for item in doc["states"]:
        if not isinstance(item, dict) or "id" not in item or "owner" not in item:
            raise DocumentSemanticError(f"bad state entry: {item!r}")
        sid = item["id"]
        states.append(sid)
        owner[sid] = item["owner"]
        labels[sid] = item.get("labels", [])

    edges = {}
    for item in doc["edges"]:
        if not isinstance(item, dict) or not {"src", "dst", "cost"} <= item.keys():
            raise DocumentSemanticError(f"bad edge entry: {item!r}")
        key = (item["src"], item["dst"])
        if key in edges:
            raise DocumentSemanticError(f"duplicate edge {key!r}")
        edges[key] = item["cost"]

    objectives = doc["objectives"]
    if not isinstance(objectives, dict) or "system" not in objectives:
        raise DocumentSemanticError("objectives must carry a 'system' formula")
    players = doc["players"]
    if not isinstance(players, int) or players < 1:
        raise DocumentSemanticError(f"players must be a positive integer, got {players!r}")
    per_player = objectives.get("players", {})
    player_objs = []
    for i in range(1, players + 1):
        src = per_player.get(str(i))
        player_objs.append(ltl.parse_ltl(src) if src is not None else ltl.TRUE)
    extra = set(per_player) - {str(i) for i in range(1, players + 1)}
    if extra:
        raise DocumentSemanticError(f"objectives for unknown player(s): {sorted(extra)}")

    return build_arena(
        players=players,
        dimensions=doc["dimensions"],
        states=states,
        owner=owner,
        initial=doc["initial"],
        edges=edges,
        atoms=doc["atoms"],
        labels=labels,
        system_objective=ltl.parse_ltl(objectives["system"]),
        player_objectives=player_objs,
        bounds=doc.get("bounds"),
        allow_reserved_atom=allow_reserved_atom,
    )


def arena_to_document(arena: Arena) -> dict:
    doc: dict = {
        "players": arena.players,
        "dimensions": arena.dimensions,
    }
    if arena.bounds is not None:
        doc["bounds"] = list(arena.bounds)
    doc["atoms"] = sorted(arena.atoms)
    doc["states"] = [
        {"id": s, "owner": arena.owner[s], "labels": sorted(arena.labels[s])}
        for s in arena.states
    ]
    doc["initial"] = arena.initial
    doc["edges"] = [
        {"src": src, "dst": dst, "cost": list(arena.edges[(src, dst)])}
        for (src, dst) in sorted(arena.edges)
    ]
    doc["objectives"] = {
        "system": ltl.formula_to_str(arena.system_objective),
        "players": {
            str(i): ltl.formula_to_str(arena.player_objectives[i - 1])
            for i in range(1, arena.players + 1)
        },
    }
    return doc


def serialize_arena(arena: Arena) -> str:
    return json.dumps(arena_to_document(arena), indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# Histories, lassos, cost arithmetic


History = Sequence[str]


@dataclass(frozen=True)
class Lasso:
    """Finite representation stem . loop^omega of an ultimately periodic
    play. The optional trace caches the resource vector at each position of
    stem + first loop traversal; validation recomputes it."""

    stem: tuple[str, ...]
    loop: tuple[str, ...]
    trace: Optional[tuple[tuple[int, ...], ...]] = None


def validate_history(arena: Arena, h: History) -> None:
    if not h:
        raise DocumentSemanticError("history is empty")
    if h[0] != arena.initial:
        raise DocumentSemanticError(
            f"history starts at {h[0]!r}, expected initial {arena.initial!r}"
        )
    for a, b in zip(h, h[1:]):
        if (a, b) not in arena.edges:
            raise DocumentSemanticError(f"({a!r}, {b!r}) is not an edge")


def _checked_add(acc: list[int], cost: tuple[int, ...]) -> None:
    for i, v in enumerate(cost):
        acc[i] += v
        if not I64_MIN <= acc[i] <= I64_MAX:
            raise CostOverflowError(f"cumulative cost overflows 64 bits in component {i + 1}")


def cost_of_history(arena: Arena, h: History) -> tuple[int, ...]:
    """Componentwise (unbounded, non-saturating) sum of edge costs along h."""
    validate_history(arena, h)
    acc = [0] * arena.dimensions
    for a, b in zip(h, h[1:]):
        _checked_add(acc, arena.edges[(a, b)])
    return tuple(acc)


def validate_lasso(arena: Arena, l: Lasso, bounds: Optional[Sequence[int]] = None) -> None:
    """Structural validation; with `bounds` (or arena bounds) present the
    cached trace is checked against saturating recomputation, else against
    the plain sum."""
    validate_history(arena, l.stem)
    if not l.loop:
        raise DocumentSemanticError("lasso loop is empty")
    cycle = [l.stem[-1]] + list(l.loop) + [l.loop[0]]
    for a, b in zip(cycle, cycle[1:]):
        if (a, b) not in arena.edges:
            raise DocumentSemanticError(f"({a!r}, {b!r}) is not an edge")
    if l.trace is not None:
        expected = lasso_trace(arena, l, bounds)
        if tuple(l.trace) != expected:
            raise DocumentSemanticError("cached resource trace does not match recomputation")


def lasso_trace(
    arena: Arena, l: Lasso, bounds: Optional[Sequence[int]] = None
) -> tuple[tuple[int, ...], ...]:
    b = tuple(bounds) if bounds is not None else arena.bounds
    seq = list(l.stem) + list(l.loop)
    acc = [0] * arena.dimensions
    out = [tuple(acc)]
    for x, y in zip(seq, seq[1:]):
        cost = arena.edges[(x, y)]
        if b is None:
            _checked_add(acc, cost)
        else:
            acc = [min(acc[i] + cost[i], b[i]) for i in range(arena.dimensions)]
        out.append(tuple(acc))
    return tuple(out)


def multi_energy_check_unbounded(arena: Arena, l: Lasso) -> bool:
    """True iff every prefix of stem . loop^omega has componentwise
    nonnegative cumulative cost (arena bounds are ignored). Exact: checks
    prefixes through one full loop traversal plus the loop's net cost."""
    validate_lasso(arena, Lasso(l.stem, l.loop))
    seq = list(l.stem) + list(l.loop) + [l.loop[0]]
    acc = [0] * arena.dimensions
    for x, y in zip(seq, seq[1:]):
        _checked_add(acc, arena.edges[(x, y)])
        if any(v < 0 for v in acc):
            return False
    cycle = list(l.loop) + [l.loop[0]]
    net = [0] * arena.dimensions
    for x, y in zip(cycle, cycle[1:]):
        _checked_add(net, arena.edges[(x, y)])
    return all(v >= 0 for v in net)


def lasso_labels(
    arena: Arena, l: Lasso
) -> tuple[list[frozenset[str]], list[frozenset[str]]]:
    return [arena.labels[s] for s in l.stem], [arena.labels[s] for s in l.loop]


def payoff(arena: Arena, l: Lasso, player: int) -> int:
    """1 iff the lasso's label word satisfies the player's objective."""
    if not 1 <= player <= arena.players:
        raise DocumentSemanticError(f"no player {player}")
    stem_labels, loop_labels = lasso_labels(arena, l)
    obj = arena.objective_of(player)
    return 1 if ltl.eval_on_lasso(obj, stem_labels, loop_labels, atoms=arena.atoms) else 0
