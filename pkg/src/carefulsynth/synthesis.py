"""Deciding careful cooperative rational synthesis on bounded instances.

Pipeline: unfold the arena, compute each player's punishment region, then
for each candidate winner set search the restricted unfolding for a lasso
satisfying the system objective, the winners' objectives, and sink
avoidance. A found lasso plus the precomputed punishment tables form the
equilibrium certificate; `check_certificate` re-derives everything from
scratch.
"""

from __future__ import annotations

import itertools
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from . import ltl
from ._graphs import shortest_path, strongly_connected_components
from .arena import Arena, Lasso, RESERVED_ATOM
from .errors import (
    BudgetExceededError,
    DocumentSemanticError,
    DocumentSyntaxError,
    MalformedProfileError,
    UnsupportedObjectiveError,
)
from .unfolding import (
    AVOID_BOT,
    BOT,
    DEFAULT_STATE_BUDGET,
    UState,
    UnfoldedArena,
    parse_ustate,
    render_ustate,
    saturating_add,
    unfold,
)
from .zerosum import ParityAutomaton, PunishRegions, dpa_step, punish_region

DEFAULT_PRODUCT_BUDGET = 10**7


@dataclass(frozen=True)
class StrategyProfile:
    """Finite-memory equilibrium certificate: the on-path lasso plus one
    punishment table per player, activated at that player's first
    deviation."""

    outcome: Lasso  # base-arena projection, with resource trace
    outcome_stem: tuple[UState, ...]
    outcome_loop: tuple[UState, ...]
    winners: frozenset[int]
    punishment: Mapping[int, Mapping]  # player -> (state or (state, q)) -> successor
    dpa_players: frozenset[int] = frozenset()


@dataclass(frozen=True)
class SolveResult:
    status: str  # "solution" | "no-solution" | "unsupported"
    profile: Optional[StrategyProfile] = None
    diagnostics: tuple[tuple[tuple[int, ...], str], ...] = ()
    reason: Optional[str] = None

    SOLUTION = "solution"
    NO_SOLUTION = "no-solution"
    UNSUPPORTED = "unsupported"


# ---------------------------------------------------------------------------
# Witness search


def _node_key(node):
    us, qs = node
    return (render_ustate(us), qs)


def find_witness_lasso(
    u: UnfoldedArena,
    required: Sequence[ltl.Formula],
    forbidden_states: set[UState],
    max_product: int = DEFAULT_PRODUCT_BUDGET,
) -> Optional[tuple[tuple[UState, ...], tuple[UState, ...]]]:
    """Search the sink-free, restriction-respecting unfolding for a lasso
    whose projection satisfies every required formula. Returns (stem, loop)
    over unfolded states, deterministically minimized (shortest stem first,
    then a short loop), or None."""
    allowed = {
        s
        for s in u.states
        if s not in forbidden_states and RESERVED_ATOM not in u.labels(s)
    }
    # drop states that cannot continue inside the restriction
    changed = True
    while changed:
        changed = False
        for s in list(allowed):
            if not any(t in allowed for t in u.succ[s]):
                allowed.discard(s)
                changed = True
    if u.initial not in allowed:
        return None

    nbas = [ltl.to_nba(f) for f in required]
    m = len(nbas)

    succ_cache: dict = {}

    def successors(node):
        if node in succ_cache:
            return succ_cache[node]
        us, qs = node
        letter = u.labels(us)
        per_nba = []
        for k in range(m):
            dsts = sorted(
                {
                    tr.dst
                    for tr in nbas[k].transitions[qs[k]]
                    if ltl.guard_matches(tr, letter)
                }
            )
            per_nba.append(dsts)
        out = []
        for t in u.succ[us]:
            if t not in allowed:
                continue
            for combo in itertools.product(*per_nba):
                out.append((t, combo))
        out.sort(key=_node_key)
        succ_cache[node] = out
        return out

    initials = sorted(
        ((u.initial, combo) for combo in itertools.product(*(sorted(n.initial) for n in nbas))),
        key=_node_key,
    )

    # reachable product
    seen = set(initials)
    stack = list(initials)
    while stack:
        node = stack.pop()
        for nxt in successors(node):
            if nxt not in seen:
                if len(seen) >= max_product:
                    raise BudgetExceededError(
                        f"synchronous product exceeds the budget of {max_product}"
                    )
                seen.add(nxt)
                stack.append(nxt)

    def in_acc(node, k):
        return node[1][k] in nbas[k].accepting

    accepting_nodes: set = set()
    comp_of: dict = {}
    for comp in strongly_connected_components(seen, successors):
        compset = set(comp)
        has_edge = any(t in compset for s in comp for t in successors(s))
        if not has_edge:
            continue
        if all(any(in_acc(node, k) for node in comp) for k in range(m)):
            for node in comp:
                comp_of[node] = compset
                accepting_nodes.add(node)

    if not accepting_nodes:
        return None

    stem_path = shortest_path(initials, successors, lambda n: n in accepting_nodes)
    if stem_path is None:
        return None
    anchor = stem_path[-1]
    comp = comp_of[anchor]

    def within(node):
        return node in comp

    # cycle through one representative of every acceptance set, then home
    loop_nodes = [anchor]
    current = anchor
    for k in range(m):
        if any(in_acc(node, k) for node in loop_nodes):
            continue
        seg = shortest_path([current], successors, lambda n: in_acc(n, k), allowed=within)
        loop_nodes.extend(seg[1:])
        current = seg[-1]
    closing_sources = [t for t in successors(current) if t in comp]
    if current is anchor and len(loop_nodes) == 1:
        back = shortest_path(closing_sources, successors, lambda n: n == anchor, allowed=within)
        loop_nodes.extend(back[:-1])
    elif current != anchor:
        back = shortest_path([current], successors, lambda n: n == anchor, allowed=within)
        loop_nodes.extend(back[1:-1])

    stem = tuple(us for (us, _) in stem_path[:-1])
    loop = tuple(us for (us, _) in loop_nodes)
    if not stem:
        stem = loop  # plays are stem . loop^omega; keep the stem nonempty
    return stem, loop


# ---------------------------------------------------------------------------
# Solving


def _winner_sets(n: int):
    players = list(range(1, n + 1))
    sets = []
    for r in range(n, -1, -1):
        for combo in itertools.combinations(players, r):
            sets.append(frozenset(combo))
    return sets


def outcome_lasso(u: UnfoldedArena, stem, loop) -> Lasso:
    base_stem = tuple(us[0] for us in stem)
    base_loop = tuple(us[0] for us in loop)
    trace = tuple(us[1] for us in stem) + tuple(us[1] for us in loop)
    return Lasso(stem=base_stem, loop=base_loop, trace=trace)


def solve(
    a: Arena,
    bounds: Sequence[int],
    dpas: Optional[Mapping[int, ParityAutomaton]] = None,
    max_states: int = DEFAULT_STATE_BUDGET,
    max_product: int = DEFAULT_PRODUCT_BUDGET,
    jobs: Optional[int] = None,
) -> SolveResult:
    """Decide careful cooperative rational synthesis under capacity vector
    `bounds` and construct a certificate when a solution exists. Unbounded
    solving is refused by the type of `bounds` (the unbounded problem is
    undecidable; only lasso checking is offered there)."""
    dpas = dict(dpas or {})
    u = unfold(a, bounds, max_states=max_states)

    def region_for(i: int) -> PunishRegions:
        return punish_region(u, i, a.objective_of(i), dpas.get(i))

    players = list(range(1, a.players + 1))
    try:
        if jobs is not None and jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                regions = dict(zip(players, pool.map(region_for, players)))
        else:
            regions = {i: region_for(i) for i in players}
    except UnsupportedObjectiveError as e:
        return SolveResult(SolveResult.UNSUPPORTED, reason=str(e))

    diagnostics: list[tuple[tuple[int, ...], str]] = []
    for winner_set in _winner_sets(a.players):
        required = [a.system_objective, AVOID_BOT] + [
            a.objective_of(i) for i in sorted(winner_set)
        ]
        forbidden = {
            s
            for i in players
            if i not in winner_set
            for s in regions[i].win
            if s is not BOT and u.owner(s) == i
        }
        found = find_witness_lasso(u, required, forbidden, max_product=max_product)
        if found is None:
            diagnostics.append(
                (tuple(sorted(winner_set)), "no equilibrium-supportable witness lasso")
            )
            continue
        stem, loop = found
        outcome = outcome_lasso(u, stem, loop)
        stem_labels = [u.labels(s) for s in stem]
        loop_labels = [u.labels(s) for s in loop]
        winners = frozenset(
            i
            for i in players
            if i not in dpas
            and ltl.eval_on_lasso(
                a.objective_of(i), stem_labels, loop_labels, atoms=a.atoms
            )
        ) | frozenset(i for i in dpas if _dpa_accepts(dpas[i], u, stem, loop))
        profile = StrategyProfile(
            outcome=outcome,
            outcome_stem=stem,
            outcome_loop=loop,
            winners=winners,
            punishment={i: dict(regions[i].punishment) for i in players},
            dpa_players=frozenset(dpas),
        )
        return SolveResult(SolveResult.SOLUTION, profile=profile)
    return SolveResult(SolveResult.NO_SOLUTION, diagnostics=tuple(diagnostics))


def _dpa_accepts(dpa: ParityAutomaton, u: UnfoldedArena, stem, loop) -> bool:
    """Run the deterministic automaton over the lasso; decide by the parity
    of the maximum priority inside the settled loop."""
    seq = list(stem) + list(loop)
    q = dpa.initial
    states_seen = []
    for us in seq:
        states_seen.append(q)
        q = dpa_step(dpa, q, u.labels(us))
    # iterate the loop until the automaton state at the loop head repeats
    heads = {}
    loop_qs: list[str] = []
    while q not in heads:
        heads[q] = len(loop_qs)
        for us in loop:
            loop_qs.append(q)
            q = dpa_step(dpa, q, u.labels(us))
    cycle = loop_qs[heads[q] * len(loop):]
    return max(dpa.priority[x] for x in cycle) % 2 == 0


# ---------------------------------------------------------------------------
# Certificate checking


def check_certificate(
    a: Arena,
    bounds: Sequence[int],
    profile: StrategyProfile,
    dpas: Optional[Mapping[int, ParityAutomaton]] = None,
    max_states: int = DEFAULT_STATE_BUDGET,
    spot_checks: int = 25,
    seed: int = 0,
) -> list[str]:
    """Independently recompute every clause of the solution definition.
    Returns a list of violations; empty means the certificate is valid."""
    dpas = dict(dpas or {})
    violations: list[str] = []
    u = unfold(a, bounds, max_states=max_states)

    try:
        stem, loop = _replay(u, profile.outcome)
    except MalformedProfileError as e:
        return [str(e)]

    stem_labels = [u.labels(s) for s in stem]
    loop_labels = [u.labels(s) for s in loop]
    atoms = a.atoms | {RESERVED_ATOM}
    if not ltl.eval_on_lasso(a.system_objective, stem_labels, loop_labels, atoms=atoms):
        violations.append("outcome does not satisfy the system objective")

    regions = {i: punish_region(u, i, a.objective_of(i), dpas.get(i)) for i in range(1, a.players + 1)}
    rng = random.Random(seed)
    for i in range(1, a.players + 1):
        if i in dpas:
            satisfied = _dpa_accepts(dpas[i], u, stem, loop)
        else:
            satisfied = ltl.eval_on_lasso(
                a.objective_of(i), stem_labels, loop_labels, atoms=atoms
            )
        if satisfied != (i in profile.winners):
            violations.append(
                f"player {i}: declared {'winner' if i in profile.winners else 'loser'}, "
                f"outcome says otherwise"
            )
        if not satisfied:
            offenders = [
                s for s in list(stem) + list(loop)
                if u.owner(s) == i and s in regions[i].win
            ]
            for s in offenders:
                violations.append(
                    f"player {i}: outcome visits {render_ustate(s)}, where a careful "
                    f"profitable deviation exists"
                )
        violations.extend(
            _check_punishment(u, a, i, profile, regions[i], dpas.get(i), rng, spot_checks)
        )
    return violations


def _replay(u: UnfoldedArena, outcome: Lasso) -> tuple[tuple, tuple]:
    """Recompute the unfolded image of the outcome and verify lasso shape,
    sink-freeness, and the cached trace."""
    if not outcome.stem or not outcome.loop:
        raise MalformedProfileError("outcome stem and loop must be nonempty")
    if outcome.stem[0] != u.base.initial:
        raise MalformedProfileError("outcome does not start at the initial state")
    seq = list(outcome.stem) + list(outcome.loop)
    c = (0,) * u.base.dimensions
    ustates = [(seq[0], c)]
    for x, y in zip(seq, seq[1:]):
        if (x, y) not in u.base.edges:
            raise MalformedProfileError(f"outcome uses the non-edge ({x!r}, {y!r})")
        c = saturating_add(c, u.base.edges[(x, y)], u.bounds)
        if any(v < 0 for v in c):
            raise MalformedProfileError("outcome depletes a resource (reaches the sink)")
        ustates.append((y, c))
    head = outcome.loop[0]
    if (outcome.loop[-1], head) not in u.base.edges:
        raise MalformedProfileError("loop does not close in the arena")
    c2 = saturating_add(c, u.base.edges[(outcome.loop[-1], head)], u.bounds)
    if any(v < 0 for v in c2):
        raise MalformedProfileError("closing the loop depletes a resource")
    loop_start = len(outcome.stem)
    if ustates[loop_start] != (head, c2):
        raise MalformedProfileError(
            "loop is not resource-stable: repeating it changes the resource vector"
        )
    if outcome.trace is not None and tuple(outcome.trace) != tuple(us[1] for us in ustates):
        raise MalformedProfileError("cached resource trace does not match recomputation")
    return tuple(ustates[:loop_start]), tuple(ustates[loop_start:])


def _check_punishment(u, a, player, profile, region, dpa, rng, spot_checks):
    violations = []
    table = profile.punishment.get(player)
    if table is None:
        return [f"player {player}: missing punishment table"]
    keyed_by_product = dpa is not None
    for key, value in table.items():
        s = key[0] if keyed_by_product else key
        if s not in u.succ or value not in u.succ[s]:
            violations.append(
                f"player {player}: punishment entry {key!r} -> {value!r} is not an edge"
            )
            return violations

    starts = [s for s in region.lose if s is not BOT and any(t is not BOT for t in u.succ[s])]
    starts.sort(key=render_ustate)
    if not starts:
        return violations
    atoms = a.atoms | {RESERVED_ATOM}
    for _ in range(spot_checks):
        start = starts[rng.randrange(len(starts))]
        ok = _simulate_punishment(u, a, player, table, start, dpa, rng, atoms)
        if not ok:
            violations.append(
                f"player {player}: punishment fails from {render_ustate(start)}"
            )
            break
    return violations


def _simulate_punishment(u, a, player, table, start, dpa, rng, atoms):
    """One trial: the deviator plays a random memoryless strategy, the
    coalition follows its table; the induced lasso must not be both careful
    and objective-satisfying for the deviator."""
    deviator_choice: dict = {}
    q = dpa.initial if dpa is not None else None
    pos = start
    path = []
    seen_at: dict = {}
    while True:
        config = (pos, q)
        if config in seen_at:
            loop_start = seen_at[config]
            break
        seen_at[config] = len(path)
        path.append(config)
        if pos is BOT:
            nxt = BOT
        elif u.owner(pos) == player:
            if pos not in deviator_choice:
                options = u.succ[pos]
                deviator_choice[pos] = options[rng.randrange(len(options))]
            nxt = deviator_choice[pos]
        else:
            key = (pos, q) if dpa is not None else pos
            if key not in table:
                return False  # incomplete table counts as a punishment failure
            nxt = table[key]
        if dpa is not None:
            q = dpa_step(dpa, q, u.labels(pos))
        pos = nxt

    stem_cfg, loop_cfg = path[:loop_start], path[loop_start:]
    careful = all(p is not BOT for (p, _) in path)
    if not careful:
        return True
    if dpa is not None:
        best = max(dpa.priority[qq] for (_, qq) in loop_cfg)
        satisfied = best % 2 == 0
    else:
        satisfied = ltl.eval_on_lasso(
            a.objective_of(player),
            [u.labels(p) for (p, _) in stem_cfg],
            [u.labels(p) for (p, _) in loop_cfg],
            atoms=atoms,
        )
    return not satisfied


# ---------------------------------------------------------------------------
# Documents


def profile_to_document(profile: StrategyProfile) -> dict:
    def render_key(player, key):
        if player in profile.dpa_players:
            return f"{render_ustate(key[0])}|{key[1]}"
        return render_ustate(key)

    return {
        "outcome": {
            "stem": list(profile.outcome.stem),
            "loop": list(profile.outcome.loop),
            "trace": [list(v) for v in profile.outcome.trace],
        },
        "winners": sorted(profile.winners),
        "punishment": {
            str(i): {
                render_key(i, k): render_ustate(v)
                for k, v in sorted(table.items(), key=lambda kv: render_key(i, kv[0]))
            }
            for i, table in sorted(profile.punishment.items())
        },
        "dpa_players": sorted(profile.dpa_players),
    }


def result_to_document(result: SolveResult) -> dict:
    doc: dict = {"status": result.status}
    if result.profile is not None:
        doc.update(profile_to_document(result.profile))
    if result.diagnostics:
        doc["diagnostics"] = [
            {"winners": list(w), "reason": r} for (w, r) in result.diagnostics
        ]
    if result.reason:
        doc["reason"] = result.reason
    return doc


def parse_profile(text: str) -> StrategyProfile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentSyntaxError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        outcome = doc["outcome"]
        stem = tuple(outcome["stem"])
        loop = tuple(outcome["loop"])
        trace = tuple(tuple(v) for v in outcome["trace"])
        winners = frozenset(int(i) for i in doc["winners"])
        dpa_players = frozenset(int(i) for i in doc.get("dpa_players", []))
        punishment = {}
        for i_str, table in doc.get("punishment", {}).items():
            i = int(i_str)
            entries = {}
            for k, v in table.items():
                if i in dpa_players:
                    state_part, _, q = k.rpartition("|")
                    entries[(parse_ustate(state_part), q)] = parse_ustate(v)
                else:
                    entries[parse_ustate(k)] = parse_ustate(v)
            punishment[i] = entries
    except (KeyError, TypeError, ValueError, DocumentSemanticError) as e:
        raise MalformedProfileError(f"bad profile document: {e}") from e
    ustates = tuple(zip(stem + loop, trace))
    return StrategyProfile(
        outcome=Lasso(stem=stem, loop=loop, trace=trace),
        outcome_stem=ustates[: len(stem)],
        outcome_loop=ustates[len(stem):],
        winners=winners,
        punishment=punishment,
        dpa_players=dpa_players,
    )
