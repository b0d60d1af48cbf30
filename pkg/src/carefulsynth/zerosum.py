"""Two-player zero-sum solving on game graphs: attractors, the four
classical fragment solvers, a Zielonka parity solver, and the per-player
punishment regions used by the equilibrium characterization.

The deviating player is the protagonist; everyone else is merged into one
adversarial coalition. Underflow sinks are absorbing and losing for the
protagonist: carefulness is imposed structurally, not as a side condition.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Optional

from . import ltl
from .arena import RESERVED_ATOM
from .errors import (
    DocumentSemanticError,
    DocumentSyntaxError,
    UnsupportedObjectiveError,
)
from .ltl import FragmentClass
from .unfolding import BOT, UnfoldedArena

MAX_PRIORITY = 16

State = Hashable


@dataclass(frozen=True)
class ZeroSumGame:
    states: tuple[State, ...]
    succ: Mapping[State, tuple[State, ...]]
    is_protagonist: Mapping[State, bool]
    labels: Mapping[State, frozenset[str]]
    losing_sinks: frozenset[State] = frozenset()
    pred: Mapping[State, tuple[State, ...]] = field(repr=False, default=None)


def make_game(states, succ, is_protagonist, labels, losing_sinks=frozenset()) -> ZeroSumGame:
    pred: dict[State, list[State]] = {s: [] for s in states}
    for s in states:
        for t in succ[s]:
            pred[t].append(s)
    return ZeroSumGame(
        states=tuple(states),
        succ={s: tuple(succ[s]) for s in states},
        is_protagonist=dict(is_protagonist),
        labels=dict(labels),
        losing_sinks=frozenset(losing_sinks),
        pred={s: tuple(ps) for s, ps in pred.items()},
    )


def game_from_unfolded(u: UnfoldedArena, protagonist_players: Iterable[int]) -> ZeroSumGame:
    protos = set(protagonist_players)
    if not protos <= set(range(1, u.base.players + 1)):
        raise DocumentSemanticError(f"unknown player(s) in {sorted(protos)}")
    return make_game(
        states=u.states,
        succ=u.succ,
        is_protagonist={s: u.owner(s) in protos for s in u.states},
        labels={s: u.labels(s) for s in u.states},
        losing_sinks=frozenset(s for s in u.states if s is BOT),
    )


@dataclass(frozen=True)
class WinningRegions:
    protagonist: frozenset[State]
    antagonist: frozenset[State]
    protagonist_strategy: dict[State, State]  # protagonist-owned states in its region
    antagonist_strategy: dict[State, State]  # coalition-owned states in its region


# ---------------------------------------------------------------------------
# Attractor


def attractor(
    g: ZeroSumGame,
    target: Iterable[State],
    *,
    for_protagonist: bool = True,
    within: Optional[Iterable[State]] = None,
) -> tuple[set[State], dict[State, State]]:
    """Least fixpoint containing `target`: the attracting side's states with
    one successor inside, the other side's states with all successors
    inside. The strategy picks a rank-decreasing edge."""
    domain = set(g.states) if within is None else set(within)
    attr = set(t for t in target if t in domain)
    strategy: dict[State, State] = {}
    degree = {}
    for s in domain:
        degree[s] = sum(1 for t in g.succ[s] if t in domain)
    frontier = list(attr)
    while frontier:
        new_frontier = []
        for t in frontier:
            for s in g.pred[t]:
                if s not in domain or s in attr:
                    continue
                if g.is_protagonist[s] == for_protagonist:
                    attr.add(s)
                    strategy[s] = t
                    new_frontier.append(s)
                else:
                    degree[s] -= 1
                    if degree[s] == 0:
                        attr.add(s)
                        new_frontier.append(s)
        frontier = new_frontier
    return attr, strategy


def _escape_strategy(g, region, owned_side):
    """For `owned_side`-owned states inside `region` (which is closed for
    that side), pick a successor staying in `region`."""
    out = {}
    for s in region:
        if g.is_protagonist[s] == owned_side:
            for t in g.succ[s]:
                if t in region:
                    out[s] = t
                    break
    return out


# ---------------------------------------------------------------------------
# Fragment solvers


def _holds(beta: ltl.Formula, letter: frozenset[str]) -> bool:
    return ltl.eval_bool(beta, letter)


def _totalize(g: ZeroSumGame, regions: WinningRegions) -> WinningRegions:
    """Extend both strategy maps to every owned state. Outside the owner's
    winning region (or once the objective is already decided) any edge is as
    good as another; total maps keep simulations and certificate checks
    simple."""
    pro = dict(regions.protagonist_strategy)
    ant = dict(regions.antagonist_strategy)
    for s in g.states:
        if g.is_protagonist[s]:
            pro.setdefault(s, g.succ[s][0])
        else:
            ant.setdefault(s, g.succ[s][0])
    return WinningRegions(regions.protagonist, regions.antagonist, pro, ant)


def solve_fragment(g: ZeroSumGame, frag: FragmentClass) -> WinningRegions:
    """Reach / Safe / Büchi / co-Büchi solving; losing sinks are folded in
    as states the protagonist must avoid forever."""
    return _totalize(g, _solve_fragment(g, frag))


def _solve_fragment(g: ZeroSumGame, frag: FragmentClass) -> WinningRegions:
    if frag.kind == FragmentClass.GENERAL:
        raise UnsupportedObjectiveError("cannot solve the General fragment directly")
    beta = frag.beta
    sat = {s: s not in g.losing_sinks and _holds(beta, g.labels[s]) for s in g.states}

    if frag.kind == FragmentClass.SAFE:
        bad = {s for s in g.states if not sat[s]}
        b_region, ant_strat = attractor(g, bad, for_protagonist=False)
        w = set(g.states) - b_region
        pro_strat = _escape_strategy(g, w, True)
        # inside the already-lost region any move will do
        for s in b_region:
            if not g.is_protagonist[s] and s not in ant_strat:
                ant_strat[s] = g.succ[s][0]
        return WinningRegions(frozenset(w), frozenset(b_region), pro_strat, ant_strat)

    # Reach / Büchi / co-Büchi: first confine the protagonist to the region
    # where it can avoid the sinks forever.
    sink_attr, sink_strat = attractor(g, g.losing_sinks, for_protagonist=False)
    safe = set(g.states) - sink_attr

    if frag.kind == FragmentClass.REACH:
        targets = {s for s in safe if sat[s]}
        a_region, a_strat = attractor(g, targets, for_protagonist=True, within=safe)
        w_pro = a_region
        pro_strat = dict(a_strat)
        # after the target is reached the play may drift anywhere in the
        # sink-avoiding region; keep the strategy total there
        stay = _escape_strategy(g, safe, True)
        for s, t in stay.items():
            pro_strat.setdefault(s, t)
        w_ant = set(g.states) - w_pro
        ant_strat = dict(sink_strat)
        rest = safe - a_region
        for s in rest:
            if not g.is_protagonist[s]:
                ant_strat[s] = next(t for t in g.succ[s] if t not in a_region)
        for s in sink_attr:
            if not g.is_protagonist[s] and s not in ant_strat:
                ant_strat[s] = g.succ[s][0]  # at/after the sink, anything goes
        return WinningRegions(frozenset(w_pro), frozenset(w_ant), pro_strat, ant_strat)

    if frag.kind == FragmentClass.BUCHI:
        sub = _Subgame.restrict(g, safe)
        w_pro, pro_strat, w_ant_sub, ant_strat = _solve_buchi(
            sub, {s for s in safe if sat[s]}
        )
        w_ant = w_ant_sub | sink_attr
        full_ant = dict(ant_strat)
        for s, t in sink_strat.items():
            full_ant.setdefault(s, t)
        for s in sink_attr:
            if not g.is_protagonist[s] and s not in full_ant:
                full_ant[s] = g.succ[s][0]
        return WinningRegions(frozenset(w_pro), frozenset(w_ant), pro_strat, full_ant)

    if frag.kind == FragmentClass.COBUCHI:
        # The coalition's complementary objective is Büchi: visit a
        # (!beta or sink) state infinitely often.
        swapped = make_game(
            g.states,
            g.succ,
            {s: not g.is_protagonist[s] for s in g.states},
            g.labels,
        )
        targets = {s for s in g.states if not sat[s]}
        sub = _Subgame.restrict(swapped, set(g.states))
        w_ant, ant_strat, w_pro, pro_strat = _solve_buchi(sub, targets)
        return WinningRegions(frozenset(w_pro), frozenset(w_ant), pro_strat, ant_strat)

    raise UnsupportedObjectiveError(f"unknown fragment kind {frag.kind!r}")


class _Subgame:
    """A total restriction of a game to a subset of its states."""

    @staticmethod
    def restrict(g: ZeroSumGame, domain: set[State]) -> ZeroSumGame:
        states = [s for s in g.states if s in domain]
        succ = {s: tuple(t for t in g.succ[s] if t in domain) for s in states}
        return make_game(
            states, succ, {s: g.is_protagonist[s] for s in states},
            {s: g.labels[s] for s in states},
        )


def _solve_buchi(g: ZeroSumGame, targets: set[State]):
    """Classical repeated-attractor fixpoint. The protagonist wins where it
    can visit `targets` infinitely often. Returns regions and memoryless
    strategies for both sides."""
    current = set(g.states)
    ant_strat: dict[State, State] = {}
    while True:
        sub = _Subgame.restrict(g, current)
        t_now = targets & current
        reach, reach_strat = attractor(sub, t_now, for_protagonist=True)
        dead = current - reach
        if not dead:
            pro_strat = dict(reach_strat)
            for s in current:
                if sub.is_protagonist[s] and s not in pro_strat:
                    # on a target state: step anywhere inside, the attractor
                    # pulls the play back to a target
                    pro_strat[s] = sub.succ[s][0]
            w_ant = set(g.states) - current
            for s in w_ant:
                if not g.is_protagonist[s] and s not in ant_strat:
                    ant_strat[s] = g.succ[s][0]
            return current, pro_strat, w_ant, ant_strat
        removed, rem_strat = attractor(sub, dead, for_protagonist=False)
        for s, t in rem_strat.items():
            ant_strat.setdefault(s, t)
        for s in dead:
            if not sub.is_protagonist[s] and s not in ant_strat:
                # stay outside the protagonist's reach-region
                ant_strat[s] = next(t for t in sub.succ[s] if t not in reach)
        current -= removed


# ---------------------------------------------------------------------------
# Parity (Zielonka)


def solve_parity(g: ZeroSumGame, priority: Mapping[State, int]) -> WinningRegions:
    """Zielonka's recursive algorithm. The protagonist wins a play iff the
    maximum priority seen infinitely often is even."""
    missing = [s for s in g.states if s not in priority]
    if missing:
        raise DocumentSemanticError(f"missing priorities for {len(missing)} state(s)")
    top = max((priority[s] for s in g.states), default=0)
    if top > MAX_PRIORITY:
        raise DocumentSemanticError(
            f"priority {top} exceeds the configured bound {MAX_PRIORITY}"
        )
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * len(g.states) + 100))
    w0, s0, w1, s1 = _zielonka(g, set(g.states), priority)
    return WinningRegions(frozenset(w0), frozenset(w1), s0, s1)


def _zielonka(g: ZeroSumGame, domain: set[State], priority):
    if not domain:
        return set(), {}, set(), {}
    sub = _Subgame.restrict(g, domain)
    p = max(priority[s] for s in domain)
    j_is_pro = p % 2 == 0
    top = {s for s in domain if priority[s] == p}
    a_region, tau = attractor(sub, top, for_protagonist=j_is_pro)
    w0p, s0p, w1p, s1p = _zielonka(g, domain - a_region, priority)
    wjp, sjp = (w0p, s0p) if j_is_pro else (w1p, s1p)
    wop, sop = (w1p, s1p) if j_is_pro else (w0p, s0p)
    if not wop:
        wj = set(domain)
        sj = dict(sjp)
        sj.update(tau)
        for s in top:
            if sub.is_protagonist[s] == j_is_pro and s not in sj:
                sj[s] = sub.succ[s][0]
        if j_is_pro:
            return wj, sj, set(), {}
        return set(), {}, wj, sj
    b_region, tau2 = attractor(sub, wop, for_protagonist=not j_is_pro)
    w0q, s0q, w1q, s1q = _zielonka(g, domain - b_region, priority)
    woq, soq = (w1q, s1q) if j_is_pro else (w0q, s0q)
    wjq, sjq = (w0q, s0q) if j_is_pro else (w1q, s1q)
    wo = woq | b_region
    so = dict(sop)
    so.update(tau2)
    so.update(soq)
    if j_is_pro:
        return wjq, sjq, wo, so
    return wo, so, wjq, sjq


# ---------------------------------------------------------------------------
# Deterministic parity automata (user-supplied, for general-LTL objectives)


@dataclass(frozen=True)
class DpaTransition:
    src: str
    pos: frozenset[str]
    neg: frozenset[str]
    dst: str


@dataclass(frozen=True)
class ParityAutomaton:
    states: tuple[str, ...]
    initial: str
    priority: Mapping[str, int]
    transitions: tuple[DpaTransition, ...]


def parse_dpa(text: str) -> ParityAutomaton:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentSyntaxError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        states = tuple(doc["states"])
        initial = doc["initial"]
        priority = {q: int(p) for q, p in doc["priorities"].items()}
        transitions = tuple(
            DpaTransition(
                t["src"],
                frozenset(t.get("pos", [])),
                frozenset(t.get("neg", [])),
                t["dst"],
            )
            for t in doc["transitions"]
        )
    except (KeyError, TypeError) as e:
        raise DocumentSemanticError(f"bad parity automaton document: {e}") from e
    if initial not in states:
        raise DocumentSemanticError(f"initial state {initial!r} unknown")
    if set(priority) != set(states):
        raise DocumentSemanticError("priority map must cover exactly the states")
    for t in transitions:
        if t.src not in states or t.dst not in states:
            raise DocumentSemanticError(f"dangling transition {t}")
    return ParityAutomaton(states, initial, priority, transitions)


def dpa_step(dpa: ParityAutomaton, q: str, letter: frozenset[str]) -> str:
    matches = [
        t.dst
        for t in dpa.transitions
        if t.src == q and t.pos <= letter and not (t.neg & letter)
    ]
    if not matches:
        raise DocumentSemanticError(
            f"parity automaton has no transition from {q!r} on {sorted(letter)}"
        )
    if len(set(matches)) > 1:
        raise DocumentSemanticError(
            f"parity automaton is nondeterministic at {q!r} on {sorted(letter)}"
        )
    return matches[0]


# ---------------------------------------------------------------------------
# Punishment regions


@dataclass(frozen=True)
class PunishRegions:
    """Deviator-winning region over unfolded states, plus the coalition's
    punishment strategy. For parity-automaton objectives the strategy is
    keyed by (unfolded state, automaton state) pairs and `tracked` is the
    automaton used to follow the play."""

    win: frozenset[State]
    lose: frozenset[State]
    protagonist_strategy: dict
    punishment: dict
    tracked: Optional[ParityAutomaton] = None
    product_antagonist: Optional[frozenset] = None


def punish_region(
    u: UnfoldedArena,
    player: int,
    objective: ltl.Formula,
    dpa: Optional[ParityAutomaton] = None,
) -> PunishRegions:
    """Where can `player`, alone against the coalition, achieve its
    objective while staying careful? Visiting this region while unsatisfied
    breaks an equilibrium candidate."""
    if dpa is not None:
        return _punish_region_dpa(u, player, dpa)
    frag = ltl.classify_fragment(objective)
    if frag.kind == FragmentClass.GENERAL:
        raise UnsupportedObjectiveError(
            f"player {player}: objective {objective} is outside the solvable "
            "fragments; supply a deterministic parity automaton"
        )
    g = game_from_unfolded(u, {player})
    regions = solve_fragment(g, frag)
    return PunishRegions(
        win=regions.protagonist,
        lose=regions.antagonist,
        protagonist_strategy=regions.protagonist_strategy,
        punishment=regions.antagonist_strategy,
    )


def _punish_region_dpa(u: UnfoldedArena, player: int, dpa: ParityAutomaton):
    # Product with the automaton, tracked on current-state labels; sink
    # product states get an odd priority so carefulness stays losing.
    start_states = [(s, q) for s in u.states for q in dpa.states]
    succ = {}
    for s, q in start_states:
        q2 = dpa_step(dpa, q, u.labels(s))
        succ[(s, q)] = tuple((t, q2) for t in u.succ[s])
    g = make_game(
        states=start_states,
        succ=succ,
        is_protagonist={(s, q): u.owner(s) == player for (s, q) in start_states},
        labels={(s, q): u.labels(s) for (s, q) in start_states},
    )
    priority = {
        (s, q): 1 if s is BOT else dpa.priority[q] for (s, q) in start_states
    }
    regions = solve_parity(g, priority)
    # Project to unfolded states, but only through automaton states that can
    # actually accompany the play there: a deviation at s carries the q
    # reached along some history from the initial state.
    reachable = {(u.initial, dpa.initial)}
    stack = [(u.initial, dpa.initial)]
    while stack:
        node = stack.pop()
        for nxt in succ[node]:
            if nxt not in reachable:
                reachable.add(nxt)
                stack.append(nxt)
    win = frozenset(
        s for (s, q) in regions.protagonist if (s, q) in reachable
    )
    return PunishRegions(
        win=win,
        lose=frozenset(s for s in u.states if s not in win),
        # strategies are keyed by (state, q) but the chosen move is just the
        # successor state; the next q is determined by the automaton
        protagonist_strategy={
            k: v[0] for k, v in regions.protagonist_strategy.items()
        },
        punishment={k: v[0] for k, v in regions.antagonist_strategy.items()},
        tracked=dpa,
        product_antagonist=regions.antagonist,
    )
