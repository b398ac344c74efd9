"""Guided partial exploration of the game arena.

Exploration runs in episodes from one player's perspective.  Frontier
states are expanded cheapest first, where the cost of a state adds up the
rank of every choice the perspective player made on the way there (the
opponent's moves are free, since a strategy must answer all of them).
After each episode the partial game is solved twice, once with the
frontier counted as lost for the system and once as lost for the
environment; either probe can settle the initial state soundly.
"""
from __future__ import annotations

import hashlib
import heapq
import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from . import ltl
from .automata import DpaState, Translation
from .game import ENV, LOST_FOR_ENV, LOST_FOR_SYS, SYS, Arena, Verdict
from .ltl import Formula, Partition

# --------------------------------------------------------------------------
# features


def trueness(f: Formula) -> float:
    """Heuristic degree of satisfiability in [0, 1].

    tt = 1, ff = 0, literals ½; ∧ multiplies, ∨ is the probabilistic sum,
    X is transparent, F/U lean up to at least ½ and G/R/W are capped at ½.
    """
    if not ltl.is_nnf(f):
        f = ltl.to_nnf(f)
    return _trueness(f, {})


def _trueness(f: Formula, memo: dict[int, float]) -> float:
    r = memo.get(f.id)
    if r is not None:
        return r
    k = f.kind
    if k == ltl.TT:
        r = 1.0
    elif k == ltl.FF:
        r = 0.0
    elif k in (ltl.AP, ltl.NAP):
        r = 0.5
    elif k == ltl.AND:
        r = math.prod(_trueness(c, memo) for c in f.children)
    elif k == ltl.OR:
        r = 0.0
        for c in f.children:
            t = _trueness(c, memo)
            r = r + t - r * t
    elif k == ltl.NEXT:
        r = _trueness(f.children[0], memo)
    elif k == ltl.FIN:
        r = max(0.5, _trueness(f.children[0], memo))
    elif k == ltl.GLOB:
        r = min(0.5, _trueness(f.children[0], memo))
    elif k == ltl.UNTIL:
        a, b = (_trueness(c, memo) for c in f.children)
        r = max(b, min(0.5, a))
    elif k == ltl.RELEASE:
        a, b = (_trueness(c, memo) for c in f.children)
        r = min(b, max(0.5, a))
    elif k == ltl.WUNTIL:
        a, b = (_trueness(c, memo) for c in f.children)
        r = min(a + b - a * b, max(0.5, b))
    else:
        raise ValueError(f"trueness expects NNF, got {f}")
    memo[f.id] = r
    return r


def controllability(f: Formula, partition: Partition, player: int) -> float:
    """Share of the atoms of ``f`` owned by ``player`` (½ without atoms)."""
    names = ltl.atoms(f)
    if not names:
        return 0.5
    own = set(partition.ap_sys if player == SYS else partition.ap_env)
    return sum(1 for n in names if n in own) / len(names)


def controller(f: Formula, partition: Partition) -> int:
    """The system controls a leaf iff it owns more than half of its atoms."""
    return SYS if controllability(f, partition, SYS) > 0.5 else ENV


def _leaf_formula(t: Translation, i: int) -> Formula:
    return t.normal_form.leaves[i].formula


def label_formula(t: Translation, s: DpaState) -> Formula:
    """The LTL formula a DPA state still has to satisfy."""
    return _expand_label(s.dela.combination, s)


def _expand_label(comb: Formula, s: DpaState) -> Formula:
    mapping = {}
    for i in s.dela.live():
        m = s.dela.subs[i].master
        mapping[ltl.leaf_atom(i)] = m
        mapping[ltl.neg(ltl.leaf_atom(i))] = ltl.to_nnf(ltl.neg(m))
    return ltl.substitute(comb, mapping)


def attention_reduce(t: Translation, s: DpaState, player: int, partition: Partition) -> Formula:
    """Label with opponent-controlled leaves resolved against ``player``.

    For the system perspective each opponent leaf literal becomes ff, for
    the environment perspective it becomes tt.
    """
    opponent = {ltl.leaf_atom(i).name for i in s.dela.live()
                if controller(_leaf_formula(t, i), partition) != player}
    comb = s.dela.combination
    if opponent:
        comb = _replace_literals(comb, opponent, ltl.tt if player == ENV else ltl.ff)
    return _expand_label(comb, s)


def _replace_literals(f: Formula, names: set[str], value: Formula) -> Formula:
    if f.kind in (ltl.AP, ltl.NAP):
        return value if f.name in names else f
    if f.kind in (ltl.AND, ltl.OR):
        return ltl.rebuild(f, (_replace_literals(c, names, value) for c in f.children))
    return f


@dataclass(frozen=True)
class FeatureVector:
    trueness: float
    controllability: float
    attention: float
    minmax: float = 0.0


class Features:
    """Feature computation over the labels of one translation (memoized)."""

    def __init__(self, translation: Translation, partition: Partition):
        self.t = translation
        self.partition = partition
        self._memo: dict[tuple[DpaState, int], FeatureVector] = {}

    def state(self, s: DpaState, player: int) -> FeatureVector:
        key = (s, player)
        fv = self._memo.get(key)
        if fv is None:
            label = label_formula(self.t, s)
            att = attention_reduce(self.t, s, player, self.partition)
            live = s.dela.live()
            if live:
                ctrl = sum(controllability(_leaf_formula(self.t, i), self.partition, player) for i in live) / len(live)
            else:
                ctrl = 1.0
            fv = FeatureVector(trueness(label), ctrl, trueness(att))
            self._memo[key] = fv
        return fv


# --------------------------------------------------------------------------
# scoring and ranking


class Scorer:
    """Maps a candidate move to a real score (higher is better); must be pure."""

    def score(self, features: FeatureVector, player: int) -> float:
        raise NotImplementedError

    def compare(self, a: FeatureVector, b: FeatureVector, player: int) -> int:
        sa, sb = self.score(a, player), self.score(b, player)
        return (sa > sb) - (sa < sb)


DEFAULT_WEIGHTS = {"trueness": 0.25, "controllability": 0.15, "attention": 0.6, "minmax": 0.5}


class LinearScorer(Scorer):
    def __init__(self, weights: Mapping[str, float] | None = None):
        self.weights = dict(DEFAULT_WEIGHTS)
        self.weights.update(weights or {})

    def score(self, fv: FeatureVector, player: int) -> float:
        w = self.weights
        # trueness favours the system; the environment wants it low
        sign = 1.0 if player == SYS else -1.0
        base = sign * (w["trueness"] * fv.trueness + w["attention"] * fv.attention)
        return base + w["controllability"] * fv.controllability + sign * w["minmax"] * fv.minmax

    def compare(self, a: FeatureVector, b: FeatureVector, player: int) -> int:
        # lexicographic on the sharp signal first, then the blended score
        sign = 1 if player == SYS else -1
        if a.attention != b.attention:
            return sign if a.attention > b.attention else -sign
        return super().compare(a, b, player)


class RandomScorer(Scorer):
    """Deterministic pseudo-random scores, for differential testing."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def score(self, fv: FeatureVector, player: int) -> float:
        h = hashlib.sha256(repr((self.seed, fv, player)).encode()).digest()
        return int.from_bytes(h[:8], "big") / 2**64


def rank_edges(scores: Sequence[float], compare: Callable[[int, int], int] | None = None,
               top: int = 8, full_limit: int = 16) -> list[int]:
    """Order edge indices best first.

    With at most ``full_limit`` edges every pair plays once and edges are
    sorted by wins (ties by pointwise score, then index).  Otherwise edges
    are sorted pointwise and only the best ``top`` are re-ranked by a
    round-robin tournament.
    """
    n = len(scores)
    if n == 0:
        raise ValueError("nothing to rank")
    if compare is None:
        def compare(i, j):
            return (scores[i] > scores[j]) - (scores[i] < scores[j])

    def tournament(idx: list[int]) -> list[int]:
        wins = {i: 0 for i in idx}
        for i, j in itertools.combinations(idx, 2):
            c = compare(i, j)
            if c > 0:
                wins[i] += 1
            elif c < 0:
                wins[j] += 1
        return sorted(idx, key=lambda i: (-wins[i], -scores[i], i))

    if n <= full_limit:
        return tournament(list(range(n)))
    pointwise = sorted(range(n), key=lambda i: (-scores[i], i))
    return tournament(pointwise[:top]) + pointwise[top:]


def choose_initial_perspective(f: Formula, partition: Partition) -> int:
    """Explore first for the environment when the labels suggest it has an easy win.

    That is the case when env-controlled leaves outnumber system ones, or
    when an env-controlled leaf occurs negated (an assumption whose
    violation the environment may be hunting for).
    """
    try:
        nf = ltl.normalize(f)
    except ltl.Unsupported:
        return SYS
    counts = {SYS: 0, ENV: 0}
    negated_env = False
    lits = {(ltl.leaf_index(ltl.atom(n)), n) for n in ltl.atoms(nf.combination)}
    negative = _negative_literals(nf.combination)
    for i, _ in lits:
        c = controller(nf.leaves[i].formula, partition)
        counts[c] += 1
        if c == ENV and (i in negative or not nf.leaves[i].positive):
            negated_env = True
    if counts[ENV] > counts[SYS] or (negated_env and counts[SYS] > 0):
        return ENV
    return SYS


def _negative_literals(f: Formula) -> set[int]:
    out = set()
    for g in ltl.subformulas(f):
        if g.kind == ltl.NAP:
            out.add(ltl.leaf_index(ltl.atom(g.name)))
    return out


# --------------------------------------------------------------------------
# the explore / solve loop

REALIZABLE, UNREALIZABLE, TIMEOUT = "realizable", "unrealizable", "timeout"


@dataclass
class ExplorationResult:
    status: str
    arena: Arena
    verdict: Verdict | None
    explored: int
    episodes: int
    probes: int = 0

    @property
    def winner(self) -> int | None:
        return {REALIZABLE: SYS, UNREALIZABLE: ENV}.get(self.status)


@dataclass
class Schedule:
    mode: str = "guided"          # or "bfs"
    episode: int = 64
    growth: float = 2.0
    max_states: int | None = None
    time_limit: float | None = None
    perspective: int | None = None


class Explorer:
    def __init__(self, arena: Arena, partition: Partition, scorer: Scorer | None = None):
        self.arena = arena
        self.partition = partition
        self.scorer = scorer or LinearScorer()
        self.features = Features(arena.translation, partition)
        self._cost: dict[int, dict[int, float]] = {SYS: {}, ENV: {}}
        self._heaps: dict[int, list] = {SYS: [], ENV: []}
        self._counter = itertools.count()
        self._bfs: list[int] = []
        for p in (SYS, ENV):
            self._push(p, arena.initial, 0.0)
        self._bfs.append(arena.initial)

    def _push(self, player: int, v: int, cost: float):
        old = self._cost[player].get(v)
        if old is not None and old <= cost:
            return
        self._cost[player][v] = cost
        heapq.heappush(self._heaps[player], (cost, next(self._counter), v))

    # scoring of the choices at one expanded env vertex

    def _sys_ranks(self, s: int) -> dict[int, int]:
        arena = self.arena
        moves = arena.succ[s]
        fvs = [self.features.state(arena.data[arena.succ[pv][0]], SYS) for pv in moves]
        return self._rank(moves, fvs, SYS)

    def _env_ranks(self, e: int) -> dict[int, int]:
        arena = self.arena
        moves = arena.succ[e]
        fvs = []
        for s in moves:
            # two-step lookahead: the system answers with its best successor
            vals = [self.features.state(arena.data[arena.succ[pv][0]], ENV) for pv in arena.succ[s]]
            best = max(vals, key=lambda fv: fv.attention)
            fvs.append(FeatureVector(best.trueness, best.controllability, best.attention,
                                     max(fv.trueness for fv in vals)))
        return self._rank(moves, fvs, ENV)

    def _rank(self, moves, fvs, player) -> dict[int, int]:
        scores = [self.scorer.score(fv, player) for fv in fvs]
        order = rank_edges(scores, lambda i, j: self.scorer.compare(fvs[i], fvs[j], player))
        return {moves[i]: r for r, i in enumerate(order)}

    def expand(self, v: int) -> list[int]:
        arena = self.arena
        new = arena.expand(v)
        self._bfs.extend(new)
        env_rank = self._env_ranks(v)
        for s in arena.succ[v]:
            sys_rank = self._sys_ranks(s)
            for pv in arena.succ[s]:
                w = arena.succ[pv][0]
                if w in arena.expanded:
                    continue
                for p in (SYS, ENV):
                    base = self._cost[p].get(v, 0.0)
                    step = sys_rank[pv] if p == SYS else env_rank[s]
                    self._push(p, w, base + step + 1e-3)
        return new

    def next_vertex(self, player: int, mode: str) -> int | None:
        if mode == "bfs":
            while self._bfs:
                v = self._bfs.pop(0)
                if v not in self.arena.expanded:
                    return v
            return None
        heap = self._heaps[player]
        while heap:
            _, _, v = heapq.heappop(heap)
            if v not in self.arena.expanded:
                return v
        return None


def explore_loop(translation: Translation, partition: Partition, scorer: Scorer | None = None,
                 schedule: Schedule | None = None) -> ExplorationResult:
    schedule = schedule or Schedule()
    arena = Arena(translation, partition.ap_env, partition.ap_sys)
    ex = Explorer(arena, partition, scorer)
    perspective = schedule.perspective
    if perspective is None:
        perspective = choose_initial_perspective(translation.formula, partition)
    deadline = None if schedule.time_limit is None else time.monotonic() + schedule.time_limit
    budget = float(schedule.episode)
    episodes = probes = 0
    while True:
        episodes += 1
        n = 0
        while n < int(budget):
            if schedule.max_states is not None and len(arena.expanded) >= schedule.max_states:
                break
            if deadline is not None and time.monotonic() > deadline:
                break
            v = ex.next_vertex(perspective, schedule.mode)
            if v is None:
                break
            ex.expand(v)
            n += 1
        complete = not arena.frontier
        order = [LOST_FOR_SYS, LOST_FOR_ENV] if perspective == SYS else [LOST_FOR_ENV, LOST_FOR_SYS]
        for assumption in order:
            probes += 1
            verdict = arena.solve(assumption)
            w = verdict.winner[arena.initial]
            if assumption == LOST_FOR_SYS and w == SYS:
                return ExplorationResult(REALIZABLE, arena, verdict, len(arena.expanded), episodes, probes)
            if (assumption == LOST_FOR_ENV or complete) and w == ENV:
                return ExplorationResult(UNREALIZABLE, arena, verdict, len(arena.expanded), episodes, probes)
            if complete:
                # no frontier: both probes coincide and the game is determined
                return ExplorationResult(REALIZABLE, arena, verdict, len(arena.expanded), episodes, probes)
        out_of_states = schedule.max_states is not None and len(arena.expanded) >= schedule.max_states
        out_of_time = deadline is not None and time.monotonic() > deadline
        if out_of_states or out_of_time:
            return ExplorationResult(TIMEOUT, arena, None, len(arena.expanded), episodes, probes)
        budget *= schedule.growth
        perspective = ENV if perspective == SYS else SYS
