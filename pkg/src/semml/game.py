"""Parity games: arena construction from a DPA and Zielonka's algorithm.

Player 0 is the system and wins a play iff the minimal priority seen
infinitely often is even; player 1 is the environment.

The arena alternates three kinds of vertices.  An *env* vertex is a DPA
state; its edges are labelled with environment assignments and lead to a
*sys* vertex, which stands for the set of (successor, priority, system
guard) triples left after fixing the environment letter.  A sys edge goes
to a *priority* vertex ``(successor, priority)`` that carries the DPA edge
priority and moves on to the successor's env vertex.  Env and sys vertices
carry a neutral priority larger than every real one.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .bdd import FALSE, TRUE, Bdd

SYS, ENV = 0, 1
PLAYER_NAMES = {SYS: "sys", ENV: "env"}
NEUTRAL = 1 << 20


class NotWon(RuntimeError):
    """The requested player does not win the initial state."""


# --------------------------------------------------------------------------
# explicit solver


@dataclass
class Solution:
    """Winning regions and non-deterministic winning strategies.

    ``strategy[v]`` is the set of permitted successors of a vertex ``v``
    owned by the player that wins ``v``.
    """

    winner: list[int]
    strategy: dict[int, set[int]] = field(default_factory=dict)

    def region(self, player: int) -> set[int]:
        return {v for v, w in enumerate(self.winner) if w == player}


class ParityGame:
    """Explicit game: ``owner[v]``, ``prio[v]`` and successor lists."""

    def __init__(self, owner: Sequence[int], prio: Sequence[int], succ: Sequence[Iterable[int]]):
        self.owner = list(owner)
        self.prio = list(prio)
        self.succ = [list(dict.fromkeys(s)) for s in succ]
        self.pred: list[list[int]] = [[] for _ in self.owner]
        for v, ws in enumerate(self.succ):
            if not ws:
                raise ValueError(f"vertex {v} has no successor")
            for w in ws:
                self.pred[w].append(v)

    def __len__(self) -> int:
        return len(self.owner)

    def attractor(self, verts: set[int], target: set[int], player: int) -> dict[int, int]:
        """Attractor of ``target`` inside ``verts`` with insertion ranks."""
        rank = {v: 0 for v in target}
        counter = 1
        remaining = {}
        queue = deque(target)
        while queue:
            w = queue.popleft()
            for v in self.pred[w]:
                if v not in verts or v in rank:
                    continue
                if self.owner[v] == player:
                    rank[v] = counter
                else:
                    left = remaining.get(v)
                    if left is None:
                        left = sum(1 for x in self.succ[v] if x in verts)
                    left -= 1
                    remaining[v] = left
                    if left > 0:
                        continue
                    rank[v] = counter
                counter += 1
                queue.append(v)
        return rank

    def solve(self) -> Solution:
        win, strat = self._zielonka(set(range(len(self))))
        winner = [-1] * len(self)
        for p in (SYS, ENV):
            for v in win[p]:
                winner[v] = p
        return Solution(winner, strat)

    def _zielonka(self, verts: set[int]) -> tuple[tuple[set[int], set[int]], dict[int, set[int]]]:
        if not verts:
            return (set(), set()), {}
        p = min(self.prio[v] for v in verts)
        alpha = p % 2
        beta = 1 - alpha
        top = {v for v in verts if self.prio[v] == p}
        rank_a = self.attractor(verts, top, alpha)
        sub = verts - rank_a.keys()
        (w1, strat1) = self._zielonka(sub)
        if not w1[beta]:
            strat: dict[int, set[int]] = {}
            for v in verts:
                if self.owner[v] != alpha:
                    continue
                if v in top:
                    strat[v] = {w for w in self.succ[v] if w in verts}
                elif v in rank_a:
                    strat[v] = {w for w in self.succ[v] if rank_a.get(w, NEUTRAL) < rank_a[v]}
                else:
                    strat[v] = set(strat1.get(v, ())) | {w for w in self.succ[v] if w in rank_a}
            win = [set(), set()]
            win[alpha] = set(verts)
            return (win[0], win[1]), strat
        rank_b = self.attractor(verts, w1[beta], beta)
        (w2, strat2) = self._zielonka(verts - rank_b.keys())
        win = [set(), set()]
        win[alpha] = set(w2[alpha])
        win[beta] = set(w2[beta]) | set(rank_b)
        strat = {}
        for v in w2[alpha]:
            if self.owner[v] == alpha:
                strat[v] = set(strat2[v])
        for v in w1[beta]:
            if self.owner[v] == beta:
                strat[v] = set(strat1[v])
        for v in rank_b:
            if self.owner[v] == beta and v not in w1[beta]:
                strat[v] = {w for w in self.succ[v] if rank_b.get(w, NEUTRAL) < rank_b[v]}
        for v in w2[beta]:
            if self.owner[v] == beta:
                strat[v] = set(strat2[v]) | {w for w in self.succ[v] if w in rank_b}
        return (win[0], win[1]), strat


# --------------------------------------------------------------------------
# arena over a lazily explored DPA

ENV_V, SYS_V, PRIO_V = "env", "sys", "prio"
LOST_FOR_SYS, LOST_FOR_ENV = "frontier-lost-for-sys", "frontier-lost-for-env"


def split_edges(store: Bdd, edges, env_vars: Iterable[str]) -> list[tuple[int, frozenset]]:
    """Group environment letters by the system decision they leave.

    ``edges`` are ``(guard, successor, priority)`` triples.  Returns
    ``(env_guard, choices)`` pairs where ``choices`` is a frozenset of
    ``(successor, priority, sys_guard)``; env guards partition 2^AP_env.
    """
    env = set(env_vars)
    support: dict[int, set[str]] = {}

    def env_support(g: int) -> set[str]:
        if g not in support:
            support[g] = store.support(g) & env
        return support[g]

    groups: dict[frozenset, int] = {}

    def go(items, cube: int):
        names = set()
        for g, _, _ in items:
            names |= env_support(g)
        if not names:
            key = frozenset((t, p, g) for g, t, p in items)
            groups[key] = store.or_(groups.get(key, FALSE), cube)
            return
        v = min(names, key=store.index.__getitem__)
        lit = store.var(v)
        for value, branch in ((False, Bdd.not_(lit)), (True, lit)):
            sub = []
            for g, t, p in items:
                c = store.cofactor(g, v, value)
                if c != FALSE:
                    sub.append((c, t, p))
            go(sub, store.and_(cube, branch))

    go([e for e in edges if e[0] != FALSE], TRUE)
    return [(g, key) for key, g in groups.items()]


@dataclass
class Verdict:
    """Winners of arena vertices under a frontier assumption."""

    assumption: str
    winner: dict[int, int]
    strategy: dict[int, set[int]]

    def won_by(self, v: int) -> int | None:
        return self.winner.get(v)


class Arena:
    """Game arena grown on demand from a :class:`automata.Translation`."""

    def __init__(self, translation, ap_env: Sequence[str], ap_sys: Sequence[str]):
        self.translation = translation
        self.store: Bdd = translation.store
        self.ap_env = list(ap_env)
        self.ap_sys = list(ap_sys)
        for n in self.ap_env + self.ap_sys:
            self.store.add_var(n)
        self.kind: list[str] = []
        self.data: list[Hashable] = []
        self.prio: list[int] = []
        self.succ: list[list[int]] = []
        self.label: dict[tuple[int, int], int] = {}
        self._index: dict[tuple[str, Hashable], int] = {}
        self.expanded: set[int] = set()
        self.initial = self._vertex(ENV_V, translation.initial(), NEUTRAL)

    def _vertex(self, kind: str, data: Hashable, prio: int) -> int:
        key = (kind, data)
        v = self._index.get(key)
        if v is None:
            v = len(self.kind)
            self._index[key] = v
            self.kind.append(kind)
            self.data.append(data)
            self.prio.append(prio)
            self.succ.append([])
        return v

    def owner(self, v: int) -> int:
        return SYS if self.kind[v] == SYS_V else ENV

    def env_vertex(self, state) -> int | None:
        return self._index.get((ENV_V, state))

    @property
    def env_vertices(self) -> list[int]:
        return [v for v, k in enumerate(self.kind) if k == ENV_V]

    @property
    def frontier(self) -> list[int]:
        return [v for v in self.env_vertices if v not in self.expanded]

    def expand(self, v: int) -> list[int]:
        """Explore env vertex ``v``; returns newly created env vertices."""
        if v in self.expanded:
            return []
        self.expanded.add(v)
        before = len(self.kind)
        edges = self.translation.successors(self.data[v])
        for env_guard, choices in split_edges(self.store, edges, self.ap_env):
            s = self._vertex(SYS_V, choices, NEUTRAL)
            self._link(v, s, env_guard)
            if self.succ[s]:
                continue
            for t, p, g in sorted(choices, key=lambda c: (c[1], str(c[0]))):
                pv = self._vertex(PRIO_V, (t, p), p)
                self._link(s, pv, g)
                if not self.succ[pv]:
                    self._link(pv, self._vertex(ENV_V, t, NEUTRAL), TRUE)
        return [w for w in range(before, len(self.kind)) if self.kind[w] == ENV_V]

    def _link(self, v: int, w: int, guard: int):
        if w not in self.succ[v]:
            self.succ[v].append(w)
            self.label[(v, w)] = guard
        else:
            self.label[(v, w)] = self.store.or_(self.label[(v, w)], guard)

    def explore_all(self, limit: int | None = None):
        queue = deque([self.initial])
        while queue:
            v = queue.popleft()
            queue.extend(self.expand(v))
            if limit is not None and len(self.expanded) >= limit:
                break

    def game(self, assumption: str = LOST_FOR_SYS) -> ParityGame:
        n = len(self.kind)
        owner = [self.owner(v) for v in range(n)] + [SYS, ENV]
        prio = list(self.prio) + [0, 1]
        sink = n if assumption == LOST_FOR_ENV else n + 1
        succ = []
        for v in range(n):
            if self.kind[v] == ENV_V and v not in self.expanded:
                succ.append([sink])
            else:
                succ.append(self.succ[v])
        succ += [[n], [n + 1]]
        return ParityGame(owner, prio, succ)

    def solve(self, assumption: str = LOST_FOR_SYS) -> Verdict:
        sol = self.game(assumption).solve()
        n = len(self.kind)
        winner = {v: sol.winner[v] for v in range(n)}
        strategy = {v: {w for w in ws if w < n} for v, ws in sol.strategy.items() if v < n}
        return Verdict(assumption, winner, strategy)

    def to_dot(self) -> str:
        shapes = {ENV_V: "box", SYS_V: "diamond", PRIO_V: "circle"}
        lines = ["digraph arena {"]
        for v, k in enumerate(self.kind):
            label = self.prio[v] if k == PRIO_V else v
            extra = ", style=dashed" if k == ENV_V and v not in self.expanded else ""
            lines.append(f'  {v} [shape={shapes[k]}, label="{label}"{extra}];')
        for (v, w), g in self.label.items():
            lines.append(f'  {v} -> {w} [label="{self.store.to_expr(g)}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def solve(arena: Arena, assumption: str = LOST_FOR_SYS) -> Verdict:
    return arena.solve(assumption)


# --------------------------------------------------------------------------
# strategies


@dataclass
class StrategyGraph:
    """Non-deterministic strategy of ``player`` restricted to reachable states.

    ``transitions[q]`` lists ``(env_guard, sys_guard, successor)`` where the
    guards are BDDs over environment and system atoms respectively.  There
    is one row per (env move, successor); all rows with the same env guard
    stem from the same env move.  For a system strategy every env letter is
    covered and the sys guards are the permitted outputs; for an environment
    strategy the env guards are the permitted moves and every system reply
    to a move is covered.
    """

    player: int
    initial: int
    transitions: dict[int, list[tuple[int, int, int]]]
    labels: dict[int, object] = field(default_factory=dict)

    @property
    def states(self) -> list[int]:
        return list(self.transitions)


def extract_strategy(arena: Arena, verdict: Verdict, player: int) -> StrategyGraph:
    if verdict.winner.get(arena.initial) != player:
        raise NotWon(f"{PLAYER_NAMES[player]} does not win the initial state")
    store = arena.store
    trans: dict[int, list[tuple[int, int, int]]] = {}
    queue = deque([arena.initial])
    seen = {arena.initial}
    while queue:
        e = queue.popleft()
        if e not in arena.expanded:
            raise NotWon("strategy reaches an unexplored state")
        rows: list[tuple[int, int, int]] = []
        env_moves = verdict.strategy[e] if player == ENV else arena.succ[e]
        for s in sorted(env_moves):
            ge = arena.label[(e, s)]
            sys_moves = verdict.strategy[s] if player == SYS else arena.succ[s]
            per_target: dict[int, int] = {}
            for pv in sys_moves:
                t = arena.succ[pv][0]
                per_target[t] = store.or_(per_target.get(t, FALSE), arena.label[(s, pv)])
            for t, gs in sorted(per_target.items()):
                rows.append((ge, gs, t))
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        trans[e] = rows
    labels = {q: arena.data[q] for q in trans}
    return StrategyGraph(player, arena.initial, trans, labels)
