import itertools
import random

import pytest

from semml import ltl
from semml.automata import Translation
from semml.bdd import FALSE, TRUE, Bdd
from semml.check import check_mealy
from semml.corpus import CORPUS
from semml.game import (ENV, LOST_FOR_ENV, LOST_FOR_SYS, SYS, Arena, NotWon, ParityGame, extract_strategy,
                        split_edges)
from semml.mealy import bisim_reduce, determinize_successors, moore_from_strategy


def _bad_cycle(n, prio, edges, start, parity):
    """Is a cycle whose minimal priority has ``parity`` reachable from ``start``?"""
    seen, stack = {start}, [start]
    while stack:
        v = stack.pop()
        for w in edges(v):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    for u in seen:
        if prio[u] % 2 != parity:
            continue
        ok = {v for v in seen if prio[v] >= prio[u]}
        reach, stack = set(), [u]
        while stack:
            v = stack.pop()
            for w in edges(v):
                if w in ok and w not in reach:
                    reach.add(w)
                    stack.append(w)
        if u in reach:
            return True
    return False


def brute_winner(owner, prio, succ, player):
    """Vertices from which ``player`` wins with some positional strategy."""
    n = len(owner)
    mine = [v for v in range(n) if owner[v] == player]
    won = set()
    for choice in itertools.product(*(succ[v] for v in mine)):
        pick = dict(zip(mine, choice))

        def edges(v):
            return [pick[v]] if v in pick else succ[v]
        for v in range(n):
            if v not in won and not _bad_cycle(n, prio, edges, v, 1 - player):
                won.add(v)
    return won


def random_game(rng, n_max=8, p_max=4):
    n = rng.randint(1, n_max)
    owner = [rng.randint(0, 1) for _ in range(n)]
    prio = [rng.randint(0, p_max) for _ in range(n)]
    succ = [rng.sample(range(n), rng.randint(1, min(3, n))) for _ in range(n)]
    return owner, prio, succ


@pytest.mark.parametrize("seed", range(150))
def test_zielonka_matches_brute_force(seed):
    owner, prio, succ = random_game(random.Random(seed))
    sol = ParityGame(owner, prio, succ).solve()
    w0 = brute_winner(owner, prio, succ, SYS)
    w1 = brute_winner(owner, prio, succ, ENV)
    assert not (w0 & w1)
    assert w0 | w1 == set(range(len(owner)))
    assert sol.region(SYS) == w0
    assert sol.region(ENV) == w1


@pytest.mark.parametrize("seed", range(150))
def test_strategy_wins_against_everything(seed):
    owner, prio, succ = random_game(random.Random(1000 + seed))
    sol = ParityGame(owner, prio, succ).solve()
    for p in (SYS, ENV):
        region = sol.region(p)
        for v in region:
            if owner[v] == p:
                assert sol.strategy[v] and sol.strategy[v] <= set(succ[v]) & region

        def edges(v, p=p):
            return sorted(sol.strategy[v]) if owner[v] == p else succ[v]
        for v in region:
            assert not _bad_cycle(len(owner), prio, edges, v, 1 - p)


def test_attractor_ranks():
    g = ParityGame([SYS, ENV, ENV], [1, 1, 0], [[2], [0, 2], [2]])
    rank = g.attractor({0, 1, 2}, {2}, SYS)
    assert rank[2] == 0 and rank[0] < rank[1]
    assert set(g.attractor({0, 1, 2}, {0}, SYS)) == {0}


def test_vertex_without_successor_rejected():
    with pytest.raises(ValueError):
        ParityGame([SYS], [0], [[]])


def test_split_edges_partitions_env_letters():
    store = Bdd(["r", "g"])
    r, g = store.var("r"), store.var("g")
    edges = [(store.and_(r, g), "A", 0), (store.and_(r, Bdd.not_(g)), "B", 1), (Bdd.not_(r), "A", 1)]
    groups = split_edges(store, edges, ["r"])
    assert len(groups) == 2
    guards = [e for e, _ in groups]
    assert store.or_(guards[0], guards[1]) == TRUE
    assert store.and_(guards[0], guards[1]) == FALSE
    by = {store.to_expr(e): c for e, c in groups}
    assert by["r"] == frozenset({("A", 0, g), ("B", 1, Bdd.not_(g))})
    assert by["!r"] == frozenset({("A", 1, TRUE)})


def test_split_edges_merges_identical_choices():
    store = Bdd(["a", "b", "x"])
    x = store.var("x")
    edges = [(x, "S", 0), (Bdd.not_(x), "T", 1)]
    groups = split_edges(store, edges, ["a", "b"])
    assert len(groups) == 1 and groups[0][0] == TRUE


def _arena(text, ins, outs):
    t = Translation(text, order=list(ins) + list(outs))
    a = Arena(t, ins, outs)
    a.explore_all()
    return t, a


def test_delay_won_by_sys():
    t, a = _arena("G (r <-> X g)", ["r"], ["g"])
    v = a.solve()
    assert v.won_by(a.initial) == SYS
    assert a.solve(LOST_FOR_ENV).won_by(a.initial) == SYS
    s = extract_strategy(a, v, SYS)
    m = determinize_successors(s, t.store, ["r"], ["g"])
    assert check_mealy(m, partition=ltl.Partition.of(["r"], ["g"]), translation=t).passed
    with pytest.raises(NotWon):
        extract_strategy(a, v, ENV)


def test_env_liveness_won_by_env():
    t, a = _arena("G F a", ["a"], ["b"])
    v = a.solve()
    assert v.won_by(a.initial) == ENV
    s = extract_strategy(a, v, ENV)
    m = bisim_reduce(moore_from_strategy(s, t.store, ["a"], ["b"]))
    rep = check_mealy(m, partition=ltl.Partition.of(["a"], ["b"]), translation=t, role="env")
    assert rep.passed
    with pytest.raises(NotWon):
        extract_strategy(a, v, SYS)


def test_unexplored_frontier_assumptions():
    t = Translation("G (r <-> X g)", order=["r", "g"])
    a = Arena(t, ["r"], ["g"])
    assert a.frontier == [a.initial]
    assert a.solve(LOST_FOR_SYS).won_by(a.initial) == ENV
    assert a.solve(LOST_FOR_ENV).won_by(a.initial) == SYS
    with pytest.raises(NotWon):
        extract_strategy(a, a.solve(LOST_FOR_ENV), SYS)


def test_arena_dot():
    _, a = _arena("G (r <-> X g)", ["r"], ["g"])
    dot = a.to_dot()
    assert dot.startswith("digraph arena {") and "shape=box" in dot


@pytest.mark.parametrize("inst", CORPUS, ids=lambda i: i.name)
def test_partial_verdicts_are_monotone(inst):
    """Sys wins under a pessimistic frontier only if it wins the full game; dually for env."""
    full = _arena(inst.formula, inst.ins, inst.outs)[1].solve().won_by(0)
    expected = SYS if inst.expected == "realizable" else ENV
    assert full == expected
    for limit in (1, 2, 3, 5):
        t = Translation(inst.formula, order=list(inst.ins) + list(inst.outs))
        a = Arena(t, inst.ins, inst.outs)
        a.explore_all(limit)
        if a.solve(LOST_FOR_SYS).won_by(a.initial) == SYS:
            assert full == SYS
        if a.solve(LOST_FOR_ENV).won_by(a.initial) == ENV:
            assert full == ENV
