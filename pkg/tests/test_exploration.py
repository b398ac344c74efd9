import functools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import formulas
from semml import ltl
from semml.automata import Translation
from semml.corpus import CORPUS
from semml.exploration import (DEFAULT_WEIGHTS, REALIZABLE, TIMEOUT, UNREALIZABLE, FeatureVector, Features,
                               LinearScorer, RandomScorer, Schedule, attention_reduce, choose_initial_perspective,
                               controllability, controller, explore_loop, label_formula, rank_edges, trueness)
from semml.game import ENV, SYS

P = ltl.parse
RG = ltl.Partition.of(["r"], ["g"])


def test_trueness_constants():
    assert trueness(ltl.tt) == 1.0
    assert trueness(ltl.ff) == 0.0
    assert trueness(P("a")) == 0.5
    assert trueness(P("!a")) == 0.5


def test_trueness_boolean_combinations():
    a = P("a")
    # built without simplification, so the probabilistic sum is visible
    taut = ltl._intern(ltl.OR, None, (a, ltl.neg(a)))
    assert trueness(taut) == pytest.approx(0.75)
    assert trueness(P("a & b")) == pytest.approx(0.25)
    assert trueness(P("a & b & c")) == pytest.approx(0.125)


def test_trueness_temporal():
    assert trueness(P("X a")) == 0.5
    assert trueness(P("F a")) == 0.5
    assert trueness(P("G a")) == 0.5
    assert trueness(P("G (a & b)")) == pytest.approx(0.25)
    assert trueness(P("F (a | b)")) == pytest.approx(0.75)
    assert trueness(P("a U (b | c)")) == pytest.approx(0.75)


@given(formulas())
def test_trueness_in_unit_interval(f):
    assert 0.0 <= trueness(f) <= 1.0


def test_controllability():
    assert controllability(P("g"), RG, SYS) == 1.0
    assert controllability(P("g"), RG, ENV) == 0.0
    assert controllability(P("r & X g"), RG, SYS) == 0.5
    assert controllability(ltl.tt, RG, SYS) == 0.5
    assert controller(P("G F g"), RG) == SYS
    assert controller(P("G F r"), RG) == ENV
    # a tie is not a majority
    assert controller(P("G (r -> F g)"), RG) == ENV


def test_attention_reduce_resolves_opponent_leaves():
    t = Translation("G F r -> G F g", order=["r", "g"])
    s = t.initial()
    assert ltl.to_string(label_formula(t, s)) == "G F g | F G !r"
    assert attention_reduce(t, s, SYS, RG) is P("G F g")
    assert attention_reduce(t, s, ENV, RG) is ltl.tt


def test_features_memoized_and_bounded():
    t = Translation("G F r -> G F g", order=["r", "g"])
    fs = Features(t, RG)
    a = fs.state(t.initial(), SYS)
    assert fs.state(t.initial(), SYS) is a
    for v in (a.trueness, a.controllability, a.attention):
        assert 0.0 <= v <= 1.0


def test_rank_single_edge():
    assert rank_edges([0.3]) == [0]


def test_rank_empty_rejected():
    with pytest.raises(ValueError):
        rank_edges([])


def test_rank_twenty_consistent_edges():
    scores = [((i * 7) % 20) / 20 for i in range(20)]
    assert rank_edges(scores) == sorted(range(20), key=lambda i: -scores[i])


def test_rank_tournament_only_reorders_top():
    scores = [float(20 - i) for i in range(20)]

    def inverted(i, j):
        return (scores[i] < scores[j]) - (scores[i] > scores[j])
    order = rank_edges(scores, compare=inverted)
    assert order[:8] == list(range(7, -1, -1))
    assert order[8:] == list(range(8, 20))


def test_rank_small_sets_play_every_pair():
    scores = [1.0, 2.0, 3.0]

    def inverted(i, j):
        return (scores[i] < scores[j]) - (scores[i] > scores[j])
    assert rank_edges(scores, compare=inverted) == [0, 1, 2]


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=40),
       st.floats(0.01, 50), st.floats(-50, 50))
def test_rank_affine_invariant(scores, a, b):
    scores = [round(s, 3) for s in scores]
    moved = [a * s + b for s in scores]
    # exact ties may be broken differently after rounding noise; compare on distinct scores
    if len(set(moved)) == len(set(scores)) and all(
            (x < y) == (u < v) for x, u in zip(scores, moved) for y, v in zip(scores, moved)):
        assert rank_edges(scores) == rank_edges(moved)


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=40))
def test_rank_is_permutation(scores):
    assert sorted(rank_edges(scores)) == list(range(len(scores)))


def test_linear_scorer_orders_players_oppositely():
    hi = FeatureVector(0.9, 0.5, 0.9)
    lo = FeatureVector(0.1, 0.5, 0.1)
    s = LinearScorer()
    assert s.compare(hi, lo, SYS) > 0
    assert s.compare(hi, lo, ENV) < 0
    assert s.compare(hi, hi, SYS) == 0
    assert set(DEFAULT_WEIGHTS) == set(s.weights)
    assert LinearScorer({"trueness": 2.0}).weights["trueness"] == 2.0


def test_random_scorer_is_pure():
    fv = FeatureVector(0.5, 0.5, 0.5)
    assert RandomScorer(3).score(fv, SYS) == RandomScorer(3).score(fv, SYS)
    assert 0.0 <= RandomScorer(3).score(fv, ENV) < 1.0


@pytest.mark.parametrize("text,expected", [
    ("G F g", SYS),
    ("G F r", ENV),
    ("G F r -> G F g", ENV),
    ("G (r <-> X g)", ENV),
])
def test_initial_perspective(text, expected):
    assert choose_initial_perspective(P(text), RG) == expected


SCHEDULES = {
    "default": (None, Schedule()),
    "bfs": (None, Schedule(mode="bfs")),
    "tiny-episodes": (None, Schedule(episode=1, growth=1.5)),
    "sys-first": (None, Schedule(episode=2, perspective=SYS)),
    "random-0": (RandomScorer(0), Schedule(episode=2)),
    "random-1": (RandomScorer(1), Schedule(episode=3)),
}


@functools.lru_cache(maxsize=None)
def _expected(name):
    return {i.name: i.expected for i in CORPUS}[name]


@pytest.mark.parametrize("inst", CORPUS, ids=lambda i: i.name)
@pytest.mark.parametrize("sched", sorted(SCHEDULES))
def test_verdict_independent_of_guidance(inst, sched):
    scorer, schedule = SCHEDULES[sched]
    f = P(inst.formula)
    t = Translation(f, order=list(inst.ins) + list(inst.outs))
    r = explore_loop(t, ltl.Partition.of(inst.ins, inst.outs), scorer=scorer, schedule=schedule)
    assert r.status == _expected(inst.name)
    assert r.winner == (SYS if r.status == REALIZABLE else ENV)


def test_state_budget_reports_timeout():
    t = Translation("G (r -> X X X g)", order=["r", "g"])
    r = explore_loop(t, RG, schedule=Schedule(episode=1, max_states=1, growth=1.0))
    assert r.status == TIMEOUT and r.winner is None


def test_unrealizable_found_for_env_liveness():
    t = Translation("G F r", order=["r", "g"])
    assert explore_loop(t, RG).status == UNREALIZABLE
