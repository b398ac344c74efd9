import pytest

from oracles import holds, lassos
from semml import ltl
from semml.automata import (Translation, UnclassifiedLeaf, build_subautomaton, dpa_successors, to_dot, to_hoa,
                            zielonka_tree)
from semml.bdd import FALSE, TRUE, Bdd

P = ltl.parse
la = ltl.leaf_atom
WORKED = "F a & G F b & F G c"


def _sub(text):
    nf = ltl.normalize(P(text))
    return build_subautomaton(nf.leaves[0])


def _edges(store, aut, state):
    return {store.to_expr(g): (str(t), sig) for g, t, sig in aut.successors(state, store)}


def test_subautomaton_eventually():
    store = Bdd(["a"])
    aut = _sub("F a")
    states = aut.explore(store)
    assert len(states) == 2
    e = _edges(store, aut, aut.initial())
    assert e["!a"] == (str(aut.initial()), False)
    assert aut.step(aut.initial(), {"a": True})[0].accepting_sink


def test_subautomaton_recurrence_single_state():
    store = Bdd(["b"])
    aut = _sub("G F b")
    states = aut.explore(store)
    assert len(states) == 1
    s = aut.initial()
    assert s.master is P("G F b") and s.breakpoint is P("F b")
    e = _edges(store, aut, s)
    assert e["b"][1] is True and e["!b"][1] is False


def test_subautomaton_safety():
    store = Bdd(["a"])
    aut = _sub("G a")
    s = aut.initial()
    assert s.breakpoint is None
    assert aut.step(s, {"a": True})[0] == s
    assert aut.step(s, {"a": False})[0].rejecting_sink


def test_unclassified_leaf():
    with pytest.raises(UnclassifiedLeaf):
        Translation("G (a U (b R F c))")


def test_dela_worked_example():
    t = Translation(WORKED, order=["a", "b", "c"])
    d0 = t.initial_dela()
    d1, colors = t.dela_step(d0, {"a": True, "b": False, "c": False})
    assert d1.combination is ltl.conj(la(1), ltl.neg(la(2)))
    assert d1.subs[0] is None
    # on q1, !b & !c only the FG c automaton (color 2) signals; b adds color 1
    assert t.dela_step(d1, {"b": False, "c": False})[1] == frozenset({2})
    assert t.dela_step(d1, {"b": True, "c": False})[1] == frozenset({1, 2})


def test_dela_unit_product():
    t = Translation("G F b", order=["b"])
    d = t.initial_dela()
    edges = t.dela_successors(d)
    assert len(edges) == 2
    assert {t.store.to_expr(g): sorted(c) for g, _, c in edges} == {"b": [0], "!b": []}


def test_conditional_zielonka_chain():
    z = zielonka_tree(ltl.conj(la(1), ltl.neg(la(2))))
    assert len(z.nodes) == 3 and len(z.leaves) == 1
    leaf = z.leaves[0]
    assert [z.step(leaf, cs)[1] for cs in ({2}, {1}, set())] == [1, 2, 3]


def test_regular_zielonka_two_leaves():
    t = Translation(WORKED, order=["a", "b", "c"])
    regular = zielonka_tree(t.regular_condition(t.initial_dela()))
    assert len(regular.leaves) == 2
    assert len(t.tree(t.initial_dela()).leaves) == 1


def test_buchi_tree():
    z = zielonka_tree(la(0))
    assert z.root.colors == frozenset({0}) and z.root.accepting
    assert len(z.nodes) == 2 and z.nodes[1].colors == frozenset()


def test_worked_example_dpa():
    t = Translation(WORKED, order=["a", "b", "c"])
    states = t.explore()
    assert len(states) == 2
    q0 = t.initial()
    q1 = next(s for s in states if s != q0)
    loops = {t.store.to_expr(g): p for g, s, p in t.successors(q1) if s == q1}
    assert loops == {"!c": 1, "b & c": 2, "!b & c": 3}
    assert len(t.successors(q1)) == 3


def test_sink_priority():
    t = Translation("a", order=["a"])
    sink, _ = t.step(t.initial(), {"a": True})
    assert t.is_accepting_sink(sink)
    assert [(g, s, p) for g, s, p in t.successors(sink)] == [(TRUE, sink, 0)]


@pytest.mark.parametrize("text", [WORKED, "G (r <-> X g)", "G (r -> F g) & G (!g | !X g)", "a U b | G F c"])
def test_determinism_totality_locality(text):
    t = Translation(text)
    states = t.explore()
    t2 = Translation(text, order=list(reversed(sorted(ltl.atoms(P(text))))))
    for s, edges in states.items():
        guards = [g for g, _, _ in edges]
        acc = FALSE
        for i, g in enumerate(guards):
            for h in guards[i + 1:]:
                assert t.store.and_(g, h) == FALSE
            acc = t.store.or_(acc, g)
        assert acc == TRUE
        # a fresh translation with another variable order gives the same labelled edges
        other = {(str(x), p, t2.store.to_expr(g)) for g, x, p in dpa_successors(t2, s)}
        mine = {(str(x), p, t.store.to_expr(g)) for g, x, p in edges}
        assert {(a, b) for a, b, _ in other} == {(a, b) for a, b, _ in mine}


SMALL = ["F a & G F b & F G c", "G (a -> X b)", "a U b", "G F a | F G b", "F G (a | X b)",
         "G (a -> F b) & G F !a", "X X a W b", "(a R b) & F a", "G F (a <-> X a)", "F (a & X G !b)"]


@pytest.mark.parametrize("text", SMALL)
def test_language_against_semantics(text):
    f = P(text)
    t = Translation(f)
    names = sorted(ltl.atoms(f))
    depth = 5 if len(names) <= 2 else 4
    for stem, loop in lassos(names, depth):
        assert t.accepts(stem, loop) == holds(stem, loop, f), (stem, loop)


def test_conditional_never_larger():
    for text in SMALL:
        t = Translation(text)
        for s in t.explore():
            assert len(t.tree(s.dela).leaves) <= len(zielonka_tree(t.regular_condition(s.dela)).leaves)


def test_dumps():
    t = Translation("G (r <-> X g)", order=["r", "g"])
    hoa = to_hoa(t)
    assert hoa.startswith("HOA: v1") and "acc-name: parity min even" in hoa
    assert to_dot(t).startswith("digraph")
