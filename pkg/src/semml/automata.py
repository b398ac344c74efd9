"""On-demand translation of LTL to deterministic parity automata.

A formula is split by :func:`ltl.normalize` into a positive combination of
safety, co-safety and Büchi leaves.  Each leaf gets a deterministic Büchi
automaton whose states are LTL formulas (a master formula and, for Büchi
leaves, a breakpoint).  Their synchronous product is an Emerson-Lei
automaton (DELA), turned into a parity automaton by running a Zielonka
automaton for the acceptance condition alongside.  The condition is first
simplified using what the current DELA state already knows (conditional
Zielonka tree).

States are plain values built from interned formulas, so successors are a
pure function of the state.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from . import ltl
from .bdd import FALSE, TRUE, Bdd
from .ltl import Formula, LtlClass

SAFETY, COSAFETY, BUCHI = LtlClass.SAFETY, LtlClass.COSAFETY, LtlClass.BUCHI


class UnclassifiedLeaf(ValueError):
    """A leaf formula is not in one of the supported classes."""


# --------------------------------------------------------------------------
# propositional canonicalization


class Canonizer:
    """Map formulas to a representative of their propositional class.

    Literals and temporal subformulas become BDD variables; two formulas
    with the same BDD get the same (first seen) representative.  This keeps
    the number of progression states finite.
    """

    def __init__(self):
        self.bdd = Bdd()
        self._reps: dict[int, Formula] = {}
        self._memo: dict[int, Formula] = {}
        self._ref: dict[int, int] = {}
        self._lock = threading.Lock()

    def _to_bdd(self, f: Formula) -> int:
        r = self._ref.get(f.id)
        if r is not None:
            return r
        k = f.kind
        if f is ltl.tt:
            r = TRUE
        elif f is ltl.ff:
            r = FALSE
        elif k == ltl.AP:
            r = self._var(f.name)
        elif k == ltl.NAP:
            r = Bdd.not_(self._var(f.name))
        elif k == ltl.AND:
            r = self.bdd.conj(self._to_bdd(c) for c in f.children)
        elif k == ltl.OR:
            r = self.bdd.disj(self._to_bdd(c) for c in f.children)
        else:
            r = self._var(f"#{f.id}")
        self._ref[f.id] = r
        return r

    def _var(self, name: str) -> int:
        if name not in self.bdd.index:
            self.bdd.add_var(name)
        return self.bdd.var(name)

    def __call__(self, f: Formula) -> Formula:
        r = self._memo.get(f.id)
        if r is not None:
            return r
        with self._lock:
            ref = self._to_bdd(f)
            if ref == TRUE:
                r = ltl.tt
            elif ref == FALSE:
                r = ltl.ff
            else:
                r = self._reps.setdefault(ref, f)
            self._memo[f.id] = r
        return r


def obligation(f: Formula) -> Formula:
    """Co-safety consequence of a Büchi formula used to seed the breakpoint."""
    r = _ob_cache.get(f.id)
    if r is not None:
        return r
    k = f.kind
    if ltl.is_cosafety(f):
        r = f
    elif k in (ltl.AND, ltl.OR, ltl.NEXT):
        r = ltl.rebuild(f, (obligation(c) for c in f.children))
    elif k in (ltl.GLOB, ltl.RELEASE):
        r = obligation(f.right)
    elif k == ltl.WUNTIL:
        r = ltl.disj(obligation(f.left), obligation(f.right))
    elif k == ltl.UNTIL:
        r = ltl.eventually(f.right)
    else:
        raise UnclassifiedLeaf(f"no obligation for {f}")
    _ob_cache[f.id] = r
    return r


_ob_cache: dict[int, Formula] = {}


# --------------------------------------------------------------------------
# sub-automata


@dataclass(frozen=True)
class SubState:
    master: Formula
    breakpoint: Formula | None
    cls: LtlClass

    def __hash__(self) -> int:
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((self.master, self.breakpoint, self.cls,))
            object.__setattr__(self, "_h", h)
        return h

    def __post_init__(self):
        if self.cls in (SAFETY, COSAFETY) and self.breakpoint is not None:
            raise ValueError("safety/co-safety states carry no breakpoint")

    @property
    def accepting_sink(self) -> bool:
        return self.master is ltl.tt

    @property
    def rejecting_sink(self) -> bool:
        return self.master is ltl.ff

    @property
    def is_sink(self) -> bool:
        return self.master.is_constant

    def formulas(self) -> tuple[Formula, ...]:
        if self.breakpoint is None:
            return (self.master,)
        return (self.master, self.breakpoint)

    def __str__(self) -> str:
        b = "-" if self.breakpoint is None else str(self.breakpoint)
        return f"[M: {self.master} | B: {b}]"


class SubAutomaton:
    """Deterministic Büchi automaton for one classified leaf."""

    def __init__(self, formula: Formula, cls: LtlClass, canon: Canonizer | None = None):
        if cls not in (SAFETY, COSAFETY, BUCHI):
            raise UnclassifiedLeaf(f"unsupported leaf class {cls} for {formula}")
        self.formula = formula
        self.cls = cls
        self.canon = canon or Canonizer()

    def initial(self) -> SubState:
        return self.make(self.canon(self.formula))

    def make(self, master: Formula, breakpoint: Formula | None = None) -> SubState:
        if self.cls is BUCHI and not master.is_constant:
            if breakpoint is None:
                breakpoint = self.canon(obligation(master))
            return SubState(master, breakpoint, BUCHI)
        return SubState(master, None, self.cls)

    def advance(self, s: SubState, stepped: Sequence[Formula]) -> tuple[SubState, bool]:
        """Successor and Büchi signal given the progressed label formulas."""
        if s.is_sink:
            return s, s.accepting_sink
        m = self.canon(stepped[0])
        if self.cls is SAFETY:
            return self.make(m), m is not ltl.ff
        if self.cls is COSAFETY:
            return self.make(m), m is ltl.tt
        if m.is_constant:
            return self.make(m), m is ltl.tt
        b = self.canon(stepped[1])
        if b is ltl.ff:
            # the master implies its obligation, so the word is lost
            return self.make(ltl.ff), False
        if b is ltl.tt:
            return self.make(m, self.canon(obligation(m))), True
        return self.make(m, b), False

    def step(self, s: SubState, letter: Mapping[str, bool]) -> tuple[SubState, bool]:
        return self.advance(s, [ltl.after(f, letter) for f in s.formulas()])

    def successors(self, s: SubState, store: Bdd) -> list[tuple[int, SubState, bool]]:
        """Edges ``(guard, successor, signal)`` with guards over ``store``."""
        out: dict[tuple[SubState, bool], int] = {}
        for guard, stepped in shannon(store, [ltl.unfold(f) for f in s.formulas()]):
            key = self.advance(s, stepped)
            out[key] = store.or_(out.get(key, FALSE), guard)
        return [(g, t, sig) for (t, sig), g in out.items()]

    def explore(self, store: Bdd) -> dict[SubState, list[tuple[int, SubState, bool]]]:
        init = self.initial()
        seen = {init: None}
        queue = [init]
        graph = {}
        while queue:
            s = queue.pop()
            edges = self.successors(s, store)
            graph[s] = edges
            for _, t, _ in edges:
                if t not in seen:
                    seen[t] = None
                    queue.append(t)
        return graph


def build_subautomaton(leaf: ltl.Leaf, canon: Canonizer | None = None) -> SubAutomaton:
    return SubAutomaton(leaf.formula, leaf.cls, canon)


def shannon(store: Bdd, unfolded: Sequence[Formula]) -> Iterator[tuple[int, list[Formula]]]:
    """Split 2^AP by the present-time atoms of ``unfolded``.

    Yields ``(guard, stepped)`` pairs where the guards partition the
    universe and ``stepped`` are the formulas after advancing time.  Atoms
    are decided in store order; atoms unknown to the store are appended.
    """
    present = set()
    for u in unfolded:
        present |= ltl.present_atoms(u)
    for name in sorted(present):
        if name not in store.index:
            store.add_var(name)
    order = {n: store.index[n] for n in present}

    def go(us: list[Formula], guard: int):
        names = set()
        for u in us:
            names |= ltl.present_atoms(u)
        if not names:
            yield guard, [ltl.step(u) for u in us]
            return
        v = min(names, key=order.__getitem__)
        lit = store.var(v)
        for value, g in ((False, Bdd.not_(lit)), (True, lit)):
            yield from go([ltl.cofactor(u, v, value) for u in us], store.and_(guard, g))

    yield from go(list(unfolded), TRUE)


# --------------------------------------------------------------------------
# Zielonka trees


def _holds(cond: Formula, colors: frozenset[int]) -> bool:
    return ltl.assign(cond, {ltl.leaf_atom(i).name: i in colors for i in condition_colors(cond)}) is ltl.tt


def condition_colors(cond: Formula) -> set[int]:
    return {ltl.leaf_index(ltl.atom(n)) for n in ltl.atoms(cond)}


@dataclass
class ZielonkaNode:
    colors: frozenset[int]
    accepting: bool
    depth: int
    parent: int | None
    children: list[int] = field(default_factory=list)


class ZielonkaTree:
    """Alternating tree of color sets for an Emerson-Lei condition.

    ``cond`` is a positive formula over ``@i`` (``inf(i)``) and ``!@i``
    (``fin(i)``).  The children of a node are the maximal subsets of its
    colors with the opposite verdict, ordered by their sorted color lists.
    """

    def __init__(self, cond: Formula):
        self.condition = cond
        self.nodes: list[ZielonkaNode] = []
        top = frozenset(condition_colors(cond))
        self._build(top, None, 0)
        self.leaves = [i for i, n in enumerate(self.nodes) if not n.children]
        self.offset = 0 if self.nodes[0].accepting else 1

    def _build(self, colors: frozenset[int], parent: int | None, depth: int) -> int:
        acc = _holds(self.condition, colors)
        idx = len(self.nodes)
        self.nodes.append(ZielonkaNode(colors, acc, depth, parent))
        for sub in _maximal_flips(self.condition, colors, acc):
            self.nodes[idx].children.append(self._build(sub, idx, depth + 1))
        return idx

    @property
    def root(self) -> ZielonkaNode:
        return self.nodes[0]

    @property
    def height(self) -> int:
        return max(n.depth for n in self.nodes)

    def leftmost_leaf(self, node: int = 0) -> int:
        while self.nodes[node].children:
            node = self.nodes[node].children[0]
        return node

    def path(self, leaf: int) -> list[int]:
        out = [leaf]
        while self.nodes[out[-1]].parent is not None:
            out.append(self.nodes[out[-1]].parent)
        return out[::-1]

    def step(self, leaf: int, colors: Iterable[int]) -> tuple[int, int]:
        """Zielonka automaton move: ``(next leaf, priority)``."""
        s = frozenset(colors) & self.root.colors
        path = self.path(leaf)
        anchor = 0
        for pos, n in enumerate(path):
            if s <= self.nodes[n].colors:
                anchor = pos
            else:
                break
        node = path[anchor]
        prio = self.nodes[node].depth + self.offset
        if anchor == len(path) - 1:
            return leaf, prio
        kids = self.nodes[node].children
        nxt = kids[(kids.index(path[anchor + 1]) + 1) % len(kids)]
        return self.leftmost_leaf(nxt), prio

    def describe(self) -> str:
        lines = []
        for i, n in enumerate(self.nodes):
            tag = "acc" if n.accepting else "rej"
            cs = ",".join(str(c) for c in sorted(n.colors)) or "-"
            lines.append(f"{'  ' * n.depth}{i}: {{{cs}}} {tag} prio {n.depth + self.offset}")
        return "\n".join(lines)


def _maximal_flips(cond: Formula, colors: frozenset[int], acc: bool) -> list[frozenset[int]]:
    found: list[frozenset[int]] = []
    ordered = sorted(colors)
    for k in range(len(ordered) - 1, -1, -1):
        for sub in itertools.combinations(ordered, k):
            fs = frozenset(sub)
            if any(fs < g for g in found):
                continue
            if _holds(cond, fs) != acc:
                found.append(fs)
    return sorted(found, key=lambda g: sorted(g))


_tree_cache: dict[int, ZielonkaTree] = {}
_tree_lock = threading.Lock()


def zielonka_tree(cond: Formula) -> ZielonkaTree:
    t = _tree_cache.get(cond.id)
    if t is None:
        with _tree_lock:
            t = _tree_cache.setdefault(cond.id, ZielonkaTree(cond))
    return t


# --------------------------------------------------------------------------
# Emerson-Lei product and parity automaton


@dataclass(frozen=True)
class DelaState:
    combination: Formula
    subs: tuple[SubState | None, ...]

    def __hash__(self) -> int:
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((self.combination, self.subs,))
            object.__setattr__(self, "_h", h)
        return h

    def live(self) -> list[int]:
        return [i for i, s in enumerate(self.subs) if s is not None]

    def __str__(self) -> str:
        parts = ", ".join(f"{i}{s}" for i, s in enumerate(self.subs) if s is not None)
        return f"{self.combination} :: {parts}" if parts else str(self.combination)


@dataclass(frozen=True)
class DpaState:
    dela: DelaState
    leaf: int

    def __hash__(self) -> int:
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((self.dela, self.leaf,))
            object.__setattr__(self, "_h", h)
        return h

    def __str__(self) -> str:
        return f"{self.dela} @ l{self.leaf}"


class Translation:
    """Lazy DPA for an LTL formula.

    ``order`` fixes the BDD variable order of edge guards (environment
    atoms should come first).  A shared ``store`` may be passed so that
    guards live in the caller's BDD.
    """

    def __init__(self, formula: Formula | str, order: Sequence[str] | None = None,
                 store: Bdd | None = None, conditional: bool = True):
        if isinstance(formula, str):
            formula = ltl.parse(formula)
        self.formula = formula
        try:
            self.normal_form = ltl.normalize(formula)
        except ltl.Unsupported as e:
            raise UnclassifiedLeaf(str(e)) from e
        self.store = store if store is not None else Bdd()
        for name in order if order is not None else sorted(ltl.atoms(formula)):
            self.store.add_var(name)
        for name in sorted(ltl.atoms(formula)):
            self.store.add_var(name)
        self.conditional = conditional
        self.canon = Canonizer()
        self.subautomata = [build_subautomaton(leaf, self.canon) for leaf in self.normal_form.leaves]
        self._dpa_cache: dict[DpaState, list[tuple[int, DpaState, int]]] = {}
        self._dela_cache: dict[DelaState, list[tuple[int, DelaState, frozenset[int]]]] = {}
        self._step_cache: dict[tuple[DelaState, tuple[bool, ...]], tuple[DelaState, frozenset[int]]] = {}
        self._cond_cache: dict[DelaState, Formula] = {}
        self._move_cache: dict[tuple[DpaState, DelaState, frozenset[int]], tuple[DpaState, int]] = {}
        self._initial: DpaState | None = None
        self._atoms = sorted(ltl.atoms(formula))
        self._lock = threading.Lock()

    # -- DELA --------------------------------------------------------------

    def _settle(self, comb: Formula, subs: list[SubState | None]) -> DelaState:
        values = {}
        for i, s in enumerate(subs):
            if s is not None and s.is_sink:
                values[ltl.leaf_atom(i).name] = s.accepting_sink
        if values:
            comb = ltl.assign(comb, values)
        used = condition_colors(comb)
        return DelaState(comb, tuple(s if i in used else None for i, s in enumerate(subs)))

    def initial_dela(self) -> DelaState:
        return self._settle(self.normal_form.combination, [a.initial() for a in self.subautomata])

    def _advance(self, d: DelaState, stepped: Sequence[Formula]) -> tuple[DelaState, frozenset[int]]:
        subs: list[SubState | None] = list(d.subs)
        colors = set()
        pos = 0
        for i in d.live():
            s = d.subs[i]
            n = len(s.formulas())
            t, sig = self.subautomata[i].advance(s, stepped[pos:pos + n])
            pos += n
            subs[i] = t
            if sig:
                colors.add(i)
        return self._settle(d.combination, subs), frozenset(colors)

    def _labels(self, d: DelaState) -> list[Formula]:
        return [f for i in d.live() for f in d.subs[i].formulas()]

    def dela_successors(self, d: DelaState) -> list[tuple[int, DelaState, frozenset[int]]]:
        r = self._dela_cache.get(d)
        if r is not None:
            return r
        out: dict[tuple[DelaState, frozenset[int]], int] = {}
        with self._lock:
            for guard, stepped in shannon(self.store, [ltl.unfold(f) for f in self._labels(d)]):
                key = self._advance(d, stepped)
                out[key] = self.store.or_(out.get(key, FALSE), guard)
        r = [(g, t, cs) for (t, cs), g in out.items()]
        self._dela_cache[d] = r
        return r

    def dela_step(self, d: DelaState, letter: Mapping[str, bool]) -> tuple[DelaState, frozenset[int]]:
        """Successor on one letter by progression (independent of the guards)."""
        bits = tuple(bool(letter.get(n, False)) for n in self._atoms)
        key = (d, bits)
        r = self._step_cache.get(key)
        if r is None:
            full = dict(zip(self._atoms, bits))
            r = self._advance(d, [ltl.after(f, full) for f in self._labels(d)])
            self._step_cache[key] = r
        return r

    # -- acceptance ---------------------------------------------------------

    def condition(self, d: DelaState) -> Formula:
        """Acceptance condition of ``d`` as a positive formula over colors."""
        if not self.conditional:
            return self.regular_condition(d)
        r = self._cond_cache.get(d)
        if r is not None:
            return r
        values = {}
        for i in d.live():
            cls = d.subs[i].cls
            if cls is SAFETY:
                values[ltl.leaf_atom(i).name] = True
            elif cls is COSAFETY:
                values[ltl.leaf_atom(i).name] = False
        r = ltl.assign(d.combination, values) if values else d.combination
        self._cond_cache[d] = r
        return r

    def regular_condition(self, d: DelaState) -> Formula:
        return d.combination

    def tree(self, d: DelaState) -> ZielonkaTree:
        return zielonka_tree(self.condition(d))

    # -- DPA ---------------------------------------------------------------

    def initial(self) -> DpaState:
        if self._initial is None:
            d = self.initial_dela()
            self._initial = DpaState(d, self.tree(d).leftmost_leaf())
        return self._initial

    def _move(self, s: DpaState, t: DelaState, colors: frozenset[int]) -> tuple[DpaState, int]:
        key = (s, t, colors)
        r = self._move_cache.get(key)
        if r is None:
            tree = self.tree(s.dela)
            leaf, prio = tree.step(s.leaf, colors)
            nxt = self.tree(t)
            if nxt is not tree:
                leaf = nxt.leftmost_leaf()
            r = self._move_cache[key] = (DpaState(t, leaf), prio)
        return r

    def successors(self, s: DpaState) -> list[tuple[int, DpaState, int]]:
        """Edges ``(guard, successor, priority)``; guards partition 2^AP."""
        r = self._dpa_cache.get(s)
        if r is not None:
            return r
        out: dict[tuple[DpaState, int], int] = {}
        for guard, t, colors in self.dela_successors(s.dela):
            key = self._move(s, t, colors)
            out[key] = self.store.or_(out.get(key, FALSE), guard)
        r = sorted(((g, t, p) for (t, p), g in out.items()), key=lambda e: (e[2], str(e[1])))
        self._dpa_cache[s] = r
        return r

    def step(self, s: DpaState, letter: Mapping[str, bool]) -> tuple[DpaState, int]:
        t, colors = self.dela_step(s.dela, letter)
        return self._move(s, t, colors)

    def is_accepting_sink(self, s: DpaState) -> bool:
        return s.dela.combination is ltl.tt

    def is_rejecting_sink(self, s: DpaState) -> bool:
        return s.dela.combination is ltl.ff

    def explore(self, limit: int | None = None) -> dict[DpaState, list[tuple[int, DpaState, int]]]:
        init = self.initial()
        graph: dict[DpaState, list] = {}
        queue = [init]
        seen = {init}
        while queue:
            s = queue.pop(0)
            graph[s] = self.successors(s)
            if limit is not None and len(graph) >= limit:
                break
            for _, t, _ in graph[s]:
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        return graph

    def accepts(self, stem: Sequence[Mapping[str, bool]], loop: Sequence[Mapping[str, bool]]) -> bool:
        """Membership of the lasso word ``stem loop^ω`` (min-even parity)."""
        if not loop:
            raise ValueError("loop must be non-empty")
        s = self.initial()
        for letter in stem:
            s, _ = self.step(s, letter)
        seen: dict[DpaState, int] = {}
        prios: list[int] = []
        while s not in seen:
            seen[s] = len(prios)
            for letter in loop:
                s, p = self.step(s, letter)
                prios.append(p)
        return min(prios[seen[s]:]) % 2 == 0


def dela_successors(t: Translation, s: DelaState):
    return t.dela_successors(s)


def dpa_successors(t: Translation, s: DpaState):
    return t.successors(s)


# --------------------------------------------------------------------------
# dumps


def _numbered(t: Translation, limit: int | None):
    graph = t.explore(limit)
    ids = {s: i for i, s in enumerate(graph)}
    return graph, ids


def to_hoa(t: Translation, limit: int | None = None) -> str:
    """HOA-style text dump with transition-based parity acceptance."""
    graph, ids = _numbered(t, limit)
    names = [n for n in t.store.names]
    prios = {p for es in graph.values() for _, _, p in es} or {0}
    top = max(prios) + 1
    lines = [
        "HOA: v1",
        f"States: {len(graph)}",
        "Start: 0",
        f"AP: {len(names)} " + " ".join(f'"{n}"' for n in names),
        f"acc-name: parity min even {top}",
        f"Acceptance: {top} " + _parity_expr(top),
        "--BODY--",
    ]
    for s, es in graph.items():
        lines.append(f'State: {ids[s]} "{s}"')
        for g, u, p in es:
            target = ids.get(u, "?")
            lines.append(f"  [{_hoa_guard(t.store, g, names)}] {target} {{{p}}}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"


def _parity_expr(n: int) -> str:
    expr = ""
    for p in range(n - 1, -1, -1):
        atom_ = f"Inf({p})" if p % 2 == 0 else f"Fin({p})"
        expr = atom_ if not expr else (f"{atom_} | ({expr})" if p % 2 == 0 else f"{atom_} & ({expr})")
    return expr


def _hoa_guard(store: Bdd, g: int, names: list[str]) -> str:
    if g == TRUE:
        return "t"
    if g == FALSE:
        return "f"
    cubes = []
    for cube in store.cubes(g):
        lits = [("" if v else "!") + str(names.index(n)) for n, v in sorted(cube.items(), key=lambda kv: names.index(kv[0]))]
        cubes.append("&".join(lits) or "t")
    return " | ".join(cubes)


def to_dot(t: Translation, limit: int | None = None) -> str:
    graph, ids = _numbered(t, limit)
    lines = ["digraph dpa {", '  node [shape=box];', '  init [shape=point];', "  init -> 0;"]
    for s, i in ids.items():
        label = str(s).replace('"', '\\"')
        lines.append(f'  {i} [label="{label}"];')
    for s, es in graph.items():
        for g, u, p in es:
            if u in ids:
                lines.append(f'  {ids[s]} -> {ids[u]} [label="{t.store.to_expr(g)} / {p}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
