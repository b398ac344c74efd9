"""Mealy machines with set-valued outputs and their minimization.

A machine state has a list of transitions ``(guard, output, succ)``: on an
input letter in ``guard`` the machine may emit any letter of ``output`` and
move to ``succ``.  Guards are BDDs over the inputs, outputs BDDs over the
outputs, both in one shared store.  A machine is *successor deterministic*
when the successor is fixed by state and input; outputs may stay sets.

Text format::

    mealy <n_states> <initial>        (or ``moore`` for environment machines)
    <src> "<input guard>" "<output set>" <dst>
"""
from __future__ import annotations

import itertools
import re
import shlex
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import ltl, sat
from .bdd import FALSE, TRUE, Bdd


@dataclass(frozen=True)
class Transition:
    guard: int
    output: int
    succ: int


@dataclass
class MealyMachine:
    store: Bdd
    inputs: list[str]
    outputs: list[str]
    transitions: list[list[Transition]]
    initial: int = 0
    labels: list[object] = field(default_factory=list)
    moore: bool = False
    tags: dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        for n in list(self.inputs) + list(self.outputs):
            self.store.add_var(n)
        if not self.labels:
            self.labels = [None] * len(self.transitions)

    @property
    def n_states(self) -> int:
        return len(self.transitions)

    def __len__(self) -> int:
        return self.n_states

    def validate(self) -> None:
        st = self.store
        for q, ts in enumerate(self.transitions):
            cover = st.disj(t.guard for t in ts)
            if cover != TRUE:
                raise ValueError(f"state {q}: input guards do not cover all letters")
            for t in ts:
                if t.output == FALSE or t.guard == FALSE:
                    raise ValueError(f"state {q}: empty guard or output set")
                if not 0 <= t.succ < self.n_states:
                    raise ValueError(f"state {q}: successor {t.succ} out of range")
                if st.support(t.guard) - set(self.inputs):
                    raise ValueError(f"state {q}: guard mentions non-inputs")
                if st.support(t.output) - set(self.outputs):
                    raise ValueError(f"state {q}: output mentions non-outputs")
            if self.moore and len({t.output for t in ts}) > 1:
                raise ValueError(f"state {q}: Moore machine with input-dependent output")

    def is_successor_deterministic(self) -> bool:
        st = self.store
        for ts in self.transitions:
            for a, b in itertools.combinations(ts, 2):
                if a.succ != b.succ and st.and_(a.guard, b.guard) != FALSE:
                    return False
        return True

    def has_cube_outputs(self) -> bool:
        return all(_is_cube(self.store, t.output) for ts in self.transitions for t in ts)

    def choices(self, q: int, letter: Mapping[str, bool]) -> list[tuple[int, int]]:
        return [(t.output, t.succ) for t in self.transitions[q] if self.store.evaluate(t.guard, letter)]

    def reachable(self) -> list[int]:
        seen = {self.initial: None}
        queue = deque([self.initial])
        while queue:
            q = queue.popleft()
            for t in self.transitions[q]:
                if t.succ not in seen:
                    seen[t.succ] = None
                    queue.append(t.succ)
        return list(seen)

    def renumber(self, keep: Sequence[int]) -> "MealyMachine":
        """Restrict to ``keep`` (closed under successors), renumbered in order."""
        idx = {q: i for i, q in enumerate(keep)}
        trans = [[Transition(t.guard, t.output, idx[t.succ]) for t in self.transitions[q]] for q in keep]
        return MealyMachine(self.store, self.inputs, self.outputs, trans, idx[self.initial],
                            [self.labels[q] for q in keep], self.moore, dict(self.tags))

    def trim(self) -> "MealyMachine":
        return self.renumber(self.reachable())

    def edge_count(self) -> int:
        return sum(len(ts) for ts in self.transitions)

    # -- text and dot --------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"{'moore' if self.moore else 'mealy'} {self.n_states} {self.initial}"]
        for q, ts in enumerate(self.transitions):
            for t in ts:
                lines.append(f'{q} "{self.store.to_expr(t.guard)}" "{self.store.to_expr(t.output)}" {t.succ}')
        return "\n".join(lines) + "\n"

    def to_dot(self) -> str:
        lines = ["digraph mealy {", "  init [shape=point];", f"  init -> {self.initial};"]
        for q, ts in enumerate(self.transitions):
            lines.append(f'  {q} [shape=circle, label="{q}"];')
            for t in ts:
                lab = f"{self.store.to_expr(t.guard)} / {self.store.to_expr(t.output)}"
                lines.append(f'  {q} -> {t.succ} [label="{lab}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def from_text(text: str, inputs: Sequence[str], outputs: Sequence[str], store: Bdd | None = None) -> MealyMachine:
    store = store if store is not None else Bdd(list(inputs) + list(outputs))
    lines = [l for l in text.splitlines() if l.strip() and not l.startswith("#")]
    m = re.fullmatch(r"(mealy|moore)\s+(\d+)\s+(\d+)\s*", lines[0])
    if not m:
        raise ValueError(f"bad header {lines[0]!r}")
    n, init = int(m.group(2)), int(m.group(3))
    trans: list[list[Transition]] = [[] for _ in range(n)]
    for line in lines[1:]:
        src, guard, out, dst = shlex.split(line)
        g = store.from_formula(ltl.parse(guard))
        o = store.from_formula(ltl.parse(out))
        trans[int(src)].append(Transition(g, o, int(dst)))
    return MealyMachine(store, list(inputs), list(outputs), trans, init, moore=m.group(1) == "moore")


def _is_cube(store: Bdd, f: int) -> bool:
    if f == FALSE:
        return False
    while f != TRUE:
        hi, lo = store.high(f), store.low(f)
        if hi == FALSE:
            f = lo
        elif lo == FALSE:
            f = hi
        else:
            return False
    return True


def _atoms_of(store: Bdd, guards: Iterable[int], universe: int = TRUE) -> list[int]:
    """Coarsest partition of ``universe`` refining every guard (nonempty blocks)."""
    blocks = [universe] if universe != FALSE else []
    for g in dict.fromkeys(guards):
        nxt = []
        for b in blocks:
            for part in (store.and_(b, g), store.and_(b, Bdd.not_(g))):
                if part != FALSE:
                    nxt.append(part)
        blocks = nxt
    return blocks


# --------------------------------------------------------------------------
# successor determinization


@dataclass
class _Options:
    """Per strategy state: input regions and, per region, successor -> outputs."""

    regions: list[int]
    succ: list[dict[int, int]]


def _options(store: Bdd, rows: Sequence[tuple[int, int, int]]) -> _Options:
    regions = _atoms_of(store, [ge for ge, _, _ in rows])
    per: list[dict[int, int]] = []
    for r in regions:
        d: dict[int, int] = {}
        for ge, gs, t in rows:
            if store.and_(r, ge) != FALSE:
                d[t] = store.or_(d.get(t, FALSE), gs)
        per.append(d)
    return _Options(regions, per)


def determinize_successors(strategy, store: Bdd, inputs: Sequence[str], outputs: Sequence[str],
                           max_states: int = 256, use_sat: bool = True,
                           sat_command: str | None = None) -> MealyMachine:
    """Pick one successor per (state, input) from a non-deterministic strategy.

    A greedy search that prefers already selected states gives an upper
    bound; when it is at most ``max_states`` a SAT search with a descending
    cardinality bound finds the fewest states closed under the choices.
    """
    rows = strategy.transitions
    opts = {q: _options(store, rows[q]) for q in rows}
    init = strategy.initial

    order = [init]
    pos = {init: 0}
    greedy: dict = {}
    i = 0
    while i < len(order):
        q = order[i]
        i += 1
        picks = []
        for d in opts[q].succ:
            t = min(d, key=lambda s: (pos.get(s, len(pos) + 1), s))
            if t not in pos:
                pos[t] = len(order)
                order.append(t)
            picks.append(t)
        greedy[q] = picks
    chosen = greedy
    tags: dict[str, object] = {"greedy_states": len(order)}
    if use_sat and 1 < len(order) <= max_states:
        better = _determinize_sat(opts, init, len(order), sat_command)
        if better is not None:
            chosen = better
        tags["sat"] = True
    else:
        tags["heuristic-only"] = True

    keep = [init]
    index = {init: 0}
    k = 0
    while k < len(keep):
        q = keep[k]
        k += 1
        for t in chosen[q]:
            if t not in index:
                index[t] = len(keep)
                keep.append(t)
    trans = []
    for q in keep:
        merged: dict[tuple[int, int], int] = {}
        for r, d, t in zip(opts[q].regions, opts[q].succ, chosen[q]):
            key = (d[t], index[t])
            merged[key] = store.or_(merged.get(key, FALSE), r)
        trans.append([Transition(g, o, s) for (o, s), g in merged.items()])
    labels = [strategy.labels.get(q) for q in keep]
    m = MealyMachine(store, list(inputs), list(outputs), trans, 0, labels, tags=tags)
    m.tags["source_states"] = keep
    return m


def _determinize_sat(opts: dict[int, _Options], init: int, bound: int,
                     command: str | None) -> dict[int, list[int]] | None:
    states = sorted(opts)
    best = None
    k = bound - 1
    while k >= 1:
        cnf = sat.Cnf()
        r = {q: cnf.new_var() for q in states}
        choice = {}
        cnf.add([r[init]])
        for q in states:
            for j, d in enumerate(opts[q].succ):
                lits = []
                for t in sorted(d):
                    c = cnf.new_var()
                    choice[(q, j, t)] = c
                    cnf.add([-c, r[t]])
                    lits.append(c)
                cnf.add([-r[q]] + lits)
        sat.at_most_k(cnf, [r[q] for q in states], k)
        res = sat.solve(cnf, command=command)
        if not res.sat:
            break
        best = {}
        for q in states:
            if res.value(r[q]):
                best[q] = [next(t for t in sorted(d) if res.value(choice[(q, j, t)]))
                           for j, d in enumerate(opts[q].succ)]
        k = sum(1 for q in states if res.value(r[q])) - 1
    return best


# --------------------------------------------------------------------------
# partitions


@dataclass
class OutputPartition:
    """Disjoint output blocks; every transition output is a union of blocks."""

    blocks: list[int]

    def within(self, store: Bdd, out: int) -> frozenset[int]:
        return frozenset(i for i, b in enumerate(self.blocks) if store.and_(b, Bdd.not_(out)) == FALSE)


def output_partition(machine: MealyMachine) -> OutputPartition:
    st = machine.store
    sets = [t.output for ts in machine.transitions for t in ts]
    return OutputPartition(_atoms_of(st, sets, st.disj(sets)))


def input_partition(machine: MealyMachine) -> list[int]:
    return _atoms_of(machine.store, [t.guard for ts in machine.transitions for t in ts])


# --------------------------------------------------------------------------
# extended MeMin


class MinimizationBudgetExceeded(RuntimeError):
    """The instance is too large for the exact search; fall back to bisimulation."""


@dataclass
class CoverProblem:
    """Successor-deterministic machine flattened over input and output blocks."""

    n: int
    initial: int
    inputs: list[int]
    blocks: list[int]
    succ: list[list[int]]
    avail: list[list[frozenset[int]]]
    out: list[list[int]]

    @property
    def m(self) -> int:
        return len(self.inputs)

    def candidates(self, i: int) -> list[int]:
        return sorted(set().union(*(self.avail[x][i] for x in range(self.n))))


def cover_problem(machine: MealyMachine) -> CoverProblem:
    st = machine.store
    ins = input_partition(machine)
    part = output_partition(machine)
    succ, avail, out = [], [], []
    for q, ts in enumerate(machine.transitions):
        srow, arow, orow = [], [], []
        for blk in ins:
            hits = [t for t in ts if st.and_(t.guard, blk) != FALSE]
            targets = {t.succ for t in hits}
            if len(targets) != 1:
                raise ValueError(f"state {q} is not successor deterministic")
            o = st.disj(t.output for t in hits)
            srow.append(targets.pop())
            orow.append(o)
            arow.append(part.within(st, o))
        succ.append(srow)
        avail.append(arow)
        out.append(orow)
    return CoverProblem(machine.n_states, machine.initial, ins, part.blocks, succ, avail, out)


def incompatible_pairs(p: CoverProblem) -> set[tuple[int, int]]:
    """Pairs that can never share a class (closure over successors)."""
    inc = set()
    for x, y in itertools.combinations(range(p.n), 2):
        if any(not (p.avail[x][i] & p.avail[y][i]) for i in range(p.m)):
            inc.add((x, y))
    changed = True
    while changed:
        changed = False
        for x, y in itertools.combinations(range(p.n), 2):
            if (x, y) in inc:
                continue
            for i in range(p.m):
                a, b = sorted((p.succ[x][i], p.succ[y][i]))
                if a != b and (a, b) in inc:
                    inc.add((x, y))
                    changed = True
                    break
    return inc


def greedy_clique(n: int, inc: set[tuple[int, int]]) -> list[int]:
    deg = [0] * n
    for x, y in inc:
        deg[x] += 1
        deg[y] += 1
    clique: list[int] = []
    for v in sorted(range(n), key=lambda v: (-deg[v], v)):
        if all(tuple(sorted((v, u))) in inc for u in clique):
            clique.append(v)
    return clique


def maximize_clique(n: int, inc: set[tuple[int, int]], start: list[int], conflict_budget: int = 20000,
                    command: str | None = None) -> list[int]:
    """Grow the clique with SAT queries ``|K| >= size + 1`` until UNSAT or out of budget."""
    best = list(start)
    while len(best) < n:
        cnf = sat.Cnf(n)
        for x, y in itertools.combinations(range(n), 2):
            if (x, y) not in inc:
                cnf.add([-(x + 1), -(y + 1)])
        sat.at_most_k(cnf, [-(x + 1) for x in range(n)], n - (len(best) + 1))
        if command:
            res = sat.solve(cnf, command=command)
        else:
            res = sat.Solver(cnf).solve(conflict_budget=conflict_budget)
        if not res.sat:
            break
        best = [x for x in range(n) if res.value(x + 1)]
    return best


@dataclass
class CoverEncoding:
    cnf: sat.Cnf
    k: int
    s: list[list[int]]
    t: dict[tuple[int, int, int], int]
    o: dict[tuple[int, int, int], int]


def encode_cover(p: CoverProblem, k: int, inc: set[tuple[int, int]], clique: Sequence[int]) -> CoverEncoding:
    cnf = sat.Cnf()
    s = [[cnf.new_var() for _ in range(k)] for _ in range(p.n)]
    t = {(c, i, d): cnf.new_var() for c in range(k) for i in range(p.m) for d in range(k)}
    cand = [p.candidates(i) for i in range(p.m)]
    o = {(c, i, b): cnf.new_var() for c in range(k) for i in range(p.m) for b in cand[i]}
    for x in range(p.n):
        cnf.add(s[x])
    for c in range(k):
        for i in range(p.m):
            cnf.add([t[(c, i, d)] for d in range(k)])
            cnf.add([o[(c, i, b)] for b in cand[i]])
    for x in range(p.n):
        for c in range(k):
            for i in range(p.m):
                y = p.succ[x][i]
                for d in range(k):
                    cnf.add([-s[x][c], -t[(c, i, d)], s[y][d]])
                allowed = p.avail[x][i]
                if len(allowed) < len(cand[i]):
                    # a restricted member needs one of its own blocks in the class
                    cnf.add([-s[x][c]] + [o[(c, i, b)] for b in sorted(allowed)])
                    for b in cand[i]:
                        if b not in allowed:
                            cnf.add([-s[x][c], -o[(c, i, b)]])
    for x, y in sorted(inc):
        for c in range(k):
            cnf.add([-s[x][c], -s[y][c]])
    for j, x in enumerate(clique[:k]):
        cnf.add([s[x][j]])
    return CoverEncoding(cnf, k, s, t, o)


def _cover_machine(machine: MealyMachine, p: CoverProblem, enc: CoverEncoding, res: sat.SatResult) -> MealyMachine:
    st = machine.store
    members = [[x for x in range(p.n) if res.value(enc.s[x][c])] for c in range(enc.k)]
    start = next(c for c in range(enc.k) if res.value(enc.s[p.initial][c]))
    nxt = {(c, i): next(d for d in range(enc.k) if res.value(enc.t[(c, i, d)]))
           for c in range(enc.k) for i in range(p.m)}
    order = [start]
    index = {start: 0}
    j = 0
    while j < len(order):
        c = order[j]
        j += 1
        for i in range(p.m):
            d = nxt[(c, i)]
            if d not in index:
                index[d] = len(order)
                order.append(d)
    trans = []
    for c in order:
        merged: dict[tuple[int, int], int] = {}
        for i in range(p.m):
            out = st.conj(p.out[x][i] for x in members[c])
            key = (out, index[nxt[(c, i)]])
            merged[key] = st.or_(merged.get(key, FALSE), p.inputs[i])
        trans.append([Transition(g, o, d) for (o, d), g in merged.items()])
    labels = [machine.labels[min(members[c])] for c in order]
    classes = [members[c] for c in order]
    m = MealyMachine(st, machine.inputs, machine.outputs, trans, 0, labels, machine.moore, dict(machine.tags))
    m.tags["classes"] = classes
    return m


@dataclass
class MinimizeResult:
    machine: MealyMachine
    k: int
    lower_bound: int
    certificate: sat.Cnf | None


def minimize(machine: MealyMachine, command: str | None = None, max_clauses: int = 1_500_000,
             clique_budget: int = 20000) -> MinimizeResult:
    """Smallest covering machine for a successor-deterministic machine.

    States are grouped into possibly overlapping classes; the search starts
    at a clique lower bound and raises the class count until SAT, so the
    query for one class fewer is UNSAT and is kept as a certificate.
    Unreachable states are dropped first; ``tags["classes"]`` refers to
    the trimmed numbering.
    """
    machine = machine.trim()
    p = cover_problem(machine)
    cand_total = sum(len(p.candidates(i)) for i in range(p.m))
    if p.n * p.n * p.m * p.n + p.n * cand_total > max_clauses:
        raise MinimizationBudgetExceeded(f"{p.n} states x {p.m} inputs is over budget")
    inc = incompatible_pairs(p)
    clique = maximize_clique(p.n, inc, greedy_clique(p.n, inc), clique_budget, command)
    lower = max(1, len(clique))
    certificate = encode_cover(p, lower - 1, inc, clique).cnf
    for k in range(lower, p.n + 1):
        enc = encode_cover(p, k, inc, clique)
        res = sat.solve(enc.cnf, command=command)
        if res.sat:
            out = _cover_machine(machine, p, enc, res)
            out.tags["lower_bound"] = lower
            return MinimizeResult(out, k, lower, certificate)
        certificate = enc.cnf
    raise AssertionError("the identity cover always exists")


# --------------------------------------------------------------------------
# cubification


def _minterm_key(m: Mapping[str, bool], names: Sequence[str]) -> tuple[bool, ...]:
    return tuple(m[n] for n in names)


def _grow_cube(store: Bdd, point: tuple[bool, ...], names: Sequence[str], care: int) -> int:
    """Drop literals from a minterm while the cube stays inside ``care``."""
    lits = {n: v for n, v in zip(names, point)}
    for n in names:
        trial = {k: v for k, v in lits.items() if k != n}
        if store.and_(store.cube(trial), Bdd.not_(care)) == FALSE:
            lits = trial
    return store.cube(lits)


def cubify(machine: MealyMachine, command: str | None = None, enum_limit: int = 12,
           sat_limit: int = 4096) -> MealyMachine:
    """Replace every output set by one contained cube, sharing cubes where possible.

    Each edge needs one output letter from its set; the fewest distinct
    letters hitting every edge are found greedily and then improved by SAT.
    Edges sharing a letter get the largest cube inside all their sets.
    Moore machines keep one cube per state.
    """
    st = machine.store
    names = list(machine.outputs)
    units: list[tuple[int, list[int]]] = []  # (output set, edge ids)
    edges = [(q, j) for q, ts in enumerate(machine.transitions) for j in range(len(ts))]
    if machine.moore:
        for q, ts in enumerate(machine.transitions):
            ids = [e for e, (p, _) in enumerate(edges) if p == q]
            if ids:
                units.append((ts[0].output, ids))
    else:
        units = [(machine.transitions[q][j].output, [e]) for e, (q, j) in enumerate(edges)]

    if len(names) <= enum_limit:
        hits: dict[tuple[bool, ...], set[int]] = {}
        for u, (out, _) in enumerate(units):
            for m in st.minterms(out, names):
                hits.setdefault(_minterm_key(m, names), set()).add(u)
        chosen = _greedy_hitting(hits, len(units))
        greedy = len(chosen)
        if 1 < greedy and len(hits) <= sat_limit:
            chosen = _sat_hitting(hits, len(units), greedy, command) or chosen
        point_of: dict[int, tuple[bool, ...]] = {}
        for u in range(len(units)):
            options = [p for p in chosen if u in hits[p]]
            point_of[u] = max(options, key=lambda p: (len(hits[p] & set(range(len(units)))), _rank(p)))
        groups: dict[tuple[bool, ...], list[int]] = {}
        for u, p in point_of.items():
            groups.setdefault(p, []).append(u)
    else:
        greedy = None
        groups = {}
        remaining = list(range(len(units)))
        while remaining:
            u0 = remaining.pop(0)
            acc = units[u0][0]
            members = [u0]
            for u in list(remaining):
                both = st.and_(acc, units[u][0])
                if both != FALSE:
                    acc = both
                    members.append(u)
                    remaining.remove(u)
            pick = st.pick(acc, names)
            groups[_minterm_key(pick, names)] = members

    cube_of_unit: dict[int, int] = {}
    for p, members in groups.items():
        care = st.conj(units[u][0] for u in members)
        cube = _grow_cube(st, p, names, care)
        for u in members:
            cube_of_unit[u] = cube
    new_out = {}
    for u, (_, ids) in enumerate(units):
        for e in ids:
            new_out[edges[e]] = cube_of_unit[u]
    trans = []
    for q, ts in enumerate(machine.transitions):
        merged: dict[tuple[int, int], int] = {}
        for j, t in enumerate(ts):
            key = (new_out[(q, j)], t.succ)
            merged[key] = st.or_(merged.get(key, FALSE), t.guard)
        trans.append([Transition(g, o, s) for (o, s), g in merged.items()])
    out = MealyMachine(st, machine.inputs, machine.outputs, trans, machine.initial, list(machine.labels),
                       machine.moore, dict(machine.tags))
    out.tags["distinct_cubes"] = len(set(cube_of_unit.values()))
    if greedy is not None:
        out.tags["cube_greedy_bound"] = greedy
    return out


def _rank(p: tuple[bool, ...]) -> tuple[int, ...]:
    return tuple(-int(b) for b in p)


def _greedy_hitting(hits: dict[tuple[bool, ...], set[int]], n: int) -> list[tuple[bool, ...]]:
    uncovered = set(range(n))
    chosen = []
    while uncovered:
        best = max(hits, key=lambda p: (len(hits[p] & uncovered), _rank(p)))
        chosen.append(best)
        uncovered -= hits[best]
    return chosen


def _sat_hitting(hits: dict[tuple[bool, ...], set[int]], n: int, bound: int,
                 command: str | None) -> list[tuple[bool, ...]] | None:
    points = sorted(hits, key=_rank)
    best = None
    k = bound - 1
    while k >= 1:
        cnf = sat.Cnf(len(points))
        for u in range(n):
            cnf.add([i + 1 for i, p in enumerate(points) if u in hits[p]])
        sat.at_most_k(cnf, list(range(1, len(points) + 1)), k)
        res = sat.solve(cnf, command=command)
        if not res.sat:
            break
        best = [p for i, p in enumerate(points) if res.value(i + 1)]
        k = len(best) - 1
    return best


# --------------------------------------------------------------------------
# bisimulation


def bisim_reduce(machine: MealyMachine) -> MealyMachine:
    """Quotient by the coarsest bisimulation respecting outputs per input block."""
    st = machine.store
    blocks = input_partition(machine)
    n = machine.n_states
    succ = [[0] * len(blocks) for _ in range(n)]
    outs = [[FALSE] * len(blocks) for _ in range(n)]
    for q, ts in enumerate(machine.transitions):
        for i, b in enumerate(blocks):
            hits = [t for t in ts if st.and_(t.guard, b) != FALSE]
            if len({t.succ for t in hits}) != 1:
                raise ValueError(f"state {q} is not successor deterministic")
            succ[q][i] = hits[0].succ
            outs[q][i] = st.disj(t.output for t in hits)
    cls = [0] * n
    count = 1
    while True:
        sigs: dict[tuple, int] = {}
        new = []
        for q in range(n):
            sig = (cls[q], tuple((outs[q][i], cls[succ[q][i]]) for i in range(len(blocks))))
            new.append(sigs.setdefault(sig, len(sigs)))
        if len(sigs) == count:
            break
        cls, count = new, len(sigs)
    cls = new
    reps: dict[int, int] = {}
    for q in range(n):
        reps.setdefault(cls[q], q)
    order = sorted(reps, key=lambda c: reps[c])
    index = {c: i for i, c in enumerate(order)}
    trans = []
    for c in order:
        q = reps[c]
        merged: dict[tuple[int, int], int] = {}
        for t in machine.transitions[q]:
            key = (t.output, index[cls[t.succ]])
            merged[key] = st.or_(merged.get(key, FALSE), t.guard)
        trans.append([Transition(g, o, s) for (o, s), g in merged.items()])
    labels = [machine.labels[reps[c]] for c in order]
    out = MealyMachine(st, machine.inputs, machine.outputs, trans, index[cls[machine.initial]], labels,
                       machine.moore, dict(machine.tags))
    return out.trim()


# --------------------------------------------------------------------------
# environment counterexamples


def moore_from_strategy(strategy, store: Bdd, env_atoms: Sequence[str], sys_atoms: Sequence[str]) -> MealyMachine:
    """Deterministic environment machine from a winning environment strategy.

    Inputs are the system atoms and outputs the environment atoms; each
    state commits to one permitted environment move before reading input.
    """
    rows = strategy.transitions
    init = strategy.initial
    index = {init: 0}
    order = [init]
    picked: dict[int, list[tuple[int, int, int]]] = {}
    k = 0
    while k < len(order):
        e = order[k]
        k += 1
        groups: dict[int, list[tuple[int, int, int]]] = {}
        for ge, gs, t in rows[e]:
            groups.setdefault(ge, []).append((ge, gs, t))
        best = min(groups.values(), key=lambda g: (sum(1 for _, _, t in g if t not in index), len(g)))
        picked[e] = best
        for _, _, t in best:
            if t not in index:
                index[t] = len(order)
                order.append(t)
    trans = [[Transition(gs, ge, index[t]) for ge, gs, t in picked[e]] for e in order]
    labels = [strategy.labels.get(e) for e in order]
    return MealyMachine(store, list(sys_atoms), list(env_atoms), trans, 0, labels, moore=True)
