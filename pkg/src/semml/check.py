"""Model checking of machines and circuits against LTL, plus semantic oracles.

A machine passes when every word it can produce is accepted by the parity
automaton of the formula.  The product of machine and automaton is a
one-player graph; it is correct iff no reachable cycle has an odd minimum
priority.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import ltl
from .aiger import AigCircuit
from .automata import Translation
from .bdd import FALSE, TRUE, Bdd, transfer
from .ltl import Formula, Partition
from .mealy import MealyMachine, Transition

PASS, FAIL, UNKNOWN = "pass", "fail", "unknown"

Letter = Mapping[str, bool]


# --------------------------------------------------------------------------
# lasso semantics


def _letter(x) -> Mapping[str, bool]:
    if isinstance(x, Mapping):
        return x
    return {n: True for n in x}


def bounded_ltl(stem: Sequence, loop: Sequence, f: Formula | str) -> bool:
    """Exact LTL semantics on ``stem loop^ω``.

    Letters are dicts or sets of true atoms.  Every subformula gets one
    truth value per lasso position; until-like operators are least and
    release-like ones greatest fixpoints along the successor map.
    """
    if not loop:
        raise ValueError("loop must be non-empty")
    f = ltl.parse(f) if isinstance(f, str) else f
    word = [_letter(x) for x in stem] + [_letter(x) for x in loop]
    n = len(word)
    nxt = list(range(1, n)) + [len(stem)]
    val: dict[int, list[bool]] = {}

    def fix(init: bool, rule) -> list[bool]:
        v = [init] * n
        for _ in range(n + 1):
            w = [rule(i, v) for i in range(n)]
            if w == v:
                break
            v = w
        return v

    for g in ltl.subformulas(f):
        k, ch = g.kind, [val[c.id] for c in g.children]
        if k == ltl.TT:
            v = [True] * n
        elif k == ltl.FF:
            v = [False] * n
        elif k == ltl.AP:
            v = [bool(word[i].get(g.name, False)) for i in range(n)]
        elif k == ltl.NAP:
            v = [not word[i].get(g.name, False) for i in range(n)]
        elif k == ltl.NOT:
            v = [not x for x in ch[0]]
        elif k == ltl.AND:
            v = [all(c[i] for c in ch) for i in range(n)]
        elif k == ltl.OR:
            v = [any(c[i] for c in ch) for i in range(n)]
        elif k == ltl.IMP:
            v = [(not a) or b for a, b in zip(*ch)]
        elif k == ltl.IFF:
            v = [a == b for a, b in zip(*ch)]
        elif k == ltl.NEXT:
            v = [ch[0][nxt[i]] for i in range(n)]
        elif k == ltl.FIN:
            a = ch[0]
            v = fix(False, lambda i, v: a[i] or v[nxt[i]])
        elif k == ltl.GLOB:
            a = ch[0]
            v = fix(True, lambda i, v: a[i] and v[nxt[i]])
        elif k == ltl.UNTIL:
            a, b = ch
            v = fix(False, lambda i, v: b[i] or (a[i] and v[nxt[i]]))
        elif k == ltl.RELEASE:
            a, b = ch
            v = fix(True, lambda i, v: b[i] and (a[i] or v[nxt[i]]))
        elif k == ltl.WUNTIL:
            a, b = ch
            v = fix(True, lambda i, v: b[i] or (a[i] and v[nxt[i]]))
        else:
            raise ValueError(f"unknown operator {k}")
        val[g.id] = v
    return val[f.id][0]


def all_letters(atoms: Sequence[str]) -> list[dict[str, bool]]:
    return [dict(zip(atoms, bits)) for bits in itertools.product((False, True), repeat=len(atoms))]


def lassos(atoms: Sequence[str], max_len: int) -> Iterable[tuple[list[dict], list[dict]]]:
    """Every lasso with ``len(stem) + len(loop) <= max_len`` and a non-empty loop."""
    letters = all_letters(atoms)
    for total in range(1, max_len + 1):
        for ls in range(1, total + 1):
            for word in itertools.product(letters, repeat=total):
                yield list(word[: total - ls]), list(word[total - ls:])


# --------------------------------------------------------------------------
# one-player parity


@dataclass
class CheckReport:
    verdict: str
    stem: list[dict[str, bool]] = field(default_factory=list)
    loop: list[dict[str, bool]] = field(default_factory=list)
    product_states: int = 0
    sccs: int = 0
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def exit_code(self) -> int:
        return {PASS: 0, FAIL: 1}.get(self.verdict, 2)


def _sccs(nodes: Iterable[int], succ: Mapping[int, list[int]]) -> list[list[int]]:
    """Tarjan, iterative; ``succ`` must only mention nodes in ``nodes``."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on: set[int] = set()
    stack: list[int] = []
    out = []
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = len(index)
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = len(index)
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(succ.get(w, ()))))
                    break
                if w in on:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    low[work[-1][0]] = min(low[work[-1][0]], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    out.append(comp)
    return out


def odd_cycle(nodes: Sequence[int], edges: Sequence[tuple[int, int, int]]):
    """Find a cycle whose minimal priority is odd.

    Returns ``(witness, sccs_examined)``.  The witness is ``(edge, path)``
    where ``edge = (u, v, p)`` has the minimal priority on the cycle and
    ``path`` leads from ``v`` back to ``u`` through edges of priority at
    least ``p``; it is None when every cycle is even.
    """
    examined = 0
    todo = [(list(nodes), list(edges))]
    while todo:
        ns, es = todo.pop()
        succ: dict[int, list[int]] = {}
        for u, v, _ in es:
            succ.setdefault(u, []).append(v)
        for comp in _sccs(ns, succ):
            examined += 1
            inside = set(comp)
            ce = [e for e in es if e[0] in inside and e[1] in inside]
            if not ce:
                continue
            pmin = min(p for _, _, p in ce)
            if pmin % 2:
                e = min((x for x in ce if x[2] == pmin), key=lambda x: (x[0], x[1]))
                return (e, _path(e[1], e[0], ce)), examined
            todo.append((sorted(inside), [x for x in ce if x[2] != pmin]))
    return None, examined


def _path(src: int, dst: int, edges: Sequence[tuple[int, int, int]]) -> list[int]:
    succ: dict[int, list[int]] = {}
    for u, v, _ in edges:
        succ.setdefault(u, []).append(v)
    prev = {src: None}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            break
        for v in succ.get(u, ()):
            if v not in prev:
                prev[v] = u
                queue.append(v)
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    return path[::-1]


# --------------------------------------------------------------------------
# machines and circuits


def _translation(formula, partition: Partition | None, translation: Translation | None) -> Translation:
    if translation is not None:
        return translation
    order = None if partition is None else list(partition.ap_env) + list(partition.ap_sys)
    return Translation(formula, order=order)


def check_mealy(machine: MealyMachine, formula: Formula | str | None = None, partition: Partition | None = None,
                translation: Translation | None = None, role: str = "sys",
                max_states: int = 1_000_000) -> CheckReport:
    """Check every word the machine can produce against the formula.

    For ``role="sys"`` every word must satisfy the formula; for
    ``role="env"`` (counterexamples) every word must violate it, which
    amounts to shifting all priorities by one.
    """
    t = _translation(formula, partition, translation)
    if partition is not None:
        ins, outs = (partition.ap_env, partition.ap_sys) if role == "sys" else (partition.ap_sys, partition.ap_env)
        if not set(machine.inputs) <= set(ins) or not set(machine.outputs) <= set(outs):
            return CheckReport(UNKNOWN, reason="machine interface does not match the partition")
    shift = 0 if role == "sys" else 1
    store = t.store
    memo: dict[int, int] = {}
    rows = [[(store.and_(transfer(machine.store, store, x.guard, memo),
                         transfer(machine.store, store, x.output, memo)), x.succ) for x in ts]
            for ts in machine.transitions]
    atoms = sorted(set(machine.inputs) | set(machine.outputs) | ltl.atoms(t.formula))

    start = (machine.initial, t.initial())
    ids = {start: 0}
    order = [start]
    parent: dict[int, tuple[int, int]] = {}
    edges: list[tuple[int, int, int]] = []
    letters: dict[tuple[int, int, int], int] = {}
    k = 0
    while k < len(order):
        q, s = order[k]
        u = k
        k += 1
        for cond, q2 in rows[q]:
            for g, s2, p in t.successors(s):
                both = store.and_(cond, g)
                if both == FALSE:
                    continue
                key = (q2, s2)
                if key not in ids:
                    if len(ids) >= max_states:
                        return CheckReport(UNKNOWN, product_states=len(ids), reason="product budget exceeded")
                    ids[key] = len(order)
                    order.append(key)
                    parent[ids[key]] = (u, both)
                e = (u, ids[key], p + shift)
                if e not in letters:
                    letters[e] = both
                    edges.append(e)
    found, examined = odd_cycle(range(len(order)), edges)
    if found is None:
        return CheckReport(PASS, product_states=len(order), sccs=examined)
    (u, v, p), path = found
    stem = []
    x = u
    while x != 0:
        y, cond = parent[x]
        stem.append(store.pick(cond, atoms))
        x = y
    stem.reverse()
    loop = [store.pick(letters[(u, v, p)], atoms)]
    for a, b in zip(path, path[1:]):
        e = min((e for e in letters if e[0] == a and e[1] == b and e[2] >= p), key=lambda e: e[2])
        loop.append(store.pick(letters[e], atoms))
    return CheckReport(FAIL, stem, loop, len(order), examined)


def circuit_machine(c: AigCircuit, max_valuations: int = 1 << 20) -> MealyMachine | None:
    """Explicit machine over the reachable latch valuations, or None past the budget."""
    outs = [n for n, _ in c.outputs]
    store = Bdd(list(c.inputs) + outs)
    letters = all_letters(c.inputs)
    init = c.initial_state()
    ids = {init: 0}
    order = [init]
    trans = []
    k = 0
    while k < len(order):
        st = order[k]
        k += 1
        merged: dict[tuple[int, int], int] = {}
        for letter in letters:
            out, nxt = c.step(st, letter)
            if nxt not in ids:
                if len(ids) * len(letters) >= max_valuations:
                    return None
                ids[nxt] = len(order)
                order.append(nxt)
            key = (store.cube(out), ids[nxt])
            merged[key] = store.or_(merged.get(key, FALSE), store.cube(letter))
        trans.append([Transition(g, o, s) for (o, s), g in merged.items()])
    return MealyMachine(store, list(c.inputs), outs, trans, 0)


def check_aiger(c: AigCircuit, formula: Formula | str | None = None, partition: Partition | None = None,
                translation: Translation | None = None, role: str = "sys",
                max_valuations: int = 1 << 20) -> CheckReport:
    m = circuit_machine(c, max_valuations)
    if m is None:
        return CheckReport(UNKNOWN, reason="latch valuation budget exceeded")
    return check_mealy(m, formula, partition, translation, role)


# --------------------------------------------------------------------------
# helpers for differential testing


def lasso_machine(stem: Sequence, loop: Sequence, atoms: Sequence[str], store: Bdd | None = None) -> MealyMachine:
    """Input-free machine emitting exactly ``stem loop^ω``."""
    store = Bdd(list(atoms)) if store is None else store
    word = [_letter(x) for x in stem] + [_letter(x) for x in loop]
    n = len(word)
    trans = []
    for i, letter in enumerate(word):
        nxt = i + 1 if i + 1 < n else len(stem)
        trans.append([Transition(TRUE, store.cube({a: bool(letter.get(a, False)) for a in atoms}), nxt)])
    return MealyMachine(store, [], list(atoms), trans, 0)


def compose_lasso(env: MealyMachine, sys: MealyMachine) -> tuple[list[dict], list[dict]]:
    """The unique word of an environment machine played against a system machine.

    Set-valued outputs are resolved to their lowest letter.
    """
    seen: dict[tuple[int, int], int] = {}
    word: list[dict] = []
    qe, qs = env.initial, sys.initial
    while (qe, qs) not in seen:
        seen[(qe, qs)] = len(word)
        e_out = env.store.pick(env.transitions[qe][0].output, env.outputs)
        ts = next(t for t in sys.transitions[qs] if sys.store.evaluate(t.guard, e_out))
        s_out = sys.store.pick(ts.output, sys.outputs)
        te = next(t for t in env.transitions[qe] if env.store.evaluate(t.guard, s_out))
        word.append({**e_out, **s_out})
        qe, qs = te.succ, ts.succ
    i = seen[(qe, qs)]
    return word[:i], word[i:]
