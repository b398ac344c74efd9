"""Independent reference implementations used by the tests.

Nothing here shares code with the package beyond the formula AST and the
BDD store interface needed to hand data over.
"""
from __future__ import annotations

import itertools
import random

from hypothesis import strategies as st

from semml import ltl
from semml.bdd import FALSE, TRUE, Bdd
from semml.mealy import MealyMachine, Transition


# -- formulas ---------------------------------------------------------------

def formulas(names=("a", "b", "c"), max_leaves=5):
    leaf = st.sampled_from([ltl.atom(n) for n in names] + [ltl.neg(ltl.atom(n)) for n in names]
                           + [ltl.tt, ltl.ff])

    def extend(children):
        return st.one_of(
            st.builds(ltl.neg, children),
            st.builds(ltl.conj, children, children),
            st.builds(ltl.disj, children, children),
            st.builds(ltl.next_, children),
            st.builds(ltl.eventually, children),
            st.builds(ltl.always, children),
            st.builds(ltl.until, children, children),
            st.builds(ltl.release, children, children),
            st.builds(ltl.weak_until, children, children),
        )

    return st.recursive(leaf, extend, max_leaves=max_leaves)


def letters(names):
    return [dict(zip(names, bits)) for bits in itertools.product((False, True), repeat=len(names))]


def lassos(names, max_len):
    ls = letters(names)
    for total in range(1, max_len + 1):
        for loop_len in range(1, total + 1):
            for word in itertools.product(ls, repeat=total):
                yield list(word[: total - loop_len]), list(word[total - loop_len:])


def suffix(stem, loop):
    """The lasso for ``w[1:]``."""
    if stem:
        return stem[1:], loop
    return [], loop[1:] + loop[:1]


def holds(stem, loop, f) -> bool:
    """Direct recursive LTL semantics on a lasso, by unrolling positions.

    Position ``i`` of the infinite word is folded onto the lasso; for the
    temporal operators it suffices to look ``len(stem) + len(loop)``
    positions ahead, since after that the suffixes repeat.
    """
    word = stem + loop
    n, s = len(word), len(stem)

    def norm(i):
        return i if i < n else s + (i - s) % len(loop)

    horizon = n + 1
    memo = {}

    def sat(g, i):
        i = norm(i)
        key = (g.id, i)
        if key in memo:
            return memo[key]
        k = g.kind
        if k == ltl.TT:
            r = True
        elif k == ltl.FF:
            r = False
        elif k == ltl.AP:
            r = bool(word[i].get(g.name, False))
        elif k == ltl.NAP:
            r = not word[i].get(g.name, False)
        elif k == ltl.NOT:
            r = not sat(g.children[0], i)
        elif k == ltl.AND:
            r = all(sat(c, i) for c in g.children)
        elif k == ltl.OR:
            r = any(sat(c, i) for c in g.children)
        elif k == ltl.IMP:
            r = (not sat(g.children[0], i)) or sat(g.children[1], i)
        elif k == ltl.IFF:
            r = sat(g.children[0], i) == sat(g.children[1], i)
        elif k == ltl.NEXT:
            r = sat(g.children[0], i + 1)
        elif k == ltl.FIN:
            r = any(sat(g.children[0], i + j) for j in range(horizon))
        elif k == ltl.GLOB:
            r = all(sat(g.children[0], i + j) for j in range(horizon))
        elif k in (ltl.UNTIL, ltl.WUNTIL):
            a, b = g.children
            r = False
            for j in range(horizon):
                if sat(b, i + j):
                    r = True
                    break
                if not sat(a, i + j):
                    break
            else:
                r = k == ltl.WUNTIL
        elif k == ltl.RELEASE:
            a, b = g.children
            r = True
            for j in range(horizon):
                if not sat(b, i + j):
                    r = False
                    break
                if sat(a, i + j):
                    break
        else:
            raise ValueError(k)
        memo[key] = r
        return r

    return sat(f, 0)


# -- random machines ----------------------------------------------------------

def random_machine_spec(rng: random.Random, max_states=6, n_in=2, n_out=2):
    """Successor-deterministic machine as plain data.

    Returns ``(n, table)`` where ``table[q][i] = (succ, allowed)`` for
    each input letter index ``i`` and ``allowed`` is a non-empty frozenset
    of output letter indices.
    """
    n = rng.randint(1, max_states)
    ni, no = 1 << n_in, 1 << n_out
    table = []
    for _ in range(n):
        row = []
        for _ in range(ni):
            k = rng.randint(1, no)
            row.append((rng.randrange(n), frozenset(rng.sample(range(no), k))))
        table.append(row)
    return n, table


def brute_min_cover(n, table, initial=0):
    """Smallest covering machine of an incompletely specified machine, by search.

    A cover is a set of classes (state subsets) containing the initial
    state somewhere, where for each class C and input i the members'
    allowed outputs intersect and the successors of C under i lie inside
    one class of the cover.  Minimal size is found by iterative deepening
    over sets of compatible classes built from closed families.
    """
    ni = len(table[0])
    states = range(n)

    def compatible(c):
        return all(frozenset.intersection(*[table[q][i][1] for q in c]) for i in range(ni))

    classes = [frozenset(c) for r in range(1, n + 1) for c in itertools.combinations(states, r)
               if compatible(c)]
    # only maximal-ish classes matter less than closure; search over all compatible classes
    def succ_set(c, i):
        return frozenset(table[q][i][0] for q in c)

    def closed(cover):
        for c in cover:
            for i in range(ni):
                s = succ_set(c, i)
                if not any(s <= d for d in cover):
                    return False
        return True

    reach = _reachable(n, table, initial)
    for k in range(1, n + 1):
        for cover in itertools.combinations(classes, k):
            if not any(initial in c for c in cover):
                continue
            if not closed(cover):
                continue
            # every reachable state of the cover-induced machine is covered by construction;
            # the cover machine only visits classes reachable from the initial class
            return k
    return n


def _reachable(n, table, initial):
    seen = {initial}
    stack = [initial]
    while stack:
        q = stack.pop()
        for s, _ in table[q]:
            if s not in seen:
                seen.add(s)
                stack.append(s)
    return seen


# -- truth tables -------------------------------------------------------------

class TruthTables:
    """Truth tables as integers; bit ``x`` is the value on assignment ``x``.

    Variable ``i`` is bit ``i`` of the assignment index.  Tables of BDD
    refs are read off the node graph, independently of the BDD algebra.
    """

    def __init__(self, store: Bdd, n: int):
        self.store, self.n = store, n
        self.full = (1 << (1 << n)) - 1
        self.var_mask = []
        for i in range(n):
            m = 0
            for x in range(1 << n):
                if x >> i & 1:
                    m |= 1 << x
            self.var_mask.append(m)
        self.memo: dict[int, int] = {}

    def of(self, f: int) -> int:
        if f == TRUE:
            return self.full
        if f == FALSE:
            return 0
        n = f & ~1
        if n not in self.memo:
            v = self.store.top_var(n)
            hi, lo = self.of(self.store.high(n)), self.of(self.store.low(n))
            m = self.var_mask[v]
            self.memo[n] = (m & hi) | (~m & lo & self.full)
        return self.memo[n] ^ (self.full if f & 1 else 0)


def random_function(rng, b, names, tt, depth=3):
    if depth == 0 or rng.random() < 0.2:
        v = rng.choice(names)
        r = b.var(v)
        return (Bdd.not_(r), tt.of(Bdd.not_(r))) if rng.random() < 0.5 else (r, tt.of(r))
    op = rng.choice(["and", "or", "xor"])
    f, ft = random_function(rng, b, names, tt, depth - 1)
    g, gt = random_function(rng, b, names, tt, depth - 1)
    expect = {"and": ft & gt, "or": ft | gt, "xor": ft ^ gt}[op]
    return b.apply(op, f, g), expect


def bdd_random_cases(rng, target):
    """Random apply/not/ite/restrict checks against truth tables; returns the case count."""
    cases = 0
    while cases < target:
        n = rng.randint(1, 12)
        names = [f"v{i}" for i in range(n)]
        b = Bdd(names)
        tt = TruthTables(b, n)
        pool = [random_function(rng, b, names, tt) for _ in range(6)]
        for _ in range(200):
            (f, ft), (g, gt), (h, ht) = rng.sample(pool, 3) if len(pool) >= 3 else (pool[0],) * 3
            op = rng.choice(["and", "or", "xor", "not", "ite", "restrict"])
            if op == "not":
                r, expect = Bdd.not_(f), ft ^ tt.full
            elif op == "ite":
                r, expect = b.ite(f, g, h), (ft & gt) | (~ft & ht & tt.full)
            elif op == "restrict":
                if h == FALSE:
                    continue
                r = b.restrict(f, h)
                assert (tt.of(r) ^ ft) & ht == 0
                assert b.node_count(r) <= b.node_count(f)
                cases += 1
                continue
            else:
                r = b.apply(op, f, g)
                expect = {"and": ft & gt, "or": ft | gt, "xor": ft ^ gt}[op]
            assert tt.of(r) == expect, op
            # complement edges: f and not f live on one node
            assert b.node_index(r) == b.node_index(Bdd.not_(r))
            pool.append((r, expect))
            cases += 1
    return cases


# -- symbolic lasso semantics ------------------------------------------------

class LassoSpace:
    """All lassos of one shape ``(stem_len, loop_len)`` as BDD variables.

    Variable ``"a@i"`` is atom ``a`` at lasso position ``i``.
    """

    def __init__(self, atoms, stem_len, loop_len):

        self.atoms = list(atoms)
        self.s, self.l = stem_len, loop_len
        self.n = stem_len + loop_len
        self.store = Bdd([f"{a}@{i}" for i in range(self.n) for a in self.atoms])
        self.nxt = list(range(1, self.n)) + [stem_len]

    def var(self, a, i):
        return self.store.var(f"{a}@{i}")

    def rename(self, src, f, i, memo):
        """Copy a guard over plain atom names to position ``i``."""

        if f in (TRUE, FALSE):
            return f
        n = f & ~1
        key = (n, i)
        if key not in memo:
            name = src.names[src.top_var(n)]
            memo[key] = self.store.ite(self.var(name, i), self.rename(src, src.high(n), i, memo),
                                       self.rename(src, src.low(n), i, memo))
        return memo[key] ^ (f & 1)

    def word(self, assignment):
        letters = [{a: bool(assignment.get(f"{a}@{i}", False)) for a in self.atoms} for i in range(self.n)]
        return letters[: self.s], letters[self.s:]

    def truth(self, f):
        """BDD of the lassos of this shape that satisfy ``f``."""

        b, n, nxt = self.store, self.n, self.nxt
        val = {}

        def fix(init, rule):
            v = [init] * n
            for _ in range(n + 1):
                w = [rule(i, v) for i in range(n)]
                if w == v:
                    break
                v = w
            return v

        for g in ltl.subformulas(f):
            k = g.kind
            ch = [val[c.id] for c in g.children]
            if k == ltl.TT:
                v = [TRUE] * n
            elif k == ltl.FF:
                v = [FALSE] * n
            elif k == ltl.AP:
                v = [self.var(g.name, i) for i in range(n)]
            elif k == ltl.NAP:
                v = [Bdd.not_(self.var(g.name, i)) for i in range(n)]
            elif k == ltl.NOT:
                v = [Bdd.not_(x) for x in ch[0]]
            elif k == ltl.AND:
                v = [b.conj(c[i] for c in ch) for i in range(n)]
            elif k == ltl.OR:
                v = [b.disj(c[i] for c in ch) for i in range(n)]
            elif k == ltl.IMP:
                v = [b.or_(Bdd.not_(x), y) for x, y in zip(*ch)]
            elif k == ltl.IFF:
                v = [Bdd.not_(b.xor(x, y)) for x, y in zip(*ch)]
            elif k == ltl.NEXT:
                v = [ch[0][nxt[i]] for i in range(n)]
            elif k == ltl.FIN:
                a = ch[0]
                v = fix(FALSE, lambda i, v: b.or_(a[i], v[nxt[i]]))
            elif k == ltl.GLOB:
                a = ch[0]
                v = fix(TRUE, lambda i, v: b.and_(a[i], v[nxt[i]]))
            elif k == ltl.UNTIL:
                a, c = ch
                v = fix(FALSE, lambda i, v: b.or_(c[i], b.and_(a[i], v[nxt[i]])))
            elif k == ltl.WUNTIL:
                a, c = ch
                v = fix(TRUE, lambda i, v: b.or_(c[i], b.and_(a[i], v[nxt[i]])))
            elif k == ltl.RELEASE:
                a, c = ch
                v = fix(TRUE, lambda i, v: b.and_(c[i], b.or_(a[i], v[nxt[i]])))
            else:
                raise ValueError(k)
            val[g.id] = v
        return val[f.id][0]

    def dpa_cells(self, t):
        """Split the lassos by the automaton edges their run takes.

        Returns ``(cell, accepted)`` pairs: all words of a cell follow the
        same edge sequence (stem, then loop passes until the pass-start
        state repeats), so membership is constant on the cell.  A cell is
        kept as one constraint per position while searching; positions
        have disjoint variables, so it is empty iff some constraint is.
        """

        b, memo, out = self.store, {}, []
        src = t.store

        def edges(state, i, cell):
            for g, s2, p in t.successors(state):
                c = b.and_(cell[i], self.rename(src, g, i, memo))
                if c != FALSE:
                    yield s2, p, cell[:i] + (c,) + cell[i + 1:]

        def stem(i, state, cell):
            if i == self.s:
                loop(0, state, (state,), (), 1 << 30, cell)
                return
            for s2, _, c2 in edges(state, i, cell):
                stem(i + 1, s2, c2)

        def loop(j, state, starts, pass_prios, cur, cell):
            if j == self.l:
                pass_prios = pass_prios + (cur,)
                if state in starts:
                    k = starts.index(state)
                    whole = TRUE
                    for c in reversed(cell):
                        whole = b.and_(c, whole)
                    out.append((whole, min(pass_prios[k:]) % 2 == 0))
                    return
                loop(0, state, starts + (state,), pass_prios, 1 << 30, cell)
                return
            for s2, p, c2 in edges(state, self.s + j, cell):
                loop(j + 1, s2, starts, pass_prios, min(cur, p), c2)

        stem(0, t.initial(), (TRUE,) * self.n)
        return out


# machines over two input and two output atoms

INS, OUTS = ["i0", "i1"], ["o0", "o1"]


def _letter(names, k):
    return {n: bool(k >> b & 1) for b, n in enumerate(names)}


def trimmed_spec(rng, **kw):
    n, table = random_machine_spec(rng, **kw)
    keep = sorted(_reachable(n, table, 0))
    idx = {q: i for i, q in enumerate(keep)}
    return len(keep), [[(idx[s], a) for s, a in table[q]] for q in keep]


def build_machine(n, table, store=None):
    store = store or Bdd(INS + OUTS)
    trans = []
    for q in range(n):
        row = []
        for i, (succ, allowed) in enumerate(table[q]):
            g = store.cube(_letter(INS, i))
            o = store.disj(store.cube(_letter(OUTS, k)) for k in sorted(allowed))
            row.append(Transition(g, o, succ))
        trans.append(row)
    return MealyMachine(store, list(INS), list(OUTS), trans)
