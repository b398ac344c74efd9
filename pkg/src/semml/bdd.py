"""Shared BDDs with complement edges.

A reference is an int ``(node << 1) | complement``.  Node 0 is the single
terminal, so ``TRUE == 0`` and ``FALSE == 1``.  Then-edges are never
complemented; negation only flips the low bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from . import ltl

TRUE = 0
FALSE = 1


class BddCapacityError(RuntimeError):
    """The node store exceeded its configured limit."""


class Bdd:
    """A node store over a fixed, extendable variable order.

    Variable ``i`` sits at level ``i``; :meth:`add_var` appends at the bottom.
    """

    def __init__(self, names: Iterable[str] = (), node_limit: int = 5_000_000):
        self.node_limit = node_limit
        self._var = [1 << 30]  # terminal sits below every variable
        self._hi = [0]
        self._lo = [0]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._and_cache: dict[tuple[int, int], int] = {}
        self._xor_cache: dict[tuple[int, int], int] = {}
        self._ite_cache: dict[tuple[int, int, int], int] = {}
        self._restrict_cache: dict[tuple[int, int], int] = {}
        self._exists_cache: dict[tuple[int, frozenset], int] = {}
        self.names: list[str] = []
        self.index: dict[str, int] = {}
        for n in names:
            self.add_var(n)

    # -- variables ---------------------------------------------------------

    def add_var(self, name: str) -> int:
        if name in self.index:
            return self.index[name]
        self.index[name] = len(self.names)
        self.names.append(name)
        return self.index[name]

    def var(self, name: str) -> int:
        """Reference of the projection function for ``name``."""
        return self._mk(self.index[name], TRUE, FALSE)

    def nvars(self) -> int:
        return len(self.names)

    # -- node plumbing -----------------------------------------------------

    def __len__(self) -> int:
        return len(self._var)

    def _mk(self, v: int, hi: int, lo: int) -> int:
        if hi == lo:
            return hi
        comp = hi & 1
        if comp:
            hi ^= 1
            lo ^= 1
        key = (v, hi, lo)
        n = self._unique.get(key)
        if n is None:
            n = len(self._var)
            if n >= self.node_limit:
                raise BddCapacityError(f"BDD node limit {self.node_limit} exceeded")
            self._var.append(v)
            self._hi.append(hi)
            self._lo.append(lo)
            self._unique[key] = n
        return (n << 1) | comp

    def level(self, f: int) -> int:
        return self._var[f >> 1]

    def top_var(self, f: int) -> int | None:
        return None if f <= 1 else self._var[f >> 1]

    def node_index(self, f: int) -> int:
        return f >> 1

    def is_complemented(self, f: int) -> bool:
        return bool(f & 1)

    def high(self, f: int) -> int:
        return self._hi[f >> 1] ^ (f & 1)

    def low(self, f: int) -> int:
        return self._lo[f >> 1] ^ (f & 1)

    def _cof(self, f: int, v: int) -> tuple[int, int]:
        n = f >> 1
        if self._var[n] != v:
            return f, f
        c = f & 1
        return self._hi[n] ^ c, self._lo[n] ^ c

    # -- algebra -----------------------------------------------------------

    @staticmethod
    def not_(f: int) -> int:
        return f ^ 1

    def and_(self, f: int, g: int) -> int:
        if f == FALSE or g == FALSE or f == g ^ 1:
            return FALSE
        if f == TRUE or f == g:
            return g
        if g == TRUE:
            return f
        if f > g:
            f, g = g, f
        key = (f, g)
        r = self._and_cache.get(key)
        if r is not None:
            return r
        v = min(self._var[f >> 1], self._var[g >> 1])
        f1, f0 = self._cof(f, v)
        g1, g0 = self._cof(g, v)
        r = self._mk(v, self.and_(f1, g1), self.and_(f0, g0))
        self._and_cache[key] = r
        return r

    def or_(self, f: int, g: int) -> int:
        return self.and_(f ^ 1, g ^ 1) ^ 1

    def xor(self, f: int, g: int) -> int:
        if f == g:
            return FALSE
        if f == g ^ 1:
            return TRUE
        if f == FALSE:
            return g
        if g == FALSE:
            return f
        if f == TRUE:
            return g ^ 1
        if g == TRUE:
            return f ^ 1
        # strip complements: xor(~a, b) = ~xor(a, b)
        c = (f & 1) ^ (g & 1)
        f &= ~1
        g &= ~1
        if f > g:
            f, g = g, f
        key = (f, g)
        r = self._xor_cache.get(key)
        if r is None:
            v = min(self._var[f >> 1], self._var[g >> 1])
            f1, f0 = self._cof(f, v)
            g1, g0 = self._cof(g, v)
            r = self._mk(v, self.xor(f1, g1), self.xor(f0, g0))
            self._xor_cache[key] = r
        return r ^ c

    def apply(self, op: str, f: int, g: int) -> int:
        if op == "and":
            return self.and_(f, g)
        if op == "or":
            return self.or_(f, g)
        if op == "xor":
            return self.xor(f, g)
        raise ValueError(f"unknown operator {op!r}")

    def ite(self, c: int, t: int, e: int) -> int:
        if c == TRUE:
            return t
        if c == FALSE:
            return e
        if t == e:
            return t
        if t == TRUE and e == FALSE:
            return c
        if t == FALSE and e == TRUE:
            return c ^ 1
        key = (c, t, e)
        r = self._ite_cache.get(key)
        if r is not None:
            return r
        v = min(self._var[c >> 1], self._var[t >> 1], self._var[e >> 1])
        c1, c0 = self._cof(c, v)
        t1, t0 = self._cof(t, v)
        e1, e0 = self._cof(e, v)
        r = self._mk(v, self.ite(c1, t1, e1), self.ite(c0, t0, e0))
        self._ite_cache[key] = r
        return r

    def conj(self, fs: Iterable[int]) -> int:
        r = TRUE
        for f in fs:
            r = self.and_(r, f)
            if r == FALSE:
                break
        return r

    def disj(self, fs: Iterable[int]) -> int:
        r = FALSE
        for f in fs:
            r = self.or_(r, f)
            if r == TRUE:
                break
        return r

    def implies(self, f: int, g: int) -> bool:
        return self.and_(f, g ^ 1) == FALSE

    def cube(self, assignment: Mapping[str, bool]) -> int:
        r = TRUE
        for name in sorted(assignment, key=lambda n: -self.index[n]):
            v = self.index[name]
            r = self._mk(v, r, FALSE) if assignment[name] else self._mk(v, FALSE, r)
        return r

    def cofactor(self, f: int, name: str, value: bool) -> int:
        return self.restrict_var(f, self.index[name], value)

    def restrict_var(self, f: int, v: int, value: bool) -> int:
        memo: dict[int, int] = {}

        def go(g: int) -> int:
            if g <= 1 or self._var[g >> 1] > v:
                return g
            r = memo.get(g)
            if r is None:
                if self._var[g >> 1] == v:
                    r = self.high(g) if value else self.low(g)
                else:
                    r = self._mk(self._var[g >> 1], go(self.high(g)), go(self.low(g)))
                memo[g] = r
            return r

        return go(f)

    def exists(self, f: int, names: Iterable[str]) -> int:
        vs = frozenset(self.index[n] for n in names)
        return self._exists(f, vs)

    def _exists(self, f: int, vs: frozenset) -> int:
        if f <= 1 or not vs:
            return f
        key = (f, vs)
        r = self._exists_cache.get(key)
        if r is not None:
            return r
        v = self._var[f >> 1]
        if v > max(vs):
            r = f
        else:
            hi = self._exists(self.high(f), vs)
            lo = self._exists(self.low(f), vs)
            r = self.or_(hi, lo) if v in vs else self._mk(v, hi, lo)
        self._exists_cache[key] = r
        return r

    def forall(self, f: int, names: Iterable[str]) -> int:
        return self.exists(f ^ 1, names) ^ 1

    def restrict(self, f: int, care: int) -> int:
        """Sibling-substitution RESTRICT: agrees with ``f`` wherever ``care``.

        Falls back to ``f`` itself when the simplification would not shrink
        the diagram, so the node count never grows.
        """
        if care == FALSE:
            raise ValueError("restrict: care set is empty")
        g = self._restrict(f, care)
        return g if self.node_count(g) <= self.node_count(f) else f

    def _restrict(self, f: int, h: int) -> int:
        if h == TRUE or f <= 1:
            return f
        if f == h:
            return TRUE
        if f == h ^ 1:
            return FALSE
        key = (f, h)
        r = self._restrict_cache.get(key)
        if r is not None:
            return r
        vf = self._var[f >> 1]
        vh = self._var[h >> 1]
        if vh < vf:
            h1, h0 = self._cof(h, vh)
            r = self._restrict(f, self.or_(h1, h0))
        else:
            f1, f0 = self._cof(f, vf)
            h1, h0 = self._cof(h, vf)
            if h0 == FALSE:
                r = self._restrict(f1, h1)
            elif h1 == FALSE:
                r = self._restrict(f0, h0)
            else:
                r = self._mk(vf, self._restrict(f1, h1), self._restrict(f0, h0))
        self._restrict_cache[key] = r
        return r

    # -- queries -----------------------------------------------------------

    def evaluate(self, f: int, assignment: Mapping[str, bool]) -> bool:
        comp = 0
        while f > 1:
            comp ^= f & 1
            n = f >> 1
            f = self._hi[n] if assignment.get(self.names[self._var[n]], False) else self._lo[n]
        return ((f ^ comp) & 1) == 0

    def support(self, f: int) -> set[str]:
        seen: set[int] = set()
        out: set[int] = set()
        stack = [f >> 1]
        while stack:
            n = stack.pop()
            if n == 0 or n in seen:
                continue
            seen.add(n)
            out.add(self._var[n])
            stack.append(self._hi[n] >> 1)
            stack.append(self._lo[n] >> 1)
        return {self.names[v] for v in out}

    def node_count(self, f: int) -> int:
        """Internal nodes reachable from ``f`` (the terminal excluded)."""
        return len(self.nodes(f))

    def nodes(self, f: int) -> list[int]:
        seen: set[int] = set()
        order: list[int] = []
        stack = [f >> 1]
        while stack:
            n = stack.pop()
            if n == 0 or n in seen:
                continue
            seen.add(n)
            order.append(n)
            stack.append(self._hi[n] >> 1)
            stack.append(self._lo[n] >> 1)
        return order

    def sat_count(self, f: int, nvars: int | None = None) -> int:
        n = self.nvars() if nvars is None else nvars
        memo: dict[int, int] = {}

        def count(g: int) -> int:
            # models over variables at levels >= level(g)
            if g == TRUE:
                return 1
            if g == FALSE:
                return 0
            r = memo.get(g)
            if r is None:
                v = self._var[g >> 1]
                hi, lo = self.high(g), self.low(g)
                r = count(hi) * (1 << (self._lvl(hi, n) - v - 1)) + count(lo) * (
                    1 << (self._lvl(lo, n) - v - 1)
                )
                memo[g] = r
            return r

        return count(f) * (1 << self._lvl(f, n))

    def _lvl(self, g: int, n: int) -> int:
        return n if g <= 1 else self._var[g >> 1]

    def pick(self, f: int, names: Sequence[str] | None = None) -> dict[str, bool] | None:
        """One satisfying assignment (lowest-first), or None."""
        if f == FALSE:
            return None
        out: dict[str, bool] = {}
        while f > 1:
            v = self.names[self._var[f >> 1]]
            lo = self.low(f)
            if lo != FALSE:
                out[v] = False
                f = lo
            else:
                out[v] = True
                f = self.high(f)
        if names is not None:
            for n in names:
                out.setdefault(n, False)
        return out

    def cubes(self, f: int) -> Iterator[dict[str, bool]]:
        """Disjoint path cubes of ``f``."""
        path: dict[str, bool] = {}

        def go(g: int):
            if g == FALSE:
                return
            if g == TRUE:
                yield dict(path)
                return
            v = self.names[self._var[g >> 1]]
            path[v] = False
            yield from go(self.low(g))
            path[v] = True
            yield from go(self.high(g))
            del path[v]

        yield from go(f)

    def minterms(self, f: int, names: Sequence[str]) -> Iterator[dict[str, bool]]:
        for cube in self.cubes(f):
            free = [n for n in names if n not in cube]
            for bits in range(1 << len(free)):
                m = dict(cube)
                for i, n in enumerate(free):
                    m[n] = bool(bits >> i & 1)
                yield {n: m.get(n, False) for n in names}

    def from_formula(self, f: ltl.Formula) -> int:
        """Propositional formula (atoms only) to a BDD."""
        k = f.kind
        if k == ltl.TT:
            return TRUE
        if k == ltl.FF:
            return FALSE
        if k == ltl.AP:
            return self.var(f.name)
        if k == ltl.NAP:
            return self.var(f.name) ^ 1
        if k == ltl.NOT:
            return self.from_formula(f.children[0]) ^ 1
        if k == ltl.AND:
            return self.conj(self.from_formula(c) for c in f.children)
        if k == ltl.OR:
            return self.disj(self.from_formula(c) for c in f.children)
        if k == ltl.IMP:
            return self.or_(self.from_formula(f.left) ^ 1, self.from_formula(f.right))
        if k == ltl.IFF:
            return self.xor(self.from_formula(f.left), self.from_formula(f.right)) ^ 1
        raise ValueError(f"not propositional: {f}")

    def to_expr(self, f: int) -> str:
        """A readable sum-of-cubes expression in the surface syntax."""
        if f == TRUE:
            return "true"
        if f == FALSE:
            return "false"
        terms = []
        for cube in self.cubes(f):
            lits = [n if cube[n] else "!" + n for n in sorted(cube, key=self.index.get)]
            terms.append(" & ".join(lits) if lits else "true")
        if len(terms) == 1:
            return terms[0]
        return " | ".join(f"({t})" if " & " in t else t for t in terms)

    def to_dot(self, roots: Mapping[str, int]) -> str:
        lines = ["digraph bdd {", '  n0 [shape=box,label="1"];']
        seen: set[int] = set()
        for name, r in roots.items():
            lines.append(f'  "{name}" [shape=plaintext];')
            style = ",arrowhead=odot" if r & 1 else ""
            lines.append(f'  "{name}" -> n{r >> 1} [style=solid{style}];')
            for n in self.nodes(r):
                if n in seen:
                    continue
                seen.add(n)
                lines.append(f'  n{n} [label="{self.names[self._var[n]]}"];')
                lines.append(f"  n{n} -> n{self._hi[n] >> 1} [style=solid];")
                lo = self._lo[n]
                style = ",arrowhead=odot" if lo & 1 else ""
                lines.append(f"  n{n} -> n{lo >> 1} [style=dashed{style}];")
        lines.append("}")
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# variable ordering


@dataclass
class VarOrder:
    order: list[str]
    groups: dict[str, list[str]] = field(default_factory=dict)

    def position(self, name: str) -> int:
        return self.order.index(name)


def transfer(src: Bdd, dst: Bdd, f: int, memo: dict[int, int] | None = None) -> int:
    """Rebuild ``f`` from ``src`` in ``dst``, matching variables by name."""
    if src is dst:
        return f
    memo = {} if memo is None else memo

    def go(g: int) -> int:
        if g <= 1:
            return g
        n = g & ~1
        if n not in memo:
            name = src.names[src.top_var(n)]
            dst.add_var(name)
            memo[n] = dst.ite(dst.var(name), go(src.high(n)), go(src.low(n)))
        return memo[n] ^ (g & 1)

    return go(f)


def reduction_score(f: ltl.Formula, name: str) -> float:
    base = ltl.size(f)
    pos = ltl.size(ltl.assign(f, {name: True}))
    negv = ltl.size(ltl.assign(f, {name: False}))
    return base - 0.5 * (pos + negv)


def order_variables(f: ltl.Formula, ap_env, ap_sys: Iterable[str] | None = None) -> VarOrder:
    """Environment atoms first, then system atoms; greedy within a group.

    ``ap_env`` may also be an :class:`ltl.Partition` (then ``ap_sys`` is
    taken from it).

    Inside a group, atoms are sorted by how much fixing them shrinks the
    formula (DAG size), larger reductions first, ties by name.
    """
    if isinstance(ap_env, ltl.Partition):
        ap_env, ap_sys = ap_env.ap_env, ap_env.ap_sys
    groups = {}
    order: list[str] = []
    for label, names in (("env", ap_env), ("sys", ap_sys)):
        ranked = sorted(set(names), key=lambda n: (-reduction_score(f, n), n))
        groups[label] = ranked
        order.extend(ranked)
    return VarOrder(order, groups)
