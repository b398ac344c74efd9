"""LTL formulas: interned syntax trees, parsing, NNF, progression, classes.

Formulas are hash-consed: two formulas are structurally equal iff they are
the same object (and share ``id``).  Conjunctions and disjunctions are
n-ary, flattened, deduplicated and sorted by id, so commuted inputs intern
to the same node.

Surface syntax::

    atoms      [a-zA-Z_][a-zA-Z0-9_]*
    constants  true false tt ff
    unary      ! X F G
    binary     U R W  >  &  >  |  >  -> <->

``U``, ``R``, ``W``, ``->`` and ``<->`` associate to the right.
"""
from __future__ import annotations

import enum
import re
import threading
from dataclasses import dataclass, field
from typing import Iterable, Mapping

TT, FF, AP, NAP = "tt", "ff", "ap", "nap"
NOT, AND, OR, IMP, IFF = "not", "and", "or", "imp", "iff"
NEXT, FIN, GLOB, UNTIL, RELEASE, WUNTIL = "X", "F", "G", "U", "R", "W"

TEMPORAL = frozenset({NEXT, FIN, GLOB, UNTIL, RELEASE, WUNTIL})
_BINARY_TEMPORAL = frozenset({UNTIL, RELEASE, WUNTIL})


class Formula:
    """An interned LTL node.  Build through the constructor functions only."""

    __slots__ = ("kind", "name", "children", "id", "_hash", "__weakref__")

    def __init__(self, kind: str, name: str | None, children: tuple, ident: int):
        self.kind = kind
        self.name = name
        self.children = children
        self.id = ident
        self._hash = hash((kind, name, tuple(c.id for c in children)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return self is other

    def __lt__(self, other: "Formula") -> bool:
        return self.id < other.id

    def __repr__(self) -> str:
        return f"Formula({to_string(self)!r})"

    def __str__(self) -> str:
        return to_string(self)

    @property
    def is_literal(self) -> bool:
        return self.kind in (AP, NAP)

    @property
    def is_constant(self) -> bool:
        return self.kind in (TT, FF)

    @property
    def is_temporal(self) -> bool:
        return self.kind in TEMPORAL

    @property
    def left(self) -> "Formula":
        return self.children[0]

    @property
    def right(self) -> "Formula":
        return self.children[-1]


_table: dict[tuple, Formula] = {}
_lock = threading.Lock()


def _intern(kind: str, name: str | None = None, children: tuple = ()) -> Formula:
    key = (kind, name, tuple(c.id for c in children))
    node = _table.get(key)
    if node is not None:
        return node
    with _lock:
        node = _table.get(key)
        if node is None:
            node = Formula(kind, name, children, len(_table))
            _table[key] = node
    return node


tt = _intern(TT)
ff = _intern(FF)


def atom(name: str) -> Formula:
    return _intern(AP, name)


def neg(f: Formula) -> Formula:
    """Negation; folds constants, literals and double negation only."""
    if f is tt:
        return ff
    if f is ff:
        return tt
    if f.kind == AP:
        return _intern(NAP, f.name)
    if f.kind == NAP:
        return atom(f.name)
    if f.kind == NOT:
        return f.children[0]
    return _intern(NOT, None, (f,))


def _complementary(a: Formula, b: Formula) -> bool:
    return a.name == b.name and {a.kind, b.kind} == {AP, NAP}


def _nary(kind: str, args: Iterable[Formula]) -> Formula:
    unit, zero = (tt, ff) if kind == AND else (ff, tt)
    items: set[Formula] = set()
    for a in args:
        if a is zero:
            return zero
        if a is unit:
            continue
        if a.kind == kind:
            items.update(a.children)
        else:
            items.add(a)
    if not items:
        return unit
    lits = {(x.name, x.kind) for x in items if x.is_literal}
    for name, kind_ in lits:
        if (name, NAP if kind_ == AP else AP) in lits:
            return zero
    # absorption against the unfolding of G (for AND) / F (for OR)
    wrap = GLOB if kind == AND else FIN
    dual = FIN if kind == AND else GLOB
    drop = set()
    for x in items:
        if x.kind == wrap and x.children[0] in items:
            drop.add(x.children[0])
        if x.kind == dual and x.children[0] in items:
            drop.add(x)
    # same-kind absorption: a & (a | b) = a
    inner = OR if kind == AND else AND
    for x in items:
        if x.kind == inner and any(c in items for c in x.children):
            drop.add(x)
    items -= drop
    if len(items) == 1:
        return next(iter(items))
    return _intern(kind, None, tuple(sorted(items, key=lambda x: x.id)))


def conj(*args: Formula) -> Formula:
    return _nary(AND, args)


def disj(*args: Formula) -> Formula:
    return _nary(OR, args)


def implies(a: Formula, b: Formula) -> Formula:
    if a is ff or b is tt:
        return tt
    if a is tt:
        return b
    return _intern(IMP, None, (a, b))


def iff(a: Formula, b: Formula) -> Formula:
    if a is b:
        return tt
    if a is tt:
        return b
    if b is tt:
        return a
    if a is ff:
        return neg(b)
    if b is ff:
        return neg(a)
    return _intern(IFF, None, (a, b))


def next_(f: Formula) -> Formula:
    if f.is_constant:
        return f
    return _intern(NEXT, None, (f,))


def eventually(f: Formula) -> Formula:
    if f.is_constant or f.kind == FIN:
        return f
    if f.kind == GLOB and f.children[0].kind == FIN:
        return f
    return _intern(FIN, None, (f,))


def always(f: Formula) -> Formula:
    if f.is_constant or f.kind == GLOB:
        return f
    if f.kind == FIN and f.children[0].kind == GLOB:
        return f
    return _intern(GLOB, None, (f,))


def until(a: Formula, b: Formula) -> Formula:
    if b.is_constant or a is ff or a is b:
        return b
    if a is tt:
        return eventually(b)
    return _intern(UNTIL, None, (a, b))


def release(a: Formula, b: Formula) -> Formula:
    if b.is_constant or a is tt or a is b:
        return b
    if a is ff:
        return always(b)
    return _intern(RELEASE, None, (a, b))


def weak_until(a: Formula, b: Formula) -> Formula:
    if b is tt or a is tt:
        return tt
    if a is ff or a is b:
        return b
    if b is ff:
        return always(a)
    return _intern(WUNTIL, None, (a, b))


def rebuild(f: Formula, children: Iterable[Formula]) -> Formula:
    """Re-create ``f`` with new children through the smart constructors."""
    ch = tuple(children)
    k = f.kind
    if k == AND:
        return conj(*ch)
    if k == OR:
        return disj(*ch)
    if k == NOT:
        return neg(ch[0])
    if k == NEXT:
        return next_(ch[0])
    if k == FIN:
        return eventually(ch[0])
    if k == GLOB:
        return always(ch[0])
    if k == UNTIL:
        return until(*ch)
    if k == RELEASE:
        return release(*ch)
    if k == WUNTIL:
        return weak_until(*ch)
    if k == IMP:
        return implies(*ch)
    if k == IFF:
        return iff(*ch)
    return f


@dataclass(frozen=True)
class Partition:
    """Split of the atomic propositions between environment and system."""

    ap_env: tuple[str, ...]
    ap_sys: tuple[str, ...]

    def __post_init__(self):
        overlap = set(self.ap_env) & set(self.ap_sys)
        if overlap:
            raise ValueError(f"propositions on both sides: {sorted(overlap)}")

    @classmethod
    def of(cls, ins: Iterable[str], outs: Iterable[str]) -> "Partition":
        return cls(tuple(dict.fromkeys(ins)), tuple(dict.fromkeys(outs)))

    def covers(self, f: "Formula") -> bool:
        return atoms(f) <= set(self.ap_env) | set(self.ap_sys)

    def owner(self, name: str) -> str:
        return "env" if name in self.ap_env else "sys"


# --------------------------------------------------------------------------
# parsing and printing


class LtlSyntaxError(ValueError):
    """Malformed formula text.  ``offset`` is 1-based (column of the fault)."""

    def __init__(self, text: str, offset: int, expected: Iterable[str]):
        self.text = text
        self.offset = offset
        self.expected = sorted(set(expected))
        super().__init__(
            f"syntax error at offset {offset}: expected one of {', '.join(self.expected)}"
        )


_TOKEN = re.compile(r"\s*(?:(<->|->|[!&|()~])|([A-Za-z_][A-Za-z0-9_]*))")
_KEYWORDS = {"true", "false", "tt", "ff", "X", "F", "G", "U", "R", "W"}
_PRIMARY = ["(", "!", "X", "F", "G", "true", "false", "atom"]


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                if text[pos:].strip() == "":
                    break
                raise LtlSyntaxError(text, pos + 1, ["token"])
            start = m.start(1) if m.group(1) else m.start(2)
            if m.group(1):
                tok = m.group(1)
                self.tokens.append((tok if tok != "~" else "!", tok, start))
            else:
                word = m.group(2)
                self.tokens.append((word if word in _KEYWORDS else "atom", word, start))
            pos = m.end()
        self.end = len(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def fail(self, expected: Iterable[str]):
        off = self.tokens[self.i][2] if self.i < len(self.tokens) else self.end
        raise LtlSyntaxError(self.text, off + 1, expected)

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.expr()
        if self.peek() is not None:
            self.fail(["end of input", "&", "|", "->", "<->", "U", "R", "W", ")"])
        return f

    def expr(self) -> Formula:
        lhs = self.disjunction()
        if self.peek() in ("->", "<->"):
            op = self.take()[0]
            rhs = self.expr()
            return implies(lhs, rhs) if op == "->" else iff(lhs, rhs)
        return lhs

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conjunction())
        return disj(*parts)

    def conjunction(self) -> Formula:
        parts = [self.binary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.binary())
        return conj(*parts)

    def binary(self) -> Formula:
        lhs = self.unary()
        op = self.peek()
        if op in ("U", "R", "W"):
            self.take()
            rhs = self.binary()
            return {"U": until, "R": release, "W": weak_until}[op](lhs, rhs)
        return lhs

    def unary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            self.fail(_PRIMARY)
        kind, word, _ = self.take()
        if kind == "!":
            return neg(self.unary())
        if kind == "X":
            return next_(self.unary())
        if kind == "F":
            return eventually(self.unary())
        if kind == "G":
            return always(self.unary())
        if kind in ("true", "tt"):
            return tt
        if kind in ("false", "ff"):
            return ff
        if kind == "atom":
            return atom(word)
        if kind == "(":
            inner = self.expr()
            if self.peek() != ")":
                self.fail([")", "&", "|", "->", "<->", "U", "R", "W"])
            self.take()
            return inner
        self.i -= 1
        self.fail(_PRIMARY)


def parse(text: str) -> Formula:
    """Parse surface syntax into an interned formula."""
    return _Parser(text).parse()


_PREC = {IFF: 1, IMP: 1, OR: 2, AND: 3, UNTIL: 4, RELEASE: 4, WUNTIL: 4}
_OPSYM = {AND: " & ", OR: " | ", IMP: " -> ", IFF: " <-> ", UNTIL: " U ", RELEASE: " R ", WUNTIL: " W "}


def to_string(f: Formula) -> str:
    k = f.kind
    if k == TT:
        return "true"
    if k == FF:
        return "false"
    if k == AP:
        return f.name
    if k == NAP:
        return "!" + f.name
    if k in (NOT, NEXT, FIN, GLOB):
        sym = "!" if k == NOT else k
        child = f.children[0]
        inner = to_string(child)
        if child.kind in _PREC:
            return f"{sym}({inner})" if k == NOT else f"{sym} ({inner})"
        return f"{sym}{inner}" if k == NOT else f"{sym} {inner}"
    parts = []
    for c in f.children:
        s = to_string(c)
        parts.append(f"({s})" if c.kind in _PREC else s)
    return _OPSYM[k].join(parts)


# --------------------------------------------------------------------------
# traversal helpers


_subformulas: dict[int, tuple[Formula, ...]] = {}


def subformulas(f: Formula) -> list[Formula]:
    """All distinct nodes of ``f`` (DAG), children before parents."""
    hit = _subformulas.get(f.id)
    if hit is None:
        hit = _subformulas[f.id] = tuple(_walk(f))
    return list(hit)


def _walk(f: Formula) -> list[Formula]:
    seen: dict[int, Formula] = {}
    stack = [(f, False)]
    while stack:
        g, done = stack.pop()
        if g.id in seen:
            continue
        if done:
            seen[g.id] = g
            continue
        stack.append((g, True))
        for c in g.children:
            if c.id not in seen:
                stack.append((c, False))
    return list(seen.values())


def size(f: Formula) -> int:
    """DAG size: number of distinct subformulas."""
    return len(subformulas(f))


def atoms(f: Formula) -> set[str]:
    return {g.name for g in subformulas(f) if g.kind in (AP, NAP)}


def substitute(f: Formula, mapping: Mapping[Formula, Formula]) -> Formula:
    """Replace whole subformulas (matched by identity), bottom-up."""
    memo: dict[int, Formula] = {}

    def go(g: Formula) -> Formula:
        if g in mapping:
            return mapping[g]
        r = memo.get(g.id)
        if r is None:
            r = rebuild(g, (go(c) for c in g.children)) if g.children else g
            memo[g.id] = r
        return r

    return go(f)


def assign(f: Formula, values: Mapping[str, bool]) -> Formula:
    """Replace atoms everywhere (all time points) by constants."""
    mapping: dict[Formula, Formula] = {}
    for name, v in values.items():
        mapping[atom(name)] = tt if v else ff
        mapping[_intern(NAP, name)] = ff if v else tt
    return substitute(f, mapping)


# --------------------------------------------------------------------------
# negation normal form

_nnf_cache: dict[tuple[int, bool], Formula] = {}


def to_nnf(f: Formula) -> Formula:
    """Push negations to the atoms; remove -> and <->."""
    return _nnf(f, False)


def _nnf(f: Formula, negate: bool) -> Formula:
    key = (f.id, negate)
    r = _nnf_cache.get(key)
    if r is not None:
        return r
    k = f.kind
    if k in (TT, FF, AP, NAP):
        r = neg(f) if negate else f
    elif k == NOT:
        r = _nnf(f.children[0], not negate)
    elif k == AND:
        parts = [_nnf(c, negate) for c in f.children]
        r = disj(*parts) if negate else conj(*parts)
    elif k == OR:
        parts = [_nnf(c, negate) for c in f.children]
        r = conj(*parts) if negate else disj(*parts)
    elif k == IMP:
        a, b = f.children
        r = conj(_nnf(a, False), _nnf(b, True)) if negate else disj(_nnf(a, True), _nnf(b, False))
    elif k == IFF:
        a, b = f.children
        pa, na, pb, nb = _nnf(a, False), _nnf(a, True), _nnf(b, False), _nnf(b, True)
        if negate:
            r = disj(conj(pa, nb), conj(na, pb))
        else:
            r = disj(conj(pa, pb), conj(na, nb))
    elif k == NEXT:
        r = next_(_nnf(f.children[0], negate))
    elif k == FIN:
        c = _nnf(f.children[0], negate)
        r = always(c) if negate else eventually(c)
    elif k == GLOB:
        c = _nnf(f.children[0], negate)
        r = eventually(c) if negate else always(c)
    elif k == UNTIL:
        a, b = f.children
        r = release(_nnf(a, True), _nnf(b, True)) if negate else until(_nnf(a, False), _nnf(b, False))
    elif k == RELEASE:
        a, b = f.children
        r = until(_nnf(a, True), _nnf(b, True)) if negate else release(_nnf(a, False), _nnf(b, False))
    elif k == WUNTIL:
        a, b = f.children
        if negate:
            nb = _nnf(b, True)
            r = until(nb, conj(_nnf(a, True), nb))
        else:
            r = weak_until(_nnf(a, False), _nnf(b, False))
    else:  # pragma: no cover
        raise ValueError(f"unknown node kind {k}")
    _nnf_cache[key] = r
    return r


def is_nnf(f: Formula) -> bool:
    return all(g.kind not in (NOT, IMP, IFF) for g in subformulas(f))


# --------------------------------------------------------------------------
# progression
#
# after(f, letter) = step(cofactor*(unfold(f), letter)).  unfold rewrites
# every temporal operator into its present part plus X-obligations; the
# cofactors fix present-time atoms; step strips the X of the remaining
# obligations.

_unfold_cache: dict[int, Formula] = {}
_cofactor_cache: dict[tuple[int, str, bool], Formula] = {}
_step_cache: dict[int, Formula] = {}


def unfold(f: Formula) -> Formula:
    r = _unfold_cache.get(f.id)
    if r is not None:
        return r
    k = f.kind
    if k in (TT, FF, AP, NAP, NEXT):
        r = f
    elif k == AND:
        r = conj(*(unfold(c) for c in f.children))
    elif k == OR:
        r = disj(*(unfold(c) for c in f.children))
    elif k == FIN:
        r = disj(unfold(f.children[0]), next_(f))
    elif k == GLOB:
        r = conj(unfold(f.children[0]), next_(f))
    elif k == UNTIL:
        a, b = f.children
        r = disj(unfold(b), conj(unfold(a), next_(f)))
    elif k == WUNTIL:
        a, b = f.children
        r = disj(unfold(b), conj(unfold(a), next_(f)))
    elif k == RELEASE:
        a, b = f.children
        r = conj(unfold(b), disj(unfold(a), next_(f)))
    else:
        raise ValueError("unfold expects a formula in negation normal form")
    _unfold_cache[f.id] = r
    return r


def cofactor(u: Formula, name: str, value: bool) -> Formula:
    """Fix a present-time atom in an unfolded formula (X-bodies untouched)."""
    key = (u.id, name, value)
    r = _cofactor_cache.get(key)
    if r is not None:
        return r
    k = u.kind
    if k == AP:
        r = (tt if value else ff) if u.name == name else u
    elif k == NAP:
        r = (ff if value else tt) if u.name == name else u
    elif k in (AND, OR):
        r = rebuild(u, (cofactor(c, name, value) for c in u.children))
    else:
        r = u
    _cofactor_cache[key] = r
    return r


def present_atoms(u: Formula) -> set[str]:
    """Atoms of an unfolded formula that are not under X."""
    out: set[str] = set()
    stack = [u]
    while stack:
        g = stack.pop()
        if g.kind in (AP, NAP):
            out.add(g.name)
        elif g.kind in (AND, OR):
            stack.extend(g.children)
    return out


def step(u: Formula) -> Formula:
    """Advance time: replace each X-obligation by its body."""
    r = _step_cache.get(u.id)
    if r is not None:
        return r
    k = u.kind
    if k in (TT, FF):
        r = u
    elif k == NEXT:
        r = u.children[0]
    elif k in (AND, OR):
        r = rebuild(u, (step(c) for c in u.children))
    else:
        raise ValueError(f"present-time atom {to_string(u)} left unassigned")
    _step_cache[u.id] = r
    return r


def after(f: Formula, letter: Mapping[str, bool]) -> Formula:
    """Progress ``f`` through one letter.

    Atoms missing from ``letter`` stay symbolic: if any present-time atom is
    unassigned, the result is the partially evaluated unfolding (still in
    the current time step); otherwise time advances.
    """
    u = unfold(f)
    for name in sorted(present_atoms(u)):
        if name in letter:
            u = cofactor(u, name, bool(letter[name]))
    if present_atoms(u):
        return u
    return step(u)


# --------------------------------------------------------------------------
# syntactic classes


class LtlClass(str, enum.Enum):
    SAFETY = "safety"
    COSAFETY = "cosafety"
    BUCHI = "buchi"
    COBUCHI = "cobuchi"
    NONE = "none"


_class_cache: dict[tuple[int, str], bool] = {}


def _member(f: Formula, cls: str) -> bool:
    key = (f.id, cls)
    r = _class_cache.get(key)
    if r is not None:
        return r
    k = f.kind
    if k in (TT, FF, AP, NAP):
        r = True
    elif k in (AND, OR, NEXT):
        r = all(_member(c, cls) for c in f.children)
    elif cls == "pi1":
        r = k in (GLOB, RELEASE, WUNTIL) and all(_member(c, "pi1") for c in f.children)
    elif cls == "sigma1":
        r = k in (FIN, UNTIL) and all(_member(c, "sigma1") for c in f.children)
    elif cls == "pi2":
        if _member(f, "sigma1"):
            r = True
        elif k in (GLOB, RELEASE, WUNTIL):
            r = all(_member(c, "pi2") for c in f.children)
        elif k == UNTIL:
            r = _member(f.left, "pi2") and _member(f.right, "sigma1")
        else:
            r = False
    elif cls == "sigma2":
        if _member(f, "pi1"):
            r = True
        elif k in (FIN, UNTIL):
            r = all(_member(c, "sigma2") for c in f.children)
        elif k == RELEASE:
            r = _member(f.left, "sigma2") and _member(f.right, "pi1")
        elif k == WUNTIL:
            r = _member(f.left, "pi1") and _member(f.right, "sigma2")
        else:
            r = False
    else:
        r = False
    _class_cache[key] = r
    return r


def syntactic_class(f: Formula) -> LtlClass:
    """Smallest Manna-Pnueli class of ``f`` by grammar membership."""
    if not is_nnf(f):
        f = to_nnf(f)
    if _member(f, "pi1"):
        return LtlClass.SAFETY
    if _member(f, "sigma1"):
        return LtlClass.COSAFETY
    if _member(f, "pi2"):
        return LtlClass.BUCHI
    if _member(f, "sigma2"):
        return LtlClass.COBUCHI
    return LtlClass.NONE


def is_safety(f: Formula) -> bool:
    return _member(f, "pi1")


def is_cosafety(f: Formula) -> bool:
    return _member(f, "sigma1")


def is_buchi(f: Formula) -> bool:
    return _member(f, "pi2")


def is_cobuchi(f: Formula) -> bool:
    return _member(f, "sigma2")


# --------------------------------------------------------------------------
# normalization


class Unsupported(ValueError):
    """Formula outside the fragment handled by :func:`normalize`."""

    def __init__(self, sub: Formula):
        self.subformula = sub
        super().__init__(f"cannot normalize subformula {to_string(sub)}")


@dataclass(frozen=True)
class Leaf:
    formula: Formula
    cls: LtlClass
    positive: bool = True


@dataclass
class NormalForm:
    """Positive boolean combination over leaf automata.

    ``combination`` uses the internal atoms ``@0``, ``@1``, ...; a negated
    literal ``!@i`` means leaf ``i`` must be rejected (co-Büchi use of a
    Büchi leaf).
    """

    combination: Formula
    leaves: list[Leaf] = field(default_factory=list)

    def reconstruct(self) -> Formula:
        mapping = {}
        for i, leaf in enumerate(self.leaves):
            mapping[leaf_atom(i)] = leaf.formula
            mapping[neg(leaf_atom(i))] = to_nnf(neg(leaf.formula))
        return substitute(self.combination, mapping)


def leaf_atom(i: int) -> Formula:
    return atom(f"@{i}")


def leaf_index(lit: Formula) -> int:
    return int(lit.name[1:])


def _rewrite(f: Formula) -> Formula:
    """Bottom-up language-preserving rewrites that expose classifiable leaves."""
    memo: dict[int, Formula] = {}

    def go(g: Formula) -> Formula:
        r = memo.get(g.id)
        if r is not None:
            return r
        r = rebuild(g, (go(c) for c in g.children)) if g.children else g
        k = r.kind
        if k in (FIN, GLOB, NEXT):
            c = r.children[0]
            inf_often = c.kind == GLOB and c.children[0].kind == FIN
            persistent = c.kind == FIN and c.children[0].kind == GLOB
            if inf_often or persistent:
                # F GF p = G GF p = X GF p = GF p, likewise for FG p
                r = c
            elif k == GLOB and c.kind == FIN and c.children[0].kind == GLOB:
                r = c
        memo[g.id] = r
        return r

    return go(f)


def _distribute(f: Formula) -> Formula | None:
    """One distribution step lifting boolean structure over a temporal node."""
    k = f.kind
    if k == NEXT and f.children[0].kind in (AND, OR):
        c = f.children[0]
        return rebuild(c, (next_(x) for x in c.children))
    if k == GLOB:
        c = f.children[0]
        if c.kind == AND:
            return conj(*(always(x) for x in c.children))
        if c.kind == FIN and c.children[0].kind == OR:
            return disj(*(always(eventually(x)) for x in c.children[0].children))
    if k == FIN:
        c = f.children[0]
        if c.kind == OR:
            return disj(*(eventually(x) for x in c.children))
        if c.kind == GLOB and c.children[0].kind == AND:
            return conj(*(eventually(always(x)) for x in c.children[0].children))
    if k == UNTIL:
        a, b = f.children
        if b.kind == OR:
            return disj(*(until(a, x) for x in b.children))
        if a.kind == AND:
            return conj(*(until(x, b) for x in a.children))
    if k == RELEASE:
        a, b = f.children
        if b.kind == AND:
            return conj(*(release(a, x) for x in b.children))
        if a.kind == OR:
            return disj(*(release(x, b) for x in a.children))
    return None


def normalize(f: Formula) -> NormalForm:
    """Split ``f`` into a positive combination of classified leaves.

    Leaves are safety, co-safety or Büchi formulas; co-Büchi parts are kept
    as negated Büchi leaves (``FG p`` becomes ``!GF !p``).
    """
    f = _rewrite(to_nnf(f))
    leaves: list[Leaf] = []
    index: dict[tuple[int, bool], int] = {}

    def leaf(g: Formula, cls: LtlClass, positive: bool) -> Formula:
        key = (g.id, positive)
        if key not in index:
            index[key] = len(leaves)
            leaves.append(Leaf(g, cls, positive))
        lit = leaf_atom(index[key])
        return lit if positive else neg(lit)

    def decompose(g: Formula) -> Formula:
        if g.is_constant:
            return g
        if g.kind in (AND, OR):
            return rebuild(g, (decompose(c) for c in g.children))
        if _member(g, "pi1"):
            return leaf(g, LtlClass.SAFETY, True)
        if _member(g, "sigma1"):
            return leaf(g, LtlClass.COSAFETY, True)
        if _member(g, "pi2"):
            return leaf(g, LtlClass.BUCHI, True)
        if _member(g, "sigma2"):
            return leaf(_rewrite(to_nnf(neg(g))), LtlClass.BUCHI, False)
        d = _distribute(g)
        if d is None or d is g:
            raise Unsupported(g)
        return decompose(_rewrite(d))

    return NormalForm(decompose(f), leaves)
