"""And-inverter graph synthesis from Mealy machines.

States get bit codes (semantic or binary), every latch and output becomes
a BDD over latches and inputs, and the BDDs are lowered to and-gates with
structural hashing.  Circuits are written and read as ASCII AIGER.
"""
from __future__ import annotations

import itertools
import math
import shlex
import subprocess
from dataclasses import dataclass, field
from typing import Sequence

from . import ltl
from .automata import DpaState
from .bdd import FALSE, TRUE, Bdd, transfer
from .mealy import MealyMachine, MinimizationBudgetExceeded, bisim_reduce, cubify, minimize

SEMANTIC = "semantic"
BINARY = "binary"


class MissingLabels(ValueError):
    """Semantic encoding needs every state labelled with a DPA state."""


class CircuitError(RuntimeError):
    pass


def _bits(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> i) & 1 for i in range(width))


def _width(n: int) -> int:
    return 0 if n <= 1 else math.ceil(math.log2(n))


@dataclass
class StateEncoding:
    width: int
    codes: list[tuple[int, ...]]
    mode: str
    names: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.names:
            self.names = [f"b{i}" for i in range(self.width)]

    def distinct(self) -> bool:
        return len(set(self.codes)) == len(self.codes)

    def drop(self, bit: int) -> "StateEncoding":
        keep = [i for i in range(self.width) if i != bit]
        return StateEncoding(self.width - 1, [tuple(c[i] for i in keep) for c in self.codes], self.mode,
                             [self.names[i] for i in keep])

    def shifted(self, initial: int) -> "StateEncoding":
        """XOR every code with the initial one so the initial code is all zero."""
        base = self.codes[initial]
        codes = [tuple(a ^ b for a, b in zip(c, base)) for c in self.codes]
        return StateEncoding(self.width, codes, self.mode, list(self.names))


def encode_binary(machine: MealyMachine) -> StateEncoding:
    w = _width(machine.n_states)
    return StateEncoding(w, [_bits(q, w) for q in range(machine.n_states)], BINARY)


def encode_semantic(machine: MealyMachine) -> StateEncoding:
    """Bits for the combination id, subformula presence per sub-automaton, and a dedup counter."""
    labels = machine.labels
    if len(labels) != machine.n_states or not all(isinstance(x, DpaState) for x in labels):
        raise MissingLabels("semantic encoding needs DPA state labels")
    combos: dict[int, int] = {}
    for s in labels:
        combos.setdefault(s.dela.combination.id, len(combos))
    cw = _width(len(combos))
    names = [f"comb{i}" for i in range(cw)]

    # one bit per (sub-automaton, role, subformula) ever seen
    present: list[dict[tuple[int, int, int], int]] = []
    keys: dict[tuple[int, int, int], int] = {}
    for s in labels:
        row = {}
        for j, sub in enumerate(s.dela.subs):
            if sub is None:
                continue
            for role, f in enumerate(sub.formulas()):
                for g in ltl.subformulas(f):
                    key = (j, role, g.id)
                    if key not in keys:
                        keys[key] = len(keys)
                        names.append(f"s{j}{'mb'[role]}:{g}")
                    row[key] = 1
        present.append(row)
    order = sorted(keys, key=keys.get)
    codes = []
    for s, row in zip(labels, present):
        cid = _bits(combos[s.dela.combination.id], cw)
        codes.append(cid + tuple(row.get(k, 0) for k in order))

    groups: dict[tuple[int, ...], list[int]] = {}
    for q, c in enumerate(codes):
        groups.setdefault(c, []).append(q)
    dw = _width(max(len(g) for g in groups.values()))
    slot = {q: i for g in groups.values() for i, q in enumerate(g)}
    codes = [c + _bits(slot[q], dw) for q, c in enumerate(codes)]
    names += [f"dedup{i}" for i in range(dw)]
    return StateEncoding(len(names), codes, SEMANTIC, names)


def compress_encoding(enc: StateEncoding) -> StateEncoding:
    """Greedily drop bits while codes stay pairwise distinct.

    The candidate separating the fewest state pairs goes first (ties by
    position); the result admits no further single-bit removal.
    """
    if not enc.distinct():
        raise ValueError("codes are not distinct")
    while True:
        best = None
        for i in range(enc.width):
            ones = sum(c[i] for c in enc.codes)
            sep = ones * (len(enc.codes) - ones)
            if best is not None and sep >= best[0]:
                continue
            if enc.drop(i).distinct():
                best = (sep, i)
        if best is None:
            return enc
        enc = enc.drop(best[1])


def is_locally_maximal(enc: StateEncoding) -> bool:
    return enc.distinct() and not any(enc.drop(i).distinct() for i in range(enc.width))


# --------------------------------------------------------------------------
# circuits


@dataclass
class AigCircuit:
    """Literals follow AIGER: ``2*var + negated``, 0 is false and 1 true."""

    inputs: list[str]
    latches: list[tuple[int, int]]  # (latch literal, next literal), reset to 0
    outputs: list[tuple[str, int]]
    ands: list[tuple[int, int, int]]
    latch_names: list[str] = field(default_factory=list)

    @property
    def max_var(self) -> int:
        lits = [2 * len(self.inputs)] + [l for l, _ in self.latches] + [a for a, _, _ in self.ands]
        return max(lits) // 2

    @property
    def size(self) -> int:
        return len(self.latches) + len(self.ands)

    def validate(self) -> None:
        defined = {0} | {2 * (i + 1) for i in range(len(self.inputs))} | {l for l, _ in self.latches}
        for lhs, a, b in self.ands:
            for x in (a, b):
                if x & ~1 not in defined:
                    raise CircuitError(f"gate {lhs} uses undefined literal {x}")
            if lhs in defined or lhs & 1:
                raise CircuitError(f"bad gate output {lhs}")
            defined.add(lhs)
        for _, nxt in self.latches:
            if nxt & ~1 not in defined:
                raise CircuitError(f"latch next {nxt} undefined")
        for _, o in self.outputs:
            if o & ~1 not in defined:
                raise CircuitError(f"output {o} undefined")

    def step(self, state: Sequence[int], letter: dict[str, bool]) -> tuple[dict[str, bool], tuple[int, ...]]:
        val = {0: 0}
        for i, n in enumerate(self.inputs):
            val[2 * (i + 1)] = int(bool(letter.get(n, False)))
        for (l, _), v in zip(self.latches, state):
            val[l] = v

        def lit(x: int) -> int:
            return val[x & ~1] ^ (x & 1)

        for lhs, a, b in self.ands:
            val[lhs] = lit(a) & lit(b)
        out = {n: bool(lit(o)) for n, o in self.outputs}
        return out, tuple(lit(n) for _, n in self.latches)

    def initial_state(self) -> tuple[int, ...]:
        return tuple(0 for _ in self.latches)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AigCircuit):
            return NotImplemented
        return (self.inputs, self.latches, self.outputs, self.ands) == \
            (other.inputs, other.latches, other.outputs, other.ands)


class AigBuilder:
    """Structurally hashed and-gates over a fixed set of input and latch vars."""

    def __init__(self, n_inputs: int, n_latches: int):
        self.next_var = n_inputs + n_latches + 1
        self.gates: dict[tuple[int, int], int] = {}
        self.ands: list[tuple[int, int, int]] = []

    def and_(self, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        if a == 0 or a == b ^ 1:
            return 0
        if a == 1 or a == b:
            return b
        key = (a, b)
        g = self.gates.get(key)
        if g is None:
            g = 2 * self.next_var
            self.next_var += 1
            self.gates[key] = g
            self.ands.append((g, b, a))
        return g

    def or_(self, a: int, b: int) -> int:
        return self.and_(a ^ 1, b ^ 1) ^ 1

    def ite(self, c: int, t: int, e: int) -> int:
        if t == e:
            return t
        if t == 1:
            return self.or_(c, e)
        if t == 0:
            return self.and_(c ^ 1, e)
        if e == 1:
            return self.or_(c ^ 1, t)
        if e == 0:
            return self.and_(c, t)
        if t == e ^ 1:
            return self.and_(self.and_(c, e) ^ 1, self.and_(c ^ 1, t) ^ 1)  # xnor form
        return self.or_(self.and_(c, t), self.and_(c ^ 1, e))


def bdd_to_aig(store: Bdd, f: int, builder: AigBuilder, var_lit: dict[int, int],
               memo: dict[int, int] | None = None) -> int:
    """Shannon lowering, memoized per regular node; complement edges become inverters."""
    memo = {} if memo is None else memo

    def go(g: int) -> int:
        if g == TRUE:
            return 1
        if g == FALSE:
            return 0
        n = g & ~1
        if n not in memo:
            v = store.top_var(n)
            memo[n] = builder.ite(var_lit[v], go(store.high(n)), go(store.low(n)))
        return memo[n] ^ (g & 1)

    return go(f)


def _cube_value(store: Bdd, cube: int, name: str) -> bool:
    """Value of ``name`` in a cube; unconstrained atoms read as false."""
    return store.cofactor(cube, name, False) == FALSE


def circuit_functions(machine: MealyMachine, enc: StateEncoding) -> tuple[Bdd, list[int], list[int], int]:
    """Latch-next and output BDDs over (latches, inputs), already restricted to reachable codes."""
    if len(enc.codes) != machine.n_states or not enc.distinct():
        raise ValueError("encoding must give distinct codes to all states")
    if not machine.is_successor_deterministic() or not machine.has_cube_outputs():
        raise ValueError("machine must be successor deterministic with cube outputs")
    latches = [f"l{i}" for i in range(enc.width)]
    store = Bdd(latches + list(machine.inputs))
    memo: dict[int, int] = {}
    src = machine.store

    def code_cube(q: int) -> int:
        return store.cube({n: bool(b) for n, b in zip(latches, enc.codes[q])})

    nxt = [FALSE] * enc.width
    outs = [FALSE] * len(machine.outputs)
    reach = FALSE
    for q in machine.reachable():
        here = code_cube(q)
        reach = store.or_(reach, here)
        for t in machine.transitions[q]:
            cond = store.and_(here, transfer(src, store, t.guard, memo))
            for i, b in enumerate(enc.codes[t.succ]):
                if b:
                    nxt[i] = store.or_(nxt[i], cond)
            for k, o in enumerate(machine.outputs):
                if _cube_value(src, t.output, o):
                    outs[k] = store.or_(outs[k], cond)
    nxt = [store.restrict(f, reach) for f in nxt]
    outs = [store.restrict(f, reach) for f in outs]
    return store, nxt, outs, reach


def build_circuit(machine: MealyMachine, enc: StateEncoding) -> AigCircuit:
    """Circuit with one latch per code bit; the initial state must have the zero code."""
    if any(enc.codes[machine.initial]):
        raise ValueError("initial state must be encoded as all zeros")
    store, nxt, outs, _ = circuit_functions(machine, enc)
    n_in, n_l = len(machine.inputs), enc.width
    var_lit = {store.index[f"l{i}"]: 2 * (n_in + 1 + i) for i in range(n_l)}
    var_lit.update({store.index[n]: 2 * (k + 1) for k, n in enumerate(machine.inputs)})
    b = AigBuilder(n_in, n_l)
    memo: dict[int, int] = {}
    nl = [bdd_to_aig(store, f, b, var_lit, memo) for f in nxt]
    ol = [bdd_to_aig(store, f, b, var_lit, memo) for f in outs]
    c = AigCircuit(list(machine.inputs), [(2 * (n_in + 1 + i), nl[i]) for i in range(n_l)],
                   list(zip(machine.outputs, ol)), b.ands, list(enc.names))
    return prune(c)


def prune(c: AigCircuit) -> AigCircuit:
    """Drop gates outside the cone of influence and number the rest consecutively."""
    by_lhs = {g[0]: g for g in c.ands}
    live: set[int] = set()
    stack = [x & ~1 for _, x in c.latches] + [x & ~1 for _, x in c.outputs]
    while stack:
        x = stack.pop()
        if x in by_lhs and x not in live:
            live.add(x)
            stack.extend(y & ~1 for y in by_lhs[x][1:])
    base = len(c.inputs) + len(c.latches) + 1
    ren: dict[int, int] = {}
    ands = []
    for lhs, a, b in c.ands:
        if lhs in live:
            ren[lhs] = 2 * (base + len(ren))

    def m(x: int) -> int:
        return ren.get(x & ~1, x & ~1) | (x & 1)

    for lhs, a, b in c.ands:
        if lhs in live:
            a, b = m(a), m(b)
            ands.append((ren[lhs], max(a, b), min(a, b)))
    return AigCircuit(list(c.inputs), [(l, m(n)) for l, n in c.latches], [(o, m(x)) for o, x in c.outputs],
                      ands, list(c.latch_names))


# --------------------------------------------------------------------------
# ASCII AIGER


def write_aag(c: AigCircuit) -> str:
    lines = [f"aag {c.max_var} {len(c.inputs)} {len(c.latches)} {len(c.outputs)} {len(c.ands)}"]
    lines += [str(2 * (i + 1)) for i in range(len(c.inputs))]
    lines += [f"{l} {n}" for l, n in c.latches]
    lines += [str(o) for _, o in c.outputs]
    lines += [f"{a} {b} {d}" for a, b, d in c.ands]
    lines += [f"i{i} {n}" for i, n in enumerate(c.inputs)]
    lines += [f"l{i} {n}" for i, n in enumerate(c.latch_names) if i < len(c.latches)]
    lines += [f"o{i} {n}" for i, (n, _) in enumerate(c.outputs)]
    return "\n".join(lines) + "\n"


def parse_aag(text: str) -> AigCircuit:
    rows = text.splitlines()
    head = rows[0].split()
    if len(head) < 6 or head[0] != "aag":
        raise CircuitError("not an ASCII AIGER file")
    _, i, l, o, a = map(int, head[1:6])
    pos = 1
    in_lits = [int(rows[pos + k]) for k in range(i)]
    pos += i
    latches = []
    for k in range(l):
        parts = list(map(int, rows[pos + k].split()))
        if len(parts) > 2 and parts[2] != 0:
            raise CircuitError("only zero-initialized latches are supported")
        latches.append((parts[0], parts[1]))
    pos += l
    outs = [int(rows[pos + k]) for k in range(o)]
    pos += o
    ands = [tuple(map(int, rows[pos + k].split())) for k in range(a)]
    pos += a
    if in_lits != [2 * (k + 1) for k in range(i)]:
        raise CircuitError("inputs must be numbered 2, 4, ...")
    names = {"i": [f"i{k}" for k in range(i)], "l": [f"l{k}" for k in range(l)], "o": [f"o{k}" for k in range(o)]}
    for row in rows[pos:]:
        if row.startswith("c"):
            break
        if row[:1] in names and " " in row:
            idx, name = row[1:].split(" ", 1)
            names[row[0]][int(idx)] = name
    c = AigCircuit(names["i"], latches, list(zip(names["o"], outs)), [tuple(g) for g in ands], names["l"])
    c.validate()
    return c


# --------------------------------------------------------------------------
# portfolio

CONFIGS: tuple[tuple[bool, str], ...] = (
    (True, SEMANTIC),
    (True, BINARY),
    (False, SEMANTIC),
    (False, BINARY),
)


def config_name(i: int) -> str:
    minimized, mode = CONFIGS[i]
    return f"{'min' if minimized else 'nomin'}-{mode}"


def run_optimizer(c: AigCircuit, command: str, timeout: float | None = None) -> AigCircuit:
    """Pipe the circuit through an external optimizer.

    ``{in}`` and ``{out}`` in the command are replaced by temporary file
    names; without them the AAG text goes through stdin and stdout.
    """
    import tempfile

    text = write_aag(c)
    with tempfile.TemporaryDirectory() as tmp:
        src, dst = f"{tmp}/in.aag", f"{tmp}/out.aag"
        with open(src, "w") as fh:
            fh.write(text)
        if "{in}" in command or "{out}" in command:
            argv = shlex.split(command.replace("{in}", src).replace("{out}", dst))
            subprocess.run(argv, check=True, capture_output=True, timeout=timeout)
            with open(dst) as fh:
                out = fh.read()
        else:
            out = subprocess.run(shlex.split(command), input=text, check=True, capture_output=True,
                                 text=True, timeout=timeout).stdout
    opt = parse_aag(out)
    if opt.inputs != c.inputs or [n for n, _ in opt.outputs] != [n for n, _ in c.outputs]:
        raise CircuitError("optimizer changed the interface")
    return opt


@dataclass
class Candidate:
    config: int
    circuit: AigCircuit | None
    machine: MealyMachine | None
    encoding: StateEncoding | None
    error: str | None = None

    @property
    def size(self) -> int | None:
        return None if self.circuit is None else self.circuit.size


def run_config(machine: MealyMachine, config: int, sat_command: str | None = None,
               optimizer: str | None = None, accept=None) -> Candidate:
    """One configuration: optional minimization, cubification, encoding, lowering.

    ``accept`` verifies an optimized circuit before it replaces the original.
    """
    minimized, mode = CONFIGS[config]
    try:
        m = machine
        if minimized and machine.moore:
            m = bisim_reduce(m)  # class outputs may differ per input, which a Moore machine cannot express
        elif minimized:
            try:
                m = minimize(m, command=sat_command).machine
            except MinimizationBudgetExceeded:
                m = bisim_reduce(m)
        m = cubify(m, command=sat_command)
        if mode == SEMANTIC:
            try:
                enc = encode_semantic(m)
            except MissingLabels:
                enc = encode_binary(m)
        else:
            enc = encode_binary(m)
        enc = compress_encoding(enc).shifted(m.initial)
        c = build_circuit(m, enc)
        if optimizer:
            try:
                opt = run_optimizer(c, optimizer)
                if opt.size < c.size and (accept is None or accept(opt)):
                    c = opt
            except (OSError, subprocess.SubprocessError, CircuitError):
                pass
        return Candidate(config, c, m, enc)
    except Exception as e:  # one failing configuration must not sink the portfolio
        return Candidate(config, None, None, None, f"{type(e).__name__}: {e}")


@dataclass
class PortfolioResult:
    best: Candidate
    candidates: list[Candidate]

    @property
    def circuit(self) -> AigCircuit:
        return self.best.circuit


def portfolio(machine: MealyMachine, configs: Sequence[int] | None = None, sat_command: str | None = None,
              optimizer: str | None = None, accept=None) -> PortfolioResult:
    """Smallest circuit (latches + gates) over the configurations; ties go to the earlier one."""
    configs = range(len(CONFIGS)) if configs is None else configs
    cands = [run_config(machine, i, sat_command, optimizer, accept) for i in configs]
    ok = [c for c in cands if c.circuit is not None]
    if not ok:
        raise CircuitError("all configurations failed: " + "; ".join(c.error or "" for c in cands))
    best = min(ok, key=lambda c: (c.size, c.config))
    return PortfolioResult(best, cands)
