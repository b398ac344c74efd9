"""CNF formulas, cardinality constraints, a CDCL solver and a DIMACS bridge.

Literals follow DIMACS: variable ``v`` is ``v`` and its negation ``-v``.
"""
from __future__ import annotations

import heapq
import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from typing import Iterable, Sequence

SAT, UNSAT, UNKNOWN = "SAT", "UNSAT", "UNKNOWN"


class ExternalSolverError(RuntimeError):
    def __init__(self, message: str, output: str = ""):
        super().__init__(message)
        self.output = output


@dataclass
class Cnf:
    nvars: int = 0
    clauses: list[list[int]] = field(default_factory=list)
    trivially_unsat: bool = False

    def new_var(self) -> int:
        self.nvars += 1
        return self.nvars

    def new_vars(self, n: int) -> list[int]:
        return [self.new_var() for _ in range(n)]

    def add(self, clause: Iterable[int]) -> None:
        c = list(clause)
        for lit in c:
            if lit == 0 or abs(lit) > self.nvars:
                raise ValueError(f"literal {lit} outside 1..{self.nvars}")
        if not c:
            self.trivially_unsat = True
        self.clauses.append(c)

    def extend(self, clauses: Iterable[Iterable[int]]) -> None:
        for c in clauses:
            self.add(c)

    def copy(self) -> "Cnf":
        return Cnf(self.nvars, [list(c) for c in self.clauses], self.trivially_unsat)


@dataclass
class SatResult:
    status: str
    model: list[bool] | None = None
    conflicts: int = 0

    @property
    def sat(self) -> bool:
        return self.status == SAT

    def value(self, lit: int) -> bool:
        v = self.model[abs(lit)]
        return v if lit > 0 else not v

    def true_vars(self) -> list[int]:
        return [v for v in range(1, len(self.model)) if self.model[v]]


def check_model(cnf: Cnf, model: Sequence[bool]) -> bool:
    for c in cnf.clauses:
        if not any(model[abs(l)] == (l > 0) for l in c):
            return False
    return True


# --------------------------------------------------------------------------
# cardinality


def at_most_k(cnf: Cnf, lits: Sequence[int], k: int) -> list[list[int]]:
    """Sequential-counter encoding of ``sum(lits) <= k``; clauses are added to ``cnf``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    n = len(lits)
    out: list[list[int]] = []
    if k >= n:
        return out
    if k == 0:
        out = [[-x] for x in lits]
        cnf.extend(out)
        return out
    s = [cnf.new_vars(k) for _ in range(n - 1)]
    out.append([-lits[0], s[0][0]])
    out.extend([-s[0][j]] for j in range(1, k))
    for i in range(1, n - 1):
        x = lits[i]
        out.append([-x, s[i][0]])
        out.append([-s[i - 1][0], s[i][0]])
        for j in range(1, k):
            out.append([-x, -s[i - 1][j - 1], s[i][j]])
            out.append([-s[i - 1][j], s[i][j]])
        out.append([-x, -s[i - 1][k - 1]])
    out.append([-lits[n - 1], -s[n - 2][k - 1]])
    cnf.extend(out)
    return out


def at_least_one(cnf: Cnf, lits: Sequence[int]) -> None:
    cnf.add(lits)


def exactly_one(cnf: Cnf, lits: Sequence[int]) -> None:
    cnf.add(lits)
    at_most_k(cnf, lits, 1)


# --------------------------------------------------------------------------
# CDCL


def _luby(i: int) -> int:
    """i-th element (1-based) of the Luby restart sequence."""
    k = 1
    while True:
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        if (1 << (k - 1)) <= i < (1 << k) - 1:
            return _luby(i - (1 << (k - 1)) + 1)
        k += 1


class Solver:
    """Conflict-driven clause learning with two watched literals.

    Internally a literal is ``2*v`` (positive) or ``2*v+1`` (negative).
    """

    def __init__(self, cnf: Cnf):
        self.cnf = cnf
        n = cnf.nvars
        self.n = n
        self.val = [0] * (2 * n + 2)
        self.level = [0] * (n + 1)
        self.reason: list[int | None] = [None] * (n + 1)
        self.trail: list[int] = []
        self.lim: list[int] = []
        self.qhead = 0
        self.clauses: list[list[int]] = []
        self.watches: list[list[int]] = [[] for _ in range(2 * n + 2)]
        self.activity = [0.0] * (n + 1)
        self.var_inc = 1.0
        self.phase = [False] * (n + 1)
        self.heap = [(0.0, v) for v in range(1, n + 1)]
        heapq.heapify(self.heap)
        self.conflicts = 0
        self.ok = not cnf.trivially_unsat
        for c in cnf.clauses:
            if self.ok:
                self._add_input(c)

    @staticmethod
    def _code(lit: int) -> int:
        return 2 * lit if lit > 0 else 2 * -lit + 1

    def _add_input(self, clause: list[int]):
        lits = set()
        for l in clause:
            code = self._code(l)
            if code ^ 1 in lits:
                return  # tautology
            lits.add(code)
        c = [x for x in lits if self.val[x] != -1]
        if any(self.val[x] == 1 for x in c):
            return
        if not c:
            self.ok = False
        elif len(c) == 1:
            self._enqueue(c[0], None)
            if self._propagate() is not None:
                self.ok = False
        else:
            self._attach(c)

    def _attach(self, c: list[int]) -> int:
        ci = len(self.clauses)
        self.clauses.append(c)
        self.watches[c[0]].append(ci)
        self.watches[c[1]].append(ci)
        return ci

    def _enqueue(self, code: int, reason: int | None):
        v = code >> 1
        self.val[code] = 1
        self.val[code ^ 1] = -1
        self.level[v] = len(self.lim)
        self.reason[v] = reason
        self.trail.append(code)

    def _propagate(self) -> int | None:
        val = self.val
        clauses = self.clauses
        watches = self.watches
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            i = j = 0
            while i < len(ws):
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                if val[c[0]] == 1:
                    ws[j] = ci
                    j += 1
                    continue
                for k in range(2, len(c)):
                    if val[c[k]] != -1:
                        c[1], c[k] = c[k], c[1]
                        watches[c[1]].append(ci)
                        break
                else:
                    ws[j] = ci
                    j += 1
                    if val[c[0]] == -1:
                        while i < len(ws):
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        return ci
                    self._enqueue(c[0], ci)
            del ws[j:]
        return None

    def _bump(self, v: int):
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            self.activity = [a * 1e-100 for a in self.activity]
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(1, self.n + 1) if self.val[2 * u] == 0]
            heapq.heapify(self.heap)
        elif self.val[2 * v] == 0:
            heapq.heappush(self.heap, (-self.activity[v], v))

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        seen = set()
        learnt = [0]
        counter = 0
        p = None
        idx = len(self.trail) - 1
        cur = len(self.lim)
        c = self.clauses[confl]
        while True:
            for q in c:
                if q == p:
                    continue
                v = q >> 1
                if v not in seen and self.level[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if self.level[v] == cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while (self.trail[idx] >> 1) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            seen.discard(p >> 1)
            counter -= 1
            if counter == 0:
                break
            c = self.clauses[self.reason[p >> 1]]
        learnt[0] = p ^ 1
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda i: self.level[learnt[i] >> 1])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, self.level[learnt[1] >> 1]

    def _backtrack(self, lvl: int):
        if len(self.lim) <= lvl:
            return
        start = self.lim[lvl]
        for code in self.trail[start:]:
            v = code >> 1
            self.phase[v] = (code & 1) == 0
            self.val[code] = 0
            self.val[code ^ 1] = 0
            self.reason[v] = None
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[start:]
        del self.lim[lvl:]
        self.qhead = len(self.trail)

    def _pick(self) -> int | None:
        while self.heap:
            _, v = heapq.heappop(self.heap)
            if self.val[2 * v] == 0:
                return 2 * v if self.phase[v] else 2 * v + 1
        return None

    def solve(self, assumptions: Sequence[int] = (), conflict_budget: int | None = None) -> SatResult:
        if not self.ok:
            return SatResult(UNSAT)
        if self._propagate() is not None:
            self.ok = False
            return SatResult(UNSAT)
        assume = [self._code(a) for a in assumptions]
        restart_no = 1
        until_restart = 100 * _luby(restart_no)
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                until_restart -= 1
                if len(self.lim) == 0:
                    self.ok = False
                    return SatResult(UNSAT, conflicts=self.conflicts)
                learnt, bt = self._analyze(confl)
                self._backtrack(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self._enqueue(learnt[0], self._attach(learnt))
                self.var_inc /= 0.95
                if conflict_budget is not None and self.conflicts >= conflict_budget:
                    self._backtrack(0)
                    return SatResult(UNKNOWN, conflicts=self.conflicts)
                continue
            if until_restart <= 0:
                restart_no += 1
                until_restart = 100 * _luby(restart_no)
                self._backtrack(0)
                continue
            lvl = len(self.lim)
            if lvl < len(assume):
                a = assume[lvl]
                if self.val[a] == -1:
                    self._backtrack(0)
                    return SatResult(UNSAT, conflicts=self.conflicts)
                self.lim.append(len(self.trail))
                if self.val[a] == 0:
                    self._enqueue(a, None)
                continue
            code = self._pick()
            if code is None:
                model = [False] * (self.n + 1)
                for v in range(1, self.n + 1):
                    model[v] = self.val[2 * v] == 1
                self._backtrack(0)
                if not check_model(self.cnf, model):
                    raise AssertionError("internal solver produced an invalid model")
                return SatResult(SAT, model, self.conflicts)
            self.lim.append(len(self.trail))
            self._enqueue(code, None)


def solve(cnf: Cnf, assumptions: Sequence[int] = (), conflict_budget: int | None = None,
          command: str | Sequence[str] | None = None, timeout: float | None = None) -> SatResult:
    """Solve with the internal solver, or with an external one if ``command`` is given."""
    if command:
        if assumptions:
            cnf = cnf.copy()
            for a in assumptions:
                cnf.add([a])
        return external_solve(cnf, command, timeout)
    return Solver(cnf).solve(assumptions, conflict_budget)


# --------------------------------------------------------------------------
# DIMACS


def to_dimacs(cnf: Cnf) -> str:
    lines = [f"p cnf {cnf.nvars} {len(cnf.clauses)}"]
    lines.extend(" ".join(str(l) for l in c) + " 0" if c else "0" for c in cnf.clauses)
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> Cnf:
    cnf = None
    pending: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad header: {line!r}")
            cnf = Cnf(int(parts[2]))
            continue
        if cnf is None:
            raise ValueError("clause before header")
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                cnf.add(pending)
                pending = []
            else:
                pending.append(lit)
    if cnf is None:
        raise ValueError("missing header")
    if pending:
        cnf.add(pending)
    return cnf


def parse_solver_output(text: str, nvars: int) -> SatResult:
    status = None
    model = [False] * (nvars + 1)
    for line in text.splitlines():
        if line.startswith("s "):
            word = line[2:].strip()
            status = {"SATISFIABLE": SAT, "UNSATISFIABLE": UNSAT, "UNKNOWN": UNKNOWN}.get(word)
            if status is None:
                raise ExternalSolverError(f"unknown status line {line!r}", text)
        elif line.startswith("v "):
            for tok in line[2:].split():
                lit = int(tok)
                if lit != 0 and abs(lit) <= nvars:
                    model[abs(lit)] = lit > 0
    if status is None:
        raise ExternalSolverError("solver printed no status line", text)
    return SatResult(status, model if status == SAT else None)


def external_solve(cnf: Cnf, command: str | Sequence[str], timeout: float | None = None) -> SatResult:
    """Run a DIMACS solver binary on ``cnf`` and parse its answer."""
    argv = shlex.split(command) if isinstance(command, str) else list(command)
    with tempfile.NamedTemporaryFile("w", suffix=".cnf", delete=False) as fh:
        fh.write(to_dimacs(cnf))
        path = fh.name
    try:
        proc = subprocess.run(argv + [path], capture_output=True, text=True, timeout=timeout)
    except (OSError, subprocess.TimeoutExpired) as e:
        raise ExternalSolverError(f"could not run {argv[0]}: {e}") from e
    finally:
        os.unlink(path)
    if proc.returncode not in (0, 10, 20):
        raise ExternalSolverError(f"{argv[0]} exited with {proc.returncode}", proc.stdout + proc.stderr)
    result = parse_solver_output(proc.stdout, cnf.nvars)
    if result.sat and not check_model(cnf, result.model):
        raise ExternalSolverError("external model violates the formula", proc.stdout)
    return result
