"""End-to-end synthesis: formula and partition in, verdict and artifact out."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from . import aiger, ltl
from .automata import Translation, UnclassifiedLeaf
from .bdd import order_variables
from .check import check_aiger, check_mealy
from .exploration import DEFAULT_WEIGHTS, REALIZABLE, TIMEOUT, UNREALIZABLE, LinearScorer, Schedule, explore_loop
from .game import ENV, SYS, extract_strategy
from .ltl import Partition
from .mealy import (MealyMachine, MinimizationBudgetExceeded, bisim_reduce, cubify,
                    determinize_successors, minimize, moore_from_strategy)

ERROR = "error"
MODES = ("real", "mealy", "aiger")
FORMATS = ("mealy", "aag", "dot")


@dataclass
class Options:
    mode: str = "real"
    counterexample: bool = False
    explore: str = "guided"
    portfolio: str = "all"          # or a configuration number 1..4
    output: str | None = None       # artifact format; defaults by mode
    time_limit: float | None = None
    verify: bool = True
    minimize: bool = True
    sat_command: str | None = None
    optimizer_cmd: str | None = None
    max_states: int | None = None
    episode: int = 64
    weights: dict[str, float] | None = None  # scorer weights; missing keys keep the defaults

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}")
        if self.explore not in ("guided", "bfs"):
            raise ValueError("explore must be guided or bfs")
        if self.output is not None and self.output not in FORMATS:
            raise ValueError(f"output must be one of {', '.join(FORMATS)}")
        if self.portfolio != "all" and self.portfolio not in {str(i + 1) for i in range(len(aiger.CONFIGS))}:
            raise ValueError("portfolio must be 'all' or a configuration number 1-4")
        if self.episode < 1:
            raise ValueError("episode must be at least 1")
        unknown = set(self.weights or {}) - set(DEFAULT_WEIGHTS)
        if unknown:
            raise ValueError(f"unknown scorer weights: {', '.join(sorted(unknown))}")


@dataclass
class Result:
    status: str
    artifact: str | None = None
    format: str | None = None
    verified: bool | None = None
    error: str | None = None
    stats: dict = field(default_factory=dict)
    machine: MealyMachine | None = None
    circuit: aiger.AigCircuit | None = None

    @property
    def exit_code(self) -> int:
        return {REALIZABLE: 0, UNREALIZABLE: 1}.get(self.status, 2)


def _fail(msg: str, **stats) -> Result:
    return Result(ERROR, error=msg, stats=stats)


def synthesize(formula: str | ltl.Formula, ins: Sequence[str], outs: Sequence[str],
               options: Options | None = None) -> Result:
    """Decide realizability and, on the synthesis tracks, build and verify an artifact.

    Unrealizable inputs yield an environment machine when a counterexample
    is requested: it reads system atoms and commits to environment atoms.
    """
    options = options or Options()
    start = time.monotonic()
    try:
        f = ltl.parse(formula) if isinstance(formula, str) else formula
        part = Partition.of(ins, outs)
    except ValueError as e:
        return _fail(str(e))
    missing = sorted(ltl.atoms(f) - set(part.ap_env) - set(part.ap_sys))
    if missing:
        return _fail(f"atoms not assigned to either player: {', '.join(missing)}")
    try:
        t = Translation(f, order=order_variables(f, part).order)
    except UnclassifiedLeaf as e:
        return _fail(f"unsupported formula: {e}")

    sched = Schedule(mode=options.explore, episode=options.episode, time_limit=options.time_limit,
                     max_states=options.max_states)
    r = explore_loop(t, part, scorer=LinearScorer(options.weights), schedule=sched)
    stats: dict = {"explored": r.explored, "episodes": r.episodes, "probes": r.probes}
    if r.status == TIMEOUT:
        stats["seconds"] = time.monotonic() - start
        return Result(TIMEOUT, error="time limit reached", stats=stats)
    res = Result(r.status, stats=stats)
    if options.mode == "real" or (r.status == UNREALIZABLE and not options.counterexample):
        stats["seconds"] = time.monotonic() - start
        return res

    sys_side = r.status == REALIZABLE
    role = "sys" if sys_side else "env"
    strat = extract_strategy(r.arena, r.verdict, SYS if sys_side else ENV)
    if sys_side:
        m = determinize_successors(strat, t.store, part.ap_env, part.ap_sys, sat_command=options.sat_command)
    else:
        m = bisim_reduce(moore_from_strategy(strat, t.store, part.ap_env, part.ap_sys))
    stats["strategy_states"] = m.n_states
    fmt = options.output or ("aag" if options.mode == "aiger" else "mealy")

    if fmt == "aag":
        accept = None
        if options.verify:
            def accept(c):
                return check_aiger(c, partition=part, translation=t, role=role).passed
        configs = None if options.portfolio == "all" else [int(options.portfolio) - 1]
        try:
            pr = aiger.portfolio(m, configs, options.sat_command, options.optimizer_cmd, accept)
        except aiger.CircuitError as e:
            return Result(ERROR, error=str(e), stats=stats)
        c = pr.circuit
        stats.update(latches=len(c.latches), gates=len(c.ands), size=c.size,
                     config=aiger.config_name(pr.best.config),
                     candidates={aiger.config_name(x.config): x.size for x in pr.candidates})
        res.circuit, res.machine = c, pr.best.machine
        if options.verify:
            rep = check_aiger(c, partition=part, translation=t, role=role)
            res.verified = rep.passed
        res.artifact = aiger.write_aag(c)
    else:
        if sys_side and options.minimize:
            try:
                mr = minimize(m, command=options.sat_command)
                m = mr.machine
                stats["lower_bound"] = mr.lower_bound
            except MinimizationBudgetExceeded:
                m = bisim_reduce(m)
        m = cubify(m, command=options.sat_command)
        stats["states"] = m.n_states
        res.machine = m
        if options.verify:
            rep = check_mealy(m, partition=part, translation=t, role=role)
            res.verified = rep.passed
        res.artifact = m.to_text() if fmt == "mealy" else m.to_dot()
    res.format = fmt
    stats["seconds"] = time.monotonic() - start
    if res.verified is False:
        return Result(ERROR, error="artifact failed model checking", stats=stats)
    return res
