"""Benchmark harness and the competition quality score."""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping

from .corpus import Instance
from .synthesis import Options, synthesize


def score(s: float, r: float) -> float:
    """Quality points for size ``s`` against reference size ``r``: 2 - log10((s+1)/(r+1))."""
    if s < 0 or r < 0:
        raise ValueError("sizes must be non-negative")
    return 2.0 - math.log10((s + 1) / (r + 1))


def geometric_mean(values: Iterable[float]) -> float | None:
    vals = list(values)
    if not vals:
        return None
    if any(v <= 0 for v in vals):
        raise ValueError("geometric mean needs positive values")
    return math.exp(sum(math.log(v) for v in vals) / len(vals))


@dataclass
class Row:
    name: str
    status: str
    expected: str | None
    verified: bool | None
    size: int | None
    seconds: float
    score: float | None = None
    error: str | None = None

    @property
    def solved(self) -> bool:
        return self.status in ("realizable", "unrealizable") and self.verified is not False \
            and (self.expected is None or self.expected == self.status)


@dataclass
class Report:
    rows: list[Row]
    solved: int
    mean_score: float | None
    runtime_ratio: float | None

    def to_json(self) -> str:
        return json.dumps({"rows": [asdict(r) for r in self.rows], "solved": self.solved,
                           "mean_score": self.mean_score, "runtime_ratio": self.runtime_ratio}, indent=2)

    def to_table(self) -> str:
        head = f"{'name':24} {'status':13} {'ok':3} {'size':>6} {'seconds':>8} {'score':>6}"
        lines = [head]
        for r in self.rows:
            size = "-" if r.size is None else str(r.size)
            sc = "-" if r.score is None else f"{r.score:.3f}"
            lines.append(f"{r.name:24} {r.status:13} {'yes' if r.solved else 'no':3} {size:>6} {r.seconds:8.3f} {sc:>6}")
        ms = "-" if self.mean_score is None else f"{self.mean_score:.3f}"
        rr = "-" if self.runtime_ratio is None else f"{self.runtime_ratio:.3f}"
        lines.append(f"solved {self.solved}/{len(self.rows)}  mean score {ms}  runtime ratio (geo. mean) {rr}")
        return "\n".join(lines) + "\n"


def run_bench(instances: Iterable[Instance], options: Options | None = None,
              baseline: Mapping[str, Mapping] | None = None) -> Report:
    """Solve every instance; failures are recorded per row and never abort the run.

    ``baseline`` maps instance names to ``{"size": ..., "seconds": ...}``
    of a reference tool; scores and runtime ratios use it when present.
    """
    options = options or Options(mode="aiger", counterexample=False)
    baseline = baseline or {}
    rows = []
    for inst in instances:
        t0 = time.monotonic()
        try:
            res = synthesize(inst.formula, inst.ins, inst.outs, options)
            status, verified, error = res.status, res.verified, res.error
            size = res.stats.get("size", res.stats.get("states"))
        except Exception as e:  # keep benchmarking the rest
            status, verified, error, size = "error", None, f"{type(e).__name__}: {e}", None
        row = Row(inst.name, status, inst.expected, verified, size, time.monotonic() - t0, error=error)
        ref = baseline.get(inst.name, {})
        if row.solved and size is not None and ref.get("size") is not None:
            row.score = score(size, ref["size"])
        rows.append(row)
    scores = [r.score for r in rows if r.score is not None]
    ratios = [r.seconds / baseline[r.name]["seconds"] for r in rows
              if r.solved and baseline.get(r.name, {}).get("seconds")]
    return Report(rows, sum(r.solved for r in rows), sum(scores) / len(scores) if scores else None,
                  geometric_mean(ratios))
