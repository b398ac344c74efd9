"""Small embedded benchmark corpus and the plain-text instance format.

An instance file holds ``key: value`` lines::

    formula: G (r <-> X g)
    ins: r
    outs: g
    expected: realizable

``expected`` is optional; lines starting with ``#`` are ignored.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class Instance:
    name: str
    formula: str
    ins: tuple[str, ...]
    outs: tuple[str, ...]
    expected: str | None = None

    def to_text(self) -> str:
        lines = [f"formula: {self.formula}", f"ins: {','.join(self.ins)}", f"outs: {','.join(self.outs)}"]
        if self.expected:
            lines.append(f"expected: {self.expected}")
        return "\n".join(lines) + "\n"


def _split(v: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in v.split(",") if x.strip())


def parse_instance(text: str, name: str = "instance") -> Instance:
    fields: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ValueError(f"{name}: expected 'key: value', got {line!r}")
        fields[key.strip().lower()] = value.strip()
    if "formula" not in fields:
        raise ValueError(f"{name}: missing formula")
    return Instance(name, fields["formula"], _split(fields.get("ins", "")), _split(fields.get("outs", "")),
                    fields.get("expected") or None)


def load_dir(path: str | Path) -> list[Instance]:
    files = sorted(p for p in Path(path).iterdir() if p.suffix in (".ltl", ".txt") and p.is_file())
    return [parse_instance(p.read_text(), p.stem) for p in files]


R, U = "realizable", "unrealizable"

# name, formula, ins, outs, expected verdict (worked out by hand)
_TABLE = [
    ("delay", "G (r <-> X g)", "r", "g", R),
    ("response", "G (r -> F g)", "r", "g", R),
    ("env-liveness", "G F a", "a", "", U),
    ("copy", "G (g <-> r)", "r", "g", R),
    ("dela-example", "F a & G F b & F G c", "", "a,b,c", R),
    ("arbiter", "G (r1 -> F g1) & G (r2 -> F g2) & G !(g1 & g2)", "r1,r2", "g1,g2", R),
    ("lazy-grant", "G (g -> r) & G F g", "r", "g", U),
    ("fair-response", "G F r -> G F g", "r", "g", R),
    ("stable-response", "F G r -> F G g", "r", "g", R),
    ("delay-two", "G (a <-> X X b)", "a", "b", R),
    ("predict", "G (g <-> X r)", "r", "g", U),
    ("until-sys", "a U b", "a", "b", R),
    ("until-env", "a U b", "b", "a", U),
    ("weak-obligation", "G (a -> X (b W c))", "a", "b,c", R),
    ("conditional", "G F (b <-> X a) -> F G (!b & c)", "a", "b,c", R),
    ("spaced-grant", "G (r -> F g) & G (!g | !X g)", "r", "g", R),
    ("blocked-grant", "G (r -> F g) & G F r & G (r -> X !g)", "r", "g", U),
    ("env-persistence", "F G a", "a", "", U),
    ("toggle", "G (a -> F b) & G (c -> F !b)", "a,c", "b", R),
    ("grant-needs-request", "G (r -> X g) & G (g -> r)", "r", "g", U),
]

CORPUS: list[Instance] = [Instance(n, f, _split(i), _split(o), e) for n, f, i, o, e in _TABLE]


def write_dir(path: str | Path, instances: list[Instance] | None = None) -> None:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    for inst in instances or CORPUS:
        (out / f"{inst.name}.ltl").write_text(inst.to_text())
