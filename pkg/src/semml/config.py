"""INI configuration for the command line.

Keys in the ``[semml]`` section mirror the long flag names with dashes or
underscores; ``[weights]`` overrides the exploration scorer weights::

    [semml]
    mode = aiger
    time-limit = 30
    sat-command = kissat -q
    episode = 32

    [weights]
    attention = 0.8
"""
from __future__ import annotations

import configparser
from dataclasses import fields

from .synthesis import Options

_BOOL = {"counterexample", "verify", "minimize"}
_FLOAT = {"time_limit"}
_INT = {"max_states", "episode"}


def load(path: str) -> dict:
    """Option overrides from an INI file; unknown keys raise ValueError."""
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    out: dict = {}
    if cp.has_section("weights"):
        out["weights"] = {k: cp.getfloat("weights", k) for k in cp.options("weights")}
    if not cp.has_section("semml"):
        return out
    known = {f.name for f in fields(Options)} - {"weights"}
    for key in cp.options("semml"):
        name = key.replace("-", "_")
        if name not in known:
            raise ValueError(f"unknown configuration key {key!r}")
        if name in _BOOL:
            out[name] = cp.getboolean("semml", key)
        elif name in _FLOAT:
            out[name] = cp.getfloat("semml", key)
        elif name in _INT:
            out[name] = cp.getint("semml", key)
        else:
            out[name] = cp.get("semml", key)
    return out
