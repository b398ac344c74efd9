"""Command line interface.

``semml -f FORMULA --ins=... --outs=...`` solves in process, or through a
running service with ``--server URL``.  Subcommands: ``check``, ``bench``,
``serve``.  Exit codes: 0 realizable / pass, 1 unrealizable / fail,
2 error, timeout or unknown.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import config
from .bench import run_bench, score  # noqa: F401  (score is part of the CLI surface)
from .corpus import CORPUS, load_dir, parse_instance
from .schemas import CheckRequest, CheckResponse, SynthesisRequest, SynthesisResponse
from .synthesis import FORMATS, MODES, Options

SUBCOMMANDS = ("check", "bench", "serve")


def _names(v: str) -> list[str]:
    return [x.strip() for x in v.split(",") if x.strip()]


def _post(server: str, path: str, payload: dict) -> dict:
    import httpx

    r = httpx.post(server.rstrip("/") + path, json=payload, timeout=None)
    r.raise_for_status()
    return r.json()


def synth_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semml", description="LTL synthesis (subcommands: check, bench, serve)")
    p.add_argument("-f", "--formula")
    p.add_argument("--instance", help="instance file with formula, ins and outs lines")
    p.add_argument("--ins", type=_names, default=None, help="environment atoms, comma separated")
    p.add_argument("--outs", type=_names, default=None, help="system atoms, comma separated")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--counterexample", action="store_true", default=None)
    p.add_argument("--explore", choices=("guided", "bfs"))
    p.add_argument("--portfolio", help="'all' or a configuration number 1-4")
    p.add_argument("--output", choices=FORMATS, help="artifact format")
    p.add_argument("--output-file", help="write the artifact here instead of stdout")
    p.add_argument("--time-limit", type=float)
    p.add_argument("--max-states", type=int)
    p.add_argument("--episode", type=int, help="expansions in the first exploration episode")
    p.add_argument("--config", help="INI file with [semml] and [weights] sections")
    p.add_argument("--no-verify", dest="verify", action="store_false", default=None)
    p.add_argument("--no-minimize", dest="minimize", action="store_false", default=None)
    p.add_argument("--sat-cmd", dest="sat_command", help="external DIMACS solver command")
    p.add_argument("--optimizer-cmd", dest="optimizer_cmd", help="external AAG optimizer command")
    p.add_argument("--json", action="store_true", help="machine readable report")
    p.add_argument("--server", help="base URL of a running semml service")
    return p


def _options(args: argparse.Namespace) -> dict:
    opts = config.load(args.config) if args.config else {}
    for key in ("mode", "counterexample", "explore", "portfolio", "output", "time_limit", "max_states",
                "episode", "verify", "minimize", "sat_command", "optimizer_cmd"):
        v = getattr(args, key)
        if v is not None:
            opts[key] = v
    return opts


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_synth(argv: list[str]) -> int:
    args = synth_parser().parse_args(argv)
    try:
        opts = _options(args)
        if args.instance:
            inst = parse_instance(Path(args.instance).read_text(), Path(args.instance).stem)
            formula, ins, outs = inst.formula, list(inst.ins), list(inst.outs)
        else:
            formula, ins, outs = args.formula, [], []
        if args.formula:
            formula = args.formula
        if args.ins is not None:
            ins = args.ins
        if args.outs is not None:
            outs = args.outs
        if not formula:
            raise ValueError("no formula given (use -f or --instance)")
        external = {k: opts.pop(k) for k in ("sat_command", "optimizer_cmd") if k in opts}
        req = SynthesisRequest(formula=formula, ins=ins, outs=outs, **opts)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.server:
        if external:
            print("warning: external commands are configured on the server side", file=sys.stderr)
        try:
            resp = SynthesisResponse(**_post(args.server, "/synthesize", req.model_dump()))
        except Exception as e:
            print(f"error: service request failed: {e}", file=sys.stderr)
            return 2
    else:
        from .service import run_synthesis
        resp = run_synthesis(req, **external)
    if args.json:
        print(resp.model_dump_json(indent=2))
    elif resp.status in ("realizable", "unrealizable"):
        print(resp.status.upper())
        if resp.artifact:
            _emit(resp.artifact, args.output_file)
    else:
        print(f"{resp.status.upper()}: {resp.error}", file=sys.stderr)
    return resp.exit_code


def cmd_check(argv: list[str]) -> int:
    p = argparse.ArgumentParser(prog="semml check", description="model check a Mealy machine or AIGER circuit")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--mealy", help="machine in semml text format")
    src.add_argument("--aag", help="ASCII AIGER circuit")
    p.add_argument("-f", "--formula", required=True)
    p.add_argument("--ins", type=_names, default=[])
    p.add_argument("--outs", type=_names, default=[])
    p.add_argument("--role", choices=("sys", "env"), default="sys",
                   help="env checks a counterexample: every produced word must violate the formula")
    p.add_argument("--json", action="store_true")
    p.add_argument("--server")
    args = p.parse_args(argv)
    try:
        req = CheckRequest(formula=args.formula, ins=args.ins, outs=args.outs, role=args.role,
                           mealy=Path(args.mealy).read_text() if args.mealy else None,
                           aag=Path(args.aag).read_text() if args.aag else None)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.server:
        try:
            resp = CheckResponse(**_post(args.server, "/check", req.model_dump()))
        except Exception as e:
            print(f"error: service request failed: {e}", file=sys.stderr)
            return 2
    else:
        from .service import run_check
        resp = run_check(req)
    if args.json:
        print(resp.model_dump_json(indent=2))
    else:
        print(resp.verdict.upper() + (f": {resp.reason}" if resp.reason else ""))
        if resp.loop:
            fmt = lambda w: " ".join("{" + ",".join(sorted(k for k, v in x.items() if v)) + "}" for x in w)
            print(f"stem: {fmt(resp.stem)}")
            print(f"loop: {fmt(resp.loop)}")
    return resp.exit_code


def cmd_bench(argv: list[str]) -> int:
    p = argparse.ArgumentParser(prog="semml bench", description="solve a directory of instance files")
    p.add_argument("corpus", help="directory of .ltl instance files, or 'builtin'")
    p.add_argument("--baseline", help="JSON {name: {size, seconds}} of a reference tool")
    p.add_argument("--mode", choices=MODES, default="aiger")
    p.add_argument("--time-limit", type=float)
    p.add_argument("--json", action="store_true")
    args = p.parse_args(argv)
    try:
        instances = CORPUS if args.corpus == "builtin" else load_dir(args.corpus)
        baseline = json.loads(Path(args.baseline).read_text()) if args.baseline else None
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    report = run_bench(instances, Options(mode=args.mode, time_limit=args.time_limit), baseline)
    sys.stdout.write(report.to_json() + "\n" if args.json else report.to_table())
    return 0


def cmd_serve(argv: list[str]) -> int:
    p = argparse.ArgumentParser(prog="semml serve", description="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--sat-cmd", dest="sat_command")
    p.add_argument("--optimizer-cmd", dest="optimizer_cmd")
    args = p.parse_args(argv)
    import uvicorn

    from .api import create_app
    uvicorn.run(create_app(args.sat_command, args.optimizer_cmd), host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] in SUBCOMMANDS:
        handler = {"check": cmd_check, "bench": cmd_bench, "serve": cmd_serve}[argv[0]]
        return handler(argv[1:])
    return cmd_synth(argv)


if __name__ == "__main__":
    sys.exit(main())
