"""Request handling shared by the HTTP service and the in-process CLI."""
from __future__ import annotations

from . import ltl
from .aiger import CircuitError, parse_aag
from .check import UNKNOWN, CheckReport, check_aiger, check_mealy
from .ltl import Partition
from .mealy import from_text
from .schemas import CheckRequest, CheckResponse, SynthesisRequest, SynthesisResponse
from .synthesis import Options, synthesize


def run_synthesis(req: SynthesisRequest, **server_options) -> SynthesisResponse:
    """``server_options`` carries settings a remote client may not choose (external commands)."""
    try:
        opts = Options(**req.model_dump(exclude={"formula", "ins", "outs"}), **server_options)
    except ValueError as e:
        return SynthesisResponse(status="error", exit_code=2, error=str(e))
    res = synthesize(req.formula, req.ins, req.outs, opts)
    return SynthesisResponse(status=res.status, exit_code=res.exit_code, artifact=res.artifact, format=res.format,
                             verified=res.verified, error=res.error, stats=res.stats)


def run_check(req: CheckRequest) -> CheckResponse:
    if (req.mealy is None) == (req.aag is None):
        return CheckResponse(verdict=UNKNOWN, exit_code=2, reason="give exactly one of mealy or aag")
    try:
        f = ltl.parse(req.formula)
        part = Partition.of(req.ins, req.outs)
        reads, writes = (part.ap_env, part.ap_sys) if req.role == "sys" else (part.ap_sys, part.ap_env)
        if req.mealy is not None:
            rep = check_mealy(from_text(req.mealy, reads, writes), f, part, role=req.role)
        else:
            rep = check_aiger(parse_aag(req.aag), f, part, role=req.role)
    except (ValueError, CircuitError, IndexError) as e:
        rep = CheckReport(UNKNOWN, reason=str(e))
    return CheckResponse(verdict=rep.verdict, exit_code=rep.exit_code, stem=[dict(x) for x in rep.stem],
                         loop=[dict(x) for x in rep.loop], product_states=rep.product_states, reason=rep.reason)
