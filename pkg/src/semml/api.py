"""HTTP front end.  Run with ``semml serve`` or ``uvicorn semml.api:app``."""
from __future__ import annotations

from fastapi import FastAPI

from . import __version__
from .schemas import CheckRequest, CheckResponse, SynthesisRequest, SynthesisResponse
from .service import run_check, run_synthesis


def create_app(sat_command: str | None = None, optimizer_cmd: str | None = None) -> FastAPI:
    app = FastAPI(title="semml", version=__version__)
    server_options = {"sat_command": sat_command, "optimizer_cmd": optimizer_cmd}

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/synthesize", response_model=SynthesisResponse)
    def synthesize(req: SynthesisRequest):
        return run_synthesis(req, **server_options)

    @app.post("/check", response_model=CheckResponse)
    def check(req: CheckRequest):
        return run_check(req)

    return app


app = create_app()
