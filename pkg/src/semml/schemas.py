"""Request and response models of the HTTP service."""
from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class SynthesisRequest(BaseModel):
    # external commands are server-side settings; a request naming them is refused
    model_config = ConfigDict(extra="forbid")

    formula: str
    ins: list[str] = Field(default_factory=list)
    outs: list[str] = Field(default_factory=list)
    mode: Literal["real", "mealy", "aiger"] = "real"
    counterexample: bool = False
    explore: Literal["guided", "bfs"] = "guided"
    portfolio: str = "all"
    output: Optional[Literal["mealy", "aag", "dot"]] = None
    time_limit: Optional[float] = Field(default=None, gt=0)
    verify: bool = True
    minimize: bool = True
    max_states: Optional[int] = Field(default=None, gt=0)
    episode: int = Field(default=64, ge=1)
    weights: Optional[dict[str, float]] = None


class SynthesisResponse(BaseModel):
    status: str
    exit_code: int
    artifact: Optional[str] = None
    format: Optional[str] = None
    verified: Optional[bool] = None
    error: Optional[str] = None
    stats: dict = Field(default_factory=dict)


class CheckRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    formula: str
    ins: list[str] = Field(default_factory=list)
    outs: list[str] = Field(default_factory=list)
    mealy: Optional[str] = None
    aag: Optional[str] = None
    role: Literal["sys", "env"] = "sys"


class CheckResponse(BaseModel):
    verdict: str
    exit_code: int
    stem: list[dict[str, bool]] = Field(default_factory=list)
    loop: list[dict[str, bool]] = Field(default_factory=list)
    product_states: int = 0
    reason: str = ""
