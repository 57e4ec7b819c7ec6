"""Pydantic request and response models for the HTTP service and the CLI.

These models define the wire format of every endpoint.  Strategies travel
either as a bare four-element array or as ``{"p": [...], "p0": ...}``;
games as ``{"R":.., "S":.., "T":.., "P":..}``; k-memory tables as
``{"k":.., "actions": [...], "table": {"cc,cd": [...], ...}}`` with state
keys listing profiles oldest first, each profile written own-action-first
from the table owner's perspective.
"""
from __future__ import annotations

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, Field

FourFloats = Annotated[list[float], Field(min_length=4, max_length=4)]


class GameIn(BaseModel):
    R: float
    S: float
    T: float
    P: float


class StrategyObj(BaseModel):
    p: FourFloats
    p0: float = 1.0


StrategyIn = Union[FourFloats, StrategyObj]


class KMemoryIn(BaseModel):
    k: Annotated[int, Field(ge=1)]
    actions: Annotated[list[str], Field(min_length=1)]
    table: dict[str, list[float]]


PlayerIn = Union[FourFloats, StrategyObj, KMemoryIn]


class PayoffRequest(BaseModel):
    p: StrategyIn
    q: StrategyIn
    game: GameIn
    method: Literal["det", "stationary", "both"] = "det"


class PayoffResponse(BaseModel):
    s_x: float
    s_y: float
    method: str
    #: max componentwise difference between the two routes; only for "both"
    agreement: Optional[float] = None


class BestResponseRequest(BaseModel):
    q: StrategyIn
    game: GameIn


class BestResponseResponse(BaseModel):
    table: dict[str, float]
    best: list[list[float]]
    value: float
    classes: list[str]


class ScatterRequest(BaseModel):
    q: StrategyIn
    game: GameIn
    n: Annotated[int, Field(ge=11)] = 5000
    seed: int = 0


class MdpSolveRequest(BaseModel):
    opponent: PlayerIn
    game: GameIn
    k: Annotated[int, Field(ge=1)]


class MdpSolveResponse(BaseModel):
    gain: float
    policy: dict[str, str]
    iterations: int
    communicating: bool
    bias_span: float


class PopulationMemberIn(BaseModel):
    p: FourFloats
    count: Annotated[int, Field(ge=1)] = 1


class TournamentRequest(BaseModel):
    pop: Annotated[list[PopulationMemberIn], Field(min_length=1)]
    game: GameIn
    optimize: bool = False
    seed: int = 0
    starts: Annotated[int, Field(ge=1)] = 8
    grid_step: Annotated[float, Field(gt=0.0, le=0.5)] = 0.1


class StrategyValue(BaseModel):
    p: FourFloats
    value: float


class TournamentResponse(BaseModel):
    best_pure: StrategyValue
    best_mixed: Optional[StrategyValue] = None
    gap: Optional[float] = None


class VerifyRequest(BaseModel):
    theorem: str
    samples: Annotated[int, Field(ge=1)] = 10000
    seed: int = 0


class VerifyResponse(BaseModel):
    theorem: str
    samples: int
    seed: int
    max_violation: float
    threshold: float
    falsified: bool
    counterexample: Optional[dict] = None
    notes: str


class SimulateRequest(BaseModel):
    p: PlayerIn
    q: PlayerIn
    game: GameIn
    rounds: Annotated[int, Field(ge=1000)] = 1000000
    seed: int = 0


class SimulateResponse(BaseModel):
    mean_x: float
    mean_y: float
    std_err: float
    rounds: int
    seed: int
    generator: str


class ErrorResponse(BaseModel):
    error: str
    detail: str
