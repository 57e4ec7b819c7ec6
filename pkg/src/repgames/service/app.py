"""FastAPI application exposing the library over HTTP.

Run with ``uvicorn repgames.service.app:app``.  Every endpoint takes a JSON
request body matching its schema and returns JSON, except /scatter, which
returns CSV text.  Domain errors map to HTTP 400 with an ErrorResponse
body; a verification run that finds a counterexample is still HTTP 200
with ``falsified: true`` (the CLI turns that into exit code 2).
"""
from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse, PlainTextResponse

from .. import __version__
from ..errors import RepeatedGameError
from . import handlers, schemas


def create_app() -> FastAPI:
    app = FastAPI(
        title="repgames",
        version=__version__,
        description="Best responses and average payoffs in repeated games.",
    )

    @app.exception_handler(RepeatedGameError)
    async def _domain_error(request, exc: RepeatedGameError):
        body = schemas.ErrorResponse(error=type(exc).__name__, detail=str(exc))
        return JSONResponse(status_code=400, content=body.model_dump())

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/payoff", response_model=schemas.PayoffResponse, response_model_exclude_none=True)
    def payoff(req: schemas.PayoffRequest):
        return handlers.payoff(req)

    @app.post("/best-response", response_model=schemas.BestResponseResponse)
    def best_response(req: schemas.BestResponseRequest):
        return handlers.best_response(req)

    @app.post("/scatter", response_class=PlainTextResponse)
    def scatter(req: schemas.ScatterRequest):
        return PlainTextResponse(handlers.scatter(req), media_type="text/csv")

    @app.post("/mdp-solve", response_model=schemas.MdpSolveResponse)
    def mdp_solve(req: schemas.MdpSolveRequest):
        return handlers.mdp_solve(req)

    @app.post("/tournament", response_model=schemas.TournamentResponse, response_model_exclude_none=True)
    def tournament(req: schemas.TournamentRequest):
        return handlers.run_tournament(req)

    @app.post("/verify", response_model=schemas.VerifyResponse, response_model_exclude_none=True)
    def verify(req: schemas.VerifyRequest):
        return handlers.run_verify(req)

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(req: schemas.SimulateRequest):
        return handlers.simulate(req)

    return app


app = create_app()
