"""Request handlers shared by the HTTP endpoints and the CLI.

Each handler turns a validated request model into domain objects, runs the
corresponding library operation, and packs the result back into a response
model.  Domain errors propagate as RepeatedGameError subclasses; the app
and the CLI map them to HTTP 400 and exit code 1 respectively.
"""
from __future__ import annotations

from .. import chains, mdp, montecarlo, response, tournament, verify
from ..errors import OutOfRange
from ..games import GameSpec, MemoryOneStrategy, prisoners_dilemma, validate_game, validate_strategy
from . import schemas


def _game(model: schemas.GameIn) -> GameSpec:
    return validate_game(model.R, model.S, model.T, model.P)


def _strategy(data, kind: str) -> MemoryOneStrategy:
    if isinstance(data, schemas.StrategyObj):
        return validate_strategy(data.p, kind, p0=data.p0)
    return validate_strategy(list(data), kind)


def _kmemory(data, role_actions: tuple[str, ...]) -> mdp.KMemoryStrategy:
    """Normalize a player model to table form (role_actions = own actions)."""
    if isinstance(data, schemas.KMemoryIn):
        return mdp.KMemoryStrategy.from_table(data.k, data.actions, data.table)
    strategy = _strategy(data, "any")
    lifted = mdp.KMemoryStrategy.from_memory_one(strategy)
    if lifted.own_actions != role_actions:
        raise OutOfRange("player actions do not match the stage game")
    return lifted


def payoff(req: schemas.PayoffRequest) -> schemas.PayoffResponse:
    game = _game(req.game)
    p = _strategy(req.p, "responder")
    q = _strategy(req.q, "completely_mixed")
    if req.method == "det":
        pair = chains.average_payoffs(p, q, game)
        return schemas.PayoffResponse(s_x=pair.s_x, s_y=pair.s_y, method="det")
    if req.method == "stationary":
        pair = chains.payoff_via_stationary(p, q, game)
        return schemas.PayoffResponse(s_x=pair.s_x, s_y=pair.s_y, method="stationary")
    det_pair = chains.average_payoffs(p, q, game)
    st_pair = chains.payoff_via_stationary(p, q, game)
    agreement = max(abs(det_pair.s_x - st_pair.s_x), abs(det_pair.s_y - st_pair.s_y))
    return schemas.PayoffResponse(
        s_x=det_pair.s_x, s_y=det_pair.s_y, method="both", agreement=agreement
    )


def best_response(req: schemas.BestResponseRequest) -> schemas.BestResponseResponse:
    game = _game(req.game)
    q = _strategy(req.q, "completely_mixed")
    table = response.pure_payoff_table(q, game)
    strategies, value = response.best_response_pure(q, game)
    return schemas.BestResponseResponse(
        table={str(k): v for k, v in table.values.items()},
        best=[[float(x) for x in s.as_tuple()] for s in strategies],
        value=value,
        classes=list(response.classify_q(q, game)),
    )


def scatter(req: schemas.ScatterRequest) -> str:
    """CSV text with header s_x,s_y; the scatter data behind region plots."""
    game = _game(req.game)
    q = _strategy(req.q, "completely_mixed")
    points = response.payoff_region_scatter(q, game, req.n, req.seed)
    lines = ["s_x,s_y"]
    lines.extend(f"{x:.12g},{y:.12g}" for x, y in points)
    return "\n".join(lines) + "\n"


def mdp_solve(req: schemas.MdpSolveRequest) -> schemas.MdpSolveResponse:
    game = _game(req.game)
    stage = prisoners_dilemma(game)
    opponent = _kmemory(req.opponent, stage.actions2)
    model = mdp.build_mdp(opponent, stage, req.k)
    communicating = mdp.check_communicating(model)
    result = mdp.solve_average_reward(model)
    policy = {
        model.state_key(s): model.actions[result.policy[s]] for s in range(model.num_states)
    }
    return schemas.MdpSolveResponse(
        gain=result.gain,
        policy=policy,
        iterations=result.iterations,
        communicating=communicating,
        bias_span=result.bias_span,
    )


def run_tournament(req: schemas.TournamentRequest) -> schemas.TournamentResponse:
    game = _game(req.game)
    members = tuple(
        (validate_strategy(m.p, "completely_mixed"), m.count) for m in req.pop
    )
    pop = tournament.Population(members)
    pure_strategy, pure_value = tournament.best_pure_tournament(pop, game)
    resp = schemas.TournamentResponse(
        best_pure=schemas.StrategyValue(p=list(pure_strategy.as_tuple()), value=pure_value)
    )
    if req.optimize:
        config = tournament.SearchConfig(starts=req.starts, grid_step=req.grid_step, seed=req.seed)
        mixed_p, mixed_value = tournament.optimize_mixed_tournament(pop, game, config)
        resp.best_mixed = schemas.StrategyValue(p=list(mixed_p), value=mixed_value)
        resp.gap = mixed_value - pure_value
    return resp


def run_verify(req: schemas.VerifyRequest) -> schemas.VerifyResponse:
    try:
        theorem = verify.TheoremId(req.theorem)
    except ValueError:
        names = ", ".join(t.value for t in verify.TheoremId)
        raise OutOfRange(f"unknown theorem {req.theorem!r}; expected one of: {names}")
    report = verify.check(theorem, req.samples, req.seed)
    return schemas.VerifyResponse(
        theorem=report.theorem.value,
        samples=report.samples_tried,
        seed=report.seed,
        max_violation=report.max_violation,
        threshold=report.threshold,
        falsified=report.falsified,
        counterexample=report.counterexample,
        notes=report.notes,
    )


def simulate(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
    game = _game(req.game)

    def player(data):
        if isinstance(data, schemas.KMemoryIn):
            return mdp.KMemoryStrategy.from_table(data.k, data.actions, data.table)
        return _strategy(data, "any")

    result = montecarlo.simulate(player(req.p), player(req.q), game, req.rounds, req.seed)
    return schemas.SimulateResponse(
        mean_x=result.mean_x,
        mean_y=result.mean_y,
        std_err=result.std_err,
        rounds=result.rounds,
        seed=result.seed,
        generator=result.generator,
    )
