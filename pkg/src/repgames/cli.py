"""Command-line client for the repgames service.

Each subcommand builds the same request model the HTTP endpoint accepts,
then either calls the handler in process (the default; no server needed)
or POSTs it to a running service given with ``--server``.  Output is JSON
with numbers printed to 12 significant digits, except ``scatter``, which
emits CSV.  Exit codes: 0 success, 1 usage or validation error, 2 domain
finding (a verification counterexample).

Strategy and game arguments are inline JSON; an argument starting with
``@`` names a file containing the JSON instead.
"""
from __future__ import annotations

import argparse
import json
import sys
import urllib.error
import urllib.request

from pydantic import ValidationError

from .errors import RepeatedGameError
from .service import handlers, schemas


class _UsageError(Exception):
    pass


def _json_arg(text: str):
    if text.startswith("@"):
        try:
            with open(text[1:], "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise _UsageError(f"cannot read {text[1:]!r}: {exc}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise _UsageError(f"invalid JSON argument: {exc}")


def _round_floats(obj, digits: int = 12):
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, digits) for v in obj]
    return obj


def _render_json(model) -> str:
    data = model.model_dump(exclude_none=True)
    return json.dumps(_round_floats(data)) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repgames",
        description="Best responses and average payoffs in repeated games.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seeded: bool):
        p.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")
        p.add_argument("--server", metavar="URL", help="POST to a running service instead of computing in process")
        if seeded:
            p.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
            p.add_argument("--strict", action="store_true", help="require an explicit --seed")

    p = sub.add_parser("payoff", help="average payoffs of a strategy pair")
    p.add_argument("--p", required=True, help="focal strategy JSON")
    p.add_argument("--q", required=True, help="opponent strategy JSON (completely mixed)")
    p.add_argument("--game", required=True, help="game JSON {R,S,T,P}")
    p.add_argument("--method", choices=["det", "stationary", "both"], default="det")
    common(p, seeded=False)

    p = sub.add_parser("best-response", help="pure best responses and opponent classes")
    p.add_argument("--q", required=True)
    p.add_argument("--game", required=True)
    common(p, seeded=False)

    p = sub.add_parser("scatter", help="payoff-region CSV (header s_x,s_y)")
    p.add_argument("--q", required=True)
    p.add_argument("--game", required=True)
    p.add_argument("--n", type=int, default=5000)
    common(p, seeded=True)

    p = sub.add_parser("mdp-solve", help="k-memory best response via the average-reward MDP")
    p.add_argument("--opponent", required=True, help="k-memory table JSON or one-memory strategy JSON")
    p.add_argument("--game", required=True)
    p.add_argument("--k", type=int, required=True)
    common(p, seeded=False)

    p = sub.add_parser("tournament", help="population tournament: pure enumeration and mixed search")
    p.add_argument("--pop", required=True, help='population JSON [{"p": [...], "count": n}, ...]')
    p.add_argument("--game", required=True)
    p.add_argument("--optimize", action="store_true", help="also search mixed strategies")
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--grid-step", type=float, default=0.1, dest="grid_step")
    common(p, seeded=True)

    p = sub.add_parser("verify", help="randomized counterexample search for one claim")
    p.add_argument("--theorem", required=True)
    p.add_argument("--samples", type=int, default=10000)
    common(p, seeded=True)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of average payoffs")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--game", required=True)
    p.add_argument("--rounds", type=int, default=1000000)
    common(p, seeded=True)

    return parser


def _seed_of(args) -> int:
    seed = getattr(args, "seed", None)
    if getattr(args, "strict", False) and seed is None:
        raise _UsageError("--strict requires an explicit --seed")
    return 0 if seed is None else seed


def _build_request(args):
    """Return (path, request model, output kind) for the parsed arguments."""
    cmd = args.command
    if cmd == "payoff":
        req = schemas.PayoffRequest(
            p=_json_arg(args.p), q=_json_arg(args.q), game=_json_arg(args.game), method=args.method
        )
        return "/payoff", req, "json"
    if cmd == "best-response":
        req = schemas.BestResponseRequest(q=_json_arg(args.q), game=_json_arg(args.game))
        return "/best-response", req, "json"
    if cmd == "scatter":
        req = schemas.ScatterRequest(
            q=_json_arg(args.q), game=_json_arg(args.game), n=args.n, seed=_seed_of(args)
        )
        return "/scatter", req, "csv"
    if cmd == "mdp-solve":
        req = schemas.MdpSolveRequest(
            opponent=_json_arg(args.opponent), game=_json_arg(args.game), k=args.k
        )
        return "/mdp-solve", req, "json"
    if cmd == "tournament":
        req = schemas.TournamentRequest(
            pop=_json_arg(args.pop),
            game=_json_arg(args.game),
            optimize=args.optimize,
            seed=_seed_of(args),
            starts=args.starts,
            grid_step=args.grid_step,
        )
        return "/tournament", req, "json"
    if cmd == "verify":
        req = schemas.VerifyRequest(theorem=args.theorem, samples=args.samples, seed=_seed_of(args))
        return "/verify", req, "json"
    if cmd == "simulate":
        req = schemas.SimulateRequest(
            p=_json_arg(args.p),
            q=_json_arg(args.q),
            game=_json_arg(args.game),
            rounds=args.rounds,
            seed=_seed_of(args),
        )
        return "/simulate", req, "json"
    raise _UsageError(f"unknown command {cmd!r}")


_HANDLERS = {
    "/payoff": handlers.payoff,
    "/best-response": handlers.best_response,
    "/scatter": handlers.scatter,
    "/mdp-solve": handlers.mdp_solve,
    "/tournament": handlers.run_tournament,
    "/verify": handlers.run_verify,
    "/simulate": handlers.simulate,
}


def _call_local(path: str, req, kind: str) -> str:
    result = _HANDLERS[path](req)
    if kind == "csv":
        return result
    return _render_json(result)


def _call_server(server: str, path: str, req, kind: str) -> str:
    url = server.rstrip("/") + path
    body = json.dumps(req.model_dump()).encode()
    http_req = urllib.request.Request(url, data=body, headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(http_req) as resp:
            text = resp.read().decode()
    except urllib.error.HTTPError as exc:
        detail = exc.read().decode(errors="replace")
        raise RepeatedGameError(f"server returned {exc.code}: {detail}")
    except urllib.error.URLError as exc:
        raise _UsageError(f"cannot reach server {server!r}: {exc.reason}")
    if kind == "csv":
        return text
    return json.dumps(_round_floats(json.loads(text))) + "\n"


def _write_output(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    """Parse arguments, dispatch, print the result, and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        path, req, kind = _build_request(args)
        if args.server:
            text = _call_server(args.server, path, req, kind)
        else:
            text = _call_local(path, req, kind)
        _write_output(text, args.out)
        if path == "/verify" and json.loads(text).get("falsified"):
            return 2
        return 0
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"invalid request: {exc}", file=sys.stderr)
        return 1
    except RepeatedGameError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    entrypoint()
