"""Stochastic oracle: simulate repeated play and estimate average payoffs.

The simulator is deliberately independent of the analytic machinery; it
tracks each player's remembered history explicitly and draws actions with a
counter-based generator (Philox) whose identifier is recorded in the result,
so a given seed reproduces the exact trajectory anywhere the same generator
exists.

Estimates use the batch-means method: the run is cut into 100 batches, the
first batch is discarded as burn-in, and the standard error is the sample
standard deviation of the remaining batch means over sqrt(99).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import OutOfRange
from .games import GameSpec, MemoryOneStrategy, StageGame, prisoners_dilemma
from .mdp import KMemoryStrategy, profile_digit

GENERATOR_ID = "philox4x64-10"
NUM_BATCHES = 100

Player = Union[MemoryOneStrategy, KMemoryStrategy]


@dataclass(frozen=True)
class SimResult:
    """Batch-means estimates of both players' average payoffs."""

    mean_x: float
    mean_y: float
    std_err: float
    rounds: int
    seed: int
    generator: str = GENERATOR_ID


def _as_kmemory(player: Player) -> tuple[KMemoryStrategy, float | None]:
    """Normalize a player to table form; one-memory keeps its round-1 p0."""
    if isinstance(player, MemoryOneStrategy):
        return KMemoryStrategy.from_memory_one(player), player.p0
    return player, None


def simulate(p: Player, q: Player, game, rounds: int, seed: int = 0) -> SimResult:
    """Play ``rounds`` rounds of the stage game and estimate average payoffs.

    ``p`` is player 1 (x) and ``q`` player 2 (y); each may be a one-memory
    strategy or a k-memory table.  Histories shorter than a player's memory
    are padded with the all-cooperate profile; one-memory players instead
    use their p0 in round one.  ``game`` is a GameSpec or a StageGame.
    """
    if rounds < 10**3:
        raise OutOfRange(f"rounds = {rounds} is below the minimum of 1000")
    stage = game if isinstance(game, StageGame) else prisoners_dilemma(game)
    kp, p0 = _as_kmemory(p)
    kq, q0 = _as_kmemory(q)
    n1 = len(stage.actions1)
    n2 = len(stage.actions2)
    if kp.own_actions != stage.actions1 or kq.own_actions != stage.actions2:
        raise OutOfRange("player action sets do not match the stage game")

    rng = np.random.Generator(np.random.Philox(key=seed))
    uniforms = rng.random((rounds, 2))
    # cooperate probabilities per own-perspective state (two-action fast path)
    two_actions = n1 == 2 and n2 == 2
    probs_p = kp.probs[:, 0].tolist() if two_actions else kp.probs.tolist()
    probs_q = kq.probs[:, 0].tolist() if two_actions else kq.probs.tolist()
    mod_p = kp.num_states // (n1 * n2)
    mod_q = kq.num_states // (n1 * n2)
    base = n1 * n2
    u1 = stage.u1
    u2 = stage.u2

    state_p = 0  # all-cooperate padding encodes as state 0
    state_q = 0
    batch_edges = np.linspace(0, rounds, NUM_BATCHES + 1).astype(int)
    sums_x = np.zeros(NUM_BATCHES)
    sums_y = np.zeros(NUM_BATCHES)
    batch = 0
    next_edge = int(batch_edges[1])
    us = uniforms.tolist()
    for r in range(rounds):
        ux, uy = us[r]
        if r == 0 and p0 is not None:
            pc = p0
        else:
            pc = probs_p[state_p]
        if r == 0 and q0 is not None:
            qc = q0
        else:
            qc = probs_q[state_q]
        if two_actions:
            a1 = 0 if ux < pc else 1
            a2 = 0 if uy < qc else 1
        else:
            a1 = int(np.searchsorted(np.cumsum(pc), ux, side="right"))
            a2 = int(np.searchsorted(np.cumsum(qc), uy, side="right"))
        if r >= next_edge:
            batch += 1
            next_edge = int(batch_edges[batch + 1])
        sums_x[batch] += u1[a1][a2]
        sums_y[batch] += u2[a1][a2]
        state_p = (state_p % mod_p) * base + profile_digit(a1, a2, n2)
        state_q = (state_q % mod_q) * base + profile_digit(a2, a1, n1)
    sizes = np.diff(batch_edges)
    means_x = sums_x / sizes
    means_y = sums_y / sizes
    kept_x = means_x[1:]
    kept_y = means_y[1:]
    std_err = float(np.std(kept_x, ddof=1) / np.sqrt(len(kept_x)))
    return SimResult(
        mean_x=float(kept_x.mean()),
        mean_y=float(kept_y.mean()),
        std_err=std_err,
        rounds=rounds,
        seed=seed,
    )
