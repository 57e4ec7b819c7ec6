"""Population-weighted tournament payoffs and the mixed-strategy search.

A focal strategy plays every opponent in a fixed population and scores the
count-weighted average of its pairwise long-run payoffs.  Against a single
opponent a pure best response always exists; against a population it need
not, so beside the pure enumeration there is a derivative-free search over
the strategy cube that reports the best point it found (never claimed to be
a global optimum).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chains import batch_determinant
from .errors import NotCompletelyMixed, OutOfRange
from .games import REPEAT, GameSpec, MemoryOneStrategy
from .response import DISTINCT_SET, decode_pure, strategy_from_index

#: Shift applied to the Repeat corner when it shows up in continuous search.
REPEAT_NUDGE = 1e-6


@dataclass(frozen=True)
class Population:
    """Completely mixed opponents with multiplicities."""

    members: tuple[tuple[MemoryOneStrategy, int], ...]

    def __post_init__(self):
        if not self.members:
            raise OutOfRange("population must contain at least one opponent")
        for strategy, count in self.members:
            if not (isinstance(count, int) and count >= 1):
                raise OutOfRange(f"opponent count {count!r} must be a positive integer")
            if not strategy.is_completely_mixed:
                raise NotCompletelyMixed(
                    f"population member {strategy.as_tuple()} is not completely mixed"
                )

    @property
    def total_count(self) -> int:
        return sum(count for _, count in self.members)

    @property
    def weights(self) -> np.ndarray:
        total = self.total_count
        return np.array([count / total for _, count in self.members])


@dataclass(frozen=True)
class SearchConfig:
    """Knobs of the mixed-strategy search; defaults reproduce golden runs."""

    starts: int = 8
    grid_step: float = 0.1
    seed: int = 0
    refine_tol: float = 1e-6


@dataclass(frozen=True)
class TournamentResult:
    best_pure: tuple[MemoryOneStrategy, float]
    best_mixed: tuple[tuple[float, float, float, float], float]
    gap: float


def _payoff_batch(P: np.ndarray, pop: Population, game: GameSpec) -> np.ndarray:
    """Tournament payoff of each focal strategy row in P, shape (n, 4) -> (n,)."""
    ones = np.ones(4)
    sx = np.asarray(game.payoff_x)
    total = np.zeros(P.shape[:-1])
    for weight, (q, _) in zip(pop.weights, pop.members):
        qv = np.asarray(q.as_tuple())
        total = total + weight * (batch_determinant(P, qv, sx) / batch_determinant(P, qv, ones))
    return total


def tournament_payoff(p: MemoryOneStrategy, pop: Population, game: GameSpec) -> float:
    """Count-weighted average of p's pairwise payoffs over the population."""
    return float(_payoff_batch(np.asarray(p.as_tuple())[None, :], pop, game)[0])


def best_pure_tournament(pop: Population, game: GameSpec) -> tuple[MemoryOneStrategy, float]:
    """Argmax over the fifteen pure strategies, Repeat excluded.

    The corners {0,4,8} and {13,14,15} tie exactly against every completely
    mixed opponent, so the search runs over the eleven payoff-distinct
    representatives; genuine ties go to the smallest encoding.
    """
    P = np.asarray([decode_pure(k) for k in DISTINCT_SET], float)
    values = _payoff_batch(P, pop, game)
    best = int(np.argmax(values))
    return strategy_from_index(DISTINCT_SET[best]), float(values[best])


def _nudge_repeat(p: np.ndarray) -> np.ndarray:
    if tuple(p) == REPEAT:
        p = p.copy()
        p[3] = REPEAT_NUDGE
    return p


def _coordinate_refine(p0: np.ndarray, pop, game, step0: float, tol: float):
    """Pattern search over the cube: move one coordinate at a time, halve the
    step when a full sweep brings no improvement, stop below ``tol``."""
    p = _nudge_repeat(np.clip(p0, 0.0, 1.0))
    value = float(_payoff_batch(p[None, :], pop, game)[0])
    step = step0
    while step >= tol:
        improved = False
        for i in range(4):
            candidates = []
            for direction in (1.0, -1.0):
                x = p.copy()
                x[i] = min(1.0, max(0.0, x[i] + direction * step))
                candidates.append(_nudge_repeat(x))
            vals = _payoff_batch(np.asarray(candidates), pop, game)
            j = int(np.argmax(vals))
            if vals[j] > value:
                p, value = candidates[j], float(vals[j])
                improved = True
        if not improved:
            step *= 0.5
    return p, value


def optimize_mixed_tournament(
    pop: Population, game: GameSpec, config: SearchConfig | None = None
) -> tuple[tuple[float, float, float, float], float]:
    """Best mixed strategy found by grid scan plus coordinate refinement.

    The coarse grid includes every pure corner except Repeat, so the result
    never falls below the pure optimum.  The top grid points and a few
    seeded random points are refined; the overall best is returned.
    """
    config = config or SearchConfig()
    axis = np.arange(0.0, 1.0 + 1e-12, config.grid_step)
    grid = np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 4)
    repeat_row = np.all(grid == np.asarray(REPEAT), axis=1)
    grid[repeat_row, 3] = REPEAT_NUDGE
    values = _payoff_batch(grid, pop, game)
    order = np.argsort(values)[::-1]
    starts = [grid[i] for i in order[: config.starts]]
    rng = np.random.default_rng(config.seed)
    starts.extend(rng.uniform(0.0, 1.0, (config.starts, 4)))
    best_p = grid[order[0]]
    best_v = float(values[order[0]])
    for p0 in starts:
        p, v = _coordinate_refine(np.asarray(p0, float), pop, game, config.grid_step / 2, config.refine_tol)
        if v > best_v:
            best_p, best_v = p, v
    return tuple(float(x) for x in best_p), best_v


def solve_tournament(
    pop: Population, game: GameSpec, config: SearchConfig | None = None
) -> TournamentResult:
    """Pure enumeration plus mixed search, with the pure-vs-mixed gap."""
    pure = best_pure_tournament(pop, game)
    mixed = optimize_mixed_tournament(pop, game, config)
    return TournamentResult(pure, mixed, mixed[1] - pure[1])
