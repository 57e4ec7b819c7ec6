"""Domain types for stage games, one-memory strategies and outcome indexing.

Round outcomes are indexed in the fixed order (cc, cd, dc, dd), always read
from the focal player's perspective: ``cd`` means the focal player cooperated
and the opponent defected.  Every matrix, payoff vector and probability
vector in this package uses that order, which keeps the index swap between
the two players' viewpoints in exactly one place (`perspective_swap`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Mapping, Sequence

from .errors import (
    ConstraintViolation,
    NotCompletelyMixed,
    OutOfRange,
    RepeatStrategyForbidden,
)

#: The strategy that copies its own previous action.  Its outcome chain is
#: absorbing, so it is excluded wherever long-run payoffs are computed.
REPEAT = (1.0, 1.0, 0.0, 0.0)


class Outcome(IntEnum):
    CC = 0
    CD = 1
    DC = 2
    DD = 3


OUTCOMES = (Outcome.CC, Outcome.CD, Outcome.DC, Outcome.DD)

_SWAP = (Outcome.CC, Outcome.DC, Outcome.CD, Outcome.DD)

#: Index of the opponent's cooperation probability applicable in each
#: outcome row: the opponent reads cd as dc and vice versa.
OPPONENT_INDEX = tuple(int(o) for o in _SWAP)


def perspective_swap(outcome: Outcome) -> Outcome:
    """Re-express an outcome from the other player's point of view.

    cc and dd are fixed points; cd and dc trade places.  Applying the swap
    twice returns the original outcome.
    """
    return _SWAP[outcome]


@dataclass(frozen=True)
class GameSpec:
    """Payoff parameters (R, S, T, P) of a prisoner's dilemma stage game."""

    R: float
    S: float
    T: float
    P: float

    @property
    def payoff_x(self) -> tuple[float, float, float, float]:
        """Focal player's payoff per outcome (cc, cd, dc, dd)."""
        return (self.R, self.S, self.T, self.P)

    @property
    def payoff_y(self) -> tuple[float, float, float, float]:
        """Opponent's payoff per outcome, still indexed from the focal side."""
        return (self.R, self.T, self.S, self.P)


def validate_game(R: float, S: float, T: float, P: float) -> GameSpec:
    """Check the dilemma inequalities T > R > P > S and 2R > T + S.

    Raises ConstraintViolation naming the first inequality that fails.
    """
    for name, value in (("R", R), ("S", S), ("T", T), ("P", P)):
        if not math.isfinite(value):
            raise ConstraintViolation("finite payoffs", f"{name} is not finite")
    for name, lhs, rhs in (("T > R", T, R), ("R > P", R, P), ("P > S", P, S)):
        if not lhs > rhs:
            raise ConstraintViolation(name, f"{name} fails: {lhs} <= {rhs}")
    if not 2 * R > T + S:
        raise ConstraintViolation("2R > T + S", f"2R > T + S fails: {2 * R} <= {T + S}")
    return GameSpec(float(R), float(S), float(T), float(P))


@dataclass(frozen=True)
class MemoryOneStrategy:
    """Cooperation probabilities conditioned on the previous outcome.

    ``p1..p4`` apply after (cc, cd, dc, dd) seen from this strategy's own
    perspective.  ``p0`` is the probability of cooperating in round one; it
    only influences simulated transients, never long-run payoffs.
    """

    p1: float
    p2: float
    p3: float
    p4: float
    p0: float = 1.0

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p1, self.p2, self.p3, self.p4)

    def prob_cooperate(self, outcome: Outcome) -> float:
        return self.as_tuple()[outcome]

    @property
    def is_completely_mixed(self) -> bool:
        return all(0.0 < v < 1.0 for v in self.as_tuple())

    @property
    def is_repeat(self) -> bool:
        return self.as_tuple() == REPEAT


def validate_strategy(
    values: Sequence[float],
    required_kind: str = "any",
    p0: float = 1.0,
) -> MemoryOneStrategy:
    """Validate four cooperation probabilities and build a strategy.

    ``required_kind`` is one of "any", "completely_mixed" (every component
    strictly inside (0,1)) or "responder" (anything except Repeat).
    Boundary comparisons are exact; no epsilon is applied.
    """
    if required_kind not in ("any", "completely_mixed", "responder"):
        raise ValueError(f"unknown strategy kind {required_kind!r}")
    vals = [float(v) for v in values]
    if len(vals) != 4:
        raise OutOfRange(f"expected four probabilities, got {len(vals)}")
    for i, v in enumerate(vals, start=1):
        if not (math.isfinite(v) and 0.0 <= v <= 1.0):
            raise OutOfRange(f"p{i} = {v} is outside [0, 1]")
    if not (math.isfinite(p0) and 0.0 <= p0 <= 1.0):
        raise OutOfRange(f"p0 = {p0} is outside [0, 1]")
    strategy = MemoryOneStrategy(*vals, p0=float(p0))
    if required_kind == "responder" and strategy.is_repeat:
        raise RepeatStrategyForbidden("the Repeat strategy (1,1,0,0) is not a valid responder")
    if required_kind == "completely_mixed" and not strategy.is_completely_mixed:
        raise NotCompletelyMixed(f"components {tuple(vals)} are not all strictly inside (0, 1)")
    return strategy


@dataclass(frozen=True)
class StageGame:
    """A finite two-player stage game with utility tables per action profile.

    ``u1[i][j]`` and ``u2[i][j]`` are the players' payoffs when player 1
    takes its i-th action and player 2 its j-th.
    """

    actions1: tuple[str, ...]
    actions2: tuple[str, ...]
    u1: tuple[tuple[float, ...], ...]
    u2: tuple[tuple[float, ...], ...]

    def payoff(self, i1: int, i2: int) -> tuple[float, float]:
        return (self.u1[i1][i2], self.u2[i1][i2])

    @property
    def min_u1(self) -> float:
        return min(min(row) for row in self.u1)

    @property
    def max_u1(self) -> float:
        return max(max(row) for row in self.u1)


def stage_game(
    actions1: Sequence[str],
    actions2: Sequence[str],
    table: Mapping[tuple[str, str], tuple[float, float]],
) -> StageGame:
    """Build a StageGame from a utility table, checking totality."""
    a1 = tuple(actions1)
    a2 = tuple(actions2)
    if not a1 or not a2:
        raise OutOfRange("action sets must be nonempty")
    u1 = []
    u2 = []
    for x in a1:
        row1 = []
        row2 = []
        for y in a2:
            if (x, y) not in table:
                raise OutOfRange(f"utility table missing entry for profile ({x}, {y})")
            ux, uy = table[(x, y)]
            row1.append(float(ux))
            row2.append(float(uy))
        u1.append(tuple(row1))
        u2.append(tuple(row2))
    return StageGame(a1, a2, tuple(u1), tuple(u2))


def prisoners_dilemma(game: GameSpec) -> StageGame:
    """The 2x2 stage game with actions (c, d) and payoffs from ``game``."""
    R, S, T, P = game.R, game.S, game.T, game.P
    return stage_game(
        ("c", "d"),
        ("c", "d"),
        {
            ("c", "c"): (R, R),
            ("c", "d"): (S, T),
            ("d", "c"): (T, S),
            ("d", "d"): (P, P),
        },
    )
