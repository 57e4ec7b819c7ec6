"""Pure best responses to a mixed one-memory opponent, and opponent classes.

Average payoff is monotone in each strategy coordinate, so a best response
always sits at a corner of [0,1]^4.  Corners are encoded as integers
k = 8*p1 + 4*p2 + 2*p3 + p4.  Three corners tie with Always Defect and two
with Always Cooperate against every mixed opponent, and k = 12 is the
excluded Repeat strategy, which leaves the eleven distinct candidates in
``DISTINCT_SET``.

Opponent classes are read off the equalizer boundary: with
q = (q1, q2, q3, q4) fixed at its first and last components, ``qbar2`` and
``qbar3`` are the unique values making every response earn the same payoff
(an equalizer, called MisChief here).  Sitting below the boundary in q2
(MisTort) makes Always Cooperate the unique best response; sitting below it
in q3 with q2 on the bar (MisDefect) makes Always Defect one.  Extortionate
strategies enforce a linear score relation via parameters (phi, chi) and
never coincide with MisTort.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .chains import average_payoffs, batch_determinant
from .errors import OutOfRange
from .games import REPEAT, GameSpec, MemoryOneStrategy

#: Binary encodings of the eleven payoff-distinct pure responses.
DISTINCT_SET = (0, 1, 2, 3, 5, 6, 7, 9, 10, 11, 15)
#: Encoding of the excluded Repeat strategy.
REPEAT_INDEX = 12
#: Corners that earn identical payoffs against any completely mixed opponent.
EQUIVALENCE_CLASSES = ((0, 4, 8), (15, 13, 14))

#: Members of best_set lie within this distance of the best value.
TIE_TOL = 1e-9
#: Absolute tolerance for boundary-class membership (equalities on q).
CLASS_TOL = 1e-10

#: Classification labels.
MISCHIEF = "MisChief"
MISTORT = "MisTort"
MISDEFECT = "MisDefect"
EXTORTIONATE = "Extortionate"
UNGRATEFUL = "Ungrateful"


def encode_pure(bits: Iterable[float]) -> int:
    """Binary strategy -> index, p1 being the most significant bit."""
    b = [float(v) for v in bits]
    if len(b) != 4 or any(v not in (0.0, 1.0) for v in b):
        raise OutOfRange(f"not a pure strategy: {tuple(bits)}")
    return int(b[0] * 8 + b[1] * 4 + b[2] * 2 + b[3])


def decode_pure(k: int) -> tuple[int, int, int, int]:
    """Index -> binary strategy vector."""
    if not 0 <= k <= 15:
        raise OutOfRange(f"pure strategy index {k} outside [0, 15]")
    return ((k >> 3) & 1, (k >> 2) & 1, (k >> 1) & 1, k & 1)


def strategy_from_index(k: int) -> MemoryOneStrategy:
    return MemoryOneStrategy(*(float(b) for b in decode_pure(k)))


@dataclass(frozen=True)
class ResponseTable:
    """Payoff of each distinct pure response and the argmax set."""

    values: dict[int, float]
    best_value: float
    best_set: tuple[int, ...]

    @property
    def canonical_best(self) -> int:
        return self.best_set[0]


@dataclass(frozen=True)
class MischiefBars:
    """Equalizer boundary values for q2 and q3 given (q1, q4) and a game."""

    qbar2: float
    qbar3: float
    feasible: bool


@dataclass(frozen=True)
class ExtortionParams:
    """Recovered (phi, chi) of an extortionate strategy, if any."""

    phi: float
    chi: float
    valid: bool


def table_values(Q, payoff_x, indices=DISTINCT_SET) -> np.ndarray:
    """Payoffs of the pure responses ``indices`` against opponents ``Q``.

    Q and payoff_x have shape (..., 4); the result has shape (..., len(indices)).
    Vectorized over leading axes so samplers can score many opponents at once.
    """
    Q = np.asarray(Q, float)
    payoff_x = np.asarray(payoff_x, float)
    ones = np.ones(4)
    cols = []
    for k in indices:
        P = np.asarray(decode_pure(k), float)
        cols.append(batch_determinant(P, Q, payoff_x) / batch_determinant(P, Q, ones))
    return np.stack(cols, axis=-1)


def pure_payoff_table(q: MemoryOneStrategy, game: GameSpec) -> ResponseTable:
    """Score the eleven distinct pure responses against q.

    Values are computed through the determinant ratio; the duplicates
    {0,4,8} and {13,14,15} are collapsed to representatives 0 and 15.
    """
    values = {
        k: average_payoffs(strategy_from_index(k), q, game).s_x for k in DISTINCT_SET
    }
    best_value = max(values.values())
    best_set = tuple(k for k in DISTINCT_SET if values[k] >= best_value - TIE_TOL)
    return ResponseTable(values, best_value, best_set)


def best_response_pure(
    q: MemoryOneStrategy, game: GameSpec
) -> tuple[tuple[MemoryOneStrategy, ...], float]:
    """Decoded best responses (smallest index first) and their payoff."""
    table = pure_payoff_table(q, game)
    return tuple(strategy_from_index(k) for k in table.best_set), table.best_value


def classify_ungrateful(q: MemoryOneStrategy) -> bool:
    """True iff q3 <= q1 <= q4 <= q2.

    Such an opponent is never more cooperative in outcomes the focal player
    improved, so Always Defect is a best response to it.
    """
    q1, q2, q3, q4 = q.as_tuple()
    return q3 <= q1 <= q4 <= q2


def mischief_bars(q1: float, q4: float, game: GameSpec) -> MischiefBars:
    """Equalizer values for q2 and q3 given the outer components.

    Infeasible bars (outside the open unit interval) are reported, not
    rejected.  The expressions are evaluated exactly as written so that
    rational inputs reproduce their rational targets to the last ulp.
    """
    R, S, T, P = game.R, game.S, game.T, game.P
    qbar2 = (q1 * (T - P) - (1 + q4) * (T - R)) / (R - P)
    qbar3 = ((1 - q1) * (P - S) + q4 * (R - S)) / (R - P)
    feasible = 0.0 < qbar2 < 1.0 and 0.0 < qbar3 < 1.0
    return MischiefBars(qbar2, qbar3, feasible)


def extortion_params(q: MemoryOneStrategy, game: GameSpec) -> ExtortionParams:
    """Recover (phi, chi) from q, assuming the extortion closed forms.

    The forms are linear in phi and phi*chi, so the q1 and q3 components
    determine both; validity additionally requires q4 = 0, chi > 1, the
    phi upper bound, and that q2 reproduces within CLASS_TOL.
    """
    q1, q2, q3, q4 = q.as_tuple()
    R, S, T, P = game.R, game.S, game.T, game.P
    ps = P - S
    rp = R - P
    tp = T - P
    # phi*chi - phi from the q1 form; phi*chi + phi*(T-P)/(P-S) from the q3 form
    gap = (1.0 - q1) * ps / rp
    phi = (q3 - gap) / (1.0 + tp / ps)
    phichi = phi + gap
    if phi <= 0.0 or not np.isfinite(phi):
        return ExtortionParams(phi, float("nan"), False)
    chi = phichi / phi
    q2_check = 1.0 - phi * (1.0 + chi * tp / ps)
    bound = ps / (ps + chi * tp)
    valid = (
        abs(q4) <= CLASS_TOL
        and chi > 1.0
        and 0.0 < phi <= bound + CLASS_TOL
        and abs(q2 - q2_check) <= CLASS_TOL
    )
    return ExtortionParams(phi, chi, bool(valid))


def classify_q(q: MemoryOneStrategy, game: GameSpec) -> tuple[str, ...]:
    """Multi-label classification of an opponent strategy.

    Labels are independent and may overlap; an empty tuple means none
    apply.  Equality comparisons use CLASS_TOL so that exact rational
    inputs on the class boundaries are recognized.  The boundary-class
    arithmetic is well defined for any q in [0,1]^4; the best-response
    guarantees attached to each label additionally assume the opponent is
    completely mixed (extortion instead requires q4 = 0).
    """
    q1, q2, q3, q4 = q.as_tuple()
    bars = mischief_bars(q1, q4, game)
    labels = []
    q2_on = abs(q2 - bars.qbar2) <= CLASS_TOL
    q3_on = abs(q3 - bars.qbar3) <= CLASS_TOL
    if q2_on and q3_on:
        labels.append(MISCHIEF)
    if q3_on and bars.qbar2 - q2 > CLASS_TOL:
        labels.append(MISTORT)
    if q2_on and bars.qbar3 - q3 > CLASS_TOL:
        labels.append(MISDEFECT)
    if extortion_params(q, game).valid:
        labels.append(EXTORTIONATE)
    if classify_ungrateful(q):
        labels.append(UNGRATEFUL)
    return tuple(labels)


def payoff_region_scatter(
    q: MemoryOneStrategy, game: GameSpec, n: int, seed: int = 0
) -> np.ndarray:
    """(s_x, s_y) pairs for n responses against q.

    The first eleven rows are the distinct pure responses, followed by a
    deterministic lattice over [0,1]^4 (Repeat excluded) and a seeded
    uniform fill, so the scatter always contains the pure optimum and is
    reproducible for a given seed.
    """
    if n < len(DISTINCT_SET):
        raise OutOfRange(f"n = {n} is smaller than the {len(DISTINCT_SET)} pure responses")
    points = [np.asarray(decode_pure(k), float) for k in DISTINCT_SET]
    if n > len(points):
        axis = np.linspace(0.0, 1.0, 4)
        lattice = np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 4)
        corners = (lattice == 0.0) | (lattice == 1.0)
        keep = ~corners.all(axis=1)
        points.extend(lattice[keep][: n - len(points)])
    if n > len(points):
        rng = np.random.default_rng(seed)
        fill = rng.uniform(0.0, 1.0, (n - len(points), 4))
        repeatish = np.all(fill == np.asarray(REPEAT), axis=1)
        fill[repeatish, 3] = 0.5
        points.extend(fill)
    P = np.asarray(points)
    ones = np.ones(4)
    d_one = batch_determinant(P, q.as_tuple(), ones)
    s_x = batch_determinant(P, q.as_tuple(), np.asarray(game.payoff_x)) / d_one
    s_y = batch_determinant(P, q.as_tuple(), np.asarray(game.payoff_y)) / d_one
    return np.stack([s_x, s_y], axis=-1)
