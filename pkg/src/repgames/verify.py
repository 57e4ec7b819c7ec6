"""Randomized counterexample search for the package's structural claims.

Each claim gets a hypothesis sampler and a conclusion evaluator.  The
sampler draws instances satisfying the hypothesis by construction: games
come from a normalized region with S = 0 and the dilemma inequalities built
in (average payoffs are shift and scale equivariant, so nothing is lost for
strict-inequality claims), mixing probabilities are uniform over
(epsilon, 1 - epsilon), and measure-zero equality constraints such as
q2 = qbar2 are set exactly rather than filtered by rejection.

A run that finds no violation beyond the noise threshold is falsification
evidence, not a proof; reports say so in their notes.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InfeasibleHypothesis, SegmentHitsRepeat
from .games import REPEAT, GameSpec, MemoryOneStrategy
from .chains import batch_determinant
from .response import DISTINCT_SET, table_values

#: Violations beyond this are genuine counterexamples, below it noise.
VIOLATION_THRESHOLD = 1e-8
#: Slack allowed when asserting a payoff sweep is monotone.
MONOTONE_SLACK = 1e-10
#: Open-interval margin for sampled mixing probabilities.
Q_EPSILON = 1e-6
#: Points per monotonicity segment.
SEGMENT_POINTS = 101
#: Consecutive rejected draws tolerated before giving up on a hypothesis.
REJECTION_CAP = 10**6

_CHUNK = 20000
_CHUNK_MONOTONE = 1000  # each monotonicity sample expands to 101 evaluations
_BOUNDARY_MASS = 0.3


class TheoremId(str, Enum):
    """Claims checkable by ``check``; values double as CLI names."""

    D_NEGATIVE = "d_negative"
    MONOTONE = "monotone"
    EQUIVALENCE = "equivalence"
    UNGRATEFUL_BR = "ungrateful_br"
    MISCHIEF_EQUAL = "mischief_equal"
    MISTORT_BR = "mistort_br"
    MISDEFECT_BR = "misdefect_br"
    NO_INTERSECTION = "no_intersection"


@dataclass(frozen=True)
class FalsificationReport:
    theorem: TheoremId
    samples_tried: int
    counterexample: dict | None
    max_violation: float
    seed: int
    threshold: float
    notes: str

    @property
    def falsified(self) -> bool:
        return self.counterexample is not None


@dataclass(frozen=True)
class MonotonicityReport:
    """Payoff sweep along one coordinate with its worst adverse step."""

    coordinate: str
    grid: np.ndarray
    payoffs: np.ndarray
    violation: float
    monotone: bool


COORDINATES = ("p1", "p2", "p3", "p4", "q1", "q2", "q3", "q4")


def _sample_games(rng, n):
    """(R, S, T, P) rows with S = 0 and the dilemma inequalities enforced."""
    P = rng.uniform(0.1, 2.0, n)
    R = rng.uniform(P + 0.1, 5.0)
    T = rng.uniform(R + 0.1, 2.0 * R - 0.1)
    return np.stack([R, np.zeros(n), T, P], axis=-1)


def _sample_q(rng, n):
    return rng.uniform(Q_EPSILON, 1.0 - Q_EPSILON, (n, 4))


def _sample_p(rng, n):
    """Responder strategies over the closed cube with mass on the faces."""
    p = rng.uniform(0.0, 1.0, (n, 4))
    on_face = rng.random((n, 4)) < _BOUNDARY_MASS
    p[on_face] = np.round(p[on_face])
    repeat_rows = np.all(p == np.asarray(REPEAT), axis=1)
    while repeat_rows.any():
        p[repeat_rows] = rng.uniform(0.0, 1.0, (int(repeat_rows.sum()), 4))
        repeat_rows = np.all(p == np.asarray(REPEAT), axis=1)
    return p


def _payoff_x(P, Q, G):
    ones = np.ones(4)
    return batch_determinant(P, Q, G) / batch_determinant(P, Q, ones)


def _bars(q1, q4, G):
    R, S, T, P = (G[..., i] for i in range(4))
    qbar2 = (q1 * (T - P) - (1 + q4) * (T - R)) / (R - P)
    qbar3 = ((1 - q1) * (P - S) + q4 * (R - S)) / (R - P)
    return qbar2, qbar3


def _dominance_violation(F, best_column):
    """How far any rival comes to matching the supposedly dominant column."""
    rivals = np.delete(F, best_column, axis=1)
    return (rivals - F[:, [best_column]]).max(axis=1)


def _eval_d_negative(rng, n):
    G = _sample_games(rng, n)
    Q = _sample_q(rng, n)
    P = _sample_p(rng, n)
    viol = batch_determinant(P, Q, np.ones(4))
    return viol, {"p": P, "q": Q, "game": G}


def _eval_equivalence(rng, n):
    G = _sample_games(rng, n)
    Q = _sample_q(rng, n)
    F = table_values(Q, G, indices=(0, 4, 8, 15, 13, 14))
    dev = np.stack(
        [
            np.abs(F[:, 0] - F[:, 1]),
            np.abs(F[:, 0] - F[:, 2]),
            np.abs(F[:, 3] - F[:, 4]),
            np.abs(F[:, 3] - F[:, 5]),
        ],
        axis=-1,
    )
    return dev.max(axis=1), {"q": Q, "game": G}


def _eval_ungrateful(rng, n):
    G = _sample_games(rng, n)
    draws = np.sort(rng.uniform(Q_EPSILON, 1.0 - Q_EPSILON, (n, 4)), axis=1)
    Q = np.empty((n, 4))
    Q[:, 2] = draws[:, 0]
    Q[:, 0] = draws[:, 1]
    Q[:, 3] = draws[:, 2]
    Q[:, 1] = draws[:, 3]
    F = table_values(Q, G)
    return _dominance_violation(F, DISTINCT_SET.index(0)), {"q": Q, "game": G}


def _rejection_fill(rng, n, draw):
    """Accumulate n accepted draws, tracking consecutive rejections."""
    parts: list[tuple[np.ndarray, np.ndarray]] = []
    accepted = 0
    consecutive_rejects = 0
    while accepted < n:
        want = max(n - accepted, 1000)
        Q, G = draw(rng, want)
        got = len(Q)
        if got == 0:
            consecutive_rejects += want
            if consecutive_rejects >= REJECTION_CAP:
                raise InfeasibleHypothesis(
                    f"no hypothesis-satisfying draw in {consecutive_rejects} attempts"
                )
            continue
        consecutive_rejects = 0
        take = min(got, n - accepted)
        parts.append((Q[:take], G[:take]))
        accepted += take
    Q = np.concatenate([x for x, _ in parts])
    G = np.concatenate([g for _, g in parts])
    return Q, G


def _draw_mischief(rng, want):
    G = _sample_games(rng, want)
    q1 = rng.uniform(Q_EPSILON, 1.0 - Q_EPSILON, want)
    q4 = rng.uniform(Q_EPSILON, 1.0 - Q_EPSILON, want)
    qb2, qb3 = _bars(q1, q4, G)
    ok = (qb2 > Q_EPSILON) & (qb2 < 1 - Q_EPSILON) & (qb3 > Q_EPSILON) & (qb3 < 1 - Q_EPSILON)
    Q = np.stack([q1[ok], qb2[ok], qb3[ok], q4[ok]], axis=-1)
    return Q, G[ok]


def _eval_mischief(rng, n):
    Q, G = _rejection_fill(rng, n, _draw_mischief)
    F = table_values(Q, G)
    spread = F.max(axis=1) - F.min(axis=1)
    return spread, {"q": Q, "game": G}


def _draw_mistort(rng, want):
    G = _sample_games(rng, want)
    q1 = rng.uniform(Q_EPSILON, 1.0 - Q_EPSILON, want)
    q4 = rng.uniform(Q_EPSILON, 1.0 - Q_EPSILON, want)
    qb2, qb3 = _bars(q1, q4, G)
    upper = np.minimum(qb2, 1.0 - Q_EPSILON)
    ok = (qb3 > Q_EPSILON) & (qb3 < 1 - Q_EPSILON) & (upper > Q_EPSILON)
    q2 = rng.uniform(Q_EPSILON, np.where(ok, upper, 1.0))
    Q = np.stack([q1[ok], q2[ok], qb3[ok], q4[ok]], axis=-1)
    return Q, G[ok]


def _eval_mistort(rng, n):
    Q, G = _rejection_fill(rng, n, _draw_mistort)
    F = table_values(Q, G)
    return _dominance_violation(F, DISTINCT_SET.index(15)), {"q": Q, "game": G}


def _draw_misdefect(rng, want):
    G = _sample_games(rng, want)
    q1 = rng.uniform(Q_EPSILON, 1.0 - Q_EPSILON, want)
    q4 = rng.uniform(Q_EPSILON, 1.0 - Q_EPSILON, want)
    qb2, qb3 = _bars(q1, q4, G)
    upper = np.minimum(qb3, 1.0 - Q_EPSILON)
    ok = (qb2 > Q_EPSILON) & (qb2 < 1 - Q_EPSILON) & (upper > Q_EPSILON)
    q3 = rng.uniform(Q_EPSILON, np.where(ok, upper, 1.0))
    Q = np.stack([q1[ok], qb2[ok], q3[ok], q4[ok]], axis=-1)
    return Q, G[ok]


def _eval_misdefect(rng, n):
    Q, G = _rejection_fill(rng, n, _draw_misdefect)
    F = table_values(Q, G)
    return _dominance_violation(F, DISTINCT_SET.index(0)), {"q": Q, "game": G}


def _draw_extortionate(rng, want):
    G = _sample_games(rng, want)
    R, S, T, P = (G[:, i] for i in range(4))
    ps = P - S
    tp = T - P
    rp = R - P
    chi = 1.0 + rng.uniform(1e-6, 9.0, want)
    bound = ps / (ps + chi * tp)
    phi = rng.uniform(0.0, 1.0, want) * bound
    q1 = 1.0 - phi * (chi - 1.0) * rp / ps
    q2 = 1.0 - phi * (1.0 + chi * tp / ps)
    q3 = phi * (chi + tp / ps)
    Q = np.stack([q1, q2, q3, np.zeros(want)], axis=-1)
    ok = (phi > 0) & (Q >= 0.0).all(axis=1) & (Q <= 1.0).all(axis=1)
    return Q[ok], G[ok]


def _eval_no_intersection(rng, n):
    """Negated distance from sampled extortionate strategies to the MisTort
    conditions; a counterexample is a distance at or below the threshold."""
    Q, G = _rejection_fill(rng, n, _draw_extortionate)
    qb2, qb3 = _bars(Q[:, 0], Q[:, 3], G)
    dist = np.where(Q[:, 1] < qb2, np.abs(Q[:, 2] - qb3), np.inf)
    return -dist, {"q": Q, "game": G}


def _segment_payoffs(p, q, game_row, coordinate_index):
    npts = SEGMENT_POINTS
    P = np.tile(np.asarray(p, float), (npts, 1))
    Q = np.tile(np.asarray(q, float), (npts, 1))
    if coordinate_index < 4:
        P[:, coordinate_index] = np.linspace(0.0, 1.0, npts)
    else:
        Q[:, coordinate_index - 4] = np.linspace(Q_EPSILON, 1.0 - Q_EPSILON, npts)
    G = np.tile(np.asarray(game_row, float), (npts, 1))
    return _payoff_x(P, Q, G)


def _monotone_violation(values):
    """Negative when the sequence is monotone in either direction."""
    d = np.diff(values, axis=-1)
    return np.minimum(d.max(axis=-1), (-d).max(axis=-1))


def monotonicity_check(
    p: MemoryOneStrategy, q: MemoryOneStrategy, game: GameSpec, coordinate: str
) -> MonotonicityReport:
    """Sweep one coordinate over 101 evenly spaced values and test
    monotonicity of the focal payoff, with MONOTONE_SLACK of tolerance.

    q-coordinates sweep the open interval (the opponent must stay
    completely mixed); p-coordinates sweep [0, 1] and raise
    SegmentHitsRepeat when the sweep would pass through (1,1,0,0).
    """
    if coordinate not in COORDINATES:
        raise ValueError(f"coordinate must be one of {COORDINATES}")
    idx = COORDINATES.index(coordinate)
    pv = list(p.as_tuple())
    if idx < 4:
        others = [v for i, v in enumerate(pv) if i != idx]
        repeat_others = [v for i, v in enumerate(REPEAT) if i != idx]
        if others == repeat_others:
            raise SegmentHitsRepeat(f"sweeping {coordinate} passes through the Repeat strategy")
    if idx < 4:
        grid = np.linspace(0.0, 1.0, SEGMENT_POINTS)
    else:
        grid = np.linspace(Q_EPSILON, 1.0 - Q_EPSILON, SEGMENT_POINTS)
    values = _segment_payoffs(pv, q.as_tuple(), (game.R, game.S, game.T, game.P), idx)
    violation = float(_monotone_violation(values))
    return MonotonicityReport(coordinate, grid, values, violation, violation <= MONOTONE_SLACK)


def _eval_monotone(rng, n):
    G = _sample_games(rng, n)
    Q = _sample_q(rng, n)
    P = _sample_p(rng, n)
    coords = rng.integers(0, 8, n)
    # avoid p-sweeps whose fixed components pin the segment through Repeat
    repeat = np.asarray(REPEAT)
    for i in range(n):
        while coords[i] < 4:
            others = np.delete(P[i], coords[i])
            if not np.array_equal(others, np.delete(repeat, coords[i])):
                break
            P[i] = _sample_p(rng, 1)[0]
    npts = SEGMENT_POINTS
    Pbig = np.repeat(P[:, None, :], npts, axis=1)
    Qbig = np.repeat(Q[:, None, :], npts, axis=1)
    open_grid = np.linspace(Q_EPSILON, 1.0 - Q_EPSILON, npts)
    closed_grid = np.linspace(0.0, 1.0, npts)
    for i in range(n):
        c = int(coords[i])
        if c < 4:
            Pbig[i, :, c] = closed_grid
        else:
            Qbig[i, :, c - 4] = open_grid
    Gbig = np.repeat(G[:, None, :], npts, axis=1)
    values = _payoff_x(Pbig, Qbig, Gbig)
    viol = _monotone_violation(values)
    return viol, {"p": P, "q": Q, "game": G, "coordinate": coords}


_NOTES = (
    "numerical falsification evidence, not a proof; games sampled with S = 0 "
    "(average payoffs are shift and scale equivariant)"
)

_THEOREMS = {
    TheoremId.D_NEGATIVE: (_eval_d_negative, "D(p, q, 1) stays strictly negative"),
    TheoremId.MONOTONE: (_eval_monotone, "payoff sweeps along one coordinate are monotone"),
    TheoremId.EQUIVALENCE: (_eval_equivalence, "corner duplicates {0,4,8} and {13,14,15} score equal"),
    TheoremId.UNGRATEFUL_BR: (_eval_ungrateful, "q3 <= q1 <= q4 <= q2 makes Always Defect dominant"),
    TheoremId.MISCHIEF_EQUAL: (_eval_mischief, "equalizer opponents level all eleven responses"),
    TheoremId.MISTORT_BR: (_eval_mistort, "below-bar q2 with q3 on the bar makes Always Cooperate dominant"),
    TheoremId.MISDEFECT_BR: (_eval_misdefect, "below-bar q3 with q2 on the bar makes Always Defect dominant"),
    TheoremId.NO_INTERSECTION: (
        _eval_no_intersection,
        "extortionate strategies stay clear of the MisTort conditions; "
        "violation is the negated distance, flagged at -threshold",
    ),
}


def _counterexample_at(i, assignment, violation):
    out: dict = {"violation": float(violation)}
    for key, arr in assignment.items():
        if key == "game":
            for name, value in zip(("R", "S", "T", "P"), arr[i]):
                out[name] = float(value)
        elif key == "coordinate":
            out[key] = COORDINATES[int(arr[i])]
        else:
            out[key] = [float(x) for x in arr[i]]
    return out


def check(theorem, samples: int, seed: int = 0) -> FalsificationReport:
    """Search ``samples`` hypothesis-satisfying instances for a violation.

    Identical (theorem, samples, seed) triples produce identical reports.
    The returned ``max_violation`` is the worst margin observed; a
    counterexample is recorded only beyond the noise threshold.
    """
    theorem = TheoremId(theorem)
    if samples < 1:
        raise ValueError("samples must be at least 1")
    evaluator, summary = _THEOREMS[theorem]
    flag_above = -VIOLATION_THRESHOLD if theorem is TheoremId.NO_INTERSECTION else VIOLATION_THRESHOLD
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    chunk = _CHUNK_MONOTONE if theorem is TheoremId.MONOTONE else _CHUNK
    tried = 0
    max_violation = -np.inf
    counterexample = None
    while tried < samples:
        n = min(chunk, samples - tried)
        violations, assignment = evaluator(rng, n)
        tried += n
        worst = int(np.argmax(violations))
        if violations[worst] > max_violation:
            max_violation = float(violations[worst])
        if counterexample is None and violations[worst] > flag_above:
            counterexample = _counterexample_at(worst, assignment, violations[worst])
    return FalsificationReport(
        theorem=theorem,
        samples_tried=tried,
        counterexample=counterexample,
        max_violation=float(max_violation),
        seed=seed,
        threshold=VIOLATION_THRESHOLD,
        notes=f"{summary}; {_NOTES}",
    )
