r"""Outcome-chain analytics for one-memory strategy pairs.

Two independent routes to the long-run average payoff are implemented:

* the ratio of two 4x4 determinants (the Press-Dyson identity), and
* the stationary distribution of the outcome chain dotted with the payoff
  vector.

Against a completely mixed opponent both routes agree; the test suite
enforces agreement to ``CROSS_CHECK_TOL``.  The determinant route is the
primary one because it stays finite and cheap; the stationary route is the
oracle.

The chain is row-stochastic over outcomes (cc, cd, dc, dd) and distributions
are row vectors that evolve by right multiplication, so the stationary
distribution v satisfies v @ M = v.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NearSingular, SingularChain
from .games import OPPONENT_INDEX, GameSpec, MemoryOneStrategy

#: Tolerance on structural facts: row sums, entry bounds, distribution sums.
STRUCTURAL_TOL = 1e-12
#: Bound on the max-norm of v @ M - v accepted for a stationary solve.
RESIDUAL_TOL = 1e-10
#: Agreement required between the determinant and stationary payoff routes.
CROSS_CHECK_TOL = 1e-9
#: |D(p, q, 1)| below this value is treated as a singular chain.
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class ChainModel:
    """Row-stochastic 4x4 outcome transition matrix and the inducing pair."""

    matrix: np.ndarray
    p: MemoryOneStrategy
    q: MemoryOneStrategy


@dataclass(frozen=True)
class StationaryDistribution:
    """Left fixed point of the chain with its defect ``residual``."""

    v: np.ndarray
    residual: float


@dataclass(frozen=True)
class PayoffPair:
    """Long-run average payoffs of the focal player and the opponent."""

    s_x: float
    s_y: float


def build_transition_matrix(p: MemoryOneStrategy, q: MemoryOneStrategy) -> ChainModel:
    """Outcome chain of a strategy pair.

    Row z holds the distribution of the next outcome given previous outcome
    z.  The focal player cooperates with probability p[z]; the opponent sees
    z from its own side, so rows cd and dc use q3 and q2 respectively.
    """
    pv = p.as_tuple()
    qv = q.as_tuple()
    M = np.empty((4, 4))
    for s in range(4):
        px = pv[s]
        qy = qv[OPPONENT_INDEX[s]]
        M[s, 0] = px * qy
        M[s, 1] = px * (1.0 - qy)
        M[s, 2] = (1.0 - px) * qy
        M[s, 3] = (1.0 - px) * (1.0 - qy)
    return ChainModel(M, p, q)


def stationary_distribution(chain: ChainModel) -> StationaryDistribution:
    """Unique v with v @ M = v and sum(v) = 1.

    One balance equation is redundant (the rows of M^T - I sum to zero), so
    the last one is replaced by the normalization and the 4x4 system is
    solved directly.  Raises SingularChain when the chain has no unique
    stationary distribution, which signals an absorbing pair such as Repeat
    leaking through validation.
    """
    M = chain.matrix
    A = M.T - np.eye(4)
    if np.linalg.matrix_rank(A, tol=1e-9) < 3:
        raise SingularChain("stationary distribution is not unique")
    A[3, :] = 1.0
    b = np.array([0.0, 0.0, 0.0, 1.0])
    try:
        v = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularChain(str(exc)) from exc
    residual = float(np.max(np.abs(v @ M - v)))
    if not np.isfinite(residual) or residual > RESIDUAL_TOL:
        raise SingularChain(f"stationary residual {residual:.3e} exceeds {RESIDUAL_TOL}")
    if v.min() < -STRUCTURAL_TOL or abs(v.sum() - 1.0) > STRUCTURAL_TOL:
        raise SingularChain("stationary solve produced an invalid distribution")
    return StationaryDistribution(v, residual)


def _determinant_matrix(P, Q, F):
    """Stack the 4x4 determinant layout for broadcast inputs of shape (...,4)."""
    p1, p2, p3, p4 = (P[..., i] for i in range(4))
    q1, q2, q3, q4 = (Q[..., i] for i in range(4))
    f1, f2, f3, f4 = (F[..., i] for i in range(4))
    rows = [
        np.stack([p1 * q1 - 1.0, p1 - 1.0, q1 - 1.0, f1], axis=-1),
        np.stack([p2 * q3, p2 - 1.0, q3, f2], axis=-1),
        np.stack([p3 * q2, p3, q2 - 1.0, f3], axis=-1),
        np.stack([p4 * q4, p4, q4, f4], axis=-1),
    ]
    return np.stack(rows, axis=-2)


def batch_determinant(P, Q, F) -> np.ndarray:
    """D(p, q, f) evaluated elementwise over arrays of shape (..., 4)."""
    P, Q, F = np.broadcast_arrays(np.asarray(P, float), np.asarray(Q, float), np.asarray(F, float))
    return np.linalg.det(_determinant_matrix(P, Q, F))


def determinant_D(p: MemoryOneStrategy, q: MemoryOneStrategy, f) -> float:
    r"""The 4x4 determinant D(p, q, f).

    Its first three columns depend only on the strategy pair; the fourth is
    the free vector f.  D(p, q, 1) is strictly negative whenever q is
    completely mixed and p is not Repeat, and
    s_X = D(p, q, S_X) / D(p, q, 1) is the focal player's average payoff.
    """
    return float(batch_determinant(p.as_tuple(), q.as_tuple(), np.asarray(f, float)))


def average_payoffs(p: MemoryOneStrategy, q: MemoryOneStrategy, game: GameSpec) -> PayoffPair:
    """Average payoffs of both players via determinant ratios.

    Expects q completely mixed and p anything but Repeat; under those
    preconditions the denominator is bounded away from zero.  Raises
    NearSingular if it is not.
    """
    pv = np.asarray(p.as_tuple())
    qv = np.asarray(q.as_tuple())
    d_one = float(batch_determinant(pv, qv, np.ones(4)))
    if abs(d_one) < SINGULAR_TOL:
        raise NearSingular(f"|D(p, q, 1)| = {abs(d_one):.3e} < {SINGULAR_TOL}")
    s_x = float(batch_determinant(pv, qv, np.asarray(game.payoff_x))) / d_one
    s_y = float(batch_determinant(pv, qv, np.asarray(game.payoff_y))) / d_one
    return PayoffPair(s_x, s_y)


def payoff_via_stationary(p: MemoryOneStrategy, q: MemoryOneStrategy, game: GameSpec) -> PayoffPair:
    """Average payoffs via the stationary distribution; the oracle route."""
    dist = stationary_distribution(build_transition_matrix(p, q))
    s_x = float(dist.v @ np.asarray(game.payoff_x))
    s_y = float(dist.v @ np.asarray(game.payoff_y))
    return PayoffPair(s_x, s_y)
