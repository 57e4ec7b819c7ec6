"""Best response to a k-memory mixed strategy via an average-reward MDP.

States are the last k action profiles.  A profile (a1, a2) is one mixed-radix
digit, digit value = index(a1) * |A2| + index(a2), and a state packs k digits
into an integer with the most recent profile in the lowest digit, so playing
a round is integer arithmetic: new_state = (state % base**(k-1)) * base + digit.

Strategy tables are always indexed from their owner's perspective (own action
first in each profile).  The builder works from player 1's perspective and
swaps each digit before reading the opponent's table.

When the opponent is completely mixed every profile can follow every state,
the union transition graph is strongly connected, and the optimal average
reward (gain) is a constant attained by a pure stationary policy.  The
solver is relative value iteration on the aperiodicity-transformed model
P' = (1-tau) I + tau P with rewards unchanged; this rescales only the bias,
not the gain, and guarantees span convergence for communicating models.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    MemoryLimitExceeded,
    MemoryMismatch,
    NoConvergence,
    NotCommunicating,
    NotCompletelyMixed,
    OutOfRange,
)
from .games import MemoryOneStrategy, StageGame, prisoners_dilemma

#: Stop when the span of successive value differences falls below this.
SPAN_TOL = 1e-10
#: Hard cap on value-iteration sweeps.
MAX_ITERATIONS = 10**6
#: Identity blend weight of the aperiodicity transformation.
APERIODICITY_WEIGHT = 0.5
#: Q-values within this of the max tie; the lowest action index wins.
POLICY_TIE_TOL = 1e-9
#: Refuse state spaces beyond 24 bits (about 16M states).
MAX_STATE_BITS = 24


def profile_digit(i1: int, i2: int, n2: int) -> int:
    return i1 * n2 + i2


def swap_digit(d: int, n1: int, n2: int) -> int:
    """Re-encode a profile digit from the other player's perspective."""
    i1, i2 = divmod(d, n2)
    return i2 * n1 + i1


def swap_state(s: int, k: int, n1: int, n2: int) -> int:
    """Apply the digit swap to every profile of a packed state."""
    base = n1 * n2
    out = 0
    scale = 1
    for _ in range(k):
        s, d = divmod(s, base)
        out += swap_digit(d, n1, n2) * scale
        scale *= base
    return out


def shift_state(s: int, digit: int, k: int, base: int) -> int:
    """Drop the oldest profile and append ``digit`` as the most recent."""
    return (s % base ** (k - 1)) * base + digit


def state_key(s: int, k: int, actions_first, actions_second) -> str:
    """Render a packed state as comma-joined profiles, oldest first."""
    base = len(actions_first) * len(actions_second)
    digits = []
    for _ in range(k):
        s, d = divmod(s, base)
        digits.append(d)
    parts = []
    for d in reversed(digits):
        i1, i2 = divmod(d, len(actions_second))
        parts.append(f"{actions_first[i1]}{actions_second[i2]}")
    return ",".join(parts)


@dataclass(frozen=True)
class KMemoryStrategy:
    """Distribution over own actions for each history of k profiles.

    ``probs[s, a]`` is the probability of playing own action a in packed
    state s, with profiles written own-action-first from the owner's
    perspective.
    """

    k: int
    own_actions: tuple[str, ...]
    other_actions: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        base = len(self.own_actions) * len(self.other_actions)
        expected = (base**self.k, len(self.own_actions))
        if self.probs.shape != expected:
            raise OutOfRange(f"strategy table shape {self.probs.shape} != {expected}")
        sums = self.probs.sum(axis=1)
        if np.any(self.probs < 0.0) or np.max(np.abs(sums - 1.0)) > 1e-12:
            raise OutOfRange("strategy table rows must be distributions summing to 1")

    @property
    def num_states(self) -> int:
        return self.probs.shape[0]

    @property
    def is_completely_mixed(self) -> bool:
        return bool(np.all(self.probs > 0.0))

    @property
    def is_pure(self) -> bool:
        return bool(np.all((self.probs == 0.0) | (self.probs == 1.0)))

    def state_key(self, s: int) -> str:
        return state_key(s, self.k, self.own_actions, self.other_actions)

    def to_table(self) -> dict[str, list[float]]:
        return {self.state_key(s): [float(x) for x in self.probs[s]] for s in range(self.num_states)}

    @classmethod
    def from_table(cls, k, actions, table, other_actions=None) -> "KMemoryStrategy":
        """Build from a mapping of comma-joined profile keys to distributions.

        Keys list profiles oldest first; each profile concatenates the
        owner's action and the other player's action.
        """
        own = tuple(actions)
        other = tuple(other_actions) if other_actions is not None else own
        base = len(own) * len(other)
        if k < 1:
            raise OutOfRange("memory length must be at least 1")
        probs = np.full((base**k, len(own)), np.nan)
        i_own = {a: i for i, a in enumerate(own)}
        i_oth = {a: i for i, a in enumerate(other)}
        for key, dist in table.items():
            parts = key.split(",")
            if len(parts) != k:
                raise OutOfRange(f"state key {key!r} does not list {k} profiles")
            s = 0
            for part in parts:
                matched = None
                for a in own:
                    if part.startswith(a) and part[len(a):] in i_oth:
                        matched = (i_own[a], i_oth[part[len(a):]])
                        break
                if matched is None:
                    raise OutOfRange(f"unknown profile {part!r} in state key {key!r}")
                s = s * base + profile_digit(*matched, len(other))
            probs[s] = np.asarray(dist, float)
        if np.isnan(probs).any():
            missing = int(np.isnan(probs[:, 0]).sum())
            raise OutOfRange(f"strategy table is missing {missing} states")
        return cls(k, own, other, probs)

    @classmethod
    def from_memory_one(cls, strategy: MemoryOneStrategy) -> "KMemoryStrategy":
        """Lift a one-memory strategy to the table form over (c, d) profiles."""
        pv = strategy.as_tuple()
        probs = np.array([[pc, 1.0 - pc] for pc in pv])
        return cls(1, ("c", "d"), ("c", "d"), probs)


def stochastic_tit_for_two_tats(
    coop_after_two_defections: float = 0.1, coop_otherwise: float = 0.9
) -> KMemoryStrategy:
    """Two-memory strategy that turns cold only after two straight defections.

    It cooperates with ``coop_after_two_defections`` when the other player
    defected in both remembered rounds and with ``coop_otherwise`` in every
    other state.
    """
    probs = np.empty((16, 2))
    for s in range(16):
        old, recent = divmod(s, 4)
        punished = (old % 2 == 1) and (recent % 2 == 1)
        pc = coop_after_two_defections if punished else coop_otherwise
        probs[s] = (pc, 1.0 - pc)
    return KMemoryStrategy(2, ("c", "d"), ("c", "d"), probs)


@dataclass(frozen=True)
class MdpModel:
    """Average-reward MDP for best-responding to a fixed opponent.

    Transitions are stored in structured form: taking action a1 in state s
    moves to ``next_state[s, a1, a2]`` with probability ``action_prob[s, a2]``
    (the opponent's mixing is action-independent for player 1).  The reward
    of a state is the player-1 utility of its most recent profile,
    identical across own actions.
    """

    stage: StageGame
    k: int
    num_states: int
    actions: tuple[str, ...]
    next_state: np.ndarray
    action_prob: np.ndarray
    reward: np.ndarray

    @property
    def base(self) -> int:
        return len(self.stage.actions1) * len(self.stage.actions2)

    def state_key(self, s: int) -> str:
        return state_key(s, self.k, self.stage.actions1, self.stage.actions2)

    def reward_table(self) -> np.ndarray:
        """R(s, a1), constant across a1 by construction."""
        return np.repeat(self.reward[:, None], len(self.actions), axis=1)

    def dense_transitions(self) -> np.ndarray:
        """T(s, a1, s') as a dense array; guarded to small models."""
        if self.num_states > 4096:
            raise MemoryLimitExceeded(f"dense transitions refused for {self.num_states} states")
        n1 = len(self.actions)
        T = np.zeros((self.num_states, n1, self.num_states))
        for s in range(self.num_states):
            for a1 in range(n1):
                for a2, pr in enumerate(self.action_prob[s]):
                    T[s, a1, self.next_state[s, a1, a2]] += pr
        return T


def build_mdp(opponent: KMemoryStrategy, game: StageGame, k: int) -> MdpModel:
    """Assemble the MDP for player 1 against a completely mixed opponent.

    The opponent plays the role of player 2: its own actions must equal the
    stage game's second action set.  Player 1's reward in a state is the
    utility of the newest profile, and the transition appends the profile
    (a1, a2) with the opponent's probability of a2 read from its table at
    the perspective-swapped state.
    """
    if opponent.k != k:
        raise MemoryMismatch(f"opponent has memory {opponent.k}, requested k = {k}")
    if not opponent.is_completely_mixed:
        raise NotCompletelyMixed("the opponent must assign positive probability everywhere")
    if opponent.own_actions != game.actions2 or opponent.other_actions != game.actions1:
        raise ValueError("opponent action sets do not match the stage game")
    n1 = len(game.actions1)
    n2 = len(game.actions2)
    base = n1 * n2
    if k * np.log2(base) > MAX_STATE_BITS:
        raise MemoryLimitExceeded(
            f"k = {k} over {base} profiles needs more than {MAX_STATE_BITS} state bits"
        )
    num_states = base**k
    next_state = np.empty((num_states, n1, n2), dtype=np.int64)
    action_prob = np.empty((num_states, n2))
    reward = np.empty(num_states)
    for s in range(num_states):
        newest = s % base
        i1, i2 = divmod(newest, n2)
        reward[s] = game.u1[i1][i2]
        action_prob[s] = opponent.probs[swap_state(s, k, n1, n2)]
        for a1 in range(n1):
            for a2 in range(n2):
                next_state[s, a1, a2] = shift_state(s, profile_digit(a1, a2, n2), k, base)
    return MdpModel(game, k, num_states, game.actions1, next_state, action_prob, reward)


def _strongly_connected_components(n: int, adjacency) -> list[int]:
    """Kosaraju's algorithm; returns the component id of every node."""
    reverse = [[] for _ in range(n)]
    for s in range(n):
        for t in adjacency[s]:
            reverse[t].append(s)

    def _dfs(start, graph, seen, out):
        stack = [(start, iter(graph[start]))]
        seen[start] = True
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append((nxt, iter(graph[nxt])))
                    advanced = True
                    break
            if not advanced:
                out.append(node)
                stack.pop()

    seen = [False] * n
    order: list[int] = []
    for s in range(n):
        if not seen[s]:
            _dfs(s, adjacency, seen, order)
    comp = [-1] * n
    labeled = [False] * n
    current = 0
    for s in reversed(order):
        if not labeled[s]:
            members: list[int] = []
            _dfs(s, reverse, labeled, members)
            for m in members:
                comp[m] = current
            current += 1
    return comp


def _union_adjacency(m: MdpModel) -> list[list[int]]:
    support = m.action_prob > 0.0
    adjacency = []
    for s in range(m.num_states):
        targets = {int(t) for a1 in range(len(m.actions)) for t, ok in zip(m.next_state[s, a1], support[s]) if ok}
        adjacency.append(sorted(targets))
    return adjacency


def check_communicating(m: MdpModel) -> bool:
    """True iff the union digraph over all actions is strongly connected.

    Strong connectivity of the union graph suffices: any simple path visits
    each state once, so a stationary pure policy consistent with the path
    exists for every ordered state pair.
    """
    comp = _strongly_connected_components(m.num_states, _union_adjacency(m))
    return max(comp) == 0


@dataclass(frozen=True)
class SolveResult:
    """Optimal gain, an optimal pure policy, and convergence diagnostics."""

    gain: float
    policy: np.ndarray
    bias_span: float
    iterations: int


def solve_average_reward(
    m: MdpModel,
    span_tol: float = SPAN_TOL,
    max_iterations: int = MAX_ITERATIONS,
) -> SolveResult:
    """Relative value iteration for the optimal average reward.

    Runs on the aperiodicity-transformed model, which leaves the gain and
    the greedy policy unchanged.  At the stopping span the midrange of the
    value differences brackets the optimal gain within span/2.  Ties in the
    final greedy step go to the lowest action index.
    """
    if not check_communicating(m):
        raise NotCommunicating("union transition graph is not strongly connected")
    tau = APERIODICITY_WEIGHT
    v = np.zeros(m.num_states)
    prob = m.action_prob[:, None, :]
    span = np.inf
    for iteration in range(1, max_iterations + 1):
        q = m.reward[:, None] + (1.0 - tau) * v[:, None] + tau * (prob * v[m.next_state]).sum(axis=2)
        tv = q.max(axis=1)
        diff = tv - v
        span = float(diff.max() - diff.min())
        gain = 0.5 * float(diff.max() + diff.min())
        v = tv - tv[0]
        if span < span_tol:
            q = m.reward[:, None] + (1.0 - tau) * v[:, None] + tau * (prob * v[m.next_state]).sum(axis=2)
            best = q.max(axis=1, keepdims=True)
            policy = np.argmax(q >= best - POLICY_TIE_TOL, axis=1)
            return SolveResult(gain, policy, span, iteration)
    raise NoConvergence(max_iterations, span)


@dataclass(frozen=True)
class PolicyGain:
    """Exact long-run average reward of a fixed pure policy.

    ``gain`` is the best recurrent-class gain; chains with a single
    recurrent class are start-independent.  ``start_dependent`` flags
    policies whose recurrent classes earn different gains.
    """

    gain: float
    class_gains: tuple[float, ...]
    start_dependent: bool


def policy_gain(m: MdpModel, policy) -> PolicyGain:
    """Evaluate a pure policy via stationary distributions of its chain."""
    pi = np.asarray(policy, dtype=int)
    n = m.num_states
    support = m.action_prob > 0.0
    adjacency = [
        sorted({int(t) for t, ok in zip(m.next_state[s, pi[s]], support[s]) if ok})
        for s in range(n)
    ]
    comp = _strongly_connected_components(n, adjacency)
    ncomp = max(comp) + 1
    members: list[list[int]] = [[] for _ in range(ncomp)]
    for s in range(n):
        members[comp[s]].append(s)
    leaves = [False] * ncomp
    for s in range(n):
        for t in adjacency[s]:
            if comp[t] != comp[s]:
                leaves[comp[s]] = True
    gains = []
    for ci in range(ncomp):
        if leaves[ci]:
            continue
        idx = members[ci]
        pos = {s: i for i, s in enumerate(idx)}
        size = len(idx)
        P = np.zeros((size, size))
        for i, s in enumerate(idx):
            for a2, pr in enumerate(m.action_prob[s]):
                if pr > 0.0:
                    P[i, pos[int(m.next_state[s, pi[s], a2])]] += pr
        A = P.T - np.eye(size)
        A[-1, :] = 1.0
        b = np.zeros(size)
        b[-1] = 1.0
        v = np.linalg.solve(A, b)
        gains.append(float(v @ m.reward[idx]))
    best = max(gains)
    return PolicyGain(best, tuple(gains), bool(best - min(gains) > 1e-9))


def best_response_kmem(
    opponent: KMemoryStrategy, game: StageGame
) -> tuple[KMemoryStrategy, float]:
    """Pure k-memory best response to a completely mixed opponent.

    Builds the MDP, solves it, and wraps the optimal policy as a pure
    strategy with the same memory length.  The gain is independent of the
    initial k outcomes.
    """
    m = build_mdp(opponent, game, opponent.k)
    result = solve_average_reward(m)
    probs = np.zeros((m.num_states, len(m.actions)))
    probs[np.arange(m.num_states), result.policy] = 1.0
    strategy = KMemoryStrategy(opponent.k, game.actions1, game.actions2, probs)
    return strategy, result.gain


def memory_one_mdp(q: MemoryOneStrategy, game) -> MdpModel:
    """Convenience wrapper: the k = 1 model against a one-memory opponent."""
    stage = prisoners_dilemma(game) if not isinstance(game, StageGame) else game
    return build_mdp(KMemoryStrategy.from_memory_one(q), stage, 1)
