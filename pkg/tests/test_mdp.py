import numpy as np
import pytest

import repgames.mdp as mdp_mod
from repgames.chains import average_payoffs
from repgames.errors import (
    MemoryLimitExceeded,
    MemoryMismatch,
    NoConvergence,
    NotCommunicating,
    NotCompletelyMixed,
    OutOfRange,
)
from repgames.games import OPPONENT_INDEX, prisoners_dilemma, stage_game, validate_strategy
from repgames.mdp import (
    KMemoryStrategy,
    MdpModel,
    best_response_kmem,
    build_mdp,
    check_communicating,
    policy_gain,
    solve_average_reward,
    stochastic_tit_for_two_tats,
)
from repgames.response import DISTINCT_SET, encode_pure, pure_payoff_table


@pytest.fixture
def stage(game):
    return prisoners_dilemma(game)


def kmem(q):
    if not hasattr(q, "as_tuple"):
        q = validate_strategy(q, "completely_mixed")
    return KMemoryStrategy.from_memory_one(q)


def pure_policy_strategy(bits):
    """One-memory pure strategy bits -> policy array (action 0 cooperates)."""
    return np.array([1 - b for b in bits], dtype=int)


# ---------------------------------------------------------------- strategies


def test_from_memory_one_table(qstar):
    k = KMemoryStrategy.from_memory_one(qstar)
    assert k.k == 1 and k.num_states == 4
    assert k.probs[:, 0] == pytest.approx([0.9, 0.5, 0.2, 0.1])
    assert k.is_completely_mixed and not k.is_pure


def test_table_roundtrip():
    s = stochastic_tit_for_two_tats()
    table = s.to_table()
    assert set(table) == {f"{a}{b},{c}{d}" for a in "cd" for b in "cd" for c in "cd" for d in "cd"}
    assert table["cd,cd"] == pytest.approx([0.1, 0.9])  # other player defected twice
    assert table["cc,cd"] == pytest.approx([0.9, 0.1])
    back = KMemoryStrategy.from_table(2, ("c", "d"), table)
    assert np.array_equal(back.probs, s.probs)


def test_from_table_errors():
    with pytest.raises(OutOfRange):
        KMemoryStrategy.from_table(1, ("c", "d"), {"cc": [0.5, 0.5]})  # missing states
    with pytest.raises(OutOfRange):
        KMemoryStrategy.from_table(1, ("c", "d"), {"cc,cd": [1, 0]})  # wrong arity
    with pytest.raises(OutOfRange):
        KMemoryStrategy.from_table(
            1, ("c", "d"), {"cc": [0.7, 0.7], "cd": [1, 0], "dc": [1, 0], "dd": [1, 0]}
        )  # rows must sum to one
    with pytest.raises(OutOfRange):
        KMemoryStrategy.from_table(
            1, ("c", "d"), {"cx": [1, 0], "cd": [1, 0], "dc": [1, 0], "dd": [1, 0]}
        )  # unknown profile


# ------------------------------------------------------------------ building


def test_build_k1_structure(qstar, stage):
    m = build_mdp(kmem(qstar), stage, 1)
    assert m.num_states == 4
    assert m.actions == ("c", "d")
    dense = m.dense_transitions()
    assert dense.shape == (4, 2, 4)
    assert ((dense > 0).sum(axis=2) == 2).all()  # two successors per (s, a)
    assert np.abs(dense.sum(axis=2) - 1.0).max() <= 1e-12


def test_build_k1_transition_example(qstar, stage):
    # from state cc, defecting while the opponent cooperates lands in dc
    m = build_mdp(kmem(qstar), stage, 1)
    dense = m.dense_transitions()
    cc, dc = 0, 2
    d = 1
    assert dense[cc, d, dc] == pytest.approx(0.9, abs=0)


def test_build_k1_opponent_swap_matches_outcome_table(qstar, stage):
    # the opponent's cooperation probability in outcome z is q[swap(z)]
    m = build_mdp(kmem(qstar), stage, 1)
    qv = qstar.as_tuple()
    for s in range(4):
        assert m.action_prob[s, 0] == pytest.approx(qv[OPPONENT_INDEX[s]], abs=0)


def test_build_k2_has_16_states(stage):
    m = build_mdp(stochastic_tit_for_two_tats(), stage, 2)
    assert m.num_states == 16
    assert np.abs(m.dense_transitions().sum(axis=2) - 1.0).max() <= 1e-12


def test_reward_is_newest_profile_payoff(stage):
    m = build_mdp(stochastic_tit_for_two_tats(), stage, 2)
    # newest profile digit = state % 4 in outcome order (cc, cd, dc, dd)
    expected = np.asarray([(3.0, 0.0, 5.0, 1.0)[s % 4] for s in range(16)])
    assert np.array_equal(m.reward, expected)
    table = m.reward_table()
    assert np.array_equal(table[:, 0], table[:, 1])


def test_build_rejects_mismatched_memory(qstar, stage):
    with pytest.raises(MemoryMismatch):
        build_mdp(kmem(qstar), stage, 2)


def test_misdefect_class_has_all_defect_best_response(stage, game):
    """Opponents with q2 on the equalizer bar and q3 below it are beaten
    by Always Defect; cross-checked through the MDP route."""
    from repgames.response import mischief_bars

    bars = mischief_bars(0.9, 0.1, game)
    q = validate_strategy([0.9, bars.qbar2, bars.qbar3 / 2, 0.1], "completely_mixed")
    strategy, gain = best_response_kmem(kmem(q), stage)
    assert [int(strategy.probs[s, 0]) for s in range(4)] == [0, 0, 0, 0]


def test_build_rejects_pure_opponent(stage):
    pure = KMemoryStrategy.from_memory_one(validate_strategy([1, 0, 1, 0]))
    with pytest.raises(NotCompletelyMixed):
        build_mdp(pure, stage, 1)


def test_build_rejects_oversized_state_space(stage, monkeypatch):
    monkeypatch.setattr(mdp_mod, "MAX_STATE_BITS", 3)
    with pytest.raises(MemoryLimitExceeded):
        build_mdp(stochastic_tit_for_two_tats(), stage, 2)  # needs 4 bits


# ------------------------------------------------------------- communicating


def test_completely_mixed_opponents_communicate(qstar, stage):
    assert check_communicating(build_mdp(kmem(qstar), stage, 1))
    assert check_communicating(build_mdp(stochastic_tit_for_two_tats(), stage, 2))


def test_near_boundary_opponent_still_communicates(stage):
    q = validate_strategy([0.9, 0.5, 0.2, 1 - 1e-9], "completely_mixed")
    assert check_communicating(build_mdp(kmem(q), stage, 1))


def _two_state_trap():
    """State 1 is absorbing: nothing returns to state 0."""
    trivial = stage_game(("a",), ("x", "y"), {("a", "x"): (1.0, 0.0), ("a", "y"): (2.0, 0.0)})
    next_state = np.array([[[1, 1]], [[1, 1]]])
    action_prob = np.array([[0.5, 0.5], [0.5, 0.5]])
    reward = np.array([1.0, 2.0])
    return MdpModel(trivial, 1, 2, ("a",), next_state, action_prob, reward)


def test_hand_built_trap_is_not_communicating():
    assert not check_communicating(_two_state_trap())
    with pytest.raises(NotCommunicating):
        solve_average_reward(_two_state_trap())


# ------------------------------------------------------------------- solving


def test_solve_k1_mistort_example(qstar, stage):
    m = build_mdp(kmem(qstar), stage, 1)
    result = solve_average_reward(m)
    assert result.gain == pytest.approx(2.0, abs=1e-9)
    assert result.policy.tolist() == [0, 0, 0, 0]  # cooperate everywhere
    assert result.bias_span < 1e-10


def test_solve_k1_ungrateful_and_uniform(ustrat, stage):
    m = build_mdp(kmem(ustrat.as_tuple()), stage, 1)
    result = solve_average_reward(m)
    assert result.policy.tolist() == [1, 1, 1, 1]  # defect everywhere
    assert result.gain == pytest.approx(4.0, abs=1e-9)
    uniform = build_mdp(kmem([0.5] * 4), stage, 1)
    result = solve_average_reward(uniform)
    assert result.policy.tolist() == [1, 1, 1, 1]
    assert result.gain == pytest.approx(3.0, abs=1e-9)


def test_solve_constant_reward_game():
    flat = stage_game(
        ("c", "d"),
        ("c", "d"),
        {(a, b): (3.0, 0.0) for a in "cd" for b in "cd"},
    )
    opp = KMemoryStrategy(1, ("c", "d"), ("c", "d"), np.full((4, 2), 0.5))
    result = solve_average_reward(build_mdp(opp, flat, 1))
    assert result.gain == pytest.approx(3.0, abs=1e-9)


def test_solve_stf2t_alternates_with_verified_gain(stage):
    """Exhaustive enumeration over all 65536 pure 2-memory policies puts the
    optimum at 3.65, attained by alternating one's own action."""
    m = build_mdp(stochastic_tit_for_two_tats(), stage, 2)
    result = solve_average_reward(m)
    assert result.gain == pytest.approx(3.65, abs=1e-8)
    own_last = [(s % 4) >> 1 for s in range(16)]
    assert all(result.policy[s] == 1 - own_last[s] for s in range(16))
    evaluated = policy_gain(m, result.policy)
    assert evaluated.gain == pytest.approx(result.gain, abs=1e-9)
    assert not evaluated.start_dependent


def test_no_convergence_error(qstar, stage):
    m = build_mdp(kmem(qstar), stage, 1)
    with pytest.raises(NoConvergence):
        solve_average_reward(m, max_iterations=2)


# --------------------------------------------------------------- policy gain


def test_policy_gain_all_defect(qstar, stage, game):
    m = build_mdp(kmem(qstar), stage, 1)
    result = policy_gain(m, pure_policy_strategy((0, 0, 0, 0)))
    assert result.gain == pytest.approx(5 / 3, abs=1e-12)
    assert result.class_gains == (result.gain,)
    assert not result.start_dependent


def test_policy_gain_multichain_repeat(qstar, stage):
    """The Repeat policy splits the chain into a cooperative class (gain 2.0,
    the always-cooperate payoff) and a defecting class (gain 5/3)."""
    m = build_mdp(kmem(qstar), stage, 1)
    result = policy_gain(m, pure_policy_strategy((1, 1, 0, 0)))
    assert sorted(result.class_gains) == pytest.approx([5 / 3, 2.0], abs=1e-12)
    assert result.gain == pytest.approx(2.0, abs=1e-12)
    assert result.start_dependent


def test_policy_gain_matches_chain_route(stage, game):
    rng = np.random.default_rng(14)
    for _ in range(50):
        q = validate_strategy(rng.uniform(1e-3, 1 - 1e-3, 4), "completely_mixed")
        m = build_mdp(kmem(q.as_tuple()), stage, 1)
        for k in DISTINCT_SET:
            bits = [(k >> 3) & 1, (k >> 2) & 1, (k >> 1) & 1, k & 1]
            via_mdp = policy_gain(m, pure_policy_strategy(bits)).gain
            via_chain = average_payoffs(validate_strategy(bits), q, game).s_x
            assert via_mdp == pytest.approx(via_chain, abs=1e-9)


def test_optimal_policy_classes_agree_across_starts(stage):
    rng = np.random.default_rng(77)
    for _ in range(30):
        q = validate_strategy(rng.uniform(1e-3, 1 - 1e-3, 4), "completely_mixed")
        m = build_mdp(kmem(q.as_tuple()), stage, 1)
        result = solve_average_reward(m)
        evaluated = policy_gain(m, result.policy)
        assert max(evaluated.class_gains) - min(evaluated.class_gains) < 1e-9


# ------------------------------------------------------------- best response


def test_best_response_kmem_reduces_to_pure_enumeration(stage, game):
    rng = np.random.default_rng(50)
    reps = {4: 0, 8: 0, 13: 15, 14: 15}
    for _ in range(100):
        q = validate_strategy(rng.uniform(1e-3, 1 - 1e-3, 4), "completely_mixed")
        strategy, gain = best_response_kmem(kmem(q.as_tuple()), stage)
        table = pure_payoff_table(q, game)
        assert gain == pytest.approx(table.best_value, abs=1e-8)
        bits = [int(strategy.probs[s, 0]) for s in range(4)]
        k = encode_pure(bits)
        assert reps.get(k, k) in table.best_set


def test_best_response_kmem_stf2t(stage):
    strategy, gain = best_response_kmem(stochastic_tit_for_two_tats(), stage)
    assert gain == pytest.approx(3.65, abs=1e-8)
    assert strategy.is_pure and strategy.k == 2


def test_exhaustive_policy_oracle_k1(qstar, stage):
    m = build_mdp(kmem(qstar), stage, 1)
    best = max(
        policy_gain(m, [(bits >> s) & 1 for s in range(4)]).gain for bits in range(16)
    )
    assert solve_average_reward(m).gain == pytest.approx(best, abs=1e-8)


def test_state_key_rendering(stage):
    m = build_mdp(stochastic_tit_for_two_tats(), stage, 2)
    assert m.state_key(0) == "cc,cc"
    # lowest digit is the most recent profile; key lists oldest first
    assert m.state_key(1) == "cc,cd"
    assert m.state_key(4) == "cd,cc"
    assert m.state_key(15) == "dd,dd"
