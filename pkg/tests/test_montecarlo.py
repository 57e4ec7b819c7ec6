import numpy as np
import pytest

from repgames.chains import average_payoffs
from repgames.errors import OutOfRange
from repgames.games import MemoryOneStrategy, prisoners_dilemma, validate_strategy
from repgames.mdp import best_response_kmem, build_mdp, policy_gain, stochastic_tit_for_two_tats
from repgames.montecarlo import GENERATOR_ID, simulate

ALL_D = MemoryOneStrategy(0, 0, 0, 0, p0=0.0)
ALL_C = MemoryOneStrategy(1, 1, 1, 1)


def test_same_seed_reproduces_everything(qstar, game):
    a = simulate(ALL_C, qstar, game, 5000, seed=42)
    b = simulate(ALL_C, qstar, game, 5000, seed=42)
    assert a == b
    c = simulate(ALL_C, qstar, game, 5000, seed=43)
    assert c.mean_x != a.mean_x


def test_generator_identifier_recorded(qstar, game):
    result = simulate(ALL_C, qstar, game, 2000, seed=0)
    assert result.generator == GENERATOR_ID == "philox4x64-10"


def test_deterministic_all_defect_pair(game):
    result = simulate(ALL_D, ALL_D, game, 5000, seed=7)
    assert result.mean_x == game.P
    assert result.mean_y == game.P
    assert result.std_err == 0.0


def test_p0_changes_round_one_persistently(game):
    """A grim-like strategy (1,0,0,0) against Always Cooperate locks into
    mutual cooperation when it starts with c and into exploiting when it
    starts with d, so p0 shows up in the long-run mean exactly."""
    grim = MemoryOneStrategy(1, 0, 0, 0, p0=1.0)
    grim_defect_first = MemoryOneStrategy(1, 0, 0, 0, p0=0.0)
    cooperative = simulate(grim, ALL_C, game, 2000, seed=1)
    exploiting = simulate(grim_defect_first, ALL_C, game, 2000, seed=1)
    assert cooperative.mean_x == game.R
    assert exploiting.mean_x == game.T
    assert exploiting.mean_y == game.S


def test_mean_within_three_standard_errors(qstar, game):
    result = simulate(ALL_C, qstar, game, 200000, seed=5)
    assert abs(result.mean_x - 2.0) <= 3 * result.std_err
    analytic_y = average_payoffs(ALL_C, qstar, game).s_y
    assert abs(result.mean_y - analytic_y) <= 4 * result.std_err


def test_error_shrinks_with_more_rounds(qstar, game):
    short = simulate(ALL_C, qstar, game, 10**4, seed=9)
    long = simulate(ALL_C, qstar, game, 10**6, seed=9)
    assert long.std_err < short.std_err
    assert abs(long.mean_x - 2.0) <= 3 * long.std_err


def test_kmemory_pair_matches_analytic_gain(game):
    opponent = stochastic_tit_for_two_tats()
    stage = prisoners_dilemma(game)
    best, gain = best_response_kmem(opponent, stage)
    model = build_mdp(opponent, stage, 2)
    analytic = policy_gain(model, np.argmax(best.probs, axis=1)).gain
    result = simulate(best, opponent, game, 200000, seed=3)
    assert abs(result.mean_x - analytic) <= 3.5 * result.std_err


def test_mixed_memory_lengths(qstar, game):
    """One-memory focal against a two-memory opponent."""
    result = simulate(ALL_C, stochastic_tit_for_two_tats(), game, 50000, seed=2)
    # the opponent cooperates 0.9 against a pure cooperator
    expected = 0.9 * game.R + 0.1 * game.S
    assert abs(result.mean_x - expected) <= 4 * result.std_err


def test_means_respect_stage_bounds(game):
    rng = np.random.default_rng(6)
    for seed in range(5):
        p = validate_strategy(rng.uniform(0, 1, 4))
        q = validate_strategy(rng.uniform(0.05, 0.95, 4), "completely_mixed")
        result = simulate(p, q, game, 2000, seed=seed)
        assert game.S <= result.mean_x <= game.T
        assert game.S <= result.mean_y <= game.T


def test_minimum_rounds_enforced(qstar, game):
    with pytest.raises(OutOfRange):
        simulate(ALL_C, qstar, game, 999, seed=0)
