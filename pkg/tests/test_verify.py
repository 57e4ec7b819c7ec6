import numpy as np
import pytest

import repgames.verify as verify_mod
from repgames.chains import payoff_via_stationary
from repgames.errors import InfeasibleHypothesis, SegmentHitsRepeat
from repgames.games import MemoryOneStrategy, validate_game, validate_strategy
from repgames.response import DISTINCT_SET, strategy_from_index
from repgames.verify import (
    MONOTONE_SLACK,
    VIOLATION_THRESHOLD,
    FalsificationReport,
    TheoremId,
    _rejection_fill,
    check,
    monotonicity_check,
)

SMALL = 800


@pytest.mark.parametrize("theorem", list(TheoremId))
def test_no_counterexamples_at_small_budgets(theorem):
    samples = 300 if theorem is TheoremId.MONOTONE else SMALL
    report = check(theorem, samples, seed=101)
    assert isinstance(report, FalsificationReport)
    assert not report.falsified
    assert report.samples_tried == samples
    assert report.threshold == VIOLATION_THRESHOLD
    assert "not a proof" in report.notes


def test_reports_are_deterministic():
    a = check(TheoremId.UNGRATEFUL_BR, 500, seed=3)
    b = check(TheoremId.UNGRATEFUL_BR, 500, seed=3)
    assert a == b
    c = check(TheoremId.UNGRATEFUL_BR, 500, seed=4)
    assert c.max_violation != a.max_violation


def test_check_accepts_string_ids():
    report = check("d_negative", 200, seed=1)
    assert report.theorem is TheoremId.D_NEGATIVE


def test_check_rejects_bad_input():
    with pytest.raises(ValueError):
        check("no_such_theorem", 10, seed=0)
    with pytest.raises(ValueError):
        check(TheoremId.D_NEGATIVE, 0, seed=0)


def test_counterexample_reporting_and_soundness(monkeypatch):
    """A deliberately false claim (the always-cooperate column dominates
    against ungrateful opponents) must produce a counterexample whose
    violation re-evaluates through the stationary route."""

    def false_eval(rng, n):
        violations, assignment = verify_mod._eval_ungrateful(rng, n)
        G = assignment["game"]
        Q = assignment["q"]
        from repgames.response import table_values

        F = table_values(Q, G)
        i15 = DISTINCT_SET.index(15)
        viol = (np.delete(F, i15, axis=1) - F[:, [i15]]).max(axis=1)
        return viol, assignment

    monkeypatch.setitem(
        verify_mod._THEOREMS, TheoremId.MISTORT_BR, (false_eval, "bogus claim for testing")
    )
    report = check(TheoremId.MISTORT_BR, SMALL, seed=6)
    assert report.falsified
    cx = report.counterexample
    assert set(cx) >= {"q", "R", "S", "T", "P", "violation"}
    # the reported violation is real: recompute both payoffs independently
    game = validate_game(cx["R"], cx["S"], cx["T"], cx["P"])
    q = validate_strategy(cx["q"], "completely_mixed")
    f15 = payoff_via_stationary(strategy_from_index(15), q, game).s_x
    best_rival = max(
        payoff_via_stationary(strategy_from_index(k), q, game).s_x
        for k in DISTINCT_SET
        if k != 15
    )
    assert best_rival - f15 == pytest.approx(cx["violation"], abs=1e-8)
    assert best_rival - f15 > VIOLATION_THRESHOLD


def test_evaluators_match_stationary_oracle():
    rng = np.random.default_rng(33)
    violations, assignment = verify_mod._eval_ungrateful(rng, 20)
    for i in range(20):
        game = validate_game(*assignment["game"][i])
        q = validate_strategy(assignment["q"][i], "completely_mixed")
        f0 = payoff_via_stationary(strategy_from_index(0), q, game).s_x
        best_rival = max(
            payoff_via_stationary(strategy_from_index(k), q, game).s_x
            for k in DISTINCT_SET
            if k != 0
        )
        assert best_rival - f0 == pytest.approx(float(violations[i]), abs=1e-8)


def test_monotonicity_example_ends_at_best_payoff(qstar, game):
    p = MemoryOneStrategy(0.0, 1.0, 1.0, 1.0)
    report = monotonicity_check(p, qstar, game, "p1")
    assert report.monotone
    assert report.payoffs[-1] == pytest.approx(2.0, abs=1e-10)
    assert len(report.payoffs) == 101


def test_monotonicity_in_opponent_coordinate(qstar, game):
    p = MemoryOneStrategy(0.3, 0.7, 0.2, 0.9)
    report = monotonicity_check(p, qstar, game, "q1")
    assert report.monotone
    assert report.violation <= MONOTONE_SLACK


def test_monotonicity_constant_for_equalizer(game):
    q = validate_strategy([0.8, 0.4, 0.4, 0.2], "completely_mixed")
    p = MemoryOneStrategy(0.3, 0.7, 0.2, 0.9)
    report = monotonicity_check(p, q, game, "p2")
    assert report.monotone
    assert np.ptp(report.payoffs) < 1e-9


def test_monotonicity_segment_through_repeat_is_rejected(qstar, game):
    p = MemoryOneStrategy(0.3, 1.0, 0.0, 0.0)
    with pytest.raises(SegmentHitsRepeat):
        monotonicity_check(p, qstar, game, "p1")
    with pytest.raises(ValueError):
        monotonicity_check(p, qstar, game, "p9")


def test_rejection_cap_raises(monkeypatch):
    monkeypatch.setattr(verify_mod, "REJECTION_CAP", 5000)

    def hopeless(rng, want):
        return np.empty((0, 4)), np.empty((0, 4))

    rng = np.random.default_rng(0)
    with pytest.raises(InfeasibleHypothesis):
        _rejection_fill(rng, 10, hopeless)


def test_mischief_sampler_produces_exact_equalities():
    rng = np.random.default_rng(8)
    Q, G = verify_mod._draw_mischief(rng, 5000)
    assert len(Q) > 0
    qb2, qb3 = verify_mod._bars(Q[:, 0], Q[:, 3], G)
    assert np.array_equal(Q[:, 1], qb2)
    assert np.array_equal(Q[:, 2], qb3)
    assert Q.min() > 0.0 and Q.max() < 1.0


def test_extortion_sampler_respects_constraints():
    rng = np.random.default_rng(13)
    Q, G = verify_mod._draw_extortionate(rng, 5000)
    assert len(Q) > 0
    assert np.all(Q[:, 3] == 0.0)
    assert Q.min() >= 0.0 and Q.max() <= 1.0
