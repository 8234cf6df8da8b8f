import numpy as np
import pytest

from cnrq_lab.core.equilibrium import ce_residuals, max_positive_regret
from cnrq_lab.core.game import JointActionSpace
from cnrq_lab.envs.synthetic import MATCHING_PENNIES
from cnrq_lab.learning.regret_matching import (
    NormalFormLearner,
    StatewiseRegretMatching,
    counterfactual_payoffs,
    inertia_for_payoffs,
    observe_payoffs,
    play_repeated_game,
)
from tests.conftest import DOMINANT


def test_first_observation_sets_regret_exactly():
    learner = NormalFormLearner(2)
    learner.last_action = 0
    observe_payoffs(learner, np.array([1.0, 3.0]))
    np.testing.assert_allclose(learner.regret, [[0.0, 2.0], [0.0, 0.0]])


def test_regret_is_a_running_average():
    learner = NormalFormLearner(2)
    learner.last_action = 0
    observe_payoffs(learner, np.array([1.0, 3.0]))
    observe_payoffs(learner, np.array([1.0, 0.0]))
    np.testing.assert_allclose(learner.regret[0], [0.0, 0.5])


def test_observation_before_any_action_is_ignored():
    learner = NormalFormLearner(3)
    observe_payoffs(learner, np.ones(3))
    assert learner.rounds == 0
    np.testing.assert_array_equal(learner.regret, 0.0)


def test_counterfactual_payoffs(space_2x2):
    payoffs = np.array([[0.0, 1.0, 2.0, 3.0], [4.0, 5.0, 6.0, 7.0]])
    np.testing.assert_array_equal(counterfactual_payoffs(payoffs, space_2x2, 1, 0), [1.0, 3.0])
    np.testing.assert_array_equal(counterfactual_payoffs(payoffs, space_2x2, 1, 1), [4.0, 5.0])


def test_inertia_scales_with_range():
    assert inertia_for_payoffs(3, 2.0) == pytest.approx(12.0)
    assert inertia_for_payoffs(2, 0.0, delta=1e-4) == pytest.approx(4e-4)


def test_dominant_action_takes_over(space_2x2, rng):
    freq, _ = play_repeated_game(DOMINANT, space_2x2, 10_000, rng)
    marginal = space_2x2.agent_matrix(freq, 0).sum(axis=1)
    assert marginal[0] >= 0.95


def test_regret_stays_inside_payoff_range(space_2x2, rng):
    _, learners = play_repeated_game(MATCHING_PENNIES, space_2x2, 2_000, rng)
    for learner in learners:
        assert np.abs(learner.regret).max() <= 2.0 + 1e-12


def test_matching_pennies_empirical_play_is_near_equilibrium(space_2x2, rng):
    freq, _ = play_repeated_game(MATCHING_PENNIES, space_2x2, 20_000, rng)
    residuals = ce_residuals(freq[None, :], MATCHING_PENNIES[:, None, :], space_2x2)
    assert max_positive_regret(residuals) <= 0.1


def test_three_action_game_runs(rng):
    space = JointActionSpace((3, 3))
    payoffs = rng.uniform(-1.0, 1.0, size=(2, 9))
    freq, _ = play_repeated_game(payoffs, space, 500, rng)
    assert freq.sum() == pytest.approx(1.0)


def test_statewise_learner_finds_mutual_defection(pd_game, rng):
    algo = StatewiseRegretMatching(pd_game)
    state = 0
    algo.reset(state, rng)
    for _ in range(3_000):
        state, _ = algo.step(state, rng, record=False)
    assert algo.empirical_policy().probs[0, 3] >= 0.9
    np.testing.assert_array_equal(algo.lambdas, 0.0)
