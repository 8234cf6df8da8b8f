import numpy as np
import pytest

from cnrq_lab.errors import InertiaTooSmall
from cnrq_lab.learning.no_regret import (
    SmoothMaxParams,
    lyapunov_value,
    select_action,
    smooth_max,
    soften,
    stationary_distribution,
    transition_matrix,
    trembled,
)
from tests.conftest import random_stochastic


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (-0.5, 0.0), (0.0, 0.0025)])
def test_smooth_max_values(x, expected):
    assert smooth_max(x, 0.01) == pytest.approx(expected)


def test_smooth_max_is_continuous_at_the_bridge_ends():
    delta = 0.01
    assert smooth_max(delta, delta) == pytest.approx(delta)
    assert smooth_max(-delta, delta) == pytest.approx(0.0)
    assert smooth_max(delta - 1e-12, delta) == pytest.approx(delta, abs=1e-9)


def test_smooth_max_is_vectorized():
    np.testing.assert_allclose(smooth_max(np.array([-1.0, 0.0, 2.0]), 0.01), [0.0, 0.0025, 2.0])


def test_lyapunov_of_single_regret():
    regrets = np.array([[[0.0, 2.0], [-1.0, 0.0]]])
    assert lyapunov_value(regrets, 1e-3) == pytest.approx(2.0)


def test_lyapunov_vanishes_on_negative_regrets():
    regrets = -np.ones((3, 2, 2))
    assert lyapunov_value(regrets, 1e-3) == 0.0


def test_transition_matrix_identity_for_negative_regrets():
    regret = -np.ones((3, 3))
    np.fill_diagonal(regret, 0.0)
    np.testing.assert_allclose(transition_matrix(regret, SmoothMaxParams(0.01, 5.0)), np.eye(3))


def test_transition_matrix_divides_by_mu():
    regret = np.array([[0.0, 1.0], [-1.0, 0.0]])
    t = transition_matrix(regret, SmoothMaxParams(0.01, 2.0))
    np.testing.assert_allclose(t[0], [0.5, 0.5])
    np.testing.assert_allclose(t[1], [0.0, 1.0])


def test_transition_matrix_rows_are_stochastic(rng):
    for _ in range(100):
        regret = rng.normal(size=(4, 4))
        np.fill_diagonal(regret, 0.0)
        t = transition_matrix(regret, SmoothMaxParams(1e-3, 20.0))
        assert np.all(t >= 0.0)
        np.testing.assert_allclose(t.sum(axis=1), 1.0, atol=1e-12)


def test_transition_matrix_rejects_small_mu():
    regret = np.array([[0.0, 3.0], [0.0, 0.0]])
    with pytest.raises(InertiaTooSmall):
        transition_matrix(regret, SmoothMaxParams(0.01, 2.0))


def test_stationary_of_doubly_stochastic_is_uniform():
    t = np.array([[0.3, 0.7], [0.7, 0.3]])
    np.testing.assert_allclose(stationary_distribution(t, 0.01), [0.5, 0.5])


def test_stationary_hand_solved():
    epsilon = 0.01
    target = np.array([[0.9, 0.1], [0.3, 0.7]])
    # Undo the tremble so that the trembled matrix equals target.
    t = (target - epsilon / 2) / (1.0 - epsilon)
    np.testing.assert_allclose(trembled(t, epsilon), target)
    np.testing.assert_allclose(stationary_distribution(t, epsilon), [0.75, 0.25], atol=1e-12)


def test_stationary_balance_residual(rng):
    for _ in range(100):
        n = int(rng.integers(2, 6))
        t = random_stochastic(rng, n)
        p = stationary_distribution(t, 1e-6)
        assert p.sum() == pytest.approx(1.0)
        assert np.abs(p @ trembled(t, 1e-6) - p).max() <= 1e-10


def test_stationary_rejects_bad_tremble():
    with pytest.raises(ValueError):
        stationary_distribution(np.eye(2), 0.0)


def test_select_action_point_mass_without_exploration(rng):
    p = np.array([0.0, 1.0, 0.0])
    assert {select_action(p, 0.0, rng) for _ in range(200)} == {1}


def test_select_action_full_exploration_is_uniform(rng):
    p = np.array([1.0, 0.0])
    draws = np.array([select_action(p, 1.0, rng) for _ in range(20_000)])
    # Binomial(20000, 0.5): 3 sigma is about 0.011.
    assert abs(draws.mean() - 0.5) < 0.011


def test_select_action_matches_soft_mixture(rng):
    p_hat = np.array([0.6, 0.3, 0.1, 0.0])
    epsilon = 0.2
    n = 100_000
    draws = np.array([select_action(p_hat, epsilon, rng) for _ in range(n)])
    expected = (1.0 - epsilon) * p_hat + epsilon / 4
    counts = np.bincount(draws, minlength=4) / n
    sigma = np.sqrt(expected * (1.0 - expected) / n)
    assert np.all(np.abs(counts - expected) <= 3.0 * sigma)


def test_soften_mixes_with_uniform():
    np.testing.assert_allclose(soften(np.array([1.0, 0.0]), 0.2), [0.9, 0.1])
