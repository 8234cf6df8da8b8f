import pathlib

import numpy as np
import pytest

from cnrq_lab.core.game import JointActionSpace
from cnrq_lab.envs.synthetic import make_synthetic_game, normal_form_game, prisoners_dilemma, two_agent_game

REPO_ROOT = pathlib.Path(__file__).resolve().parents[1]
CONFIG_DIR = REPO_ROOT / "configs"

# Joint order (0,0), (0,1), (1,0), (1,1).
COMMON_PAYOFF = np.array([
    [4.0, 1.0, 0.0, 2.0],
    [4.0, 1.0, 0.0, 2.0],
])

# Action 0 strictly dominates for both players.
DOMINANT = np.array([
    [1.0, 1.0, 0.0, 0.0],
    [1.0, 0.0, 1.0, 0.0],
])

COORDINATION = np.array([
    [1.0, 0.0, 0.0, 1.0],
    [1.0, 0.0, 0.0, 1.0],
])


class ConstantSchedules:
    """Fixed step sizes, for updates checked by hand."""

    def __init__(self, gamma: float = 1.0, alpha: float = 1.0, beta: float = 1.0):
        self._gamma, self._alpha, self._beta = gamma, alpha, beta

    def gamma(self, n: int) -> float:
        return self._gamma

    def alpha(self, n: int) -> float:
        return self._alpha

    def beta(self, n: int) -> float:
        return self._beta


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def space_2x2():
    return JointActionSpace((2, 2))


@pytest.fixture
def pd_game():
    return prisoners_dilemma()


@pytest.fixture
def small_game():
    return two_agent_game()


@pytest.fixture
def one_shot_game():
    """Single agent, single state, single action with utility 1."""
    return make_synthetic_game((1,), np.ones((1, 1, 1)), np.ones((1, 1, 1)), discount=0.5, name="one-shot")


@pytest.fixture
def coordination_game():
    return normal_form_game((2, 2), COORDINATION, "coordination")


def random_stochastic(rng: np.random.Generator, n: int) -> np.ndarray:
    t = rng.random((n, n))
    return t / t.sum(axis=1, keepdims=True)
