"""Regret matching for repeated normal-form games.

Each player keeps the average-form regret matrix D[i, j]: the average gain
it would have had by playing j every time it played i. Play probabilities
are the invariant measure of the transition matrix built from Y(D) / mu.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from cnrq_lab.core.game import GameSpec, JointActionSpace
from cnrq_lab.learning.base import Algorithm, LearnerSettings, StepOutcome
from cnrq_lab.learning.no_regret import (
    SmoothMaxParams,
    select_action,
    stationary_distribution,
    transition_matrix,
)

DEFAULT_DELTA = 1e-4
DEFAULT_TREMBLE = 1e-6
DEFAULT_EPSILON = 0.01


@dataclass
class NormalFormLearner:
    num_actions: int
    regret: np.ndarray = field(init=False)
    rounds: int = 0
    last_action: Optional[int] = None
    last_distribution: Optional[np.ndarray] = None

    def __post_init__(self):
        self.regret = np.zeros((self.num_actions, self.num_actions))


def inertia_for_payoffs(num_actions: int, payoff_range: float, delta: float = DEFAULT_DELTA) -> float:
    """2 |A| (payoff range) keeps every row of the transition matrix inside the simplex."""
    return 2.0 * num_actions * max(payoff_range, delta)


def observe_payoffs(learner: NormalFormLearner, payoffs: np.ndarray) -> None:
    """Fold the last round into the average regret with step 1/n.

    payoffs[j] is what the learner would have earned with action j against
    the opponents' observed play.
    """
    if learner.last_action is None:
        return
    learner.rounds += 1
    kappa = 1.0 / learner.rounds
    played = learner.last_action
    payoffs = np.asarray(payoffs, dtype=float)
    learner.regret *= 1.0 - kappa
    learner.regret[played] += kappa * (payoffs - payoffs[played])
    np.fill_diagonal(learner.regret, 0.0)


def choose_action(
    learner: NormalFormLearner,
    mu: float,
    rng: np.random.Generator,
    epsilon: float = DEFAULT_EPSILON,
    delta: float = DEFAULT_DELTA,
    tremble: float = DEFAULT_TREMBLE,
) -> int:
    t = transition_matrix(learner.regret, SmoothMaxParams(delta, mu))
    p = stationary_distribution(t, tremble)
    learner.last_distribution = p
    learner.last_action = select_action(p, epsilon, rng)
    return learner.last_action


def regret_matching_step(
    learner: NormalFormLearner,
    payoffs: Optional[np.ndarray],
    mu: float,
    rng: np.random.Generator,
    epsilon: float = DEFAULT_EPSILON,
    delta: float = DEFAULT_DELTA,
    tremble: float = DEFAULT_TREMBLE,
) -> int:
    """Update with the previous round's counterfactual payoffs (if any), then draw the next action."""
    if payoffs is not None:
        observe_payoffs(learner, payoffs)
    return choose_action(learner, mu, rng, epsilon, delta, tremble)


def counterfactual_payoffs(payoffs: np.ndarray, space: JointActionSpace, joint: int, agent: int) -> np.ndarray:
    """payoffs[agent] at every unilateral deviation of agent from joint."""
    return np.asarray(payoffs)[agent, space.deviations(joint, agent)]


def play_repeated_game(
    payoffs: np.ndarray,
    space: JointActionSpace,
    rounds: int,
    rng: np.random.Generator,
    epsilon: float = DEFAULT_EPSILON,
    delta: float = DEFAULT_DELTA,
) -> tuple[np.ndarray, list[NormalFormLearner]]:
    """Self-play of regret matching; returns the empirical joint frequency and the learners.

    payoffs has shape (num_agents, |A|).
    """
    payoffs = np.asarray(payoffs, dtype=float)
    payoff_range = float(payoffs.max() - payoffs.min())
    learners = [NormalFormLearner(n) for n in space.action_counts]
    mus = [inertia_for_payoffs(n, payoff_range, delta) for n in space.action_counts]
    counts = np.zeros(space.size)
    for learner, mu in zip(learners, mus):
        choose_action(learner, mu, rng, epsilon, delta)
    for _ in range(rounds):
        joint = space.flatten([learner.last_action for learner in learners])
        counts[joint] += 1
        for k, (learner, mu) in enumerate(zip(learners, mus)):
            regret_matching_step(learner, counterfactual_payoffs(payoffs, space, joint, k), mu, rng, epsilon, delta)
    return counts / max(rounds, 1), learners


class StatewiseRegretMatching(Algorithm):
    """Independent regret matching per state on myopic stage utilities (no constraints)."""

    name = "regret-matching"

    def __init__(self, game: GameSpec, settings: LearnerSettings | None = None):
        super().__init__(game, settings)
        counts = game.space.action_counts
        self.learners = [[NormalFormLearner(n) for n in counts] for _ in range(game.num_states)]
        payoff_range = game.utility_range[1] - game.utility_range[0]
        self.mus = [inertia_for_payoffs(n, payoff_range, self.settings.rm_delta) for n in counts]

    def _choose(self, state: int, rng: np.random.Generator) -> None:
        actions = [
            choose_action(learner, mu, rng, self.settings.rm_epsilon, self.settings.rm_delta)
            for learner, mu in zip(self.learners[state], self.mus)
        ]
        self.joint = self.game.space.flatten(actions)

    def reset(self, state: int, rng: np.random.Generator) -> None:
        self._choose(state, rng)

    def advance(self, state: int, rng: np.random.Generator) -> StepOutcome:
        joint = self.joint
        utilities, costs = self.stage_payoffs(state, joint)
        next_state = self.game.step(state, joint, rng)
        stage = self.game.utilities[:, state, :]
        for k, learner in enumerate(self.learners[state]):
            learner.last_action = int(self.game.space.profiles[joint, k])
            observe_payoffs(learner, counterfactual_payoffs(stage, self.game.space, joint, k))
        self._choose(next_state, rng)
        return StepOutcome(next_state, joint, utilities, costs)

    @property
    def lambdas(self) -> np.ndarray:
        return np.zeros(self.game.num_agents)

    def q_tables(self) -> np.ndarray:
        return np.array(self.game.utilities, dtype=float)
