"""Nested-loop Q-learning with inner regret-matching play (unconstrained).

The outer loop learns Q-values against the joint empirical frequency of
play. After every outer step the agents run M virtual rounds of regret
matching at the next state with the current Q-values as payoffs, and each
agent acts epsilon-soft on its average play probabilities.
"""
import numpy as np

from cnrq_lab.core.game import GameSpec, JointPolicy
from cnrq_lab.learning.base import Algorithm, LearnerSettings, StepOutcome
from cnrq_lab.learning.no_regret import select_action
from cnrq_lab.learning.regret_matching import (
    NormalFormLearner,
    choose_action,
    counterfactual_payoffs,
    inertia_for_payoffs,
    observe_payoffs,
)


class QnR(Algorithm):
    name = "qnr"

    def __init__(self, game: GameSpec, settings: LearnerSettings | None = None):
        super().__init__(game, settings)
        if self.settings.inner_iterations < 1:
            raise ValueError(f"QnR needs at least one inner round, got {self.settings.inner_iterations}")
        self.q = np.zeros((game.num_agents, game.num_states, game.num_joint))
        self.empirical = JointPolicy.zeros(game.num_states, game.num_joint)
        self.state_visits = np.zeros(game.num_states, dtype=np.int64)
        self.pair_counters = np.zeros((game.num_states, game.num_joint), dtype=np.int64)
        self.last_averages: list[np.ndarray] = []

    def inner_loop(self, state: int, rng: np.random.Generator) -> list[np.ndarray]:
        """Average play probabilities of M virtual regret-matching rounds at state."""
        space = self.game.space
        payoffs = self.q[:, state, :]
        payoff_range = float(payoffs.max() - payoffs.min())
        eps, delta = self.settings.rm_epsilon, self.settings.rm_delta
        learners = [NormalFormLearner(n) for n in space.action_counts]
        mus = [inertia_for_payoffs(n, payoff_range, delta) for n in space.action_counts]
        totals = [np.zeros(n) for n in space.action_counts]
        rounds = self.settings.inner_iterations
        for _ in range(rounds):
            for learner, mu, total in zip(learners, mus, totals):
                choose_action(learner, mu, rng, eps, delta)
                total += learner.last_distribution
            joint = space.flatten([learner.last_action for learner in learners])
            for k, learner in enumerate(learners):
                observe_payoffs(learner, counterfactual_payoffs(payoffs, space, joint, k))
        return [total / rounds for total in totals]

    def _act(self, state: int, rng: np.random.Generator) -> None:
        self.last_averages = self.inner_loop(state, rng)
        actions = [select_action(avg, self.settings.epsilon, rng) for avg in self.last_averages]
        self.joint = self.game.space.flatten(actions)

    def reset(self, state: int, rng: np.random.Generator) -> None:
        actions = [int(rng.integers(n)) for n in self.game.space.action_counts]
        self.joint = self.game.space.flatten(actions)

    def advance(self, state: int, rng: np.random.Generator) -> StepOutcome:
        game = self.game
        joint = self.joint
        utilities, costs = self.stage_payoffs(state, joint)
        next_state = game.step(state, joint, rng)

        self.state_visits[state] += 1
        row = self.empirical.probs[state]
        row *= 1.0 - 1.0 / self.state_visits[state]
        row[joint] += 1.0 / self.state_visits[state]

        values = self.q[:, next_state] @ self.empirical.probs[next_state]
        self.pair_counters[state, joint] += 1
        step = self.settings.schedules.alpha(int(self.pair_counters[state, joint]))
        rho = game.discount
        q = self.q[:, state, joint]
        self.q[:, state, joint] = q + step * ((1.0 - rho) * utilities + rho * values - q)

        self._act(next_state, rng)
        return StepOutcome(next_state, joint, utilities, costs)

    @property
    def lambdas(self) -> np.ndarray:
        return np.zeros(self.game.num_agents)

    def q_tables(self) -> np.ndarray:
        return self.q.copy()

    def empirical_policy(self) -> JointPolicy:
        return self.empirical
