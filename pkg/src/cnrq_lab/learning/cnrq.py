"""Three-timescale constrained no-regret Q-learning.

Per iteration and per agent, in this order: empirical joint-play frequency
(fast, gamma), Lagrangian Q-learning (middle, alpha), projected multiplier
descent (slow, beta), regret update (fast, gamma), then a new action drawn
from the invariant measure of the regret-driven transition matrix at the
next state.
"""
from dataclasses import dataclass

import numpy as np

from cnrq_lab.config.logging_config import configure_logging
from cnrq_lab.core.equilibrium import instantaneous_lagrangian
from cnrq_lab.core.game import GameSpec, JointActionSpace, JointPolicy
from cnrq_lab.errors import InertiaTooSmall
from cnrq_lab.learning.base import (
    Algorithm,
    LearnerSettings,
    StepOutcome,
    inertia_for,
    project_lambda,
)
from cnrq_lab.learning.no_regret import (
    SmoothMaxParams,
    lyapunov_value,
    sample_index,
    select_action,
    stationary_distribution,
    transition_matrix,
)
from cnrq_lab.learning.schedules import StepSchedules

logger = configure_logging(__name__)


@dataclass
class LearnerState:
    """One agent's tables. empirical and state_counters are shared by all agents of a run."""

    agent: int
    q_table: np.ndarray
    regret: np.ndarray
    lam: float
    empirical: JointPolicy
    state_counters: np.ndarray
    pair_counters: np.ndarray
    mu: float
    last_action: int = 0

    @classmethod
    def initial(
        cls,
        agent: int,
        game: GameSpec,
        empirical: JointPolicy,
        state_counters: np.ndarray,
        mu: float,
    ) -> "LearnerState":
        n_k = game.space.action_counts[agent]
        return cls(
            agent=agent,
            q_table=np.zeros((game.num_states, game.num_joint)),
            regret=np.zeros((game.num_states, n_k, n_k)),
            lam=0.0,
            empirical=empirical,
            state_counters=state_counters,
            pair_counters=np.zeros((game.num_states, game.num_joint), dtype=np.int64),
            mu=mu,
        )


def update_empirical(state_now: int, joint_played: int, learner: LearnerState, schedules: StepSchedules) -> np.ndarray:
    learner.state_counters[state_now] += 1
    step = schedules.gamma(int(learner.state_counters[state_now]))
    row = learner.empirical.probs[state_now]
    row *= 1.0 - step
    row[joint_played] += step
    return row


def long_term_lagrangian(next_state: int, empirical: JointPolicy, q_table: np.ndarray) -> float:
    return float(empirical.probs[next_state] @ q_table[next_state])


def update_q(
    state: int,
    joint: int,
    ell: float,
    l_next: float,
    learner: LearnerState,
    schedules: StepSchedules,
    rho: float,
) -> float:
    learner.pair_counters[state, joint] += 1
    step = schedules.alpha(int(learner.pair_counters[state, joint]))
    q = learner.q_table
    q[state, joint] += step * ((1.0 - rho) * ell + rho * l_next - q[state, joint])
    return float(q[state, joint])


def update_lambda(
    lam: float,
    cost_observed: float,
    cost_bound: float,
    n: int,
    schedules: StepSchedules,
    max_lambda: float = 100.0,
) -> float:
    return project_lambda(lam + schedules.beta(n) * (cost_observed - cost_bound), max_lambda)


def update_regret(
    state_now: int,
    joint_played: int,
    learner: LearnerState,
    schedules: StepSchedules,
    space: JointActionSpace,
) -> np.ndarray:
    """Row of the played action moves toward the Q differentials; every row decays by gamma."""
    k = learner.agent
    played = int(space.profiles[joint_played, k])
    q_row = learner.q_table[state_now, space.deviations(joint_played, k)]
    step = schedules.gamma(max(int(learner.state_counters[state_now]), 1))
    regret = learner.regret[state_now]
    regret *= 1.0 - step
    regret[played] += step * (q_row - q_row[played])
    np.fill_diagonal(regret, 0.0)
    return regret


def play_distribution(learner: LearnerState, state: int, settings: LearnerSettings) -> np.ndarray:
    """Invariant measure of the regret transition matrix at state; doubles mu until it is valid."""
    while True:
        try:
            t = transition_matrix(learner.regret[state], SmoothMaxParams(settings.delta, learner.mu))
            break
        except InertiaTooSmall as exc:
            logger.warning(f"Agent {learner.agent}: {exc}. Doubling mu to {2 * learner.mu:g}")
            learner.mu *= 2.0
    return stationary_distribution(t, settings.balance_tremble)


def cnrq_step(
    learners: list[LearnerState],
    game: GameSpec,
    state: int,
    rng: np.random.Generator,
    settings: LearnerSettings,
    iteration: int,
) -> StepOutcome:
    space = game.space
    schedules = settings.schedules
    joint = space.flatten([learner.last_action for learner in learners])
    utilities = game.utilities[:, state, joint].copy()
    costs = game.costs[:, state, joint].copy()
    next_state = game.step(state, joint, rng)

    update_empirical(state, joint, learners[0], schedules)
    for learner in learners:
        k = learner.agent
        l_next = long_term_lagrangian(next_state, learner.empirical, learner.q_table)
        ell = instantaneous_lagrangian(k, learner.lam, state, joint, game)
        update_q(state, joint, ell, l_next, learner, schedules, game.discount)
        learner.lam = update_lambda(
            learner.lam, costs[k], game.cost_bounds[k], iteration, schedules, settings.max_lambda
        )
        update_regret(state, joint, learner, schedules, space)

    for learner in learners:
        p_hat = play_distribution(learner, next_state, settings)
        learner.last_action = select_action(p_hat, settings.epsilon, rng)

    return StepOutcome(next_state, joint, utilities, costs)


class CNRQ(Algorithm):
    name = "cnrq"

    def __init__(self, game: GameSpec, settings: LearnerSettings | None = None):
        super().__init__(game, settings)
        empirical = JointPolicy.zeros(game.num_states, game.num_joint)
        state_counters = np.zeros(game.num_states, dtype=np.int64)
        self.learners = [
            LearnerState.initial(k, game, empirical, state_counters, inertia_for(game, k, self.settings))
            for k in range(game.num_agents)
        ]
        logger.debug(f"CNRQ inertia per agent: {[round(l.mu, 3) for l in self.learners]}")

    def reset(self, state: int, rng: np.random.Generator) -> None:
        for learner in self.learners:
            learner.last_action = int(rng.integers(self.game.space.action_counts[learner.agent]))
        self.joint = self.game.space.flatten([l.last_action for l in self.learners])

    def advance(self, state: int, rng: np.random.Generator) -> StepOutcome:
        outcome = cnrq_step(self.learners, self.game, state, rng, self.settings, self.iteration)
        self.joint = self.game.space.flatten([l.last_action for l in self.learners])
        return outcome

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([l.lam for l in self.learners])

    def q_tables(self) -> np.ndarray:
        return np.stack([l.q_table for l in self.learners])

    def empirical_policy(self) -> JointPolicy:
        return self.learners[0].empirical

    def lyapunov(self) -> float:
        return float(sum(lyapunov_value(l.regret, self.settings.delta) for l in self.learners))


def q_learning_frozen(
    game: GameSpec,
    policy: JointPolicy,
    lambdas: np.ndarray,
    iterations: int,
    rng: np.random.Generator,
    schedules: StepSchedules | None = None,
    state: int = 0,
) -> np.ndarray:
    """Run only the Q-learning recursion with the joint policy and multipliers held fixed.

    Each agent's LearnerState uses policy as its empirical estimate and never
    updates it; joint actions are drawn from policy at each visited state.
    Returns the Q-tables, shape (num_agents, num_states, |A|).
    """
    schedules = schedules or StepSchedules()
    state_counters = np.zeros(game.num_states, dtype=np.int64)
    learners = [LearnerState.initial(k, game, policy, state_counters, mu=1.0) for k in range(game.num_agents)]
    for learner in learners:
        learner.lam = float(lambdas[learner.agent])
    probs = policy.probs
    for _ in range(iterations):
        joint = sample_index(probs[state], rng)
        next_state = game.step(state, joint, rng)
        for learner in learners:
            ell = instantaneous_lagrangian(learner.agent, learner.lam, state, joint, game)
            l_next = long_term_lagrangian(next_state, learner.empirical, learner.q_table)
            update_q(state, joint, ell, l_next, learner, schedules, game.discount)
        state = next_state
    return np.stack([learner.q_table for learner in learners])
