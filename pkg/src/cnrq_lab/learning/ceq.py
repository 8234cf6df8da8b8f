"""CE-Q learning with a utilitarian equilibrium selector and Lagrange multipliers.

The centralized variant keeps one set of Q-tables and one selected CE per
state. In the semi-distributed variant every agent keeps its own model of
all agents' Q-tables, solves its own LP and plays its own component of the
joint action it draws, so agents can settle on different equilibria.
"""
import numpy as np

from cnrq_lab.config.logging_config import configure_logging
from cnrq_lab.core.game import GameSpec
from cnrq_lab.learning.base import Algorithm, LearnerSettings, StepOutcome, project_lambda
from cnrq_lab.learning.lp import utilitarian_ce
from cnrq_lab.learning.no_regret import sample_index

logger = configure_logging(__name__)


def _inverse_cdf(dist: np.ndarray, u: float) -> int:
    cdf = np.cumsum(dist)
    cdf[-1] = 1.0
    return int(np.searchsorted(cdf, u, side="right"))


class CEQ(Algorithm):
    name = "ceq-central"
    semi_distributed = False

    def __init__(self, game: GameSpec, settings: LearnerSettings | None = None):
        super().__init__(game, settings)
        models = game.num_agents if self.semi_distributed else 1
        shape = (game.num_agents, game.num_states, game.num_joint)
        self.q_models = np.zeros((models,) + shape)
        self.pair_counters = np.zeros((game.num_states, game.num_joint), dtype=np.int64)
        self._lambdas = np.zeros(game.num_agents)
        self._solutions = np.zeros((models, game.num_states, game.num_joint))
        self._stale = np.ones((models, game.num_states), dtype=bool)
        self.solves = 0

    @property
    def num_models(self) -> int:
        return self.q_models.shape[0]

    def selection(self, model: int, state: int) -> np.ndarray:
        """Utilitarian CE of model's Q-tables at state; re-solved only after those Q-values changed."""
        if self._stale[model, state]:
            self._solutions[model, state] = utilitarian_ce(self.q_models[model, :, state], self.game.space)
            self._stale[model, state] = False
            self.solves += 1
        return self._solutions[model, state]

    def selections(self, state: int) -> list[np.ndarray]:
        return [self.selection(m, state) for m in range(self.num_models)]

    def _model_of(self, agent: int) -> int:
        return agent if self.semi_distributed else 0

    def draw_joint(self, dists: list[np.ndarray], rng: np.random.Generator) -> tuple[int, bool]:
        """Joint action from the selected distributions plus per-agent epsilon exploration."""
        space = self.game.space
        if self.settings.marginal_sampling:
            actions = []
            for k in range(space.num_agents):
                marginal = space.agent_matrix(dists[self._model_of(k)], k).sum(axis=1)
                actions.append(sample_index(marginal, rng))
        else:
            u = rng.random()
            actions = [
                int(space.profiles[_inverse_cdf(dists[self._model_of(k)], u), k])
                for k in range(space.num_agents)
            ]
        for k, n_k in enumerate(space.action_counts):
            if rng.random() < self.settings.epsilon:
                actions[k] = int(rng.integers(n_k))
        miscoordinated = any(not np.allclose(d, dists[0], atol=1e-9) for d in dists[1:])
        return space.flatten(actions), miscoordinated

    def reset(self, state: int, rng: np.random.Generator) -> None:
        self.joint, _ = self.draw_joint(self.selections(state), rng)

    def _observed_lagrangian(self, model: int, ell: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        noise = self.settings.observation_noise
        if not self.semi_distributed or noise <= 0:
            return ell
        perturbation = rng.normal(0.0, noise, size=ell.shape)
        perturbation[model] = 0.0
        return ell + perturbation

    def advance(self, state: int, rng: np.random.Generator) -> StepOutcome:
        game = self.game
        joint = self.joint
        utilities, costs = self.stage_payoffs(state, joint)
        next_state = game.step(state, joint, rng)
        ell = utilities - self._lambdas * (costs - game.cost_bounds)

        dists = self.selections(next_state)
        self.pair_counters[state, joint] += 1
        step = self.settings.schedules.alpha(int(self.pair_counters[state, joint]))
        rho = game.discount
        for model in range(self.num_models):
            observed = self._observed_lagrangian(model, ell, rng)
            values = self.q_models[model, :, next_state] @ dists[model]
            q = self.q_models[model, :, state, joint]
            self.q_models[model, :, state, joint] = q + step * ((1.0 - rho) * observed + rho * values - q)
        self._stale[:, state] = True

        beta = self.settings.schedules.beta(self.iteration)
        for k in range(game.num_agents):
            self._lambdas[k] = project_lambda(
                self._lambdas[k] + beta * (costs[k] - game.cost_bounds[k]), self.settings.max_lambda
            )

        self.joint, miscoordinated = self.draw_joint(dists, rng)
        return StepOutcome(next_state, joint, utilities, costs, miscoordinated)

    @property
    def lambdas(self) -> np.ndarray:
        return self._lambdas.copy()

    def q_tables(self) -> np.ndarray:
        if not self.semi_distributed:
            return self.q_models[0].copy()
        return np.stack([self.q_models[k, k] for k in range(self.game.num_agents)])


class SemiDistributedCEQ(CEQ):
    name = "ceq-semi"
    semi_distributed = True
