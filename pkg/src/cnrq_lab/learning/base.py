from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import ClassVar, Optional

import numpy as np

from cnrq_lab.core.equilibrium import ce_residuals, max_positive_regret
from cnrq_lab.core.game import GameSpec, JointPolicy
from cnrq_lab.core.metrics import MetricsRecord, MetricsTracker
from cnrq_lab.learning.schedules import StepSchedules


@dataclass(frozen=True)
class LearnerSettings:
    """Knobs shared by every learning algorithm; each reads the ones it needs."""

    schedules: StepSchedules = field(default_factory=StepSchedules)
    epsilon: float = 0.05
    delta: float = 1e-3
    mu: Optional[float] = None  # None: derived from the game's Lagrangian bound
    max_lambda: float = 100.0
    balance_tremble: float = 1e-6
    inner_iterations: int = 200
    observation_noise: float = 0.0
    marginal_sampling: bool = False
    rm_epsilon: float = 0.01
    rm_delta: float = 1e-4
    frequency_state: Optional[int] = None


@dataclass(frozen=True)
class StepOutcome:
    next_state: int
    joint: int
    utilities: np.ndarray
    costs: np.ndarray
    miscoordination: bool = False


class Algorithm(ABC):
    """One learning run on a game: owns its tables, counters and metrics tracker.

    Subclasses implement reset() (initial joint action) and advance() (one
    iteration from the current state). step() wraps advance() with metrics.
    """

    name: ClassVar[str] = "algorithm"

    def __init__(self, game: GameSpec, settings: LearnerSettings | None = None):
        self.game = game
        self.settings = settings or LearnerSettings()
        self.tracker = MetricsTracker(game, self.settings.frequency_state)
        self.iteration = 0
        self.joint = 0

    @abstractmethod
    def reset(self, state: int, rng: np.random.Generator) -> None:
        """Choose the initial joint action at state."""

    @abstractmethod
    def advance(self, state: int, rng: np.random.Generator) -> StepOutcome:
        """Play self.joint at state, learn from it, and choose the next joint action."""

    @property
    @abstractmethod
    def lambdas(self) -> np.ndarray:
        ...

    @abstractmethod
    def q_tables(self) -> np.ndarray:
        """Current action-value estimates, shape (num_agents, num_states, |A|)."""

    def empirical_policy(self) -> JointPolicy:
        return self.tracker.empirical_policy()

    def lyapunov(self) -> float:
        return float("nan")

    def max_regret(self) -> float:
        return max_positive_regret(ce_residuals(self.empirical_policy(), self.q_tables(), self.game.space))

    def step(self, state: int, rng: np.random.Generator, record: bool = True) -> tuple[int, Optional[MetricsRecord]]:
        played = self.joint
        self.iteration += 1
        outcome = self.advance(state, rng)
        self.tracker.observe(state, played, outcome.utilities, outcome.costs)
        if not record:
            return outcome.next_state, None
        return outcome.next_state, self.tracker.record(
            state,
            played,
            outcome.utilities,
            outcome.costs,
            self.lambdas,
            self.max_regret(),
            self.lyapunov(),
            outcome.miscoordination,
        )

    def stage_payoffs(self, state: int, joint: int) -> tuple[np.ndarray, np.ndarray]:
        return self.game.utilities[:, state, joint].copy(), self.game.costs[:, state, joint].copy()


def inertia_for(game: GameSpec, agent: int, settings: LearnerSettings) -> float:
    """Fixed mu when configured, else 2 |A_k| max|l| / (1 - rho)."""
    if settings.mu is not None:
        return float(settings.mu)
    bound = max(game.lagrangian_bound(settings.max_lambda), settings.delta)
    return 2.0 * game.space.action_counts[agent] * bound / (1.0 - game.discount)


def project_lambda(value: float, max_lambda: float) -> float:
    return float(min(max(value, 0.0), max_lambda))
