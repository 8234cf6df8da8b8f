from dataclasses import dataclass

import numpy as np

from cnrq_lab.core.game import GameSpec, JointPolicy

PER_AGENT_FIELDS = {
    "utility": "utility",
    "cost": "cost",
    "lam": "lambda",
    "mean_utility": "mean_utility",
    "mean_cost": "mean_cost",
    "discounted_utility": "disc_utility",
    "discounted_cost": "disc_cost",
}


@dataclass(frozen=True)
class MetricsRecord:
    """One logged iteration: stage payoffs, multipliers, running averages, diagnostics."""

    iteration: int
    state: int
    joint_action: int
    utility: tuple[float, ...]
    cost: tuple[float, ...]
    lam: tuple[float, ...]
    mean_utility: tuple[float, ...]
    mean_cost: tuple[float, ...]
    discounted_utility: tuple[float, ...]
    discounted_cost: tuple[float, ...]
    frequencies: tuple[tuple[float, ...], ...]
    max_regret: float
    lyapunov: float
    miscoordination: bool = False

    @property
    def social_welfare(self) -> float:
        return float(sum(self.utility))

    @property
    def mean_social_welfare(self) -> float:
        return float(sum(self.mean_utility))

    def to_row(self) -> dict:
        row = {
            "iteration": self.iteration,
            "state": self.state,
            "joint_action": self.joint_action,
            "social_welfare": self.social_welfare,
            "mean_social_welfare": self.mean_social_welfare,
            "max_regret": self.max_regret,
            "lyapunov": self.lyapunov,
            "miscoordination": int(self.miscoordination),
        }
        for attr, prefix in PER_AGENT_FIELDS.items():
            for k, value in enumerate(getattr(self, attr)):
                row[f"{prefix}_{k}"] = value
        for k, freqs in enumerate(self.frequencies):
            for a, value in enumerate(freqs):
                row[f"freq_{k}_{a}"] = value
        return row


def metrics_columns(action_counts: tuple[int, ...]) -> list[str]:
    """Fixed CSV header for a game with the given per-agent action counts."""
    columns = [
        "iteration", "state", "joint_action", "social_welfare", "mean_social_welfare",
        "max_regret", "lyapunov", "miscoordination",
    ]
    for prefix in PER_AGENT_FIELDS.values():
        columns += [f"{prefix}_{k}" for k in range(len(action_counts))]
    for k, n_k in enumerate(action_counts):
        columns += [f"freq_{k}_{a}" for a in range(n_k)]
    return columns


class MetricsTracker:
    """Running statistics over every iteration, logged or not.

    Keeps plain running means, (1 - rho)-discounted sums from the initial
    stage, joint-play counts per state, and per-agent action counts
    (restricted to frequency_state when one is given).
    """

    def __init__(self, game: GameSpec, frequency_state: int | None = None):
        self.game = game
        self.frequency_state = frequency_state
        k = game.num_agents
        self.iteration = 0
        self.utility_sum = np.zeros(k)
        self.cost_sum = np.zeros(k)
        self.discounted_utility = np.zeros(k)
        self.discounted_cost = np.zeros(k)
        self._weight = 1.0
        self.visits = np.zeros((game.num_states, game.num_joint))
        self.action_counts = [np.zeros(n) for n in game.space.action_counts]
        self.frequency_visits = 0

    @property
    def mean_utility(self) -> np.ndarray:
        return self.utility_sum / max(self.iteration, 1)

    @property
    def mean_cost(self) -> np.ndarray:
        return self.cost_sum / max(self.iteration, 1)

    def observe(self, state: int, joint: int, utilities: np.ndarray, costs: np.ndarray) -> None:
        self.iteration += 1
        self.utility_sum += utilities
        self.cost_sum += costs
        scale = (1.0 - self.game.discount) * self._weight
        self.discounted_utility += scale * utilities
        self.discounted_cost += scale * costs
        self._weight *= self.game.discount
        self.visits[state, joint] += 1
        if self.frequency_state is None or state == self.frequency_state:
            self.frequency_visits += 1
            for k, action in enumerate(self.game.space.profiles[joint]):
                self.action_counts[k][action] += 1

    def frequencies(self) -> tuple[tuple[float, ...], ...]:
        if self.frequency_visits == 0:
            return tuple(tuple(float("nan") for _ in counts) for counts in self.action_counts)
        return tuple(tuple((counts / self.frequency_visits).tolist()) for counts in self.action_counts)

    def empirical_policy(self) -> JointPolicy:
        """Plain visit frequencies of joint play; unvisited states stay all-zero."""
        totals = self.visits.sum(axis=1, keepdims=True)
        return JointPolicy(np.divide(self.visits, totals, out=np.zeros_like(self.visits), where=totals > 0))

    def record(
        self,
        state: int,
        joint: int,
        utilities: np.ndarray,
        costs: np.ndarray,
        lambdas: np.ndarray,
        max_regret: float,
        lyapunov: float,
        miscoordination: bool = False,
    ) -> MetricsRecord:
        return MetricsRecord(
            iteration=self.iteration,
            state=int(state),
            joint_action=int(joint),
            utility=tuple(np.asarray(utilities, dtype=float).tolist()),
            cost=tuple(np.asarray(costs, dtype=float).tolist()),
            lam=tuple(np.asarray(lambdas, dtype=float).tolist()),
            mean_utility=tuple(self.mean_utility.tolist()),
            mean_cost=tuple(self.mean_cost.tolist()),
            discounted_utility=tuple(self.discounted_utility.tolist()),
            discounted_cost=tuple(self.discounted_cost.tolist()),
            frequencies=self.frequencies(),
            max_regret=float(max_regret),
            lyapunov=float(lyapunov),
            miscoordination=bool(miscoordination),
        )
