from dataclasses import dataclass, field, replace
from math import prod
from typing import Callable, Optional, Sequence

import numpy as np

from cnrq_lab.errors import DimensionMismatch, MalformedTables

TransitionFn = Callable[[int, int, np.random.Generator], int]
TransitionProbsFn = Callable[[int, int], np.ndarray]


@dataclass(frozen=True)
class JointActionSpace:
    """Row-major flattening of per-agent action indices into joint-action ids.

    Joint id of (a_0, ..., a_{K-1}) is np.ravel_multi_index over action_counts,
    so agent 0 is the slowest-varying axis. Every Q-table and policy row in the
    package is laid out this way.
    """

    action_counts: tuple[int, ...]
    profiles: np.ndarray = field(init=False, repr=False, compare=False)
    strides: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        counts = tuple(int(n) for n in self.action_counts)
        if not counts or any(n < 1 for n in counts):
            raise DimensionMismatch(f"Action counts must be positive, got {self.action_counts}")
        object.__setattr__(self, "action_counts", counts)
        profiles = np.stack(np.unravel_index(np.arange(prod(counts)), counts), axis=1)
        object.__setattr__(self, "profiles", profiles)
        strides = tuple(prod(counts[k + 1:]) for k in range(len(counts)))
        object.__setattr__(self, "strides", strides)

    @property
    def num_agents(self) -> int:
        return len(self.action_counts)

    @property
    def size(self) -> int:
        return self.profiles.shape[0]

    def flatten(self, actions: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(int(a) for a in actions), self.action_counts))

    def unflatten(self, joint: int) -> tuple[int, ...]:
        return tuple(int(a) for a in self.profiles[joint])

    def deviations(self, joint: int, agent: int) -> np.ndarray:
        """Joint ids obtained by replacing agent's action in joint with 0..|A_k|-1."""
        stride = self.strides[agent]
        base = joint - int(self.profiles[joint, agent]) * stride
        return base + np.arange(self.action_counts[agent]) * stride

    def agent_matrix(self, values: np.ndarray, agent: int) -> np.ndarray:
        """Reshape a vector over joint actions to (|A_k|, |A_-k|).

        Columns enumerate the opponents' joint profiles row-major in ascending
        agent order.
        """
        values = np.asarray(values)
        shaped = values.reshape(self.action_counts)
        return np.moveaxis(shaped, agent, 0).reshape(self.action_counts[agent], -1)


@dataclass(frozen=True, eq=False)
class GameSpec:
    """A finite constrained stochastic game with tabulated stage payoffs.

    utilities and costs have shape (num_agents, num_states, |A|). The
    transition function samples s' from (s, joint, rng); transition_probs_fn,
    when present, returns the full distribution over s' and enables the
    oracle.
    """

    name: str
    space: JointActionSpace
    num_states: int
    utilities: np.ndarray
    costs: np.ndarray
    cost_bounds: np.ndarray
    transition_fn: TransitionFn
    discount: float = 0.9
    transition_probs_fn: Optional[TransitionProbsFn] = None
    utility_range: Optional[tuple[float, float]] = None
    cost_range: Optional[tuple[float, float]] = None

    def __post_init__(self):
        utilities = np.array(self.utilities, dtype=float)
        costs = np.array(self.costs, dtype=float)
        bounds = np.array(self.cost_bounds, dtype=float).reshape(-1)
        expected = (self.space.num_agents, self.num_states, self.space.size)
        if utilities.shape != expected:
            raise MalformedTables(f"{self.name}: utilities have shape {utilities.shape}, expected {expected}")
        if costs.shape != expected:
            raise MalformedTables(f"{self.name}: costs have shape {costs.shape}, expected {expected}")
        if bounds.shape != (self.space.num_agents,):
            raise MalformedTables(f"{self.name}: need one cost bound per agent, got {bounds.shape}")
        if not (np.all(np.isfinite(utilities)) and np.all(np.isfinite(costs))):
            raise MalformedTables(f"{self.name}: payoff tables contain non-finite values")
        if not 0.0 <= self.discount < 1.0:
            raise MalformedTables(f"{self.name}: discount must lie in [0, 1), got {self.discount}")

        utility_range = self.utility_range or (float(utilities.min()), float(utilities.max()))
        cost_range = self.cost_range or (float(costs.min()), float(costs.max()))
        if utilities.min() < utility_range[0] or utilities.max() > utility_range[1]:
            raise MalformedTables(f"{self.name}: utilities leave the declared interval {utility_range}")
        if costs.min() < cost_range[0] or costs.max() > cost_range[1]:
            raise MalformedTables(f"{self.name}: costs leave the declared interval {cost_range}")

        for attr, value in (
            ("utilities", utilities),
            ("costs", costs),
            ("cost_bounds", bounds),
            ("utility_range", tuple(float(x) for x in utility_range)),
            ("cost_range", tuple(float(x) for x in cost_range)),
        ):
            if isinstance(value, np.ndarray):
                value.setflags(write=False)
            object.__setattr__(self, attr, value)

    @property
    def num_agents(self) -> int:
        return self.space.num_agents

    @property
    def num_joint(self) -> int:
        return self.space.size

    def utility(self, agent: int, state: int, joint: int) -> float:
        return float(self.utilities[agent, state, joint])

    def cost(self, agent: int, state: int, joint: int) -> float:
        return float(self.costs[agent, state, joint])

    def step(self, state: int, joint: int, rng: np.random.Generator) -> int:
        return int(self.transition_fn(state, joint, rng))

    def transition_probs(self, state: int, joint: int) -> np.ndarray:
        if self.transition_probs_fn is None:
            raise MalformedTables(f"{self.name}: no explicit transition model available")
        return np.asarray(self.transition_probs_fn(state, joint), dtype=float)

    def transition_tensor(self) -> np.ndarray:
        """P[s, a, s'] built from transition_probs_fn."""
        tensor = np.empty((self.num_states, self.num_joint, self.num_states))
        for s in range(self.num_states):
            for a in range(self.num_joint):
                tensor[s, a] = self.transition_probs(s, a)
        return tensor

    def lagrangian_bound(self, max_lambda: float) -> float:
        """Upper bound on |u - lambda (c - D)| over lambda in [0, max_lambda]."""
        max_utility = max(abs(self.utility_range[0]), abs(self.utility_range[1]))
        slack = np.concatenate([self.cost_range[0] - self.cost_bounds, self.cost_range[1] - self.cost_bounds])
        return float(max_utility + max_lambda * np.abs(slack).max())

    def with_discount(self, discount: float) -> "GameSpec":
        return replace(self, discount=discount)


@dataclass
class JointPolicy:
    """Per-state distribution over joint actions, probs[s, a]."""

    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.array(self.probs, dtype=float)
        if self.probs.ndim != 2:
            raise DimensionMismatch(f"Joint policy must be (states, joint actions), got {self.probs.shape}")
        if np.any(self.probs < 0):
            raise MalformedTables("Joint policy has negative entries")

    @classmethod
    def zeros(cls, num_states: int, num_joint: int) -> "JointPolicy":
        return cls(np.zeros((num_states, num_joint)))

    @classmethod
    def uniform(cls, num_states: int, num_joint: int) -> "JointPolicy":
        return cls(np.full((num_states, num_joint), 1.0 / num_joint))

    @property
    def num_states(self) -> int:
        return self.probs.shape[0]

    @property
    def num_joint(self) -> int:
        return self.probs.shape[1]

    def row(self, state: int) -> np.ndarray:
        return self.probs[state]

    def is_normalized(self, state: int, tol: float = 1e-12) -> bool:
        return abs(self.probs[state].sum() - 1.0) <= tol

    def normalized(self) -> "JointPolicy":
        """Copy with each row rescaled to sum to one; all-zero rows become uniform."""
        totals = self.probs.sum(axis=1, keepdims=True)
        probs = np.where(totals > 0, self.probs / np.where(totals > 0, totals, 1.0), 1.0 / self.num_joint)
        return JointPolicy(probs)
