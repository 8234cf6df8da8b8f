"""Exact solvers for small explicit models.

Values use the normalised discounted convention of the learners:

    Q(s, a) = (1 - rho) * l(s, a) + rho * sum_s' P(s, a, s') * L(s')
    L(s)    = sum_a pi(s, a) * Q(s, a)
"""
from dataclasses import dataclass

import numpy as np

from cnrq_lab.core.equilibrium import lagrangian_table
from cnrq_lab.core.game import GameSpec, JointPolicy
from cnrq_lab.errors import DimensionMismatch, MalformedTables, Reducible, SingularSystem


@dataclass(frozen=True, eq=False)
class ExplicitModel:
    """transitions[s, a, s'], lagrangian[k, s, a] and the discount."""

    transitions: np.ndarray
    lagrangian: np.ndarray
    discount: float

    def __post_init__(self):
        transitions = np.asarray(self.transitions, dtype=float)
        lagrangian = np.asarray(self.lagrangian, dtype=float)
        if transitions.ndim != 3 or transitions.shape[0] != transitions.shape[2]:
            raise MalformedTables(f"Transitions must be (states, joint, states), got {transitions.shape}")
        if lagrangian.ndim != 3 or lagrangian.shape[1:] != transitions.shape[:2]:
            raise MalformedTables(
                f"Lagrangian {lagrangian.shape} does not match transitions {transitions.shape}"
            )
        if np.any(transitions < 0) or not np.allclose(transitions.sum(axis=2), 1.0, rtol=0.0, atol=1e-12):
            raise MalformedTables("Every transition row must sum to 1")
        object.__setattr__(self, "transitions", transitions)
        object.__setattr__(self, "lagrangian", lagrangian)

    @classmethod
    def from_game(cls, game: GameSpec, lambdas: np.ndarray | None = None) -> "ExplicitModel":
        lambdas = np.zeros(game.num_agents) if lambdas is None else np.asarray(lambdas, dtype=float)
        return cls(game.transition_tensor(), lagrangian_table(game, lambdas), game.discount)

    @property
    def num_agents(self) -> int:
        return self.lagrangian.shape[0]

    @property
    def num_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def num_joint(self) -> int:
        return self.transitions.shape[1]


def _policy_matrices(model: ExplicitModel, policy: JointPolicy, agent: int) -> tuple[np.ndarray, np.ndarray]:
    probs = policy.probs
    if probs.shape != (model.num_states, model.num_joint):
        raise DimensionMismatch(
            f"Policy {probs.shape} does not match model ({model.num_states}, {model.num_joint})"
        )
    if not np.allclose(probs.sum(axis=1), 1.0, rtol=0.0, atol=1e-9):
        raise MalformedTables("Policy rows must be normalized")
    if not 0 <= agent < model.num_agents:
        raise ValueError(f"Agent {agent} out of range for {model.num_agents} agents")
    reward = np.einsum("sa,sa->s", probs, model.lagrangian[agent])
    chain = np.einsum("sa,sat->st", probs, model.transitions)
    return reward, chain


def _q_from_values(model: ExplicitModel, agent: int, values: np.ndarray) -> np.ndarray:
    rho = model.discount
    return (1.0 - rho) * model.lagrangian[agent] + rho * model.transitions @ values


def exact_policy_evaluation(model: ExplicitModel, policy: JointPolicy, agent: int) -> tuple[np.ndarray, np.ndarray]:
    """Direct solve of (I - rho P_pi) L = (1 - rho) r_pi; returns (L, Q)."""
    rho = model.discount
    if rho >= 1.0:
        raise SingularSystem(f"Policy evaluation needs discount < 1, got {rho}")
    reward, chain = _policy_matrices(model, policy, agent)
    system = np.eye(model.num_states) - rho * chain
    try:
        values = np.linalg.solve(system, (1.0 - rho) * reward)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"Policy evaluation system is singular at discount {rho}") from exc
    return values, _q_from_values(model, agent, values)


def truncation_horizon(discount: float, payoff_range: float, tol: float = 1e-10) -> int:
    """Smallest N with discount**N * payoff_range < tol."""
    if payoff_range <= tol or discount == 0.0:
        return 1
    return int(np.ceil(np.log(tol / payoff_range) / np.log(discount))) + 1


def truncated_series_evaluation(
    model: ExplicitModel,
    policy: JointPolicy,
    agent: int,
    tol: float = 1e-10,
) -> tuple[np.ndarray, np.ndarray]:
    """L = (1 - rho) * sum_n rho^n P_pi^n r_pi, summed until the tail drops below tol."""
    rho = model.discount
    reward, chain = _policy_matrices(model, policy, agent)
    horizon = truncation_horizon(rho, float(np.abs(model.lagrangian[agent]).max()), tol)
    values = np.zeros(model.num_states)
    term = reward.copy()
    weight = 1.0 - rho
    for _ in range(horizon):
        values += weight * term
        term = chain @ term
        weight *= rho
    return values, _q_from_values(model, agent, values)


def value_iteration(
    model: ExplicitModel,
    agent: int = 0,
    tol: float = 1e-12,
    max_iterations: int = 1_000_000,
) -> tuple[np.ndarray, np.ndarray]:
    """Optimal values and greedy joint action per state for one agent's Lagrangian."""
    if model.discount >= 1.0:
        raise SingularSystem(f"Value iteration needs discount < 1, got {model.discount}")
    values = np.zeros(model.num_states)
    for _ in range(max_iterations):
        q = _q_from_values(model, agent, values)
        updated = q.max(axis=1)
        done = np.abs(updated - values).max() <= tol
        values = updated
        if done:
            break
    q = _q_from_values(model, agent, values)
    return values, q.argmax(axis=1)


def exact_stationary(t: np.ndarray) -> np.ndarray:
    """Stationary distribution of a row-stochastic matrix by GTH state reduction.

    Only sums of nonnegative terms are formed, so no cancellation occurs.
    """
    p = np.array(t, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got {p.shape}")
    n = p.shape[0]
    for k in range(n - 1, 0, -1):
        exit_mass = p[k, :k].sum()
        if exit_mass <= 0.0:
            raise Reducible(f"State {k} cannot reach states 0..{k - 1}; chain is reducible")
        p[:k, k] /= exit_mass
        p[:k, :k] += np.outer(p[:k, k], p[k, :k])
    pi = np.zeros(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = pi[:k] @ p[:k, k]
    return pi / pi.sum()
