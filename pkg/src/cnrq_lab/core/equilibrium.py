"""Correlated-equilibrium residuals and the instantaneous Lagrangian.

Residuals are reported in joint-mass form: for agent k at state s,

    residual(a, b) = sum_{a_-k} pi_s(a, a_-k) * [Q_k(s, b, a_-k) - Q_k(s, a, a_-k)]

which is the conditional form times the marginal pi_s(a). A policy is a
correlated equilibrium of Q exactly when every residual is <= 0.
"""
from dataclasses import dataclass

import numpy as np

from cnrq_lab.core.game import GameSpec, JointActionSpace, JointPolicy
from cnrq_lab.errors import DimensionMismatch, ZeroMarginal


@dataclass(frozen=True)
class CEResiduals:
    """per_agent[k][s, a, b]: gain of deviating from recommendation a to b."""

    per_agent: tuple[np.ndarray, ...]

    def max_entry(self) -> float:
        entries = [r.max() for r in self.per_agent if r.size]
        return float(max(entries)) if entries else 0.0


def _policy_probs(policy: JointPolicy | np.ndarray) -> np.ndarray:
    probs = policy.probs if isinstance(policy, JointPolicy) else np.asarray(policy, dtype=float)
    return np.atleast_2d(probs)


def conditional_policy(
    policy: JointPolicy | np.ndarray,
    space: JointActionSpace,
    state: int,
    agent: int,
    recommended: int,
) -> np.ndarray:
    """Distribution over opponents' joint profiles given agent's recommendation."""
    probs = _policy_probs(policy)
    mass = space.agent_matrix(probs[state], agent)[recommended]
    total = mass.sum()
    if total <= 0.0:
        raise ZeroMarginal(
            f"Agent {agent} action {recommended} has zero probability at state {state}"
        )
    return mass / total


def ce_residuals(
    policy: JointPolicy | np.ndarray,
    q_tables: np.ndarray,
    space: JointActionSpace,
    conditional: bool = False,
) -> CEResiduals:
    """Deviation gains for every (agent, state, recommended, alternative).

    q_tables has shape (num_agents, num_states, |A|). With conditional=True
    rows are divided by the recommendation's marginal; rows with zero
    marginal stay 0 in both forms.
    """
    probs = _policy_probs(policy)
    q_tables = np.asarray(q_tables, dtype=float)
    expected = (space.num_agents, probs.shape[0], space.size)
    if q_tables.shape != expected or probs.shape[1] != space.size:
        raise DimensionMismatch(
            f"Q-tables {q_tables.shape} and policy {probs.shape} do not match game shape {expected}"
        )

    per_agent = []
    for k in range(space.num_agents):
        n_k = space.action_counts[k]
        out = np.empty((probs.shape[0], n_k, n_k))
        for s in range(probs.shape[0]):
            mass = space.agent_matrix(probs[s], k)
            gains = mass @ space.agent_matrix(q_tables[k, s], k).T
            out[s] = gains - np.diag(gains)[:, None]
            if conditional:
                marginal = mass.sum(axis=1)
                out[s] = np.divide(out[s], marginal[:, None], out=np.zeros_like(out[s]), where=marginal[:, None] > 0)
        per_agent.append(out)
    return CEResiduals(tuple(per_agent))


def max_positive_regret(residuals: CEResiduals) -> float:
    return max(0.0, residuals.max_entry())


def instantaneous_lagrangian(agent: int, lam: float, state: int, joint: int, spec: GameSpec) -> float:
    """u_k(s, a) - lambda * (c_k(s, a) - D_k)."""
    if not 0 <= agent < spec.num_agents:
        raise ValueError(f"Agent {agent} out of range for {spec.num_agents} agents")
    if not 0 <= state < spec.num_states:
        raise ValueError(f"State {state} out of range for {spec.num_states} states")
    if not 0 <= joint < spec.num_joint:
        raise ValueError(f"Joint action {joint} out of range for {spec.num_joint} joint actions")
    return spec.utility(agent, state, joint) - lam * (spec.cost(agent, state, joint) - spec.cost_bounds[agent])


def lagrangian_table(spec: GameSpec, lambdas: np.ndarray) -> np.ndarray:
    """Stage Lagrangian for every (agent, state, joint action)."""
    lambdas = np.asarray(lambdas, dtype=float).reshape(-1, 1, 1)
    return spec.utilities - lambdas * (spec.costs - spec.cost_bounds.reshape(-1, 1, 1))
