"""Small explicit games used as oracle fixtures and for quick CLI runs."""
from typing import Sequence

import numpy as np

from cnrq_lab.core.game import GameSpec, JointActionSpace
from cnrq_lab.errors import MalformedTables


def make_synthetic_game(
    action_counts: Sequence[int],
    utilities: np.ndarray,
    transitions: np.ndarray,
    costs: np.ndarray | None = None,
    cost_bounds: Sequence[float] | None = None,
    discount: float = 0.9,
    name: str = "synthetic",
) -> GameSpec:
    """Wrap explicit tables behind GameSpec.

    utilities/costs: (num_agents, num_states, |A|); transitions: (num_states, |A|, num_states).
    """
    space = JointActionSpace(tuple(action_counts))
    utilities = np.asarray(utilities, dtype=float)
    transitions = np.asarray(transitions, dtype=float)
    if utilities.ndim != 3 or utilities.shape[0] != space.num_agents or utilities.shape[2] != space.size:
        raise MalformedTables(
            f"{name}: utilities must be (agents={space.num_agents}, states, joint={space.size}), got {utilities.shape}"
        )
    num_states = utilities.shape[1]
    if transitions.shape != (num_states, space.size, num_states):
        raise MalformedTables(
            f"{name}: transitions must be {(num_states, space.size, num_states)}, got {transitions.shape}"
        )
    if np.any(transitions < 0) or not np.allclose(transitions.sum(axis=2), 1.0, rtol=0.0, atol=1e-12):
        raise MalformedTables(f"{name}: every transition row must be a probability vector")
    costs = np.zeros_like(utilities) if costs is None else np.asarray(costs, dtype=float)
    cost_bounds = np.zeros(space.num_agents) if cost_bounds is None else np.asarray(cost_bounds, dtype=float)
    cdfs = np.cumsum(transitions, axis=2)
    cdfs[:, :, -1] = 1.0

    def transition(state: int, joint: int, rng: np.random.Generator) -> int:
        return int(np.searchsorted(cdfs[state, joint], rng.random(), side="right"))

    def transition_probs(state: int, joint: int) -> np.ndarray:
        return transitions[state, joint].copy()

    return GameSpec(
        name=name,
        space=space,
        num_states=num_states,
        utilities=utilities,
        costs=costs,
        cost_bounds=cost_bounds,
        transition_fn=transition,
        discount=discount,
        transition_probs_fn=transition_probs,
    )


def normal_form_game(action_counts: Sequence[int], payoffs: np.ndarray, name: str, discount: float = 0.9) -> GameSpec:
    """One-state repeated game; payoffs is (num_agents, |A|)."""
    payoffs = np.asarray(payoffs, dtype=float)
    size = payoffs.shape[1]
    return make_synthetic_game(
        action_counts,
        payoffs[:, None, :],
        np.ones((1, size, 1)),
        discount=discount,
        name=name,
    )


def single_agent_mdp(discount: float = 0.9) -> GameSpec:
    transitions = np.array([
        [[0.8, 0.2], [0.3, 0.7]],
        [[0.5, 0.5], [0.1, 0.9]],
    ])
    utilities = np.array([[[1.0, 0.0], [0.5, 2.0]]])
    return make_synthetic_game((2,), utilities, transitions, discount=discount, name="single-agent-mdp")


def two_agent_game(discount: float = 0.9) -> GameSpec:
    """Two agents, two states, two actions each; joints ordered (0,0), (0,1), (1,0), (1,1)."""
    transitions = np.array([
        [[0.9, 0.1], [0.6, 0.4], [0.6, 0.4], [0.2, 0.8]],
        [[0.7, 0.3], [0.4, 0.6], [0.4, 0.6], [0.1, 0.9]],
    ])
    utilities = np.array([
        [[0.2, 0.0, 0.8, 0.4], [0.6, 0.3, 1.0, 0.5]],
        [[0.2, 0.8, 0.0, 0.4], [0.6, 1.0, 0.3, 0.5]],
    ])
    costs = np.array([
        [[0.0, 0.0, 1.0, 1.0], [0.0, 0.0, 1.0, 1.0]],
        [[0.0, 1.0, 0.0, 1.0], [0.0, 1.0, 0.0, 1.0]],
    ])
    return make_synthetic_game(
        (2, 2), utilities, transitions, costs=costs, cost_bounds=(0.5, 0.5), discount=discount, name="two-agent-game"
    )


# Action 0 cooperates, action 1 defects.
PRISONERS_DILEMMA = np.array([
    [3.0, 0.0, 5.0, 1.0],
    [3.0, 5.0, 0.0, 1.0],
])

MATCHING_PENNIES = np.array([
    [1.0, -1.0, -1.0, 1.0],
    [-1.0, 1.0, 1.0, -1.0],
])

# Action 0 swerves, action 1 goes straight.
CHICKEN = np.array([
    [6.0, 2.0, 7.0, 0.0],
    [6.0, 7.0, 2.0, 0.0],
])


def prisoners_dilemma(discount: float = 0.9) -> GameSpec:
    return normal_form_game((2, 2), PRISONERS_DILEMMA, "prisoners-dilemma", discount)


def matching_pennies(discount: float = 0.9) -> GameSpec:
    return normal_form_game((2, 2), MATCHING_PENNIES, "matching-pennies", discount)


def chicken(discount: float = 0.9) -> GameSpec:
    return normal_form_game((2, 2), CHICKEN, "chicken", discount)
