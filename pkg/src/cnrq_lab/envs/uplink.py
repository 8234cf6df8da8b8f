"""Uplink spectrum access: femto users (FUEs) share a macro user's (MUE) band.

State is the MUE's occupancy (0 idle, 1 transmitting) following a two-state
Markov chain. Each FUE picks a transmit power; its utility is its Shannon
rate at its femto base station and its cost is the power it spends.
"""
from dataclasses import dataclass

import numpy as np

from cnrq_lab.core.game import GameSpec, JointActionSpace
from cnrq_lab.errors import MalformedTables


@dataclass(frozen=True)
class UplinkParams:
    noise_power: float = 1e-7  # mW
    mue_power: float = 5.0  # mW
    fue_power_levels: tuple[float, ...] = (0.0, 1.0)  # mW, low / high
    mue_fbs_gains: tuple[float, ...] = (0.038, 0.082, 0.071, 0.086)
    # fue_fbs_gains[i][k]: gain from FUE i to FBS k
    fue_fbs_gains: tuple[tuple[float, ...], ...] = (
        (0.44, 0.10, 0.02, 0.10),
        (0.07, 0.23, 0.03, 0.06),
        (0.10, 0.10, 0.25, 0.10),
        (0.10, 0.05, 0.09, 0.24),
    )
    bandwidth: float = 1.0  # MHz
    power_constraint: float = 0.75  # mW, per FUE
    # Not published with the scenario; symmetric sticky chain.
    mue_dtmc: tuple[tuple[float, ...], ...] = ((0.9, 0.1), (0.1, 0.9))

    def __post_init__(self):
        k = len(self.mue_fbs_gains)
        gains = np.asarray(self.fue_fbs_gains, dtype=float)
        dtmc = np.asarray(self.mue_dtmc, dtype=float)
        if gains.shape != (k, k):
            raise MalformedTables(f"FUE-FBS gain matrix must be {k}x{k}, got {gains.shape}")
        if np.any(gains < 0) or min(self.mue_fbs_gains) < 0:
            raise MalformedTables("Channel gains must be nonnegative")
        if min(self.fue_power_levels) < 0 or self.mue_power < 0 or self.noise_power <= 0:
            raise MalformedTables("Powers must be nonnegative and noise power positive")
        if dtmc.shape != (2, 2) or np.any(dtmc < 0) or not np.allclose(dtmc.sum(axis=1), 1.0, atol=1e-12):
            raise MalformedTables(f"MUE chain must be a 2x2 stochastic matrix, got {self.mue_dtmc}")
        if dtmc[0, 1] <= 0 or dtmc[1, 0] <= 0:
            raise MalformedTables("MUE chain must be irreducible")

    @property
    def num_agents(self) -> int:
        return len(self.mue_fbs_gains)


def uplink_utility(agent: int, mue_state: int, powers: tuple[float, ...], params: UplinkParams) -> float:
    """FUE agent's Shannon rate in Mbit/s."""
    gains = params.fue_fbs_gains
    interference = sum(powers[i] * gains[i][agent] for i in range(len(powers)) if i != agent)
    if mue_state == 1:
        interference += params.mue_fbs_gains[agent] * params.mue_power
    sinr = powers[agent] * gains[agent][agent] / (params.noise_power + interference)
    return float(params.bandwidth * np.log2(1.0 + sinr))


def uplink_cost(agent: int, powers: tuple[float, ...]) -> float:
    return float(powers[agent])


def mue_transition(state: int, dtmc, rng: np.random.Generator) -> int:
    row = np.asarray(dtmc, dtype=float)[state]
    cdf = np.cumsum(row)
    cdf[-1] = 1.0
    return int(np.searchsorted(cdf, rng.random(), side="right"))


def make_uplink_game(params: UplinkParams | None = None, discount: float = 0.9, name: str = "uplink-paper") -> GameSpec:
    params = params or UplinkParams()
    k = params.num_agents
    levels = params.fue_power_levels
    space = JointActionSpace((len(levels),) * k)
    utilities = np.zeros((k, 2, space.size))
    costs = np.zeros((k, 2, space.size))
    for joint in range(space.size):
        powers = tuple(levels[a] for a in space.unflatten(joint))
        for agent in range(k):
            for s in (0, 1):
                utilities[agent, s, joint] = uplink_utility(agent, s, powers, params)
                costs[agent, s, joint] = uplink_cost(agent, powers)
    dtmc = np.asarray(params.mue_dtmc, dtype=float)

    def transition(state: int, joint: int, rng: np.random.Generator) -> int:
        return mue_transition(state, dtmc, rng)

    def transition_probs(state: int, joint: int) -> np.ndarray:
        return dtmc[state].copy()

    return GameSpec(
        name=name,
        space=space,
        num_states=2,
        utilities=utilities,
        costs=costs,
        cost_bounds=np.full(k, params.power_constraint),
        transition_fn=transition,
        discount=discount,
        transition_probs_fn=transition_probs,
        utility_range=(0.0, float(utilities.max())),
        cost_range=(min(levels), max(levels)),
    )
