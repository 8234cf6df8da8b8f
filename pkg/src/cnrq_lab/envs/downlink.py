"""Downlink power control: femto base stations (FBSs) interfere with a macro user.

State is the macro base station's (MBS) buffer length in packets. FBS power
choices lower the MBS-to-MUE rate, which drains the buffer more slowly,
while Poisson traffic keeps arriving. Every FBS is charged the buffer
length against a common bound.
"""
from dataclasses import dataclass
from math import floor

import numpy as np
from scipy.stats import poisson

from cnrq_lab.core.game import GameSpec, JointActionSpace
from cnrq_lab.errors import MalformedTables


@dataclass(frozen=True)
class DownlinkParams:
    noise_power: float = 1e-7  # mW
    mbs_power: float = 500.0  # mW
    fbs_power_levels: tuple[float, ...] = (0.0, 10.0, 100.0)  # mW
    mbs_fue_gains: tuple[float, ...] = (0.003, 0.005, 0.008, 0.002)
    fbs_mue_gains: tuple[float, ...] = (0.055, 0.051, 0.035, 0.012)
    # Not published with the scenario.
    mbs_mue_gain: float = 0.01
    # fbs_fue_gains[i][k]: gain from FBS i to FUE k
    fbs_fue_gains: tuple[tuple[float, ...], ...] = (
        (0.68, 0.09, 0.03, 0.04),
        (0.07, 0.82, 0.04, 0.04),
        (0.01, 0.04, 0.16, 0.03),
        (0.03, 0.08, 0.01, 0.29),
    )
    slot: float = 1.0  # ms
    arrival_rate: float = 5.5  # packets per ms
    packet_bits: int = 2048
    buffer_cap: int = 20
    buffer_constraint: float = 10.0  # packets
    bandwidth: float = 1.0  # MHz

    def __post_init__(self):
        k = len(self.mbs_fue_gains)
        gains = np.asarray(self.fbs_fue_gains, dtype=float)
        if gains.shape != (k, k) or len(self.fbs_mue_gains) != k:
            raise MalformedTables(f"Gain tables must describe {k} FBSs consistently")
        if np.any(gains < 0) or min(self.mbs_fue_gains) < 0 or min(self.fbs_mue_gains) < 0 or self.mbs_mue_gain < 0:
            raise MalformedTables("Channel gains must be nonnegative")
        if self.buffer_cap < self.buffer_constraint:
            raise MalformedTables(
                f"Buffer cap {self.buffer_cap} must be at least the buffer constraint {self.buffer_constraint}"
            )
        if self.arrival_rate < 0 or self.slot <= 0 or self.packet_bits <= 0 or self.noise_power <= 0:
            raise MalformedTables("Arrival rate, slot, packet size and noise power must be positive")

    @property
    def num_agents(self) -> int:
        return len(self.mbs_fue_gains)

    @property
    def num_states(self) -> int:
        return int(self.buffer_cap) + 1


def downlink_mbs_rate(powers: tuple[float, ...], params: DownlinkParams) -> float:
    """MBS-to-MUE Shannon rate in Mbit/s."""
    interference = sum(a * g for a, g in zip(powers, params.fbs_mue_gains))
    sinr = params.mbs_power * params.mbs_mue_gain / (params.noise_power + interference)
    return float(params.bandwidth * np.log2(1.0 + sinr))


def downlink_utility(agent: int, powers: tuple[float, ...], params: DownlinkParams) -> float:
    """FBS agent's rate to its FUE in Mbit/s."""
    gains = params.fbs_fue_gains
    interference = params.mbs_fue_gains[agent] * params.mbs_power
    interference += sum(powers[i] * gains[i][agent] for i in range(len(powers)) if i != agent)
    sinr = powers[agent] * gains[agent][agent] / (params.noise_power + interference)
    return float(params.bandwidth * np.log2(1.0 + sinr))


def downlink_cost(buffer_length: int, params: DownlinkParams) -> float:
    return float(buffer_length)


def service_packets(mbs_rate: float, params: DownlinkParams) -> float:
    """Packets served in one slot: Mbit/s is 1e3 bit/ms."""
    return params.slot * mbs_rate * 1e3 / params.packet_bits


def buffer_step(
    buffer_length: float,
    mbs_rate: float,
    arrivals: int,
    params: DownlinkParams,
    whole_packets: bool = False,
) -> float:
    """min((b - served)^+ + arrivals, N_B); whole_packets serves only complete packets."""
    served = service_packets(mbs_rate, params)
    if whole_packets:
        served = floor(served)
    return min(max(buffer_length - served, 0) + arrivals, params.buffer_cap)


def poisson_arrivals(rate: float, tau: float, rng: np.random.Generator) -> int:
    return int(rng.poisson(rate * tau))


def buffer_transition_probs(buffer_length: int, mbs_rate: float, params: DownlinkParams) -> np.ndarray:
    """Exact next-buffer distribution; arrivals beyond the cap collapse onto N_B."""
    cap = int(params.buffer_cap)
    base = int(max(buffer_length - floor(service_packets(mbs_rate, params)), 0))
    mean = params.arrival_rate * params.slot
    probs = np.zeros(cap + 1)
    room = cap - base
    probs[base:cap] = poisson.pmf(np.arange(room), mean)
    probs[cap] = poisson.sf(room - 1, mean)
    return probs


def make_downlink_game(params: DownlinkParams | None = None, discount: float = 0.9, name: str = "downlink-paper") -> GameSpec:
    params = params or DownlinkParams()
    k = params.num_agents
    levels = params.fbs_power_levels
    space = JointActionSpace((len(levels),) * k)
    num_states = params.num_states
    rates = np.zeros(space.size)
    stage_utility = np.zeros((k, space.size))
    for joint in range(space.size):
        powers = tuple(levels[a] for a in space.unflatten(joint))
        rates[joint] = downlink_mbs_rate(powers, params)
        for agent in range(k):
            stage_utility[agent, joint] = downlink_utility(agent, powers, params)
    utilities = np.repeat(stage_utility[:, None, :], num_states, axis=1)
    buffer_cost = np.array([downlink_cost(b, params) for b in range(num_states)])
    costs = np.broadcast_to(buffer_cost[None, :, None], (k, num_states, space.size)).copy()

    def transition(state: int, joint: int, rng: np.random.Generator) -> int:
        arrivals = poisson_arrivals(params.arrival_rate, params.slot, rng)
        return int(buffer_step(state, rates[joint], arrivals, params, whole_packets=True))

    def transition_probs(state: int, joint: int) -> np.ndarray:
        return buffer_transition_probs(state, rates[joint], params)

    return GameSpec(
        name=name,
        space=space,
        num_states=num_states,
        utilities=utilities,
        costs=costs,
        cost_bounds=np.full(k, float(params.buffer_constraint)),
        transition_fn=transition,
        discount=discount,
        transition_probs_fn=transition_probs,
        utility_range=(0.0, float(utilities.max())),
        cost_range=(0.0, float(params.buffer_cap)),
    )
