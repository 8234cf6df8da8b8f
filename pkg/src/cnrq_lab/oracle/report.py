import numpy as np

from cnrq_lab.config.logging_config import configure_logging
from cnrq_lab.core.game import GameSpec, JointPolicy
from cnrq_lab.errors import TooLarge
from cnrq_lab.learning.lp import utilitarian_ce
from cnrq_lab.oracle.exact import ExplicitModel, exact_policy_evaluation
from cnrq_lab.oracle.vertices import MAX_JOINT, best_vertex_value

logger = configure_logging(__name__)


def oracle_report(game: GameSpec, lambdas: np.ndarray | None = None) -> dict:
    """Exact Q-values of the uniform joint policy and the CE selected from them at every state.

    Returns plain Python types so the report can be dumped as YAML.
    """
    lambdas = np.zeros(game.num_agents) if lambdas is None else np.asarray(lambdas, dtype=float)
    model = ExplicitModel.from_game(game, lambdas)
    policy = JointPolicy.uniform(game.num_states, game.num_joint)
    values, q = [], []
    for agent in range(game.num_agents):
        agent_values, agent_q = exact_policy_evaluation(model, policy, agent)
        values.append(agent_values)
        q.append(agent_q)
    q_tables = np.stack(q)

    states = []
    for s in range(game.num_states):
        slices = q_tables[:, s, :]
        ce = utilitarian_ce(slices, game.space)
        lp_value = float(slices.sum(axis=0) @ ce)
        entry = {
            "state": s,
            "utilitarian_ce": [round(float(x), 12) for x in ce],
            "lp_value": lp_value,
            "vertex_value": None,
            "gap": None,
        }
        if game.num_joint <= MAX_JOINT:
            try:
                vertex_value = best_vertex_value(slices, game.space)
            except TooLarge as exc:
                logger.info(f"Skipping vertex check at state {s}: {exc}")
            else:
                entry["vertex_value"] = vertex_value
                entry["gap"] = vertex_value - lp_value
        states.append(entry)

    return {
        "game": game.name,
        "discount": float(game.discount),
        "lambdas": [float(x) for x in lambdas],
        "values": [[float(v) for v in agent_values] for agent_values in values],
        "q_tables": q_tables.tolist(),
        "states": states,
    }
