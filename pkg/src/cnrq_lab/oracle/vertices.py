"""Brute-force vertex enumeration of the correlated-equilibrium polytope.

Every vertex of {x : G x <= 0, x >= 0, sum(x) = 1} is the unique solution of
the equality plus |A| - 1 tight inequalities. All such bases are tried in
batches; feasible solutions are deduplicated and sorted lexicographically.
"""
from itertools import combinations, islice
from math import comb

import numpy as np

from cnrq_lab.config.logging_config import configure_logging
from cnrq_lab.core.game import JointActionSpace
from cnrq_lab.errors import TooLarge
from cnrq_lab.learning.lp import ce_constraint_rows

logger = configure_logging(__name__)

MAX_JOINT = 16
MAX_BASES = 2_000_000
CHUNK = 25_000
FEASIBILITY_TOL = 1e-9
DET_TOL = 1e-10


def _dedupe(points: np.ndarray, tol: float) -> list[np.ndarray]:
    if not len(points):
        return []
    order = np.lexsort(points.T[::-1])
    kept: list[np.ndarray] = []
    for point in points[order]:
        if not any(np.abs(point - other).max() <= tol for other in kept):
            kept.append(point)
    return kept


def ce_vertex_enumerate(
    payoffs: np.ndarray,
    space: JointActionSpace,
    max_joint: int = MAX_JOINT,
    max_bases: int = MAX_BASES,
) -> list[np.ndarray]:
    """All vertices of the CE polytope of a normal-form game; payoffs is (num_agents, |A|)."""
    n = space.size
    if n > max_joint:
        raise TooLarge(f"Vertex enumeration supports at most {max_joint} joint actions, got {n}")
    payoffs = np.asarray(payoffs, dtype=float)
    inequalities = np.vstack([ce_constraint_rows(payoffs, space), -np.eye(n)])
    bases = comb(inequalities.shape[0], n - 1)
    if bases > max_bases:
        raise TooLarge(f"{bases} candidate bases exceed the cap of {max_bases}")
    logger.debug(f"Enumerating {bases} bases over {inequalities.shape[0]} inequalities")

    rhs = np.zeros(n)
    rhs[-1] = 1.0
    found = []
    candidates = combinations(range(inequalities.shape[0]), n - 1)
    while True:
        chunk = list(islice(candidates, CHUNK))
        if not chunk:
            break
        systems = np.empty((len(chunk), n, n))
        systems[:, : n - 1, :] = inequalities[np.array(chunk, dtype=int).reshape(len(chunk), n - 1)]
        systems[:, n - 1, :] = 1.0
        regular = np.abs(np.linalg.det(systems)) > DET_TOL
        if not regular.any():
            continue
        points = np.linalg.solve(systems[regular], np.broadcast_to(rhs, (int(regular.sum()), n))[..., None])[..., 0]
        feasible = (
            np.all(points @ inequalities.T <= FEASIBILITY_TOL, axis=1)
            & (np.abs(points.sum(axis=1) - 1.0) <= FEASIBILITY_TOL)
        )
        found.append(points[feasible])
    points = np.vstack(found) if found else np.empty((0, n))
    return _dedupe(np.clip(points, 0.0, None), FEASIBILITY_TOL)


def best_vertex_value(payoffs: np.ndarray, space: JointActionSpace, **kwargs) -> float:
    """Largest social value sum_k payoffs[k] @ x over enumerated vertices."""
    objective = np.asarray(payoffs, dtype=float).sum(axis=0)
    vertices = ce_vertex_enumerate(payoffs, space, **kwargs)
    return float(max(objective @ v for v in vertices))
