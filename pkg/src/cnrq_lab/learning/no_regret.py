"""Regret-to-play machinery shared by CNRQ and normal-form regret matching.

Regrets become an action-transition matrix through the smooth max Y and the
inertia constant mu; the play distribution is an invariant measure of that
matrix, perturbed by a uniform tremble so it is unique.
"""
from dataclasses import dataclass

import numpy as np

from cnrq_lab.errors import InertiaTooSmall, SingularSystem


@dataclass(frozen=True)
class SmoothMaxParams:
    delta: float
    mu: float

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")


def smooth_max(x, delta: float):
    """C^1 surrogate for max(x, 0): exact outside (-delta, delta), quadratic bridge inside."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    x = np.asarray(x, dtype=float)
    bridge = (x + delta) ** 2 / (4.0 * delta)
    y = np.where(x >= delta, x, np.where(x <= -delta, 0.0, bridge))
    return float(y) if y.ndim == 0 else y


def lyapunov_value(regrets: np.ndarray, delta: float) -> float:
    """0.5 * sum of Y(R)^2 over off-diagonal entries of every (state, i, j) regret."""
    regrets = np.asarray(regrets, dtype=float)
    if regrets.size == 0:
        return 0.0
    n = regrets.shape[-1]
    off_diagonal = ~np.eye(n, dtype=bool)
    y = smooth_max(regrets, delta)
    return float(0.5 * np.sum(np.square(y)[..., off_diagonal]))


def transition_matrix(regret: np.ndarray, params: SmoothMaxParams) -> np.ndarray:
    """T[i, j] = Y(R[i, j]) / mu off the diagonal, rows completed to one on it."""
    regret = np.asarray(regret, dtype=float)
    n = regret.shape[0]
    t = np.asarray(smooth_max(regret, params.delta), dtype=float).reshape(n, n) / params.mu
    np.fill_diagonal(t, 0.0)
    leaving = t.sum(axis=1)
    if np.any(leaving >= 1.0):
        row = int(np.argmax(leaving))
        raise InertiaTooSmall(
            f"mu={params.mu:g} leaves no inertia on row {row} (off-diagonal mass {leaving[row]:.6g})"
        )
    t[np.diag_indices(n)] = 1.0 - leaving
    return t


def trembled(t: np.ndarray, epsilon: float) -> np.ndarray:
    n = t.shape[0]
    return (1.0 - epsilon) * t + epsilon / n


def stationary_distribution(t: np.ndarray, epsilon: float) -> np.ndarray:
    """Invariant p = p T~ of the trembled matrix T~ = (1 - eps) T + eps / n.

    Solves the balance equations with the last one replaced by sum(p) = 1.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"Tremble must lie in (0, 1], got {epsilon}")
    t_eps = trembled(np.asarray(t, dtype=float), epsilon)
    n = t_eps.shape[0]
    system = t_eps.T - np.eye(n)
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        p = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"Balance equations are singular for tremble {epsilon}") from exc
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def soften(p: np.ndarray, epsilon: float) -> np.ndarray:
    """(1 - eps) p + eps / n."""
    p = np.asarray(p, dtype=float)
    return (1.0 - epsilon) * p + epsilon / p.shape[0]


def sample_index(p: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    return int(np.searchsorted(cdf, rng.random(), side="right"))


def select_action(p_hat: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
    """Draw from the epsilon-soft mixture of p_hat and the uniform distribution."""
    return sample_index(soften(p_hat, epsilon), rng)
