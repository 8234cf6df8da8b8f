"""Dense two-phase tableau simplex with Bland's rule, and the correlated-equilibrium LP.

Problems here have at most a few hundred columns, so the tableau is a plain
numpy array and every pivot is a rank-one update.
"""
from dataclasses import dataclass

import numpy as np

from cnrq_lab.core.game import JointActionSpace
from cnrq_lab.errors import Infeasible, Unbounded

TOLERANCE = 1e-10
FEASIBILITY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    objective: float
    pivots: int


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])


def _bland_primal(tableau: np.ndarray, basis: list[int], allowed: int, tol: float) -> int:
    """Pivot until no reduced cost among the first `allowed` columns is negative."""
    m = len(basis)
    pivots = 0
    while True:
        entering = np.flatnonzero(tableau[-1, :allowed] < -tol)
        if entering.size == 0:
            return pivots
        col = int(entering[0])
        column = tableau[:m, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            raise Unbounded(f"Objective unbounded along column {col}")
        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(tableau, row, col)
        basis[row] = col
        pivots += 1


def simplex_maximize(
    c: np.ndarray,
    a_ub: np.ndarray | None = None,
    b_ub: np.ndarray | None = None,
    a_eq: np.ndarray | None = None,
    b_eq: np.ndarray | None = None,
    tol: float = TOLERANCE,
) -> SimplexResult:
    """max c.x subject to a_ub x <= b_ub, a_eq x = b_eq, x >= 0."""
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    a_ub = np.zeros((0, n)) if a_ub is None else np.atleast_2d(np.asarray(a_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)
    a_eq = np.zeros((0, n)) if a_eq is None else np.atleast_2d(np.asarray(a_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
    m_ub, m_eq = a_ub.shape[0], a_eq.shape[0]
    m = m_ub + m_eq

    # Rows with a negative right-hand side are flipped; they and the equality
    # rows start from an artificial basic variable.
    flip_ub = b_ub < 0
    needs_artificial = np.concatenate([flip_ub, np.ones(m_eq, dtype=bool)])
    n_art = int(needs_artificial.sum())
    width = n + m_ub + n_art
    tableau = np.zeros((m + 1, width + 1))
    tableau[:m_ub, :n] = a_ub
    tableau[:m_ub, n:n + m_ub] = np.eye(m_ub)
    tableau[:m_ub, -1] = b_ub
    tableau[m_ub:m, :n] = a_eq
    tableau[m_ub:m, -1] = b_eq
    tableau[:m_ub][flip_ub] *= -1.0
    eq_flip = np.flatnonzero(b_eq < 0) + m_ub
    tableau[eq_flip] *= -1.0

    basis = [n + i for i in range(m_ub)] + [0] * m_eq
    art_col = n + m_ub
    for row in np.flatnonzero(needs_artificial):
        tableau[row, art_col] = 1.0
        basis[row] = art_col
        art_col += 1

    pivots = 0
    if n_art:
        tableau[-1, n + m_ub:width] = 1.0
        for row in np.flatnonzero(needs_artificial):
            tableau[-1] -= tableau[row]
        pivots += _bland_primal(tableau, basis, width, tol)
        if tableau[-1, -1] < -FEASIBILITY_TOLERANCE:
            raise Infeasible(f"Phase one ended with infeasibility {-tableau[-1, -1]:.3e}")

        # Drive artificial variables out of the basis or drop their redundant rows.
        keep = []
        for row in range(m):
            if basis[row] < n + m_ub:
                keep.append(row)
                continue
            candidates = np.flatnonzero(np.abs(tableau[row, :n + m_ub]) > tol)
            if candidates.size:
                _pivot(tableau, row, int(candidates[0]))
                basis[row] = int(candidates[0])
                pivots += 1
                keep.append(row)
        tableau = np.vstack([tableau[keep], tableau[-1:]])
        basis = [basis[row] for row in keep]
        tableau = np.delete(tableau, np.arange(n + m_ub, width), axis=1)

    tableau[-1] = 0.0
    tableau[-1, :n] = -c
    for row, col in enumerate(basis):
        if tableau[-1, col] != 0.0:
            tableau[-1] -= tableau[-1, col] * tableau[row]
    pivots += _bland_primal(tableau, basis, n + m_ub, tol)

    x = np.zeros(n + m_ub)
    for row, col in enumerate(basis):
        x[col] = tableau[row, -1]
    x = x[:n]
    return SimplexResult(x=x, objective=float(c @ x), pivots=pivots)


@dataclass(frozen=True)
class CEPolytopeLP:
    """Correlated-equilibrium polytope at one state with a linear objective.

    a_ub holds one row per (agent, recommended, alternative) pair; each row is
    scaled to unit max-norm, which leaves the feasible set unchanged.
    """

    objective: np.ndarray
    a_ub: np.ndarray
    space: JointActionSpace

    @classmethod
    def from_payoffs(cls, payoffs: np.ndarray, space: JointActionSpace, objective: np.ndarray | None = None) -> "CEPolytopeLP":
        payoffs = np.asarray(payoffs, dtype=float)
        objective = payoffs.sum(axis=0) if objective is None else np.asarray(objective, dtype=float)
        return cls(objective=objective, a_ub=ce_constraint_rows(payoffs, space), space=space)

    @property
    def constraint_count(self) -> int:
        """CE rows + nonnegativity rows + the simplex equality."""
        return self.a_ub.shape[0] + self.space.size + 1


def ce_constraint_rows(payoffs: np.ndarray, space: JointActionSpace, normalize: bool = True) -> np.ndarray:
    """Rows G with G x <= 0 iff x satisfies every CE inequality.

    Row (k, a, b) has coefficient payoffs[k, (b, a_-k)] - payoffs[k, (a, a_-k)]
    on joints whose k-th component is a.
    """
    rows = []
    for k, n_k in enumerate(space.action_counts):
        stride = space.strides[k]
        for a in range(n_k):
            joints = np.flatnonzero(space.profiles[:, k] == a)
            for b in range(n_k):
                if b == a:
                    continue
                row = np.zeros(space.size)
                row[joints] = payoffs[k, joints + (b - a) * stride] - payoffs[k, joints]
                if normalize:
                    scale = np.abs(row).max()
                    if scale > 0:
                        row /= scale
                rows.append(row)
    return np.array(rows).reshape(-1, space.size)


def lp_solve(lp: CEPolytopeLP) -> np.ndarray:
    """Optimal vertex of the CE polytope as a probability vector over joint actions."""
    n = lp.space.size
    result = simplex_maximize(
        lp.objective,
        a_ub=lp.a_ub,
        b_ub=np.zeros(lp.a_ub.shape[0]),
        a_eq=np.ones((1, n)),
        b_eq=np.ones(1),
    )
    x = np.clip(result.x, 0.0, None)
    return x / x.sum()


def utilitarian_ce(q_slices: np.ndarray, space: JointActionSpace) -> np.ndarray:
    """CE at one state maximising the sum of all agents' Q-values; q_slices is (num_agents, |A|)."""
    q_slices = np.asarray(q_slices, dtype=float)
    return lp_solve(CEPolytopeLP.from_payoffs(q_slices, space))
