import numpy as np
import pytest

from cnrq_lab.core.equilibrium import ce_residuals
from cnrq_lab.core.game import JointActionSpace
from cnrq_lab.envs.synthetic import PRISONERS_DILEMMA
from cnrq_lab.errors import Infeasible, Unbounded
from cnrq_lab.learning.lp import CEPolytopeLP, ce_constraint_rows, simplex_maximize, utilitarian_ce
from tests.conftest import COMMON_PAYOFF


def test_two_variable_lp():
    result = simplex_maximize([1.0, 1.0], a_ub=[[1.0, 2.0], [3.0, 1.0]], b_ub=[4.0, 6.0])
    assert result.objective == pytest.approx(2.8)
    np.testing.assert_allclose(result.x, [1.6, 1.2])


def test_equality_constraints():
    result = simplex_maximize([1.0, 0.0], a_eq=[[1.0, 1.0]], b_eq=[1.0])
    np.testing.assert_allclose(result.x, [1.0, 0.0])
    result = simplex_maximize([-1.0], a_eq=[[-1.0]], b_eq=[-2.0])
    assert result.x[0] == pytest.approx(2.0)


def test_negative_right_hand_side():
    # x >= 1 written as -x <= -1; minimise x.
    result = simplex_maximize([-1.0], a_ub=[[-1.0]], b_ub=[-1.0])
    assert result.x[0] == pytest.approx(1.0)


def test_infeasible():
    with pytest.raises(Infeasible):
        simplex_maximize([1.0], a_ub=[[1.0]], b_ub=[-1.0])


def test_unbounded():
    with pytest.raises(Unbounded):
        simplex_maximize([1.0], a_ub=[[-1.0]], b_ub=[1.0])


def test_beale_cycling_example_terminates():
    c = [0.75, -150.0, 0.02, -6.0]
    a_ub = [
        [0.25, -60.0, -0.04, 9.0],
        [0.5, -90.0, -0.02, 3.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
    result = simplex_maximize(c, a_ub=a_ub, b_ub=[0.0, 0.0, 1.0])
    assert result.objective == pytest.approx(0.05)


def test_chvatal_cycling_example_terminates():
    c = [10.0, -57.0, -9.0, -24.0]
    a_ub = [
        [0.5, -5.5, -2.5, 9.0],
        [0.5, -1.5, -0.5, 1.0],
        [1.0, 0.0, 0.0, 0.0],
    ]
    result = simplex_maximize(c, a_ub=a_ub, b_ub=[0.0, 0.0, 1.0])
    assert result.objective == pytest.approx(1.0)


def test_ce_rows_are_normalised(space_2x2):
    rows = ce_constraint_rows(PRISONERS_DILEMMA, space_2x2)
    assert rows.shape == (4, 4)
    np.testing.assert_allclose(np.abs(rows).max(axis=1), 1.0)


def test_constraint_count(space_2x2):
    lp = CEPolytopeLP.from_payoffs(PRISONERS_DILEMMA, space_2x2)
    assert lp.constraint_count == 4 + 4 + 1


def test_prisoners_dilemma_selects_mutual_defection(space_2x2):
    np.testing.assert_allclose(utilitarian_ce(PRISONERS_DILEMMA, space_2x2), [0.0, 0.0, 0.0, 1.0], atol=1e-12)


def test_common_payoff_selects_best_joint(space_2x2):
    np.testing.assert_allclose(utilitarian_ce(COMMON_PAYOFF, space_2x2), [1.0, 0.0, 0.0, 0.0], atol=1e-12)


def test_zero_payoffs_give_a_distribution(space_2x2):
    x = utilitarian_ce(np.zeros((2, 4)), space_2x2)
    assert np.all(x >= 0.0)
    assert x.sum() == pytest.approx(1.0)


def test_solutions_satisfy_ce_constraints(rng):
    for counts in [(2, 2), (3, 3), (2, 2, 2)]:
        space = JointActionSpace(counts)
        for _ in range(20):
            q = rng.uniform(-1.0, 1.0, size=(len(counts), space.size))
            x = utilitarian_ce(q, space)
            assert x.sum() == pytest.approx(1.0)
            residuals = ce_residuals(x[None, :], q[:, None, :], space)
            assert residuals.max_entry() <= 1e-8
