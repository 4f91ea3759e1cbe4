import math

import numpy as np
import pytest
from scipy import sparse

from microgrid.solvers import simplex


def test_solvers_solve_lp_should_reach_lower_bound_row():
    result = simplex.solve_lp([1.0], [[1.0]], [">="], [3.0], [0.0], [math.inf])

    assert result.status == simplex.OPTIMAL
    assert result.x.tolist() == pytest.approx([3.0])
    assert result.objective == pytest.approx(3.0)


def test_solvers_solve_lp_should_detect_infeasibility():
    result = simplex.solve_lp([1.0], [[1.0], [1.0]], ["<=", ">="], [2.0, 3.0],
                              [0.0], [math.inf])

    assert result.status == simplex.INFEASIBLE


def test_solvers_solve_lp_should_detect_unbounded_objective():
    result = simplex.solve_lp([-1.0], [[1.0]], [">="], [0.0], [0.0],
                              [math.inf])

    assert result.status == simplex.UNBOUNDED


def test_solvers_solve_lp_should_honor_equality_and_bounds():
    """
    Este teste verifica um LP com igualdade e limites superiores.

    Espere:
        * min x + 2y com x + y = 4, x <= 3: x = 3, y = 1, objetivo 5.
    """
    result = simplex.solve_lp([1.0, 2.0], [[1.0, 1.0]], ["="], [4.0],
                              [0.0, 0.0], [3.0, math.inf])

    assert result.status == simplex.OPTIMAL
    assert result.x.tolist() == pytest.approx([3.0, 1.0])
    assert result.objective == pytest.approx(5.0)


def test_solvers_solve_lp_should_reject_crossed_bounds():
    result = simplex.solve_lp([1.0], [[1.0]], ["<="], [5.0], [2.0], [1.0])

    assert result.status == simplex.INFEASIBLE


def _production_lp():
    return simplex.LinearProgram([-3.0, -2.0], [[1.0, 1.0], [1.0, 3.0]],
                                 ["<=", "<="], [4.0, 6.0])


def test_solvers_linear_program_should_warm_start_from_basis():
    """
    Este teste verifica a reotimização a partir da base ótima anterior
    depois de apertar um limite, como num nó filho do branch-and-bound.

    Espere:
        * Primeiro ótimo x = 3, y = 1 (objetivo −11).
        * Com x <= 2, o mesmo ótimo da resolução a frio: x = 2, y = 4/3.
    """
    lp = _production_lp()
    first = lp.solve([0.0, 0.0], [3.0, math.inf])

    warm = lp.solve([0.0, 0.0], [2.0, math.inf], basis=first.basis)
    cold = _production_lp().solve([0.0, 0.0], [2.0, math.inf])

    assert first.status == simplex.OPTIMAL
    assert first.objective == pytest.approx(-11.0)
    assert warm.status == cold.status == simplex.OPTIMAL
    assert warm.x.tolist() == pytest.approx([2.0, 4.0 / 3.0])
    assert warm.objective == pytest.approx(cold.objective)
    assert warm.basis is not None


def test_solvers_solve_lp_should_accept_sparse_matrix():
    A = np.array([[1.0, 1.0], [1.0, 3.0]])

    dense = simplex.solve_lp([-3.0, -2.0], A, ["<=", "<="], [4.0, 6.0],
                             [0.0, 0.0], [3.0, math.inf])
    compressed = simplex.solve_lp([-3.0, -2.0], sparse.csr_matrix(A),
                                  ["<=", "<="], [4.0, 6.0], [0.0, 0.0],
                                  [3.0, math.inf])

    assert compressed.status == simplex.OPTIMAL
    np.testing.assert_allclose(compressed.x, dense.x)
