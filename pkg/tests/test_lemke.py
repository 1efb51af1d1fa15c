from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from polyeq.cancel import CancelToken
from polyeq.game import PolymatrixGame, epsilon, is_pure
from polyeq.lemke import (CANCELLED, PIVOT_LIMIT, SOLUTION, LcpInstance, LemkeSolver,
                          extract_profile, format_lcp, lemke, polymatrix_to_lcp, solve_lemke)
from conftest import bimatrix, frac_matrix, games, random_game

F = Fraction


def test_nonnegative_q_needs_no_pivots():
    res = lemke(LcpInstance.from_arrays([1, 1], [[1, 0], [0, 1]]))
    assert res.outcome == SOLUTION and res.pivots == 0
    assert list(res.z) == [0, 0]


def test_identity_with_negative_q():
    lcp = LcpInstance.from_arrays([-1, -1], [[1, 0], [0, 1]], [1, 1])
    res = lemke(lcp)
    assert res.solved and list(res.z) == [1, 1]
    assert lcp.is_solution(res.z)


def test_rejects_bad_covering_vector():
    with pytest.raises(ValueError):
        LcpInstance.from_arrays([-1], [[1]], [0])


def test_lcp_dimension_formula():
    g = PolymatrixGame([8] * 20, {})
    lcp, _ = polymatrix_to_lcp(g)
    assert lcp.dimension == 180
    assert lcp.M.size == 32400


def test_single_player_single_action():
    g = PolymatrixGame([1], {})
    lcp, lmap = polymatrix_to_lcp(g)
    assert lcp.dimension == 2
    res, x = solve_lemke(g)
    assert [list(v) for v in x] == [[1]]


def test_one_action_players_get_all_ones():
    g = random_game(np.random.default_rng(0), 3, [1, 1, 1])
    _, x = solve_lemke(g)
    assert [list(v) for v in x] == [[1], [1], [1]]


def test_matching_pennies_uniform(matching_pennies):
    res, x = solve_lemke(matching_pennies, debug=True)
    assert [list(v) for v in x] == [[F(1, 2)] * 2] * 2


def test_random_three_player_exact():
    g = random_game(np.random.default_rng(11), 3, 2)
    res, x = solve_lemke(g, debug=True)
    assert res.solved and epsilon(g, x) == 0


@given(games(max_players=4, max_actions=3))
@settings(max_examples=60, deadline=None)
def test_every_solution_is_exact_equilibrium(g):
    res, x = solve_lemke(g, debug=True)
    assert res.solved
    assert epsilon(g, x) == 0
    assert all(sum(v) == 1 for v in x)


def test_payoff_shift_keeps_equilibrium():
    rng = np.random.default_rng(5)
    g = random_game(rng, 3, 3)
    shifted = {k: v + (7 if k[0] == 1 else 0) for k, v in g.payoffs.items()}
    g2 = PolymatrixGame(g.action_counts, shifted)
    _, x = solve_lemke(g)
    _, y = solve_lemke(g2)
    assert epsilon(g2, x) == 0 and epsilon(g, y) == 0


def test_pure_iff_unit_blocks():
    g = bimatrix([[2, 0], [0, 1]], [[2, 0], [0, 1]])
    est = LemkeSolver().fit(g)
    assert est.pure_ == is_pure(est.profile_)
    assert est.epsilon_ == 0


def test_extract_rejects_zero_block():
    g = bimatrix([[1]], [[1]])
    lcp, lmap = polymatrix_to_lcp(g)
    with pytest.raises(Exception):
        extract_profile(lmap, [F(0)] * lcp.dimension)


def test_pivot_limit_and_cancel():
    g = random_game(np.random.default_rng(2), 5, 4)
    est = LemkeSolver(pivot_limit=1).fit(g)
    assert est.outcome_ == PIVOT_LIMIT and est.profile_ is None
    token = CancelToken()
    token.cancel()
    assert LemkeSolver().fit(g, cancel=token).outcome_ == CANCELLED


def test_format_lcp_block_layout(matching_pennies):
    lcp, _ = polymatrix_to_lcp(matching_pennies)
    lines = format_lcp(lcp).splitlines()
    assert lines[:3] == ["lcp 1", "dimension 6", "q"]
    assert lines[4] == "M" and lines[11] == "d"
    assert len(lines) == 13


def test_estimator_params_round_trip():
    est = LemkeSolver(pivot_limit=10, timeout=2.0)
    assert est.get_params() == {"pivot_limit": 10, "timeout": 2.0, "debug": False}
    assert est.set_params(debug=True).debug
