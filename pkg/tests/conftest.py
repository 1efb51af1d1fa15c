from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from polyeq.game import PolymatrixGame


def frac_matrix(rows):
    return np.array([[Fraction(v) for v in r] for r in rows], dtype=object)


def bimatrix(A, B):
    """Two-player polymatrix game with row payoffs ``A`` and column payoffs ``B``."""
    A, B = frac_matrix(A), frac_matrix(B)
    return PolymatrixGame([A.shape[0], A.shape[1]], {(0, 1): A, (1, 0): B.T.copy()})


def random_game(rng, n, m, density=1.0, lo=-5, hi=5):
    counts = [int(m)] * n if np.isscalar(m) else list(m)
    payoffs = {}
    for u in range(n):
        for v in range(u + 1, n):
            if u + 1 == v or rng.random() < density:
                payoffs[(u, v)] = frac_matrix(rng.integers(lo, hi + 1, (counts[u], counts[v])))
                payoffs[(v, u)] = frac_matrix(rng.integers(lo, hi + 1, (counts[v], counts[u])))
    return PolymatrixGame(counts, payoffs)


@st.composite
def games(draw, max_players=4, max_actions=3):
    n = draw(st.integers(1, max_players))
    counts = draw(st.lists(st.integers(1, max_actions), min_size=n, max_size=n))
    payoffs = {}
    for u in range(n):
        for v in range(u + 1, n):
            if draw(st.booleans()):
                for a, b in ((u, v), (v, u)):
                    vals = draw(st.lists(st.integers(-9, 9), min_size=counts[a] * counts[b],
                                         max_size=counts[a] * counts[b]))
                    payoffs[(a, b)] = frac_matrix(np.reshape(vals, (counts[a], counts[b])))
    return PolymatrixGame(counts, payoffs)


@st.composite
def games_with_profile(draw, max_players=4, max_actions=3):
    g = draw(games(max_players, max_actions))
    profile = []
    for m in g.action_counts:
        w = draw(st.lists(st.integers(0, 20), min_size=m, max_size=m))
        if sum(w) == 0:
            w[0] = 1
        profile.append(np.array([Fraction(x, sum(w)) for x in w], dtype=object))
    return g, profile


def type_conditional_regrets(B, x):
    """Regret of every type computed straight from the Bayesian utilities."""
    R, C = len(B.row_types), len(B.col_types)
    out = []
    for side, own_n, opp_n in ((0, R, C), (1, C, R)):
        pr = B.prior(1 - side)
        for t in range(own_n):
            n_own = len((B.row_actions if side == 0 else B.col_actions)[t])
            values = []
            for a in range(n_own):
                total = Fraction(0)
                for s in range(opp_n):
                    y = x[R + s] if side == 0 else x[s]
                    for b, yb in enumerate(y):
                        u = B.utility(t, s, a, b) if side == 0 else B.utility(s, t, b, a)
                        total += pr[s] * yb * u[side]
                values.append(total)
            mine = x[t] if side == 0 else x[R + t]
            out.append(max(values) - sum(p * v for p, v in zip(mine, values)))
    return out


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def matching_pennies():
    return bimatrix([[1, 0], [0, 1]], [[0, 1], [1, 0]])
