"""Exact Lemke solver for the LCP form of a polymatrix game.

The game is padded to a complete interaction graph (own-player blocks
included) and turned into strictly positive costs ``C = (max A + 1) - A``.
The equilibrium conditions then read

    w_x   =  C x - E^T lam  >= 0   complementary to x
    w_lam =  E x - 1        >= 0   complementary to lam

i.e. ``M = [[C, -E^T], [E, 0]]`` and ``q = (0, -1)``, where ``E`` stacks one
all-ones row per player. ``lam_i`` is player ``i``'s minimum cost, which is
positive, so every strategy block sums to exactly one. Lemke's method runs
on an integer tableau with fraction-free (Bareiss/Edmonds) pivoting, so
every entry stays an exact Python int throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator

from .cancel import as_token
from .game import PolymatrixGame, epsilon, fraction_array, is_pure
from .validation import check_game

SOLUTION = "solution"
SECONDARY_RAY = "secondary_ray"
PIVOT_LIMIT = "pivot_limit"
CANCELLED = "cancelled"


@dataclass(frozen=True)
class LcpInstance:
    """Find ``z >= 0`` with ``w = q + M z >= 0`` and ``z @ w == 0``."""

    q: np.ndarray
    M: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        n = self.q.shape[0]
        if self.M.shape != (n, n) or self.d.shape != (n,):
            raise ValueError(f"inconsistent LCP shapes: q {self.q.shape}, M {self.M.shape}, "
                             f"d {self.d.shape}")
        if any(v <= 0 for v in self.d):
            raise ValueError("covering vector must be strictly positive")

    @classmethod
    def from_arrays(cls, q, M, d=None):
        q = fraction_array(q)
        M = fraction_array(M)
        d = fraction_array([1] * q.shape[0] if d is None else d)
        return cls(q, M, d)

    @property
    def dimension(self) -> int:
        return self.q.shape[0]

    def is_solution(self, z) -> bool:
        w = self.q + self.M.dot(z)
        return all(v >= 0 for v in z) and all(v >= 0 for v in w) and z.dot(w) == 0


@dataclass(frozen=True)
class LcpMap:
    """How LCP variables map back to player strategies."""

    offsets: tuple
    n_players: int


@dataclass
class LcpResult:
    outcome: str
    z: np.ndarray | None = None
    pivots: int = 0
    stats: dict = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return self.outcome == SOLUTION


def polymatrix_to_lcp(game: PolymatrixGame):
    """Build the LCP whose complementary solutions are equilibria of ``game``.

    Returns ``(LcpInstance, LcpMap)``. The dimension is ``sum(m_i) + n``.
    """
    game = check_game(game)
    n = game.n_players
    off = game.offsets
    total = game.total_actions
    N = total + n
    A = game.block_matrix(exact=True)
    # cost form: C = (max + 1) - A on every block of the padded complete graph,
    # own-player blocks included; strictly positive and best responses intact
    top = max(A.ravel()) if total else Fraction(0)
    C = (top + 1) - A
    M = np.empty((N, N), dtype=object)
    M[...] = Fraction(0)
    M[:total, :total] = C
    for i in range(n):
        for s in range(off[i], off[i + 1]):
            M[s, total + i] = Fraction(-1)
            M[total + i, s] = Fraction(1)
    q = np.empty(N, dtype=object)
    q[:total] = Fraction(0)
    q[total:] = Fraction(-1)
    d = np.empty(N, dtype=object)
    d[...] = Fraction(1)
    return LcpInstance(q, M, d), LcpMap(tuple(int(o) for o in off), n)


def _common_denominator(*arrays) -> int:
    den = 1
    for arr in arrays:
        for v in arr.ravel():
            den = math.lcm(den, v.denominator)
    return den


class _IntegerTableau:
    """Columns: w_1..w_N, z_1..z_N, z0, rhs; all entries ints, common divisor ``det``."""

    def __init__(self, lcp: LcpInstance):
        N = lcp.dimension
        D = _common_denominator(lcp.q, lcp.M, lcp.d)
        T = np.empty((N, 2 * N + 2), dtype=object)
        T[...] = 0
        for i in range(N):
            T[i, i] = 1
            for j in range(N):
                T[i, N + j] = int(-lcp.M[i, j] * D)
            T[i, 2 * N] = int(-lcp.d[i] * D)
            T[i, 2 * N + 1] = int(lcp.q[i] * D)
        self.N = N
        self.T = T
        self.det = 1
        self.basis = list(range(N))
        self.original = T.copy()

    @property
    def rhs(self) -> int:
        return 2 * self.N + 1

    def pivot(self, r, c):
        T = self.T
        p = T[r, c]
        row = T[r].copy()
        T = (T * p - np.outer(T[:, c], row)) // self.det
        T[r] = row
        det = p
        if det < 0:
            T = -T
            det = -det
        self.T = T
        self.det = det

    def lex_less(self, i, k, c, col) -> int:
        """Sign of ``T[i, col]/T[i, c] - T[k, col]/T[k, c]`` (denominators positive)."""
        T = self.T
        diff = T[i, col] * T[k, c] - T[k, col] * T[i, c]
        return (diff > 0) - (diff < 0)

    def consistent(self) -> bool:
        N = self.N
        return bool(np.all(self.T[:, :N].dot(self.original) == self.T * 1))


def _complement(var, N):
    return var + N if var < N else var - N


def _lexmin_rows(tab, rows, c, prefer=None):
    ties = list(rows)
    for col in [tab.rhs] + list(range(tab.N)):
        if len(ties) == 1:
            break
        best = [ties[0]]
        for i in ties[1:]:
            s = tab.lex_less(i, best[0], c, col)
            if s < 0:
                best = [i]
            elif s == 0:
                best.append(i)
        ties = best
        if col == tab.rhs and prefer is not None and prefer in ties:
            return prefer
    return ties[0]


def lemke(lcp: LcpInstance, pivot_limit=None, cancel=None, timeout=None, debug=False) -> LcpResult:
    """Lemke's complementary pivoting with covering vector ``lcp.d``.

    Leaving rows are chosen by the lexicographic minimum ratio test, which
    rules out cycling; if the auxiliary variable ties for leaving it is
    preferred. ``cancel`` (a :class:`~polyeq.cancel.CancelToken`) is polled
    once per pivot.
    """
    if not isinstance(lcp, LcpInstance):
        raise ValueError("lemke expects an LcpInstance")
    token = as_token(cancel, timeout)
    N = lcp.dimension
    if all(v >= 0 for v in lcp.q):
        z = np.empty(N, dtype=object)
        z[...] = Fraction(0)
        return LcpResult(SOLUTION, z, 0)

    tab = _IntegerTableau(lcp)
    z0 = 2 * N
    seen = set()

    # z0 enters; the row with the lexicographically smallest (q_i, e_i) / d_i leaves
    T = tab.T
    r = 0
    for i in range(1, N):
        # compare (q_i, e_i)/d_i with (q_r, e_r)/d_r, with d = -T[:, z0] > 0
        for col in [tab.rhs] + list(range(N)):
            diff = T[i, col] * (-T[r, z0]) - T[r, col] * (-T[i, z0])
            if diff != 0:
                if diff < 0:
                    r = i
                break
    leaving = tab.basis[r]
    tab.pivot(r, z0)
    tab.basis[r] = z0
    pivots = 1
    entering = _complement(leaving, N)

    while True:
        if debug:
            _check_invariants(tab, seen, pivots)
        if pivot_limit is not None and pivots >= pivot_limit:
            return LcpResult(PIVOT_LIMIT, None, pivots)
        if token.cancelled:
            return LcpResult(CANCELLED, None, pivots)
        col = tab.T[:, entering]
        rows = [i for i in range(N) if col[i] > 0]
        if not rows:
            return LcpResult(SECONDARY_RAY, None, pivots)
        z0_row = tab.basis.index(z0)
        r = _lexmin_rows(tab, rows, entering, prefer=z0_row)
        leaving = tab.basis[r]
        tab.pivot(r, entering)
        tab.basis[r] = entering
        pivots += 1
        if leaving == z0:
            break
        entering = _complement(leaving, N)

    z = np.empty(N, dtype=object)
    z[...] = Fraction(0)
    for i, var in enumerate(tab.basis):
        if N <= var < 2 * N:
            z[var - N] = Fraction(tab.T[i, tab.rhs], tab.det)
    if not lcp.is_solution(z):
        raise RuntimeError("Lemke terminated with a vector that is not an LCP solution")
    return LcpResult(SOLUTION, z, pivots, {"det_bits": int(tab.det).bit_length()})


def _check_invariants(tab, seen, pivots):
    N = tab.N
    key = frozenset(tab.basis)
    if key in seen:
        raise RuntimeError("basis repeated during Lemke pivoting")
    seen.add(key)
    if not all(isinstance(v, int) for v in tab.T.ravel()):
        raise RuntimeError("non-integer tableau entry")
    nonbasic_pairs = sum(1 for i in range(N) if i not in key and i + N not in key)
    if nonbasic_pairs > 1:
        raise RuntimeError("more than one complementary pair is non-basic")
    if pivots % 100 == 1 and not tab.consistent():
        raise RuntimeError("tableau no longer equals det * B^-1 * original")


def extract_profile(lcp_map: LcpMap, z) -> list:
    """Split the ``x`` part of an LCP solution into per-player strategies."""
    off = lcp_map.offsets
    out = []
    for i in range(lcp_map.n_players):
        block = [Fraction(v) for v in z[off[i]:off[i + 1]]]
        total = sum(block)
        if total == 0:
            raise RuntimeError(f"LCP solution has an all-zero block for player {i}")
        out.append(fraction_array([v / total for v in block]))
    return out


def format_lcp(lcp: LcpInstance) -> str:
    """Exact text dump: ``lcp 1``, ``dimension N``, then ``q``, ``M`` (N rows) and ``d`` blocks."""
    from .game import format_number

    lines = ["lcp 1", f"dimension {lcp.dimension}", "q"]
    lines.append(" ".join(format_number(v) for v in lcp.q))
    lines.append("M")
    for row in lcp.M:
        lines.append(" ".join(format_number(v) for v in row))
    lines.append("d")
    lines.append(" ".join(format_number(v) for v in lcp.d))
    return "\n".join(lines) + "\n"


def solve_lemke(game: PolymatrixGame, pivot_limit=None, cancel=None, timeout=None, debug=False):
    """Reduce, pivot and extract. Returns ``(LcpResult, profile or None)``."""
    lcp, lmap = polymatrix_to_lcp(game)
    res = lemke(lcp, pivot_limit=pivot_limit, cancel=cancel, timeout=timeout, debug=debug)
    profile = extract_profile(lmap, res.z) if res.solved else None
    return res, profile


class LemkeSolver(BaseEstimator):
    """Exact equilibrium of a polymatrix game via Lemke's algorithm.

    Parameters
    ----------
    pivot_limit : int or None
        Stop with outcome ``"pivot_limit"`` after this many pivots.
    timeout : float or None
        Wall-clock budget in seconds, enforced once per pivot.
    debug : bool
        Check tableau invariants while pivoting (slow).

    Attributes
    ----------
    profile_ : list of arrays or None
        Exact mixed strategies, one per player, if a solution was found.
    epsilon_ : Fraction or None
        Regret of ``profile_``; always zero for a solution.
    outcome_, n_pivots_, lcp_dimension_, pure_
    """

    def __init__(self, pivot_limit=None, timeout=None, debug=False):
        self.pivot_limit = pivot_limit
        self.timeout = timeout
        self.debug = debug

    def fit(self, game, y=None, cancel=None):
        game = check_game(game)
        lcp, lmap = polymatrix_to_lcp(game)
        res = lemke(lcp, pivot_limit=self.pivot_limit, cancel=cancel, timeout=self.timeout,
                    debug=self.debug)
        self.lcp_dimension_ = lcp.dimension
        self.outcome_ = res.outcome
        self.n_pivots_ = res.pivots
        if res.solved:
            self.profile_ = extract_profile(lmap, res.z)
            self.epsilon_ = epsilon(game, self.profile_)
            self.pure_ = is_pure(self.profile_)
        else:
            self.profile_ = None
            self.epsilon_ = None
            self.pure_ = None
        return self
