"""Dense two-phase primal simplex with Bland's rule.

Solves ``min c @ y`` subject to ``A_ub @ y <= b_ub``, ``A_eq @ y == b_eq`` and
``y >= 0``. The same code runs over float64 arrays or over object arrays of
:class:`fractions.Fraction`; in the latter case every step is exact and the
returned duals certify optimality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

FLOAT_TOL = 1e-9


@dataclass
class LinearProgram:
    c: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None = None
    value: object = None
    duals_ub: np.ndarray | None = None
    duals_eq: np.ndarray | None = None
    pivots: int = 0
    exact: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.status == OPTIMAL


def _as_array(a, exact: bool, ndim: int, shape=None) -> np.ndarray:
    if a is None:
        return np.zeros(shape, dtype=object if exact else float)
    if exact:
        arr = np.array(a, dtype=object)
        flat = [Fraction(v) for v in arr.ravel()]
        out = np.empty(arr.shape, dtype=object)
        out.ravel()[:] = flat if flat else []
        arr = out
    else:
        arr = np.asarray(a, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    return arr


def make_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, *, exact=False) -> LinearProgram:
    """Validate shapes and coerce inputs to one numeric mode."""
    c = _as_array(c, exact, 1)
    n = c.shape[0]
    A_ub = _as_array(A_ub, exact, 2, (0, n))
    A_eq = _as_array(A_eq, exact, 2, (0, n))
    b_ub = _as_array(b_ub, exact, 1, (A_ub.shape[0],))
    b_eq = _as_array(b_eq, exact, 1, (A_eq.shape[0],))
    if A_ub.shape[1] != n or A_eq.shape[1] != n:
        raise ValueError("constraint matrices must have one column per variable")
    if b_ub.shape[0] != A_ub.shape[0] or b_eq.shape[0] != A_eq.shape[0]:
        raise ValueError("right-hand side length does not match constraint rows")
    if not exact:
        for arr in (c, A_ub, b_ub, A_eq, b_eq):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data must be finite")
    return LinearProgram(c, A_ub, b_ub, A_eq, b_eq)


class _Tableau:
    """Row-major simplex tableau with an objective row kept in sync."""

    def __init__(self, T, basis, exact, tol):
        self.T = T
        self.basis = basis
        self.exact = exact
        self.tol = tol
        self.pivots = 0
        self.obj = None

    def set_costs(self, costs):
        cb = costs[self.basis]
        self.obj = costs - cb @ self.T
        self.obj[-1] = -(cb @ self.T[:, -1])

    def pivot(self, r, c):
        T = self.T
        prow = T[r] / T[r, c]
        col = T[:, c].copy()
        T -= np.outer(col, prow)
        T[r] = prow
        self.obj = self.obj - self.obj[c] * prow
        self.basis[r] = c
        self.pivots += 1

    def entering(self, allowed):
        tol = self.tol
        for j in allowed:
            if self.obj[j] < -tol:
                return j
        return None

    def leaving(self, c):
        T, tol = self.T, self.tol
        best = None
        best_ratio = None
        for i in range(T.shape[0]):
            a = T[i, c]
            if a > tol:
                ratio = T[i, -1] / a
                if best is None:
                    best, best_ratio = i, ratio
                    continue
                if self.exact:
                    better = ratio < best_ratio
                    tie = ratio == best_ratio
                else:
                    better = ratio < best_ratio - tol
                    tie = abs(ratio - best_ratio) <= tol
                if better or (tie and self.basis[i] < self.basis[best]):
                    best, best_ratio = i, ratio
        return best

    def run(self, allowed, max_pivots):
        while True:
            c = self.entering(allowed)
            if c is None:
                return OPTIMAL
            r = self.leaving(c)
            if r is None:
                return UNBOUNDED
            if self.pivots >= max_pivots:
                raise RuntimeError("simplex pivot limit exceeded (numerical cycling?)")
            self.pivot(r, c)


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, *, exact=False,
             tol=FLOAT_TOL, max_pivots=100_000) -> LpResult:
    """Minimize ``c @ y`` over ``{y >= 0 : A_ub y <= b_ub, A_eq y == b_eq}``.

    Returns an :class:`LpResult` whose ``status`` is ``"optimal"``,
    ``"infeasible"`` or ``"unbounded"``. In exact mode ``tol`` is ignored.
    """
    lp = c if isinstance(c, LinearProgram) else make_lp(c, A_ub, b_ub, A_eq, b_eq, exact=exact)
    exact = lp.c.dtype == object
    tol = 0 if exact else tol
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0

    n = lp.n_vars
    m_ub, m_eq = lp.A_ub.shape[0], lp.A_eq.shape[0]
    m = m_ub + m_eq
    dtype = object if exact else float

    # columns: [structural | slacks | artificials | rhs]
    n_cols = n + m_ub + m + 1
    T = np.empty((m, n_cols), dtype=dtype)
    T[...] = zero
    T[:m_ub, :n] = lp.A_ub
    T[m_ub:, :n] = lp.A_eq
    T[:m_ub, -1] = lp.b_ub
    T[m_ub:, -1] = lp.b_eq
    for i in range(m_ub):
        T[i, n + i] = one
    sign = np.ones(m, dtype=int)
    for i in range(m):
        if T[i, -1] < 0:
            T[i, :n + m_ub] = -T[i, :n + m_ub]
            T[i, -1] = -T[i, -1]
            sign[i] = -1
    art0 = n + m_ub
    basis = []
    id_col = []
    for i in range(m):
        if i < m_ub and sign[i] > 0:
            basis.append(n + i)
            id_col.append(n + i)
        else:
            T[i, art0 + i] = one
            basis.append(art0 + i)
            id_col.append(art0 + i)
    basis = np.array(basis, dtype=int)
    tab = _Tableau(T, basis, exact, tol)

    non_art = list(range(art0))
    if any(b >= art0 for b in basis):
        costs = np.empty(n_cols, dtype=dtype)
        costs[...] = zero
        costs[art0:art0 + m] = one
        tab.set_costs(costs)
        tab.run(range(art0), max_pivots)
        phase1 = -tab.obj[-1]
        if phase1 > (tol * max(1, m) if not exact else 0):
            return LpResult(INFEASIBLE, pivots=tab.pivots, exact=exact)
        # drive artificials out of the basis; a row with no admissible pivot is
        # redundant and keeps its artificial at level zero
        for i in range(tab.T.shape[0]):
            if tab.basis[i] >= art0:
                row = tab.T[i, :art0]
                cand = [j for j in non_art if abs(row[j]) > tol]
                if cand:
                    tab.pivot(i, cand[0])

    costs = np.empty(n_cols, dtype=dtype)
    costs[...] = zero
    costs[:n] = lp.c
    tab.set_costs(costs)
    status = tab.run(non_art, max_pivots)
    if status == UNBOUNDED:
        return LpResult(UNBOUNDED, pivots=tab.pivots, exact=exact)

    x = np.empty(n, dtype=dtype)
    x[...] = zero
    for i, b in enumerate(tab.basis):
        if b < n:
            x[b] = tab.T[i, -1]
    value = lp.c @ x if n else zero

    y = np.empty(m, dtype=dtype)
    y[...] = zero
    for r in range(m):
        y[r] = -tab.obj[id_col[r]] * sign[r]
    return LpResult(OPTIMAL, x=x, value=value, duals_ub=y[:m_ub], duals_eq=y[m_ub:],
                    pivots=tab.pivots, exact=exact)


def certify(lp: LinearProgram, res: LpResult) -> bool:
    """Exact strong-duality check: primal feasible, dual feasible, equal objectives."""
    if not res.success or not res.exact:
        return False
    x, u, v = res.x, res.duals_ub, res.duals_eq
    if any(xi < 0 for xi in x):
        return False
    if any(r > 0 for r in lp.A_ub @ x - lp.b_ub) if lp.A_ub.shape[0] else False:
        return False
    if any(r != 0 for r in lp.A_eq @ x - lp.b_eq) if lp.A_eq.shape[0] else False:
        return False
    if any(ui > 0 for ui in u):
        return False
    reduced = lp.c - (lp.A_ub.T @ u if len(u) else 0) - (lp.A_eq.T @ v if len(v) else 0)
    if any(r < 0 for r in np.atleast_1d(reduced)):
        return False
    dual_value = (lp.b_ub @ u if len(u) else 0) + (lp.b_eq @ v if len(v) else 0)
    return dual_value == res.value
