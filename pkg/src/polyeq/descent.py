"""DESCENT: steepest descent on the maximum-regret function with line search.

The regret of player ``i`` at profile ``x`` is ``f_i(x) = max(p_i) - x_i @ p_i``
and ``f(x) = max_i f_i(x)``. Each iteration solves an LP for the direction
``x' - x`` that minimizes the worst one-sided directional derivative over
the (near-)tight players, then moves along it by the best step on a grid.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator

from . import lp
from .cancel import as_token
from .game import PolymatrixGame, epsilon, is_pure, normalize_game, profile_to_exact
from .validation import check_game, check_profile

STATIONARY = "stationary"
ZERO_REGRET = "zero_regret"
MAX_ITERS = "max_iters"
TIMEOUT = "timeout"
NO_PROGRESS = "no_progress"

PBR_TOL = 1e-12


@dataclass
class DescentConfig:
    delta: float = 0.1
    line_search_points: int = 201
    line_search: bool = True
    tight_tolerance: float | None = None
    stationarity: float | None = None
    max_iters: int = 100_000
    timeout: float | None = None
    random_start: bool = False
    seed: int | None = None

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.line_search_points < 2:
            raise ValueError("line search needs at least 2 points")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        if self.timeout is not None and self.timeout <= 0:
            raise ValueError("timeout must be positive")

    @property
    def tight_tol(self) -> float:
        if self.tight_tolerance is not None:
            return self.tight_tolerance
        return max(1e-9, self.delta / 10)

    @property
    def stationarity_tol(self) -> float:
        return self.delta / 2 if self.stationarity is None else self.stationarity

    @property
    def fixed_step(self) -> float:
        return self.delta / (self.delta + 2)


@dataclass
class IterationRecord:
    f: float
    alpha: float
    gamma: float
    elapsed: float


@dataclass
class DescentTrace:
    f0: float
    records: list = field(default_factory=list)
    reason: str = ""
    profile: list | None = None
    epsilon: Fraction | None = None

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def f_values(self) -> list:
        return [self.f0] + [r.f for r in self.records]


class _Landscape:
    """Float64 evaluation of payoffs and regrets on flat (concatenated) profiles."""

    def __init__(self, game: PolymatrixGame):
        self.game = game
        self.B = game.float_block
        self.off = game.offsets
        self.starts = self.off[:-1]

    def flat(self, x) -> np.ndarray:
        return np.concatenate([np.asarray(v, dtype=float) for v in x])

    def split(self, X) -> list:
        return [X[self.off[i]:self.off[i + 1]].copy() for i in range(self.game.n_players)]

    def regrets(self, X, P=None) -> np.ndarray:
        if P is None:
            P = self.B @ X
        best = np.maximum.reduceat(P, self.starts, axis=-1)
        got = np.add.reduceat(X * P, self.starts, axis=-1)
        return best - got

    def f_along(self, X, D, alphas) -> np.ndarray:
        """``f(X + a D)`` for every ``a`` in ``alphas``, vectorized."""
        P0 = self.B @ X
        PD = self.B @ D
        Xa = X[None, :] + alphas[:, None] * D[None, :]
        Pa = P0[None, :] + alphas[:, None] * PD[None, :]
        return self.regrets(Xa, Pa).max(axis=1)


def _float_profile(game, x):
    return [np.asarray(v, dtype=float) for v in check_profile(game, x)]


def tight_set(game: PolymatrixGame, x, tol) -> list:
    """Players whose regret is within ``tol`` of the maximum regret."""
    land = _Landscape(game)
    r = land.regrets(land.flat(_float_profile(game, x)))
    top = r.max()
    return [i for i in range(game.n_players) if r[i] >= top - tol]


def _direction(land: _Landscape, X, tight, pbr_tol=None):
    game = land.game
    off = land.off
    N = game.total_actions
    n = game.n_players
    P = land.B @ X
    n_vars = N + 1  # x' then t, where gamma = -t
    A_ub, b_ub = [], []
    for i in tight:
        lo, hi = off[i], off[i + 1]
        p_i = P[lo:hi]
        x_i = X[lo:hi]
        top = p_i.max()
        base = -top + 2 * float(x_i @ p_i)
        rows_i = land.B[lo:hi]
        xrow = x_i @ rows_i
        for s in np.flatnonzero(p_i >= top - (PBR_TOL if pbr_tol is None else pbr_tol)):
            coef = np.zeros(n_vars)
            coef[:N] = rows_i[s] - xrow
            coef[lo:hi] -= p_i
            coef[N] = 1.0
            A_ub.append(coef)
            b_ub.append(-base)
    A_eq = np.zeros((n, n_vars))
    for i in range(n):
        A_eq[i, off[i]:off[i + 1]] = 1.0
    c = np.zeros(n_vars)
    c[N] = -1.0
    res = lp.solve_lp(c, np.array(A_ub), np.array(b_ub), A_eq, np.ones(n))
    if not res.success:
        raise RuntimeError(f"direction LP returned {res.status}; this indicates a bug")
    Xp = np.clip(res.x[:N], 0.0, None)
    for i in range(n):
        Xp[off[i]:off[i + 1]] /= Xp[off[i]:off[i + 1]].sum()
    return Xp, -float(res.x[N])


def direction_lp(game: PolymatrixGame, x, tight):
    """Steepest-descent target ``x'`` and the worst directional derivative ``gamma*``.

    Minimizes ``gamma`` subject to, for each tight player ``i`` and each pure
    best response ``z`` of ``i``,
    ``z @ dp_i - (x'_i - x_i) @ p_i - x_i @ dp_i <= gamma`` where
    ``dp_i = p_i(x') - p_i(x)``. Returns ``(x' as a list, gamma*)``; ``gamma* <= 0``.
    """
    if not tight:
        raise ValueError("tight set must be non-empty")
    land = _Landscape(game)
    X = land.flat(_float_profile(game, x))
    Xp, gamma = _direction(land, X, list(tight))
    return land.split(Xp), gamma


def _alpha_grid(points, delta):
    grid = np.linspace(0.0, 1.0, points)
    return np.unique(np.append(grid, delta / (delta + 2)))


def line_search(game: PolymatrixGame, x, x_target, points, delta) -> float:
    """Best ``alpha`` on the equally spaced grid plus ``delta / (delta + 2)``.

    Ties go to the smallest ``alpha``; ``alpha = 0`` is always a candidate.
    """
    if points < 2:
        raise ValueError("line search needs at least 2 points")
    land = _Landscape(game)
    X = land.flat(_float_profile(game, x))
    D = land.flat(_float_profile(game, x_target)) - X
    alphas = _alpha_grid(points, delta)
    return float(alphas[int(np.argmin(land.f_along(X, D, alphas)))])


def start_profile(game: PolymatrixGame, cfg: DescentConfig) -> list:
    if not cfg.random_start:
        return [np.full(m, 1.0 / m) for m in game.action_counts]
    rng = np.random.default_rng(cfg.seed)
    return [rng.dirichlet(np.ones(m)) for m in game.action_counts]


def descend(game: PolymatrixGame, cfg: DescentConfig | None = None, start=None, cancel=None):
    """Run DESCENT on a normalized game.

    Returns ``(profile, eps, trace)``. ``profile`` is the final float profile
    and ``eps`` its exact regret after rounding onto a 1e-12 lattice.
    Termination reasons: ``stationary`` (``gamma* >= -stationarity``),
    ``zero_regret``, ``no_progress`` (no grid step improves), ``max_iters``
    and ``timeout``.
    """
    cfg = cfg or DescentConfig()
    game = check_game(game)
    token = as_token(cancel, cfg.timeout)
    land = _Landscape(game)
    x0 = start if start is not None else start_profile(game, cfg)
    X = land.flat(_float_profile(game, x0))
    alphas = _alpha_grid(cfg.line_search_points, cfg.delta) if cfg.line_search \
        else np.array([cfg.fixed_step])
    t0 = time.perf_counter()
    r = land.regrets(X)
    f = float(r.max())
    trace = DescentTrace(f0=f)
    while True:
        if f <= 0:
            trace.reason = ZERO_REGRET
            break
        if trace.iterations >= cfg.max_iters:
            trace.reason = MAX_ITERS
            break
        if token.cancelled:
            trace.reason = TIMEOUT
            break
        tight = [i for i in range(game.n_players) if r[i] >= f - cfg.tight_tol]
        Xp, gamma = _direction(land, X, tight)
        if gamma >= -cfg.stationarity_tol:
            trace.reason = STATIONARY
            break
        # a kink just outside the linearized sets can block every grid step;
        # widen the sets and retry before declaring a stall
        widen = cfg.tight_tol
        pbr = PBR_TOL
        while True:
            D = Xp - X
            values = land.f_along(X, D, alphas)
            k = int(np.argmin(values))
            alpha = float(alphas[k])
            if alpha > 0.0 and values[k] < f:
                break
            if widen >= f and pbr >= 1.0:
                alpha = 0.0
                break
            widen, pbr = widen * 4, max(pbr, cfg.tight_tol) * 4
            tight = [i for i in range(game.n_players) if r[i] >= f - widen]
            Xp, g2 = _direction(land, X, tight, pbr)
            if g2 >= 0:
                alpha = 0.0
                break
        if alpha == 0.0:
            trace.reason = NO_PROGRESS
            break
        X = X + alpha * D
        r = land.regrets(X)
        f = float(r.max())
        trace.records.append(IterationRecord(f, alpha, gamma, time.perf_counter() - t0))
    profile = land.split(X)
    exact = profile_to_exact(profile)
    eps = epsilon(game, exact)
    trace.profile = profile
    trace.epsilon = eps
    return profile, eps, trace


class DescentSolver(BaseEstimator):
    """Approximate equilibrium of a polymatrix game via DESCENT.

    The game is normalized to payoffs in [0, 1] before descending (unless
    ``normalize=False``), and ``epsilon_`` is measured on that normalized
    game, exactly.
    """

    def __init__(self, delta=0.1, line_search_points=201, line_search=True, max_iter=100_000,
                 timeout=None, random_start=False, seed=None, normalize=True,
                 tight_tolerance=None, stationarity=None):
        self.delta = delta
        self.line_search_points = line_search_points
        self.line_search = line_search
        self.max_iter = max_iter
        self.timeout = timeout
        self.random_start = random_start
        self.seed = seed
        self.normalize = normalize
        self.tight_tolerance = tight_tolerance
        self.stationarity = stationarity

    def _config(self) -> DescentConfig:
        return DescentConfig(delta=self.delta, line_search_points=self.line_search_points,
                             line_search=self.line_search, tight_tolerance=self.tight_tolerance,
                             stationarity=self.stationarity, max_iters=self.max_iter,
                             timeout=self.timeout, random_start=self.random_start,
                             seed=self.seed)

    def fit(self, game, y=None, cancel=None, start=None):
        game = check_game(game)
        target = normalize_game(game) if self.normalize else game
        profile, eps, trace = descend(target, self._config(), start=start, cancel=cancel)
        self.game_ = target
        self.profile_ = profile
        self.exact_profile_ = profile_to_exact(profile)
        self.epsilon_ = eps
        self.trace_ = trace
        self.n_iter_ = trace.iterations
        self.termination_ = trace.reason
        self.pure_ = is_pure(profile)
        return self
