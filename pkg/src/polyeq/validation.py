"""Input validation helpers shared by the solvers and evaluation functions."""

from __future__ import annotations

from fractions import Fraction
from numbers import Integral

import numpy as np

from .game import GameStructureError, PolymatrixGame

FLOAT_SUM_TOL = 1e-9


def check_game(game) -> PolymatrixGame:
    if not isinstance(game, PolymatrixGame):
        raise TypeError(f"expected a PolymatrixGame, got {type(game).__name__}")
    return game


def _exact_entries(v) -> bool:
    return all(isinstance(e, (Fraction, Integral)) for e in v)


def check_profile(game: PolymatrixGame, x, tol=FLOAT_SUM_TOL) -> list:
    """Return ``x`` as a list of per-player arrays, checking shape and simplex membership.

    Vectors made only of ints/Fractions become exact object arrays; anything
    else becomes float64 and is checked to tolerance ``tol``.
    """
    if len(x) != game.n_players:
        raise GameStructureError(f"profile has {len(x)} strategies for {game.n_players} players")
    raw = [np.asarray(v, dtype=object).ravel() if not isinstance(v, np.ndarray) or v.dtype == object
           else v.ravel() for v in x]
    exact = all(v.dtype == object and _exact_entries(v) for v in raw)
    out = []
    for i, (v, m) in enumerate(zip(raw, game.action_counts)):
        if v.shape != (m,):
            raise GameStructureError(f"strategy {i} has length {v.shape[0]}, expected {m}")
        if exact:
            if not (len(v) and isinstance(v[0], Fraction) and _all_fraction(v)):
                v = np.array([Fraction(e) for e in v], dtype=object)
            if any(e < 0 for e in v) or sum(v) != 1:
                raise GameStructureError(f"strategy {i} is not a probability vector")
        else:
            v = np.asarray(v, dtype=float)
            if np.any(v < -tol) or abs(v.sum() - 1.0) > tol:
                raise GameStructureError(f"strategy {i} is not a probability vector")
        out.append(v)
    return out


def _all_fraction(v) -> bool:
    return all(isinstance(e, Fraction) for e in v)


def check_positive(name, value):
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value
