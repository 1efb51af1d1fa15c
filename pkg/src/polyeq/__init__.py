"""Exact and approximate Nash equilibria of polymatrix games."""

from .game import (
    GameFormatError,
    GameStructureError,
    PolymatrixGame,
    deserialize,
    enumerate_equilibrium_small,
    epsilon,
    is_pure,
    load_game,
    normalize_game,
    payoff_vector,
    regret,
    save_game,
    serialize,
)
from .descent import DescentSolver
from .lemke import LemkeSolver

__version__ = "0.1.0"
