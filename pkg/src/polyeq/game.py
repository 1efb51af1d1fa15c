"""Polymatrix games: representation, payoffs, regret, normalization and I/O."""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import cached_property

import numpy as np


class GameStructureError(ValueError):
    """A game or profile violates a structural invariant."""


class GameFormatError(ValueError):
    """Malformed game file text."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(where + message)


def to_fraction(v) -> Fraction:
    """Exact rational for ints, Fractions, decimal strings and floats."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v.strip())
    return Fraction(float(v))


def fraction_array(values, shape=None) -> np.ndarray:
    """Object array of Fractions from any nested sequence or array."""
    arr = np.array(values, dtype=object)
    if shape is not None:
        arr = arr.reshape(shape)
    out = np.empty(arr.shape, dtype=object)
    flat = out.reshape(-1)
    for k, v in enumerate(arr.reshape(-1)):
        flat[k] = to_fraction(v)
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class PolymatrixGame:
    """Players on a graph, one directed payoff matrix per ordered adjacent pair.

    ``payoffs[(i, j)]`` is the ``m_i x m_j`` matrix of payoffs to player ``i``
    on edge ``{i, j}``. Entries are stored as exact rationals; float copies are
    built lazily for the float64 code paths. Instances are immutable.
    """

    def __init__(self, action_counts, payoffs, metadata=None):
        counts = tuple(int(m) for m in action_counts)
        if len(counts) < 1:
            raise GameStructureError("a game needs at least one player")
        if any(m < 1 for m in counts):
            raise GameStructureError("every player needs at least one action")
        n = len(counts)
        mats = {}
        for (i, j), a in payoffs.items():
            i, j = int(i), int(j)
            if i == j:
                raise GameStructureError(f"self-loop on player {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise GameStructureError(f"edge ({i}, {j}) references an unknown player")
            a = fraction_array(a)
            if a.shape != (counts[i], counts[j]):
                raise GameStructureError(
                    f"matrix ({i}, {j}) has shape {a.shape}, expected {(counts[i], counts[j])}")
            mats[(i, j)] = _frozen(a)
        for i, j in mats:
            if (j, i) not in mats:
                raise GameStructureError(f"matrix ({i}, {j}) present without its reverse ({j}, {i})")
        self._counts = counts
        self._payoffs = mats
        self._neighbors = tuple(
            tuple(sorted(j for (a, j) in mats if a == i)) for i in range(n))
        self.metadata = dict(metadata or {})

    @property
    def n_players(self) -> int:
        return len(self._counts)

    @property
    def action_counts(self) -> tuple:
        return self._counts

    @cached_property
    def edges(self) -> tuple:
        return tuple(sorted((i, j) for (i, j) in self._payoffs if i < j))

    def neighbors(self, i) -> tuple:
        return self._neighbors[i]

    def degree(self, i) -> int:
        return len(self._neighbors[i])

    def matrix(self, i, j) -> np.ndarray:
        return self._payoffs[(i, j)]

    def has_edge(self, i, j) -> bool:
        return (i, j) in self._payoffs

    @property
    def payoffs(self) -> dict:
        return dict(self._payoffs)

    @cached_property
    def _float_payoffs(self) -> dict:
        return {k: _frozen(v.astype(float)) for k, v in self._payoffs.items()}

    def float_matrix(self, i, j) -> np.ndarray:
        return self._float_payoffs[(i, j)]

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self._counts)]).astype(int)

    @property
    def total_actions(self) -> int:
        return int(self.offsets[-1])

    @property
    def payoff_count(self) -> int:
        """Number of stored matrix entries."""
        return sum(a.size for a in self._payoffs.values())

    def block_matrix(self, exact=False) -> np.ndarray:
        """Stacked ``(sum m_i) x (sum m_i)`` matrix with zero diagonal blocks."""
        off = self.offsets
        N = self.total_actions
        if exact:
            B = np.empty((N, N), dtype=object)
            B[...] = Fraction(0)
            src = self._payoffs
        else:
            B = np.zeros((N, N))
            src = self._float_payoffs
        for (i, j), a in src.items():
            B[off[i]:off[i + 1], off[j]:off[j + 1]] = a
        return B

    @cached_property
    def float_block(self) -> np.ndarray:
        return _frozen(self.block_matrix(exact=False))

    def __eq__(self, other):
        if not isinstance(other, PolymatrixGame):
            return NotImplemented
        if self._counts != other._counts or self._payoffs.keys() != other._payoffs.keys():
            return False
        return all(np.array_equal(a, other._payoffs[k]) for k, a in self._payoffs.items())

    __hash__ = None

    def __repr__(self):
        return (f"PolymatrixGame(players={self.n_players}, actions={list(self._counts)}, "
                f"edges={len(self.edges)})")


def _is_exact_vec(v) -> bool:
    return isinstance(v, np.ndarray) and v.dtype == object


def payoff_vector(game: PolymatrixGame, x, i) -> np.ndarray:
    """Expected payoff to each pure strategy of player ``i`` against ``x``.

    Exact if the profile holds Fractions, float64 otherwise.
    """
    from .validation import check_profile

    x = check_profile(game, x)
    return _payoff_vector(game, x, i)


def _payoff_vector(game, x, i):
    exact = _is_exact_vec(x[i])
    m = game.action_counts[i]
    if exact:
        p = np.empty(m, dtype=object)
        p[...] = Fraction(0)
        for j in game.neighbors(i):
            p = p + game.matrix(i, j).dot(x[j])
    else:
        p = np.zeros(m)
        for j in game.neighbors(i):
            p += game.float_matrix(i, j) @ x[j]
    return p


def regret(game: PolymatrixGame, x, i):
    """Best-response payoff minus current payoff for player ``i``."""
    from .validation import check_profile

    x = check_profile(game, x)
    return _regret(game, x, i)


def _regret(game, x, i):
    p = _payoff_vector(game, x, i)
    return max(p) - x[i].dot(p)


def regrets(game: PolymatrixGame, x) -> list:
    from .validation import check_profile

    x = check_profile(game, x)
    return [_regret(game, x, i) for i in range(game.n_players)]


def epsilon(game: PolymatrixGame, x):
    """Smallest eps for which ``x`` is an eps-Nash equilibrium."""
    return max(regrets(game, x))


def normalize_game(game: PolymatrixGame) -> PolymatrixGame:
    """Per-player affine rescaling so every total payoff lies in [0, 1].

    Player ``i``'s matrices are shifted by ``L_i / deg(i)`` and divided by
    ``U_i - L_i`` where ``L_i`` and ``U_i`` sum the per-matrix minima and
    maxima. Best responses are unchanged; a player with ``U_i == L_i`` gets
    all-zero matrices.
    """
    new = {}
    for i in range(game.n_players):
        nbrs = game.neighbors(i)
        if not nbrs:
            continue
        lo = sum(min(game.matrix(i, j).ravel()) for j in nbrs)
        hi = sum(max(game.matrix(i, j).ravel()) for j in nbrs)
        shift = lo / len(nbrs)
        span = hi - lo
        for j in nbrs:
            a = game.matrix(i, j)
            if span > 0:
                new[(i, j)] = (a - shift) / span
            else:
                new[(i, j)] = a * 0
    meta = dict(game.metadata)
    meta["normalized"] = True
    return PolymatrixGame(game.action_counts, new, meta)


def is_pure(x, tol=1e-9) -> bool:
    """True iff every mixed strategy is a unit vector (float entries within ``tol``)."""
    for v in x:
        v = np.asarray(v, dtype=object) if _is_exact_vec(v) else np.asarray(v)
        if v.dtype == object and all(isinstance(e, (Fraction, int)) for e in v):
            ones = sum(1 for e in v if e == 1)
            zeros = sum(1 for e in v if e == 0)
        else:
            v = v.astype(float)
            ones = int(np.sum(np.abs(v - 1) <= tol))
            zeros = int(np.sum(np.abs(v) <= tol))
        if ones != 1 or ones + zeros != len(v):
            return False
    return True


def uniform_profile(game: PolymatrixGame, exact=True) -> list:
    if exact:
        return [fraction_array([Fraction(1, m)] * m) for m in game.action_counts]
    return [np.full(m, 1.0 / m) for m in game.action_counts]


def pure_profile(game: PolymatrixGame, actions, exact=True) -> list:
    out = []
    for m, a in zip(game.action_counts, actions):
        v = [0] * m
        v[a] = 1
        out.append(fraction_array(v) if exact else np.array(v, dtype=float))
    return out


def profile_to_float(x) -> list:
    return [np.asarray(v, dtype=float) for v in x]


def profile_to_exact(x, grid=10**12) -> list:
    """Round a float profile to an exact one on a ``1/grid`` lattice.

    Each vector is rounded entrywise and the rounding residue is put on its
    largest entry, so it sums to exactly one and stays non-negative.
    """
    out = []
    for v in x:
        if _is_exact_vec(v):
            out.append(v)
            continue
        v = np.clip(np.asarray(v, dtype=float), 0.0, None)
        k = [int(round(e * grid)) for e in v]
        big = int(np.argmax(v))
        k[big] += grid - sum(k)
        if k[big] < 0:
            raise GameStructureError("profile cannot be rounded onto the simplex")
        out.append(fraction_array([Fraction(e, grid) for e in k]))
    return out


MAX_SUPPORT_PROFILES = 2 ** 20


def _subsets(m):
    for size in range(1, m + 1):
        yield from itertools.combinations(range(m), size)


def enumerate_equilibrium_small(game: PolymatrixGame) -> list:
    """Exact Nash equilibrium by brute force over support profiles.

    Support profiles are tried in order of total support size, so pure
    equilibria are found first. For each support an exact feasibility LP
    equalizes supported payoffs and bounds unsupported ones.
    """
    from . import lp

    size = 1
    for m in game.action_counts:
        size *= 2 ** m
    if size > MAX_SUPPORT_PROFILES:
        raise ValueError(f"support enumeration refused: {size} support profiles exceed 2^20")

    n = game.n_players
    off = game.offsets
    N = game.total_actions
    per_player = [list(_subsets(m)) for m in game.action_counts]
    combos = sorted(itertools.product(*per_player), key=lambda s: sum(len(t) for t in s))
    # variables: x (N entries), then v_i^+ and v_i^- per player
    n_vars = N + 2 * n
    c = [0] * n_vars
    for supports in combos:
        A_eq, b_eq, A_ub, b_ub = [], [], [], []
        for i in range(n):
            row = [0] * n_vars
            for s in range(game.action_counts[i]):
                row[off[i] + s] = 1
            A_eq.append(row)
            b_eq.append(1)
            supp = set(supports[i])
            for s in range(game.action_counts[i]):
                if s not in supp:
                    r = [0] * n_vars
                    r[off[i] + s] = 1
                    A_eq.append(r)
                    b_eq.append(0)
                # (p_i)_s - v_i  (== 0 on the support, <= 0 off it)
                r = [Fraction(0)] * n_vars
                for j in game.neighbors(i):
                    a = game.matrix(i, j)
                    for t in range(game.action_counts[j]):
                        r[off[j] + t] += a[s, t]
                r[N + 2 * i] = -1
                r[N + 2 * i + 1] = 1
                if s in supp:
                    A_eq.append(r)
                    b_eq.append(0)
                else:
                    A_ub.append(r)
                    b_ub.append(0)
        res = lp.solve_lp(c, A_ub or None, b_ub or None, A_eq, b_eq, exact=True)
        if res.success:
            y = res.x
            return [fraction_array(list(y[off[i]:off[i + 1]])) for i in range(n)]
    raise RuntimeError("support enumeration found no equilibrium; this indicates a bug")


# --- text format ----------------------------------------------------------

def format_number(v) -> str:
    v = to_fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def serialize(game: PolymatrixGame, comments=()) -> str:
    """Render ``game`` in the line-oriented ``polymatrix 1`` text format."""
    lines = [f"# {c}" for c in comments]
    lines.append("polymatrix 1")
    lines.append(f"players {game.n_players}")
    lines.append("actions " + " ".join(str(m) for m in game.action_counts))
    lines.append(f"edges {len(game.edges)}")
    for u, v in game.edges:
        lines.append(f"edge {u} {v}")
        for mat in (game.matrix(u, v), game.matrix(v, u)):
            for row in mat:
                lines.append(" ".join(format_number(e) for e in row))
    return "\n".join(lines) + "\n"


def _parse_int(tok, lineno, what):
    try:
        return int(tok)
    except ValueError:
        raise GameFormatError(f"expected integer {what}, got {tok!r}", lineno) from None


def deserialize(text: str) -> PolymatrixGame:
    """Parse the ``polymatrix 1`` format; comment lines start with ``#``."""
    lines = [(k + 1, ln.strip()) for k, ln in enumerate(text.splitlines())]
    comments = [ln[1:].strip() for _, ln in lines if ln.startswith("#")]
    lines = [(k, ln) for k, ln in lines if ln and not ln.startswith("#")]
    pos = 0

    def take(keyword):
        nonlocal pos
        if pos >= len(lines):
            last = lines[-1][0] if lines else 1
            raise GameFormatError(f"unexpected end of input, expected '{keyword}'", last)
        lineno, ln = lines[pos]
        toks = ln.split()
        if keyword is not None and toks[0] != keyword:
            raise GameFormatError(f"expected '{keyword}', got {toks[0]!r}", lineno)
        pos += 1
        return lineno, toks

    lineno, toks = take("polymatrix")
    if toks[1:] != ["1"]:
        raise GameFormatError("unsupported format version", lineno)
    lineno, toks = take("players")
    if len(toks) != 2:
        raise GameFormatError("'players' takes one value", lineno)
    n = _parse_int(toks[1], lineno, "player count")
    lineno, toks = take("actions")
    if len(toks) != n + 1:
        raise GameFormatError(f"expected {n} action counts, got {len(toks) - 1}", lineno)
    counts = [_parse_int(t, lineno, "action count") for t in toks[1:]]
    lineno, toks = take("edges")
    n_edges = _parse_int(toks[1], lineno, "edge count")

    def read_matrix(rows, cols):
        mat = []
        for _ in range(rows):
            if pos >= len(lines) or lines[pos][1].split()[0] == "edge":
                at = lines[pos][0] if pos < len(lines) else (lines[-1][0] + 1)
                raise GameFormatError(f"matrix has too few rows (expected {rows})", at)
            ln_no, row = take(None)
            if len(row) != cols:
                raise GameFormatError(f"expected {cols} entries, got {len(row)}", ln_no)
            try:
                mat.append([Fraction(t) for t in row])
            except (ValueError, ZeroDivisionError):
                raise GameFormatError(f"bad number in row: {' '.join(row)}", ln_no) from None
        return mat

    payoffs = {}
    for _ in range(n_edges):
        lineno, toks = take("edge")
        if len(toks) != 3:
            raise GameFormatError("'edge' takes two player indices", lineno)
        u = _parse_int(toks[1], lineno, "player index")
        v = _parse_int(toks[2], lineno, "player index")
        if not (0 <= u < v < n):
            raise GameFormatError(f"edge endpoints must satisfy 0 <= u < v < {n}", lineno)
        if (u, v) in payoffs:
            raise GameFormatError(f"duplicate edge {u} {v}", lineno)
        payoffs[(u, v)] = read_matrix(counts[u], counts[v])
        payoffs[(v, u)] = read_matrix(counts[v], counts[u])
    if pos != len(lines):
        raise GameFormatError("trailing content after last edge", lines[pos][0])
    try:
        game = PolymatrixGame(counts, payoffs)
    except GameStructureError as exc:
        raise GameFormatError(str(exc)) from exc
    game.metadata["comments"] = comments
    return game


def load_game(path) -> PolymatrixGame:
    with open(path, encoding="utf-8") as fh:
        return deserialize(fh.read())


def save_game(game: PolymatrixGame, path, comments=()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(game, comments))
