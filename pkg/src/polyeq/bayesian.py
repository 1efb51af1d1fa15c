"""Two-player Bayesian games and their compilation to polymatrix games.

Covers simultaneous item-bidding auctions, multi-unit auctions, Colonel
Blotto and Adjusted Winner. Priors are independent and uniform over each
player's types. All utilities are exact rationals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable

import numpy as np

from .game import PolymatrixGame
from .generators import DEFAULT_RESOLUTION, stream

ROW, COL = 0, 1

ITEM_VALUATIONS = ("additive", "budget", "single", "unit", "andor")
MULTIUNIT_VALUATIONS = ("additive", "submodular")
ITEM_RULES = ("fp", "sp", "ap")
MULTIUNIT_RULES = ("disc", "unif", "ap")
TIE_RULES = ("row", "col", "random")


# --- valuations ------------------------------------------------------------

@dataclass(frozen=True)
class Valuation:
    """A bidder's value for bundles of items (or for ``k`` identical units).

    ``kind`` is one of ``additive``, ``budget``, ``single``, ``unit`` or
    ``multiunit``. ``values`` holds per-item values (or marginal values for
    ``multiunit``); ``budget`` caps a budget-additive bidder; ``bundle`` and
    ``bundle_value`` describe a single-minded bidder.
    """

    kind: str
    values: tuple = ()
    budget: int | None = None
    bundle: frozenset | None = None
    bundle_value: int = 0

    @property
    def items(self) -> int:
        return len(self.values)

    def value(self, won) -> int:
        """Value of a bundle (iterable of item indices) or of ``won`` units."""
        if self.kind == "multiunit":
            return sum(self.values[:won])
        won = frozenset(won)
        if self.kind == "additive":
            return sum(self.values[j] for j in won)
        if self.kind == "budget":
            return min(self.budget, sum(self.values[j] for j in won))
        if self.kind == "unit":
            return max((self.values[j] for j in won), default=0)
        if self.kind == "single":
            return self.bundle_value if self.bundle <= won else 0
        raise ValueError(f"unknown valuation kind {self.kind!r}")

    def label(self) -> str:
        if self.kind == "single":
            return f"single{{{','.join(map(str, sorted(self.bundle)))}}}={self.bundle_value}"
        if self.kind == "budget":
            return f"budget{list(self.values)}<= {self.budget}"
        return f"{self.kind}{list(self.values)}"


def _check_bounds(M, m):
    if not (M >= m >= 1):
        raise ValueError(f"need max value M >= min value m >= 1, got M={M}, m={m}")


def sample_valuation(kind, items, M, m, rng) -> Valuation:
    """Draw one valuation of ``kind`` over ``items`` items with values in [0, M].

    ``kind`` is ``additive``, ``budget``, ``single``, ``unit``, ``grand``
    (single-minded on the grand bundle), or the multi-unit ``additive_units``
    and ``submodular``. Item values are redrawn until some item is worth at
    least ``m``.
    """
    _check_bounds(M, m)
    if items < 1:
        raise ValueError("need at least one item")

    def draw_values():
        while True:
            vals = tuple(int(v) for v in rng.integers(0, M + 1, size=items))
            if max(vals) >= m:
                return vals

    if kind in ("additive", "unit"):
        return Valuation(kind, draw_values())
    if kind == "budget":
        while True:
            vals = draw_values()
            if sum(vals) >= M:
                break
        return Valuation("budget", vals, budget=int(rng.integers(M, sum(vals) + 1)))
    if kind in ("single", "grand"):
        if kind == "grand":
            bundle = frozenset(range(items))
        else:
            code = int(rng.integers(1, 2 ** items))
            bundle = frozenset(j for j in range(items) if code >> j & 1)
        val = int(rng.integers(m, M + 1))
        vals = tuple(val if (j in bundle and len(bundle) == 1) else 0 for j in range(items))
        return Valuation("single", vals, bundle=bundle, bundle_value=val)
    if kind == "additive_units":
        v1 = int(rng.integers(m, M + 1))
        return Valuation("multiunit", (v1,) * items)
    if kind == "submodular":
        vals = [int(rng.integers(m, M + 1))]
        for _ in range(items - 1):
            vals.append(int(rng.integers(0, vals[-1] + 1)))
        return Valuation("multiunit", tuple(vals))
    raise ValueError(f"unknown valuation kind {kind!r}")


def enumerate_bids(v: Valuation, M) -> list:
    """All integer bid vectors in [0, M] that never overbid.

    Combinatorial valuations: ``sum(b[S]) <= v(S)`` for every bundle ``S``.
    Multi-unit: non-increasing marginal bids whose prefix sums stay below the
    prefix sums of the marginal values. Sorted lexicographically, so the zero
    vector comes first.
    """
    n = v.items
    if v.kind == "multiunit":
        prefix = np.cumsum(v.values).tolist()
        out = []

        def extend(cur, total):
            k = len(cur)
            if k == n:
                out.append(tuple(cur))
                return
            hi = min(M, cur[-1] if cur else M, prefix[k] - total)
            for b in range(hi + 1):
                extend(cur + [b], total + b)

        extend([], 0)
        return sorted(out)
    caps = [min(M, v.value([j])) for j in range(n)]
    bundles = [S for r in range(2, n + 1) for S in itertools.combinations(range(n), r)]
    limits = [(S, v.value(S)) for S in bundles]
    out = []
    for b in itertools.product(*(range(c + 1) for c in caps)):
        if all(sum(b[j] for j in S) <= lim for S, lim in limits):
            out.append(tuple(b))
    return out


# --- auction outcomes ------------------------------------------------------

def _tie_outcomes(tied, tie):
    """Yield ``(probability, winners)`` where ``winners`` maps tied items to ROW/COL."""
    if not tied:
        yield Fraction(1), {}
        return
    if tie in ("row", "col"):
        who = ROW if tie == "row" else COL
        yield Fraction(1), {j: who for j in tied}
        return
    if tie != "random":
        raise ValueError(f"unknown tie rule {tie!r}")
    p = Fraction(1, 2 ** len(tied))
    for assign in itertools.product((ROW, COL), repeat=len(tied)):
        yield p, dict(zip(tied, assign))


def item_auction_utility(rule, tie, v_row: Valuation, v_col: Valuation, b_row, b_col):
    """Expected utilities of a simultaneous item-bidding auction.

    ``rule`` is ``fp`` (winner pays own bid), ``sp`` (winner pays the other
    bid) or ``ap`` (both pay their bids). ``tie`` is ``row``, ``col`` or
    ``random``; random ties are averaged exactly over all resolutions.
    """
    if rule not in ITEM_RULES:
        raise ValueError(f"unknown payment rule {rule!r}")
    n = len(b_row)
    base = {}
    tied = []
    for j in range(n):
        if b_row[j] > b_col[j]:
            base[j] = ROW
        elif b_col[j] > b_row[j]:
            base[j] = COL
        else:
            tied.append(j)
    u_row = Fraction(0)
    u_col = Fraction(0)
    for prob, extra in _tie_outcomes(tied, tie):
        win = {**base, **extra}
        won_r = [j for j in range(n) if win[j] == ROW]
        won_c = [j for j in range(n) if win[j] == COL]
        if rule == "fp":
            pay_r = sum(b_row[j] for j in won_r)
            pay_c = sum(b_col[j] for j in won_c)
        elif rule == "sp":
            pay_r = sum(b_col[j] for j in won_r)
            pay_c = sum(b_row[j] for j in won_c)
        else:
            pay_r = sum(b_row)
            pay_c = sum(b_col)
        u_row += prob * (v_row.value(won_r) - pay_r)
        u_col += prob * (v_col.value(won_c) - pay_c)
    return u_row, u_col


def multiunit_auction_utility(rule, tie, v_row: Valuation, v_col: Valuation, b_row, b_col):
    """Expected utilities of a multi-unit auction for ``n = len(b_row)`` units.

    The ``n`` highest of the ``2n`` marginal bids win. ``disc`` charges each
    winner their winning bids, ``unif`` charges the highest losing bid per
    unit and ``ap`` charges every bid. Ties at the cutoff go to one side, or
    under ``random`` every subset of tied bids is equally likely to win.
    """
    if rule not in MULTIUNIT_RULES:
        raise ValueError(f"unknown payment rule {rule!r}")
    n = len(b_row)
    allbids = sorted(list(b_row) + list(b_col), reverse=True)
    cut = allbids[n - 1]
    price = allbids[n] if len(allbids) > n else 0
    above_r = sum(1 for b in b_row if b > cut)
    above_c = sum(1 for b in b_col if b > cut)
    tied_r = sum(1 for b in b_row if b == cut)
    tied_c = sum(1 for b in b_col if b == cut)
    R = n - above_r - above_c
    if tie == "row":
        dist = [(Fraction(1), min(tied_r, R))]
    elif tie == "col":
        dist = [(Fraction(1), R - min(tied_c, R))]
    elif tie == "random":
        total = comb(tied_r + tied_c, R)
        dist = [(Fraction(comb(tied_r, a) * comb(tied_c, R - a), total), a)
                for a in range(max(0, R - tied_c), min(tied_r, R) + 1)]
    else:
        raise ValueError(f"unknown tie rule {tie!r}")

    def pay(bids, k):
        if rule == "disc":
            return sum(sorted(bids, reverse=True)[:k])
        if rule == "unif":
            return k * price
        return sum(bids)

    u_row = Fraction(0)
    u_col = Fraction(0)
    for prob, a in dist:
        k_r = above_r + a
        k_c = above_c + R - a
        u_row += prob * (v_row.value(k_r) - pay(b_row, k_r))
        u_col += prob * (v_col.value(k_c) - pay(b_col, k_c))
    return u_row, u_col


def compositions(total, parts) -> list:
    """Ordered ways to write ``total`` as ``parts`` non-negative integers (lexicographic)."""
    if parts == 1:
        return [(total,)]
    out = []
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return out


def blotto_utility(values_row, values_col, alloc_row, alloc_col):
    """Hill values won, with ties worth half the hill to each side."""
    half = Fraction(1, 2)
    u_row = Fraction(0)
    u_col = Fraction(0)
    for h, (a, b) in enumerate(zip(alloc_row, alloc_col)):
        if a > b:
            u_row += values_row[h]
        elif b > a:
            u_col += values_col[h]
        else:
            u_row += half * values_row[h]
            u_col += half * values_col[h]
    return u_row, u_col


def adjusted_winner_utility(v_row, v_col, points_row, points_col, currency="points"):
    """Run Adjusted Winner on announced points; return true values of the final bundles.

    Items start with whoever announced more points (row on ties). While the
    richer side (measured in ``currency``: announced ``points`` or true
    ``values``) is ahead, it gives up its items in increasing order of its
    points-to-rival-points ratio, splitting the last one to equalize. Items
    nobody values are never transferred.
    """
    if currency not in ("points", "values"):
        raise ValueError("currency must be 'points' or 'values'")
    n = len(points_row)
    alpha = [Fraction(a) for a in points_row]
    beta = [Fraction(b) for b in points_col]
    share = [Fraction(1) if alpha[i] >= beta[i] else Fraction(0) for i in range(n)]
    w_row = alpha if currency == "points" else [Fraction(v) for v in v_row]
    w_col = beta if currency == "points" else [Fraction(v) for v in v_col]

    def totals():
        return (sum(s * w for s, w in zip(share, w_row)),
                sum((1 - s) * w for s, w in zip(share, w_col)))

    u_r, u_c = totals()
    if u_r != u_c:
        donor_row = u_r > u_c
        own = [i for i in range(n) if share[i] == (1 if donor_row else 0)
               and alpha[i] + beta[i] > 0]
        mine, theirs = (alpha, beta) if donor_row else (beta, alpha)

        def key(i):
            # ratio mine/theirs, +inf when theirs is 0; cross-multiplied via a tuple
            return (theirs[i] == 0, mine[i] / theirs[i] if theirs[i] else 0, i)

        for i in sorted(own, key=key):
            give = w_row[i] if donor_row else w_col[i]
            get = w_col[i] if donor_row else w_row[i]
            gap = (u_r - u_c) if donor_row else (u_c - u_r)
            if give + get == 0:
                continue
            frac = gap / (give + get)
            if frac <= 1:
                share[i] = share[i] - frac if donor_row else share[i] + frac
                break
            share[i] = Fraction(0) if donor_row else Fraction(1)
            u_r, u_c = totals()
    return (sum(s * Fraction(v) for s, v in zip(share, v_row)),
            sum((1 - s) * Fraction(v) for s, v in zip(share, v_col)))


# --- Bayesian games ---------------------------------------------------------

@dataclass
class BayesianTwoPlayerGame:
    """Types, per-type actions and a joint utility oracle.

    ``utility(t_row, t_col, a_row, a_col)`` returns ``(u_row, u_col)`` for
    type indices and action indices. The prior is uniform and independent.
    """

    row_types: list
    col_types: list
    row_actions: list
    col_actions: list
    utility: Callable
    name: str = "bayesian"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.row_types or not self.col_types:
            raise ValueError("each player needs at least one type")
        for acts in list(self.row_actions) + list(self.col_actions):
            if not acts:
                raise ValueError("every type needs at least one action")

    def prior(self, player):
        k = len(self.row_types) if player == ROW else len(self.col_types)
        return [Fraction(1, k)] * k

    def describe(self) -> str:
        """Sidecar text: types, action labels and prior for both players."""
        lines = [f"bayesian {self.name}"]
        for key, val in sorted(self.params.items()):
            lines.append(f"param {key} {val}")
        for side, types, acts in (("row", self.row_types, self.row_actions),
                                  ("col", self.col_types, self.col_actions)):
            pr = Fraction(1, len(types))
            for t, (ty, a) in enumerate(zip(types, acts)):
                label = ty.label() if hasattr(ty, "label") else str(ty)
                lines.append(f"type {side} {t} prior {pr} {label}")
                lines.append(f"actions {side} {t} " + " ".join(_fmt_action(x) for x in a))
        return "\n".join(lines) + "\n"


def _fmt_action(a) -> str:
    if isinstance(a, tuple):
        return "(" + ",".join(str(v) for v in a) + ")"
    return str(a)


def to_polymatrix(B: BayesianTwoPlayerGame) -> PolymatrixGame:
    """Vertices are types; each row-type/column-type pair is an edge whose
    payoffs are utilities weighted by the opponent type's probability."""
    R, C = len(B.row_types), len(B.col_types)
    counts = [len(a) for a in B.row_actions] + [len(a) for a in B.col_actions]
    w_row = Fraction(1, C)
    w_col = Fraction(1, R)
    payoffs = {}
    for t in range(R):
        for s in range(C):
            ma, mb = counts[t], counts[R + s]
            a_rc = np.empty((ma, mb), dtype=object)
            a_cr = np.empty((mb, ma), dtype=object)
            for i in range(ma):
                for j in range(mb):
                    ur, uc = B.utility(t, s, i, j)
                    a_rc[i, j] = w_row * ur
                    a_cr[j, i] = w_col * uc
            payoffs[(t, R + s)] = a_rc
            payoffs[(R + s, t)] = a_cr
    meta = {"bayesian": B.name, "row_types": R, "col_types": C, "params": dict(B.params)}
    return PolymatrixGame(counts, payoffs, meta)


def _type_streams(seed, side, t):
    return stream(seed, 10 + side, t)


def build_bayesian(cls, params=None, seed=0) -> BayesianTwoPlayerGame:
    """Generate a Bayesian game of class ``itembid``, ``multiunit``, ``blotto`` or ``adjwinner``.

    ``params`` keys by class (defaults in brackets):

    * itembid: items [2], types [2], valuation [additive], max [3], min [1],
      rule [fp], tie [row]
    * multiunit: items [2], types [2], valuation [additive], max [3], min [1],
      rule [disc], tie [random]
    * blotto: hills [3], types [2], soldiers [5], bayes [values|soldiers],
      soldier_min [3], soldier_max [15]
    * adjwinner: items [2], types [2], points [4], currency [points]
    """
    p = dict(params or {})
    if cls == "itembid":
        return _build_itembid(p, seed)
    if cls == "multiunit":
        return _build_multiunit(p, seed)
    if cls == "blotto":
        return _build_blotto(p, seed)
    if cls == "adjwinner":
        return _build_adjwinner(p, seed)
    raise ValueError(f"unknown Bayesian class {cls!r}")


def _positive(p, key, default):
    v = int(p.get(key, default))
    if v < 1:
        raise ValueError(f"{key} must be positive, got {v}")
    p[key] = v
    return v


def _build_itembid(p, seed):
    items = _positive(p, "items", 2)
    types = _positive(p, "types", 2)
    M = _positive(p, "max", 3)
    m = _positive(p, "min", 1)
    val = p.setdefault("valuation", "additive")
    rule = p.setdefault("rule", "fp")
    tie = p.setdefault("tie", "row")
    if items > 4:
        raise ValueError("item bidding supports at most 4 items")
    if val not in ITEM_VALUATIONS:
        raise ValueError(f"unknown item valuation {val!r}; choose from {ITEM_VALUATIONS}")
    if rule not in ITEM_RULES:
        raise ValueError(f"unknown payment rule {rule!r}")
    if tie not in TIE_RULES:
        raise ValueError(f"unknown tie rule {tie!r}")
    _check_bounds(M, m)
    kinds = {"andor": ("grand", "unit")}.get(val, (val, val))
    vals = [[sample_valuation(kinds[side], items, M, m, _type_streams(seed, side, t))
             for t in range(types)] for side in (ROW, COL)]
    acts = [[enumerate_bids(v, M) for v in vs] for vs in vals]

    def utility(t, s, i, j):
        return item_auction_utility(rule, tie, vals[ROW][t], vals[COL][s],
                                    acts[ROW][t][i], acts[COL][s][j])

    return BayesianTwoPlayerGame(vals[ROW], vals[COL], acts[ROW], acts[COL], utility,
                                 "itembid", p)


def _build_multiunit(p, seed):
    items = _positive(p, "items", 2)
    types = _positive(p, "types", 2)
    M = _positive(p, "max", 3)
    m = _positive(p, "min", 1)
    val = p.setdefault("valuation", "additive")
    rule = p.setdefault("rule", "disc")
    tie = p.setdefault("tie", "random")
    if val not in MULTIUNIT_VALUATIONS:
        raise ValueError(f"unknown multi-unit valuation {val!r}")
    if rule not in MULTIUNIT_RULES:
        raise ValueError(f"unknown payment rule {rule!r}")
    if tie not in TIE_RULES:
        raise ValueError(f"unknown tie rule {tie!r}")
    _check_bounds(M, m)
    kind = "additive_units" if val == "additive" else "submodular"
    vals = [[sample_valuation(kind, items, M, m, _type_streams(seed, side, t))
             for t in range(types)] for side in (ROW, COL)]
    acts = [[enumerate_bids(v, M) for v in vs] for vs in vals]

    def utility(t, s, i, j):
        return multiunit_auction_utility(rule, tie, vals[ROW][t], vals[COL][s],
                                         acts[ROW][t][i], acts[COL][s][j])

    return BayesianTwoPlayerGame(vals[ROW], vals[COL], acts[ROW], acts[COL], utility,
                                 "multiunit", p)


@dataclass(frozen=True)
class BlottoType:
    soldiers: int
    values: tuple

    def label(self) -> str:
        return f"soldiers={self.soldiers} values=[{','.join(str(v) for v in self.values)}]"


def _hill_values(rng, hills, resolution):
    return tuple(Fraction(int(k), resolution) for k in rng.integers(0, resolution + 1, size=hills))


def _build_blotto(p, seed):
    hills = _positive(p, "hills", 3)
    types = _positive(p, "types", 2)
    soldiers = _positive(p, "soldiers", 5)
    lo = _positive(p, "soldier_min", 3)
    hi = _positive(p, "soldier_max", 15)
    res = _positive(p, "resolution", DEFAULT_RESOLUTION)
    bayes = p.setdefault("bayes", "values")
    if lo > hi:
        raise ValueError("soldier_min exceeds soldier_max")
    if bayes not in ("values", "soldiers"):
        raise ValueError("bayes must be 'values' or 'soldiers'")
    tys = []
    for side in (ROW, COL):
        side_types = []
        common = _hill_values(stream(seed, 20 + side), hills, res)
        for t in range(types):
            rng = _type_streams(seed, side, t)
            if bayes == "values":
                side_types.append(BlottoType(soldiers, _hill_values(rng, hills, res)))
            else:
                side_types.append(BlottoType(int(rng.integers(lo, hi + 1)), common))
        tys.append(side_types)
    acts = [[compositions(ty.soldiers, hills) for ty in side] for side in tys]

    def utility(t, s, i, j):
        return blotto_utility(tys[ROW][t].values, tys[COL][s].values,
                              acts[ROW][t][i], acts[COL][s][j])

    return BayesianTwoPlayerGame(tys[ROW], tys[COL], acts[ROW], acts[COL], utility, "blotto", p)


@dataclass(frozen=True)
class ItemValues:
    values: tuple

    def label(self) -> str:
        return "values=[" + ",".join(str(v) for v in self.values) + "]"


def _normalized_values(rng, items, resolution):
    while True:
        raw = [int(k) for k in rng.integers(0, resolution + 1, size=items)]
        if sum(raw):
            total = sum(raw)
            return tuple(Fraction(k, total) for k in raw)


def _build_adjwinner(p, seed):
    items = _positive(p, "items", 2)
    types = _positive(p, "types", 2)
    points = _positive(p, "points", 4)
    res = _positive(p, "resolution", DEFAULT_RESOLUTION)
    currency = p.setdefault("currency", "points")
    if currency not in ("points", "values"):
        raise ValueError("currency must be 'points' or 'values'")
    tys = [[ItemValues(_normalized_values(_type_streams(seed, side, t), items, res))
            for t in range(types)] for side in (ROW, COL)]
    actions = compositions(points, items)
    acts = [[actions] * types, [actions] * types]

    def utility(t, s, i, j):
        return adjusted_winner_utility(tys[ROW][t].values, tys[COL][s].values,
                                       actions[i], actions[j], currency)

    return BayesianTwoPlayerGame(tys[ROW], tys[COL], acts[ROW], acts[COL], utility,
                                 "adjwinner", p)
