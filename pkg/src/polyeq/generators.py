"""Seeded generators for multi-player polymatrix game classes.

Randomness comes from numpy's PCG64 seeded through ``SeedSequence``. Each
purpose (graph, edge selection, group assignment, colours) and each edge
index gets its own child stream, so edge order never changes what an edge
draws. Uniform [0, 1] payoffs are drawn on a ``1/resolution`` grid and kept
as exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

import numpy as np

from .game import PolymatrixGame, fraction_array

DEFAULT_RESOLUTION = 1000

GRAPH_KINDS = ("complete", "cycle", "star", "grid", "tree")

# stream purposes; edge streams use (EDGE, index)
_GRAPH, _SELECT, _GROUPS, _COLORS, _EDGE = range(5)


def stream(seed, purpose, index=0) -> np.random.Generator:
    """Independent generator for one ``(purpose, index)`` under ``seed``."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(purpose, index))
    return np.random.Generator(np.random.PCG64(ss))


def uniform_grid(rng, size=None, resolution=DEFAULT_RESOLUTION, low=0):
    """Fractions uniform on ``{low/res, ..., 1}``."""
    k = rng.integers(low, resolution + 1, size=size)
    if size is None:
        return Fraction(int(k), resolution)
    return fraction_array([Fraction(int(v), resolution) for v in np.ravel(k)], shape=np.shape(k))


def random_matrix(rows, cols, rng, resolution=DEFAULT_RESOLUTION) -> np.ndarray:
    """``rows x cols`` matrix of i.i.d. uniform [0, 1] entries (exact rationals)."""
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    return uniform_grid(rng, (rows, cols), resolution)


@dataclass(frozen=True)
class GraphTopology:
    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in GRAPH_KINDS:
            raise ValueError(f"unknown graph kind {self.kind!r}; choose from {GRAPH_KINDS}")
        if self.n < 1:
            raise ValueError("a graph needs at least one player")
        if self.kind == "cycle" and self.n < 3:
            raise ValueError("a cycle needs at least 3 players")
        if self.kind == "grid" and math.isqrt(self.n) ** 2 != self.n:
            raise ValueError(f"grid needs a perfect-square player count, got {self.n}")

    def edges(self, rng=None) -> list:
        n = self.n
        if self.kind == "complete":
            return [(u, v) for u in range(n) for v in range(u + 1, n)]
        if self.kind == "cycle":
            return sorted(tuple(sorted((i, (i + 1) % n))) for i in range(n))
        if self.kind == "star":
            return [(0, v) for v in range(1, n)]
        if self.kind == "grid":
            r = math.isqrt(n)
            out = []
            for a in range(r):
                for b in range(r):
                    u = a * r + b
                    if b + 1 < r:
                        out.append((u, u + 1))
                    if a + 1 < r:
                        out.append((u, u + r))
            return sorted(out)
        return random_tree(n, rng)


def random_tree(n, rng) -> list:
    """Uniformly random labelled tree on ``n`` vertices via a Pruefer sequence."""
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    seq = [int(v) for v in rng.integers(0, n, size=n - 2)]
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    edges = []
    for v in seq:
        leaf = min(u for u in range(n) if degree[u] == 1)
        edges.append(tuple(sorted((leaf, v))))
        degree[leaf] -= 1
        degree[v] -= 1
    u, w = [x for x in range(n) if degree[x] == 1]
    edges.append((u, w))
    return sorted(edges)


CLASSES = ("netcoord", "coordzero", "groupzero", "strict", "wcoop")


@dataclass(frozen=True)
class GenSpec:
    """Everything that determines a generated multi-player instance."""

    cls: str
    graph: str = "complete"
    players: int = 3
    actions: int = 2
    p: float = 0.5
    groups: int = 2
    colors: int = 15
    universe_mult: int = 2
    seed: int = 0
    resolution: int = DEFAULT_RESOLUTION

    def __post_init__(self):
        if self.cls not in CLASSES:
            raise ValueError(f"unknown class {self.cls!r}; choose from {CLASSES}")
        if not 0 <= self.p <= 1:
            raise ValueError("coordination proportion p must lie in [0, 1]")
        for name in ("players", "actions", "groups", "colors", "resolution"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.universe_mult < 1:
            raise ValueError("universe_mult must be positive")

    def header(self) -> str:
        return "genspec: " + " ".join(f"{k}={v}" for k, v in asdict(self).items())

    @classmethod
    def from_header(cls, text: str) -> "GenSpec":
        body = text.split("genspec:", 1)[1]
        types = {f.name: f.type for f in fields(cls)}
        kw = {}
        for tok in body.split():
            k, v = tok.split("=", 1)
            kind = types[k]
            kw[k] = float(v) if kind == "float" else int(v) if kind == "int" else v
        return cls(**kw)


def _coordination_edge(a):
    return a, a.T.copy()


def _zero_sum_edge(a):
    return a, -a.T


def _assemble(n, m, edges, make_pair, metadata):
    counts = [m] * n if isinstance(m, int) else list(m)
    payoffs = {}
    for k, (u, v) in enumerate(edges):
        a_uv, a_vu = make_pair(k, u, v)
        payoffs[(u, v)] = a_uv
        payoffs[(v, u)] = a_vu
    return PolymatrixGame(counts, payoffs, metadata)


def gen_net_coordination(topology: GraphTopology, m, seed, resolution=DEFAULT_RESOLUTION):
    """Every edge is a coordination game ``(A_e, A_e)``."""
    edges = topology.edges(stream(seed, _GRAPH))

    def pair(k, u, v):
        return _coordination_edge(random_matrix(m, m, stream(seed, _EDGE, k), resolution))

    return _assemble(topology.n, m, edges, pair, {"edges": edges})


def _round_half_up(x) -> int:
    return int(math.floor(x + 0.5))


def gen_coord_zero(topology: GraphTopology, m, p, seed, resolution=DEFAULT_RESOLUTION):
    """Exactly ``round(p * |E|)`` coordination edges chosen uniformly; the rest zero-sum."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    edges = topology.edges(stream(seed, _GRAPH))
    k_coord = _round_half_up(p * len(edges))
    chosen = stream(seed, _SELECT).permutation(len(edges))[:k_coord]
    coord = set(int(c) for c in chosen)

    def pair(k, u, v):
        a = random_matrix(m, m, stream(seed, _EDGE, k), resolution)
        return _coordination_edge(a) if k in coord else _zero_sum_edge(a)

    meta = {"edges": edges, "coordination_edges": sorted(coord), "selection": "exact-count"}
    return _assemble(topology.n, m, edges, pair, meta)


def random_groups(n, g, rng) -> list:
    """Random permutation cut into ``g`` blocks of size floor(n/g) or ceil(n/g)."""
    if not 1 <= g <= n:
        raise ValueError("group count must lie in [1, players]")
    perm = [int(v) for v in rng.permutation(n)]
    base, extra = divmod(n, g)
    group = [0] * n
    pos = 0
    for b in range(g):
        size = base + (1 if b < extra else 0)
        for v in perm[pos:pos + size]:
            group[v] = b
        pos += size
    return group


def gen_group_zerosum(n, m, g, seed, resolution=DEFAULT_RESOLUTION):
    """Complete graph; coordination inside groups, zero-sum across them."""
    topology = GraphTopology("complete", n)
    edges = topology.edges()
    group = random_groups(n, g, stream(seed, _GROUPS))

    def pair(k, u, v):
        a = random_matrix(m, m, stream(seed, _EDGE, k), resolution)
        return _coordination_edge(a) if group[u] == group[v] else _zero_sum_edge(a)

    return _assemble(n, m, edges, pair, {"edges": edges, "groups": group})


def gen_strictly_competitive(topology: GraphTopology, m, seed, resolution=DEFAULT_RESOLUTION):
    """Each edge is ``(A, lam * (mu * J - A))``: an affine image of a zero-sum game."""
    edges = topology.edges(stream(seed, _GRAPH))
    params = {}

    def pair(k, u, v):
        rng = stream(seed, _EDGE, k)
        a = random_matrix(m, m, rng, resolution)
        lam = Fraction(resolution // 2 + int(rng.integers(0, 3 * resolution // 2 + 1)), resolution)
        mu = uniform_grid(rng, None, resolution)
        params[k] = (lam, mu)
        b = lam * (mu - a)
        return a, b.T.copy()

    game = _assemble(topology.n, m, edges, pair, {"edges": edges})
    game.metadata["edge_params"] = params
    return game


def gen_weighted_cooperation(topology: GraphTopology, k, universe_mult, seed,
                             resolution=DEFAULT_RESOLUTION):
    """Colour-matching game: payoff ``w_e`` to both ends when chosen colours coincide."""
    if k < 1 or universe_mult < 1:
        raise ValueError("k and universe_mult must be positive")
    edges = topology.edges(stream(seed, _GRAPH))
    universe = universe_mult * k
    colors = [sorted(int(c) for c in stream(seed, _COLORS, i).choice(universe, k, replace=False))
              for i in range(topology.n)]
    weights = {}

    def pair(e, u, v):
        w = Fraction(int(stream(seed, _EDGE, e).integers(1, resolution + 1)), resolution)
        weights[e] = w
        a = np.empty((k, k), dtype=object)
        for s in range(k):
            for t in range(k):
                a[s, t] = w if colors[u][s] == colors[v][t] else Fraction(0)
        return a, a.T.copy()

    game = _assemble(topology.n, k, edges, pair,
                     {"edges": edges, "colors": colors, "universe": universe})
    game.metadata["weights"] = weights
    return game


def generate(spec: GenSpec) -> PolymatrixGame:
    """Build the instance described by ``spec``."""
    res = spec.resolution
    if spec.cls == "groupzero":
        game = gen_group_zerosum(spec.players, spec.actions, spec.groups, spec.seed, res)
    else:
        topo = GraphTopology(spec.graph, spec.players)
        if spec.cls == "netcoord":
            game = gen_net_coordination(topo, spec.actions, spec.seed, res)
        elif spec.cls == "coordzero":
            game = gen_coord_zero(topo, spec.actions, spec.p, spec.seed, res)
        elif spec.cls == "strict":
            game = gen_strictly_competitive(topo, spec.actions, spec.seed, res)
        else:
            game = gen_weighted_cooperation(topo, spec.colors, spec.universe_mult, spec.seed, res)
    game.metadata["genspec"] = spec
    return game
