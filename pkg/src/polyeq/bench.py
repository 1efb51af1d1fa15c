"""Benchmark harness: suites of generated instances, timed solves, summaries.

A suite is a TOML document::

    timeout = 600
    workers = 1

    [[instance]]
    class = "coordzero"        # or itembid / multiunit / blotto / adjwinner
    players = 10
    actions = 5
    p = 0.5
    seed = 0
    repetitions = 5            # seeds seed, seed+1, ...
    label = "coordzero-10x5"   # optional class tag for output

    [[algo]]
    name = "lemke"

    [[algo]]
    name = "descent"
    delta = 0.001
    ls_points = 201

Every (instance, algorithm) pair yields exactly one record, even when the
solver errors or times out.
"""

from __future__ import annotations

import csv
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import tomli

from .bayesian import build_bayesian, to_polymatrix
from .cancel import CancelToken
from .descent import TIMEOUT, DescentSolver
from .game import PolymatrixGame
from .generators import CLASSES, GenSpec, generate
from .lemke import CANCELLED, LemkeSolver

BAYESIAN_CLASSES = ("itembid", "multiunit", "blotto", "adjwinner")
ALGORITHMS = ("lemke", "descent")
DEFAULT_TIMEOUT = 600.0

CSV_COLUMNS = ("instance", "class", "genspec", "payoffs", "lcp_dim", "algo", "delta", "time_ms",
               "timed_out", "epsilon", "pure", "pivots", "iterations")
SUMMARY_COLUMNS = ("class", "algo", "delta", "payoffs", "count", "avg_time_ms", "pct_timeout",
                   "pct_pure", "avg_epsilon", "median_epsilon", "max_epsilon")


@dataclass(frozen=True)
class AlgoConfig:
    name: str = "lemke"
    delta: float | None = None
    ls_points: int = 201
    line_search: bool = True
    max_iters: int = 100_000
    random_start: bool = False
    seed: int | None = None

    def __post_init__(self):
        if self.name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.name!r}; choose from {ALGORITHMS}")
        if self.name == "descent" and self.delta is None:
            object.__setattr__(self, "delta", 0.1)

    def solver(self, timeout=None):
        if self.name == "lemke":
            return LemkeSolver(timeout=timeout)
        return DescentSolver(delta=self.delta, line_search_points=self.ls_points,
                             line_search=self.line_search, max_iter=self.max_iters,
                             timeout=timeout, random_start=self.random_start, seed=self.seed)


@dataclass(frozen=True)
class InstanceSpec:
    """One generated instance: a polymatrix ``GenSpec`` or Bayesian class parameters."""

    cls: str
    params: tuple = ()
    seed: int = 0
    label: str | None = None

    def __post_init__(self):
        if self.cls not in CLASSES + BAYESIAN_CLASSES:
            raise ValueError(f"unknown class {self.cls!r}")

    @property
    def tag(self) -> str:
        return self.label or self.cls

    @property
    def name(self) -> str:
        return f"{self.tag}-s{self.seed}"

    def build(self):
        """``(game, genspec header)``; the header is ``genspec: k=v ...``."""
        p = dict(self.params)
        if self.cls in BAYESIAN_CLASSES:
            B = build_bayesian(self.cls, p, self.seed)
            body = " ".join(f"{k}={v}" for k, v in sorted(B.params.items()))
            header = f"genspec: cls={self.cls} {body} seed={self.seed}"
            game = to_polymatrix(B)
            game.metadata["bayesian"] = B
            return game, header
        spec = GenSpec(cls=self.cls, seed=self.seed, **p)
        return generate(spec), spec.header()


@dataclass
class SuiteSpec:
    instances: list
    algos: list
    timeout: float = DEFAULT_TIMEOUT
    workers: int = 1

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        if not self.instances or not self.algos:
            raise ValueError("a suite needs at least one instance and one algorithm")

    def jobs(self) -> list:
        return [(inst, algo) for inst in self.instances for algo in self.algos]


def parse_suite(text: str) -> SuiteSpec:
    data = tomli.loads(text)
    instances = []
    for entry in data.get("instance", []):
        entry = dict(entry)
        cls = entry.pop("class")
        seed = int(entry.pop("seed", 0))
        reps = int(entry.pop("repetitions", 1))
        if reps < 1:
            raise ValueError("repetitions must be at least 1")
        label = entry.pop("label", None)
        params = tuple(sorted(entry.items()))
        instances.extend(InstanceSpec(cls, params, seed + r, label) for r in range(reps))
    algos = [AlgoConfig(**a) for a in data.get("algo", [])]
    return SuiteSpec(instances, algos, float(data.get("timeout", DEFAULT_TIMEOUT)),
                     int(data.get("workers", 1)))


def load_suite(path) -> SuiteSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read suite {path}: {exc}") from exc
    return parse_suite(text)


@dataclass
class BenchmarkRecord:
    instance: str
    cls: str
    genspec: str
    payoffs: int
    lcp_dim: int
    algo: str
    delta: float | None
    time_ms: float
    timed_out: bool
    epsilon: Fraction | None = None
    pure: bool | None = None
    pivots: int | None = None
    iterations: int | None = None
    error: str | None = None
    worker: int = 0

    @property
    def solved(self) -> bool:
        return self.error is None and not self.timed_out and self.epsilon is not None

    def row(self) -> dict:
        def cell(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return "1" if v else "0"
            if isinstance(v, Fraction):
                return format_epsilon(v)
            return str(v)

        values = asdict(self)
        values["class"] = values.pop("cls")
        values["time_ms"] = f"{self.time_ms:.3f}"
        values["epsilon"] = self.epsilon
        return {c: cell(values[c]) for c in CSV_COLUMNS}


def format_epsilon(eps) -> str:
    return "0" if eps == 0 else f"{float(eps):.12g}"


def run_instance(game: PolymatrixGame, algo: AlgoConfig, timeout=DEFAULT_TIMEOUT, *,
                 instance="", cls="", genspec="") -> BenchmarkRecord:
    """Solve ``game`` under a wall-clock budget of ``timeout`` seconds.

    Timed-out runs are recorded at exactly the budget. A timed-out descent
    keeps the regret of the profile it reached; a timed-out lemke has none.
    Solver exceptions become records with ``error`` set.
    """
    rec = BenchmarkRecord(instance=instance, cls=cls, genspec=genspec,
                          payoffs=game.payoff_count,
                          lcp_dim=game.total_actions + game.n_players, algo=algo.name,
                          delta=algo.delta, time_ms=0.0, timed_out=False, worker=os.getpid())
    budget_ms = timeout * 1000.0
    token = CancelToken(timeout)
    start = time.perf_counter()
    try:
        est = algo.solver().fit(game, cancel=token)
    except Exception as exc:  # harness must never crash on a solver fault
        rec.time_ms = min((time.perf_counter() - start) * 1000.0, budget_ms)
        rec.error = f"{type(exc).__name__}: {exc}"
        return rec
    elapsed = (time.perf_counter() - start) * 1000.0
    if algo.name == "lemke":
        rec.pivots = est.n_pivots_
        rec.timed_out = est.outcome_ == CANCELLED
        if est.profile_ is not None:
            rec.epsilon = est.epsilon_
            rec.pure = est.pure_
        elif not rec.timed_out:
            rec.error = est.outcome_
    else:
        rec.iterations = est.n_iter_
        rec.timed_out = est.termination_ == TIMEOUT
        rec.epsilon = est.epsilon_
        rec.pure = est.pure_
    rec.time_ms = budget_ms if rec.timed_out else min(elapsed, budget_ms)
    return rec


def _run_job(job):
    inst, algo, timeout = job
    try:
        game, header = inst.build()
    except Exception as exc:
        return BenchmarkRecord(instance=inst.name, cls=inst.tag, genspec="", payoffs=0, lcp_dim=0,
                               algo=algo.name, delta=algo.delta, time_ms=0.0, timed_out=False,
                               error=f"{type(exc).__name__}: {exc}", worker=os.getpid())
    return run_instance(game, algo, timeout, instance=inst.name, cls=inst.tag,
                        genspec=header.split(":", 1)[1].strip())


def run_suite(suite: SuiteSpec, workers=None) -> list:
    """Run every (instance, algorithm) job; records come back in job order."""
    workers = suite.workers if workers is None else workers
    jobs = [(inst, algo, suite.timeout) for inst, algo in suite.jobs()]
    if workers <= 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, jobs))


@dataclass
class Summary:
    cls: str
    algo: str
    delta: float | None
    payoffs: float
    count: int
    avg_time_ms: float
    pct_timeout: float
    pct_pure: float | None
    avg_epsilon: float | None
    median_epsilon: float | None
    max_epsilon: float | None

    def row(self) -> dict:
        out = {}
        for c in SUMMARY_COLUMNS:
            v = getattr(self, "cls" if c == "class" else c)
            out[c] = "" if v is None else (f"{v:.6g}" if isinstance(v, float) else str(v))
        return out


def aggregate(records) -> Summary:
    """Summary of one group of records.

    Averages include timed-out runs at the budget. ``pct_pure`` counts
    successful solves only (timed-out and failed runs are excluded from the
    denominator); epsilon statistics use every record that has one.
    """
    records = list(records)
    if not records:
        raise ValueError("cannot aggregate an empty group")
    head = records[0]
    times = [r.time_ms for r in records]
    solved = [r for r in records if r.solved]
    eps = [float(r.epsilon) for r in records if r.epsilon is not None and r.error is None]
    pure = [r for r in solved if r.pure]
    return Summary(
        cls=head.cls, algo=head.algo, delta=head.delta,
        payoffs=statistics.fmean(r.payoffs for r in records), count=len(records),
        avg_time_ms=statistics.fmean(times),
        pct_timeout=100.0 * sum(r.timed_out for r in records) / len(records),
        pct_pure=100.0 * len(pure) / len(solved) if solved else None,
        avg_epsilon=statistics.fmean(eps) if eps else None,
        median_epsilon=statistics.median(eps) if eps else None,
        max_epsilon=max(eps) if eps else None,
    )


def summarize(records, key=lambda r: (r.cls, r.algo, r.delta, r.payoffs)) -> list:
    """One summary per group, groups in first-seen order."""
    groups: dict = {}
    for r in records:
        groups.setdefault(key(r), []).append(r)
    return [aggregate(g) for g in groups.values()]


def _write_rows(path, columns, rows):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_csv(items, path) -> None:
    """Write records (or summaries) as CSV with a fixed column order."""
    items = list(items)
    if items and isinstance(items[0], Summary):
        _write_rows(path, SUMMARY_COLUMNS, [s.row() for s in items])
    else:
        _write_rows(path, CSV_COLUMNS, [r.row() for r in items])


def _slug(text) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in str(text))


def emit_plotdata(summaries, path) -> list:
    """Write ``size time epsilon`` series, one file per (class, algo), into directory ``path``.

    Rows are sorted by payoff count; a missing epsilon is written as ``nan``.
    Returns the written file paths.
    """
    out_dir = Path(path)
    series: dict = {}
    for s in summaries:
        series.setdefault((s.cls, s.algo), []).append(s)
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for (cls, algo), items in series.items():
            target = out_dir / f"{_slug(cls)}_{_slug(algo)}.dat"
            lines = ["# size time epsilon"]
            for s in sorted(items, key=lambda s: s.payoffs):
                eps = "nan" if s.avg_epsilon is None else f"{s.avg_epsilon:.6g}"
                lines.append(f"{s.payoffs:g} {s.avg_time_ms:.3f} {eps}")
            target.write_text("\n".join(lines) + "\n")
            written.append(target)
    except OSError as exc:
        raise OSError(f"cannot write plot data under {out_dir}: {exc}") from exc
    return written


def line_search_sweep(games, points=(2, 11, 51, 101, 201, 401), delta=0.001,
                    timeout=DEFAULT_TIMEOUT, max_iters=100_000) -> list:
    """Descent on fixed games for each line-search grid size.

    Returns one dict per point count with per-game iterations and times and
    their means.
    """
    games = list(games)
    rows = []
    for k in points:
        algo = AlgoConfig("descent", delta=delta, ls_points=k, max_iters=max_iters)
        recs = [run_instance(g, algo, timeout, instance=f"game{i}") for i, g in enumerate(games)]
        rows.append({
            "points": k,
            "iterations": [r.iterations for r in recs],
            "time_ms": [r.time_ms for r in recs],
            "mean_iterations": statistics.fmean(r.iterations or 0 for r in recs),
            "mean_time_ms": statistics.fmean(r.time_ms for r in recs),
        })
    return rows

