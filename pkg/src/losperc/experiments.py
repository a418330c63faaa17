"""Seeded experiment drivers over the planar street-system model.

Every command follows one recipe: sample a unit-intensity Poisson point
process on the analysis window padded by a margin, triangulate, realize
the connection graph, and evaluate events on the analysis window only.
Replicates whose stabilization radius reaches the margin are excluded and
counted.  All randomness derives from the mandatory master seed, one
derived stream per replicate, so estimates are reproducible and sweeps
over (p, lambda, r) are coupled per replicate: the same realization is
re-thresholded, never re-sampled.

Commands return plain result objects; CSV/JSON serialization lives in
:mod:`losperc.cli`.
"""

from __future__ import annotations

import math
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import delaunay, model
from . import percolation as perc
from .coverage1d import CoverageParams, CoverageTable, EstimateRecord, c_sup, mc_dlambda
from .geometry import AxisBox, Point2

__all__ = [
    "ConfigError",
    "NonBracketed",
    "RunConfig",
    "SweepRow",
    "SweepResult",
    "LambdaCResult",
    "DerivativeLink",
    "RussoPoint",
    "RussoReport",
    "FuzzSuite",
    "FuzzReport",
    "cmd_crossing",
    "cmd_sweep",
    "cmd_pc_bisect",
    "cmd_lambda_c",
    "cmd_ngood",
    "cmd_stab",
    "cmd_russo",
    "cmd_unique",
    "cmd_fuzz",
]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid or missing run configuration."""


class NonBracketed(RuntimeError):
    """Bisection endpoints do not straddle the target frequency."""


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    """Common knobs of one experiment run.

    ``window`` is the side of the centered analysis box; sampling happens
    on the box padded by ``margin`` on every side (default
    max(10, window/5)).  ``seed`` is the mandatory master seed; every
    replicate, table and fuzz stream is derived from it.  Command-specific
    parameters travel in ``params``.
    """

    seed: int
    window: float = 30.0
    margin: Optional[float] = None
    reps: int = 200
    threads: int = 1
    out: Optional[str] = None
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed}")
        if not (math.isfinite(self.window) and self.window > 0.0):
            raise ConfigError(f"window must be finite and > 0, got {self.window}")
        if self.margin is not None and not (
            math.isfinite(self.margin) and self.margin > 0.0
        ):
            raise ConfigError(f"margin must be finite and > 0, got {self.margin}")
        if not (isinstance(self.reps, int) and self.reps >= 1):
            raise ConfigError(f"reps must be a positive integer, got {self.reps!r}")
        if not (isinstance(self.threads, int) and self.threads >= 1):
            raise ConfigError(f"threads must be a positive integer, got {self.threads!r}")

    @property
    def effective_margin(self) -> float:
        if self.margin is not None:
            return float(self.margin)
        return max(10.0, self.window / 5.0)

    def analysis_box(self) -> AxisBox:
        return AxisBox(center=Point2(0.0, 0.0), side=self.window)

    def sample_box(self) -> AxisBox:
        return AxisBox(
            center=Point2(0.0, 0.0), side=self.window + 2.0 * self.effective_margin
        )

    def param(self, name: str, default: Any = ...) -> Any:
        if name in self.params:
            return self.params[name]
        if default is ...:
            raise ConfigError(f"missing required parameter {name!r}")
        return default

    def fparam(self, name: str, default: Any = ...) -> float:
        return _as_float(name, self.param(name, default))

    def grid_param(self, name: str, default: Any = ...) -> Tuple[float, ...]:
        raw = self.param(name, default)
        if not isinstance(raw, (list, tuple)) or not raw:
            raise ConfigError(f"parameter {name!r} must be a non-empty list")
        vals = tuple(_as_float(name, v) for v in raw)
        return tuple(sorted(vals))


def _as_float(name: str, value: Any) -> float:
    if isinstance(value, str):
        if value in ("inf", "Infinity", "+inf"):
            return math.inf
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"parameter {name!r} is not numeric: {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"parameter {name!r} is not numeric: {value!r}")
    return float(value)


def derive_seed(master: int, *path: int) -> int:
    """Stable 64-bit child seed of (master, path) for one stream.

    The path length is folded in first: SeedSequence zero-pads its
    entropy, so (a,) and (a, 0) would otherwise alias.
    """
    entropy = (int(master), len(path)) + tuple(int(x) for x in path)
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class SweepRow:
    """One grid point: its parameters and the event-frequency estimate."""

    params: Tuple[Tuple[str, float], ...]
    estimate: EstimateRecord
    n_excluded: int

    def value(self, name: str) -> float:
        for k, v in self.params:
            if k == name:
                return v
        raise KeyError(name)


@dataclass(frozen=True)
class SweepResult:
    """Rows of a sweep, sorted by the sweep axes.

    ``monotone_violations`` counts, per coupled axis, the adjacent
    replicate-level indicator decreases observed along that axis; exact
    coupling makes every count zero when the model's monotonicity holds.
    """

    axes: Tuple[str, ...]
    rows: Tuple[SweepRow, ...]
    monotone_violations: Tuple[Tuple[str, int], ...] = ()

    def violations(self, axis: str) -> int:
        for k, v in self.monotone_violations:
            if k == axis:
                return v
        raise KeyError(axis)

    def row(self, **where: float) -> SweepRow:
        for r in self.rows:
            if all(r.value(k) == v for k, v in where.items()):
                return r
        raise KeyError(where)


@dataclass(frozen=True)
class LambdaCResult:
    """Finite-size intensity threshold, or a regime flag.

    status is "bracketed" (value holds the threshold), "always"
    (crossing frequency >= 1/2 already at lambda = 0) or "never"
    (below 1/2 even at lambda_max, or p <= 1/2 a priori).
    """

    status: str
    value: Optional[float]
    est_zero: Optional[float]
    est_max: Optional[float]
    lam_max: float


@dataclass(frozen=True)
class DerivativeLink:
    """One evaluated comparison lhs <= rhs + 3 sigma."""

    lhs: float
    rhs: float
    sigma: float
    satisfied: bool


@dataclass(frozen=True)
class RussoPoint:
    """Derivative comparison at one (lambda, r) grid point."""

    lam: float
    r: float
    d_lambda: EstimateRecord
    d_r: EstimateRecord
    bound: DerivativeLink


@dataclass(frozen=True)
class RussoReport:
    """Two-route derivative estimates of the annulus-crossing probability."""

    theta: EstimateRecord
    pivotal_sum: EstimateRecord
    fd_lambda: EstimateRecord
    fd_r: EstimateRecord
    agreement_z: float
    inequality: Optional[DerivativeLink]
    n_excluded: int
    grid: Tuple[RussoPoint, ...] = ()


@dataclass(frozen=True)
class FuzzSuite:
    name: str
    cases: int
    failures: int
    first_failure: Optional[str]


@dataclass(frozen=True)
class FuzzReport:
    suites: Tuple[FuzzSuite, ...]

    @property
    def ok(self) -> bool:
        return all(s.failures == 0 for s in self.suites)

    def suite(self, name: str) -> FuzzSuite:
        for s in self.suites:
            if s.name == name:
                return s
        raise KeyError(name)


# ---------------------------------------------------------------------------
# replicate engine


def _run_batch(worker, tasks: Sequence[tuple], threads: int) -> list:
    """Map worker over tasks; order-stable, deterministic under sharding."""
    if threads <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    ctx = multiprocessing.get_context("fork")
    chunk = max(1, len(tasks) // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads, mp_context=ctx) as ex:
        return list(ex.map(worker, tasks, chunksize=chunk))


def _freq_record(hits: int, n: int, seed: int, wall: float) -> EstimateRecord:
    if n <= 0:
        return EstimateRecord(math.nan, math.nan, 0, seed, wall)
    p = hits / n
    return EstimateRecord(p, math.sqrt(max(p * (1.0 - p), 0.0) / n), n, seed, wall)


def _sample_triangulation(master: int, rep: int, side: float):
    """PPP + triangulation for one replicate; None when degenerate."""
    box = AxisBox(center=Point2(0.0, 0.0), side=side)
    pts = model.sample_ppp(box, 1.0, derive_seed(master, rep, 0))
    try:
        return delaunay.build(pts)
    except (delaunay.TooFewPoints, delaunay.AllCollinear, delaunay.DuplicatePoint):
        return None


def _crossing_task(args: tuple) -> Tuple[int, bool, Tuple[bool, ...]]:
    master, rep, side, margin, inner_side, grid, lam_max = args
    t = _sample_triangulation(master, rep, side)
    inner = AxisBox(center=Point2(0.0, 0.0), side=inner_side)
    if t is None or delaunay.stabilization_radius(t, inner) >= margin:
        return rep, True, ()
    seed = derive_seed(master, rep, 1)
    inds = []
    for p, lam, r in grid:
        g = model.build_graph(
            t, model.ModelParams(p=p, lam=lam, r=r), seed, lambda_max=lam_max
        )
        lab = perc.components_in_box(g, inner)
        inds.append(perc.crosses_box(lab, g, inner, axis="x"))
    return rep, False, tuple(inds)


def _crossing_grid(
    config: RunConfig, grid: Sequence[Tuple[float, float, float]]
) -> Tuple[List[Tuple[bool, ...]], int, float]:
    """Coupled crossing indicators for every grid point, per replicate."""
    lam_max = max(lam for _p, lam, _r in grid)
    tasks = [
        (
            config.seed,
            rep,
            config.sample_box().side,
            config.effective_margin,
            config.window,
            tuple(grid),
            lam_max,
        )
        for rep in range(config.reps)
    ]
    t0 = time.perf_counter()
    results = _run_batch(_crossing_task, tasks, config.threads)
    wall = time.perf_counter() - t0
    rows = [inds for _rep, excluded, inds in results if not excluded]
    n_excluded = config.reps - len(rows)
    return rows, n_excluded, wall


def cmd_crossing(config: RunConfig) -> SweepResult:
    """Left-right crossing frequency of the analysis box at one point."""
    p = config.fparam("p", 0.5)
    lam = config.fparam("lam", 0.0)
    r = config.fparam("r", math.inf)
    rows, n_excluded, wall = _crossing_grid(config, [(p, lam, r)])
    hits = sum(ind[0] for ind in rows)
    est = _freq_record(hits, len(rows), config.seed, wall)
    row = SweepRow(
        params=(("p", p), ("lam", lam), ("r", r)),
        estimate=est,
        n_excluded=n_excluded,
    )
    return SweepResult(axes=(), rows=(row,))


def cmd_sweep(config: RunConfig) -> SweepResult:
    """Crossing frequency over a (p, lambda, r) grid, coupled per replicate."""
    ps = config.grid_param("ps", [config.fparam("p", 0.5)])
    lams = config.grid_param("lams", [config.fparam("lam", 0.0)])
    rs = config.grid_param("rs", [config.fparam("r", math.inf)])
    grid = [(p, lam, r) for p in ps for lam in lams for r in rs]
    indicator_rows, n_excluded, wall = _crossing_grid(config, grid)

    n_inc = len(indicator_rows)
    rows = []
    for k, (p, lam, r) in enumerate(grid):
        hits = sum(ind[k] for ind in indicator_rows)
        rows.append(
            SweepRow(
                params=(("p", p), ("lam", lam), ("r", r)),
                estimate=_freq_record(hits, n_inc, config.seed, wall),
                n_excluded=n_excluded,
            )
        )

    pos = {pt: k for k, pt in enumerate(grid)}
    axes_values = {"p": ps, "lam": lams, "r": rs}
    violations = []
    for axis, values in axes_values.items():
        bad = 0
        if len(values) > 1:
            for pt in grid:
                nxt = _next_point(pt, axis, values)
                if nxt is None:
                    continue
                i, j = pos[pt], pos[nxt]
                bad += sum(ind[i] > ind[j] for ind in indicator_rows)
        violations.append((axis, bad))
    return SweepResult(
        axes=("p", "lam", "r"), rows=tuple(rows), monotone_violations=tuple(violations)
    )


def _next_point(pt, axis, values):
    p, lam, r = pt
    cur = {"p": p, "lam": lam, "r": r}[axis]
    k = values.index(cur)
    if k + 1 >= len(values):
        return None
    nxt = values[k + 1]
    if axis == "p":
        return (nxt, lam, r)
    if axis == "lam":
        return (p, nxt, r)
    return (p, lam, nxt)


# ---------------------------------------------------------------------------
# thresholds


def _pc_threshold_task(args: tuple) -> Tuple[int, bool, float]:
    master, rep, side, margin, inner_side, r, half_tol = args
    t = _sample_triangulation(master, rep, side)
    inner = AxisBox(center=Point2(0.0, 0.0), side=inner_side)
    if t is None or delaunay.stabilization_radius(t, inner) >= margin:
        return rep, True, math.nan
    seed = derive_seed(master, rep, 1)

    def crossing_at(p: float) -> bool:
        g = model.build_graph(t, model.ModelParams(p=p, lam=0.0, r=r), seed)
        return perc.crosses_box(perc.components_in_box(g, inner), g, inner, axis="x")

    if crossing_at(0.5):
        return rep, False, 0.5
    if not crossing_at(1.0):
        return rep, False, math.inf
    lo, hi = 0.5, 1.0
    while hi - lo > half_tol:
        mid = 0.5 * (lo + hi)
        if crossing_at(mid):
            hi = mid
        else:
            lo = mid
    return rep, False, 0.5 * (lo + hi)


def cmd_pc_bisect(r: float, config: RunConfig) -> float:
    """Finite-size site threshold: smallest p with crossing frequency 1/2.

    Evaluated at lambda = 0 with at least 300 replicates.  Per replicate
    the monotone coupling in p admits an exact threshold search, so the
    returned value is the coupled-bisection answer to the p-tolerance.
    """
    r = _as_float("r", r)
    tol = config.fparam("tol", 0.02)
    if not 0.0 < tol < 0.5:
        raise ConfigError(f"tol must lie in (0, 0.5), got {tol}")
    reps = max(config.reps, 300)
    tasks = [
        (
            config.seed,
            rep,
            config.sample_box().side,
            config.effective_margin,
            config.window,
            r,
            tol / 2.0,
        )
        for rep in range(reps)
    ]
    results = _run_batch(_pc_threshold_task, tasks, config.threads)
    thresholds = np.array(
        [thr for _rep, excluded, thr in results if not excluded]
    )
    if thresholds.size == 0:
        raise NonBracketed("every replicate was excluded")
    est_lo = float(np.mean(thresholds <= 0.5))
    est_hi = float(np.mean(thresholds <= 1.0))
    if not est_lo <= 0.5 <= est_hi:
        raise NonBracketed(
            f"crossing estimates {est_lo:.3f} at p=0.5 and {est_hi:.3f} at p=1 "
            f"do not straddle 0.5"
        )
    order = np.sort(thresholds)
    return float(order[math.ceil(0.5 * order.size) - 1])


def _lambda_threshold_task(args: tuple) -> Tuple[int, bool, float]:
    master, rep, side, margin, inner_side, p, r, lam_max, half_tol = args
    t = _sample_triangulation(master, rep, side)
    inner = AxisBox(center=Point2(0.0, 0.0), side=inner_side)
    if t is None or delaunay.stabilization_radius(t, inner) >= margin:
        return rep, True, math.nan
    seed = derive_seed(master, rep, 1)

    def crossing_at(lam: float) -> bool:
        g = model.build_graph(
            t, model.ModelParams(p=p, lam=lam, r=r), seed, lambda_max=lam_max
        )
        return perc.crosses_box(perc.components_in_box(g, inner), g, inner, axis="x")

    if crossing_at(0.0):
        return rep, False, 0.0
    if not crossing_at(lam_max):
        return rep, False, math.inf
    lo, hi = 0.0, lam_max
    while hi - lo > half_tol:
        mid = 0.5 * (lo + hi)
        if crossing_at(mid):
            hi = mid
        else:
            lo = mid
    return rep, False, 0.5 * (lo + hi)


def cmd_lambda_c(p: float, r: float, config: RunConfig) -> LambdaCResult:
    """Finite-size intensity threshold at fixed (p, r), or a regime flag."""
    p = _as_float("p", p)
    r = _as_float("r", r)
    lam_max = config.fparam("lam_max", 8.0)
    tol = config.fparam("tol_lambda", max(0.05, lam_max / 64.0))
    if p <= 0.5:
        return LambdaCResult(
            status="never", value=None, est_zero=None, est_max=None, lam_max=lam_max
        )
    tasks = [
        (
            config.seed,
            rep,
            config.sample_box().side,
            config.effective_margin,
            config.window,
            p,
            r,
            lam_max,
            tol / 2.0,
        )
        for rep in range(config.reps)
    ]
    results = _run_batch(_lambda_threshold_task, tasks, config.threads)
    thresholds = np.array(
        [thr for _rep, excluded, thr in results if not excluded]
    )
    if thresholds.size == 0:
        return LambdaCResult("never", None, None, None, lam_max)
    est_zero = float(np.mean(thresholds <= 0.0))
    est_max = float(np.mean(thresholds < math.inf))
    if est_zero >= 0.5:
        return LambdaCResult("always", 0.0, est_zero, est_max, lam_max)
    if est_max < 0.5:
        return LambdaCResult("never", None, est_zero, est_max, lam_max)
    order = np.sort(thresholds)
    value = float(order[math.ceil(0.5 * order.size) - 1])
    return LambdaCResult("bracketed", value, est_zero, est_max, lam_max)


# ---------------------------------------------------------------------------
# n-good sites and stabilization tails


def _ngood_task(args: tuple) -> Tuple[int, bool, Tuple[bool, ...]]:
    master, rep, side, p, r_fixed, lam_fixed, ns, lams, rs, lam_max = args
    t = _sample_triangulation(master, rep, side)
    if t is None:
        return rep, True, ()
    seed = derive_seed(master, rep, 1)
    window = AxisBox(center=Point2(0.0, 0.0), side=side)
    inds = []
    try:
        if lams:
            for lam in lams:
                g = model.build_graph(
                    t,
                    model.ModelParams(p=p, lam=lam, r=r_fixed),
                    seed,
                    lambda_max=lam_max,
                )
                for n in ns:
                    inds.append(perc.n_good(t, g, (0, 0), n, window=window))
        else:
            for r in rs:
                g = model.build_graph(
                    t, model.ModelParams(p=p, lam=lam_fixed, r=r), seed
                )
                for n in ns:
                    inds.append(perc.n_good(t, g, (0, 0), n, window=window))
    except perc.WindowTooSmall:
        return rep, True, ()
    return rep, False, tuple(inds)


def cmd_ngood(config: RunConfig) -> SweepResult:
    """P(the origin site is n-good) over a grid of n and lambda or r.

    The second axis is ``lams`` when given, else ``rs``; the grid is
    coupled per replicate along that axis.
    """
    p = config.fparam("p", 0.7)
    ns = config.grid_param("ns", [config.fparam("n", 2.0)])
    has_lams = "lams" in config.params
    lams = config.grid_param("lams", [0.0]) if has_lams else ()
    rs = () if has_lams else config.grid_param("rs", [config.fparam("r", 2.0)])
    r_fixed = config.fparam("r", 2.0) if has_lams else math.nan
    lam_fixed = math.nan if has_lams else config.fparam("lam", 0.0)
    if config.window < 8.0 * max(ns):
        raise perc.WindowTooSmall(
            f"window {config.window} below 8n for n={max(ns)}"
        )
    lam_max = max(lams) if has_lams else 0.0
    tasks = [
        (
            config.seed,
            rep,
            config.sample_box().side,
            p,
            r_fixed,
            lam_fixed,
            tuple(ns),
            tuple(lams),
            tuple(rs),
            lam_max,
        )
        for rep in range(config.reps)
    ]
    t0 = time.perf_counter()
    results = _run_batch(_ngood_task, tasks, config.threads)
    wall = time.perf_counter() - t0
    indicator_rows = [inds for _rep, excluded, inds in results if not excluded]
    n_excluded = config.reps - len(indicator_rows)
    second_name = "lam" if has_lams else "r"
    second_vals = lams if has_lams else rs

    rows = []
    flat = []
    for si, sv in enumerate(second_vals):
        for ni, n in enumerate(ns):
            k = si * len(ns) + ni
            flat.append((sv, n, k))
    flat.sort()
    for sv, n, k in flat:
        hits = sum(ind[k] for ind in indicator_rows)
        rows.append(
            SweepRow(
                params=((second_name, sv), ("n", n)),
                estimate=_freq_record(hits, len(indicator_rows), config.seed, wall),
                n_excluded=n_excluded,
            )
        )

    bad = 0
    if len(second_vals) > 1:
        for si in range(len(second_vals) - 1):
            for ni in range(len(ns)):
                i, j = si * len(ns) + ni, (si + 1) * len(ns) + ni
                bad += sum(ind[i] > ind[j] for ind in indicator_rows)
    return SweepResult(
        axes=(second_name, "n"),
        rows=tuple(rows),
        monotone_violations=((second_name, bad),),
    )


def _stab_task(args: tuple) -> Tuple[int, Tuple[float, ...]]:
    master, rep, side, ns = args
    t = _sample_triangulation(master, rep, side)
    if t is None:
        return rep, tuple(math.nan for _ in ns)
    rads = []
    for n in ns:
        box = AxisBox(center=Point2(0.0, 0.0), side=2.0 * n)
        rads.append(delaunay.stabilization_radius(t, box))
    return rep, tuple(rads)


def cmd_stab(config: RunConfig) -> SweepResult:
    """Empirical tail P(stabilization radius of the 2n-box exceeds n)."""
    ns = config.grid_param("ns", [config.fparam("n", 4.0)])
    if config.window < 4.0 * max(ns):
        raise perc.WindowTooSmall(
            f"window {config.window} below 4n for n={max(ns)}"
        )
    side = config.sample_box().side
    tasks = [(config.seed, rep, side, tuple(ns)) for rep in range(config.reps)]
    t0 = time.perf_counter()
    results = _run_batch(_stab_task, tasks, config.threads)
    wall = time.perf_counter() - t0

    rows = []
    for k, n in enumerate(ns):
        cert = (side - 2.0 * n) / 2.0
        hits = 0
        included = 0
        for _rep, rads in results:
            rad = rads[k]
            if math.isnan(rad) or rad >= cert:
                continue
            included += 1
            hits += rad > n
        rows.append(
            SweepRow(
                params=(("n", n),),
                estimate=_freq_record(hits, included, config.seed, wall),
                n_excluded=config.reps - included,
            )
        )
    return SweepResult(axes=("n",), rows=tuple(rows))


# ---------------------------------------------------------------------------
# uniqueness surrogate


def _unique_task(args: tuple) -> Tuple[int, bool, int]:
    master, rep, side, margin, inner_side, p, lam, r = args
    t = _sample_triangulation(master, rep, side)
    inner = AxisBox(center=Point2(0.0, 0.0), side=inner_side)
    if t is None or delaunay.stabilization_radius(t, inner) >= margin:
        return rep, True, -1
    seed = derive_seed(master, rep, 1)
    g = model.build_graph(t, model.ModelParams(p=p, lam=lam, r=r), seed)
    lab = perc.components_in_box(g, inner)
    return rep, False, perc.spanning_cluster_count(lab, g, inner)


def cmd_unique(config: RunConfig) -> SweepResult:
    """Distribution of the four-side spanning cluster count."""
    p = config.fparam("p", 0.8)
    lam = config.fparam("lam", 2.0)
    r = config.fparam("r", 2.0)
    tasks = [
        (
            config.seed,
            rep,
            config.sample_box().side,
            config.effective_margin,
            config.window,
            p,
            lam,
            r,
        )
        for rep in range(config.reps)
    ]
    t0 = time.perf_counter()
    results = _run_batch(_unique_task, tasks, config.threads)
    wall = time.perf_counter() - t0
    counts = [c for _rep, excluded, c in results if not excluded]
    n_excluded = config.reps - len(counts)
    rows = []
    for k in sorted(set(counts)):
        hits = sum(c == k for c in counts)
        rows.append(
            SweepRow(
                params=(("count", float(k)),),
                estimate=_freq_record(hits, len(counts), config.seed, wall),
                n_excluded=n_excluded,
            )
        )
    return SweepResult(axes=("count",), rows=tuple(rows))


# ---------------------------------------------------------------------------
# derivative comparison on the street-level graph


def _interp_table(ells: np.ndarray, vals: np.ndarray):
    return PchipInterpolator(np.log(ells), vals, extrapolate=False)


def _edge_prob_fn(t, ells: np.ndarray, vals: np.ndarray, clamp: bool):
    """Per-edge value lookup: one vectorized interpolation per replicate."""
    lengths = np.array([e.length for e in t.edges])
    out = _interp_table(ells, vals)(np.log(lengths))
    if np.any(np.isnan(out)):
        raise model.MissingCoverageValue("edge length outside table range")
    if clamp:
        out = np.clip(out, 0.0, 1.0)
    lut = {float(l): float(v) for l, v in zip(lengths, out)}
    return lut.__getitem__


def _russo_task(args: tuple) -> tuple:
    (
        master,
        rep,
        side,
        margin,
        alpha,
        beta,
        p,
        infinite_r,
        ells,
        p_lo,
        p_mid,
        p_hi,
        r_lo,
        r_hi,
        dlam,
        with_pivotal,
    ) = args
    t = _sample_triangulation(master, rep, side)
    inner = AxisBox(center=Point2(0.0, 0.0), side=2.0 * beta)
    if t is None or delaunay.stabilization_radius(t, inner) >= margin:
        return rep, True, ()
    seed = derive_seed(master, rep, 1)
    params = model.ModelParams(p=p, lam=0.0, r=1.0)
    center = Point2(0.0, 0.0)
    ells = np.asarray(ells)

    def arm_with(vals) -> Tuple[bool, object]:
        if infinite_r:
            fn = lambda ell: 1.0
        else:
            fn = _edge_prob_fn(t, ells, np.asarray(vals), clamp=True)
        sg = model.build_bernoulli_edges(t, params, fn, seed)
        lab = perc.components_street(sg, t)
        return perc.arm_event(lab, sg, alpha, beta, center), sg

    try:
        hit_mid, sg_mid = arm_with(p_mid)
        hit_plam, _ = arm_with(p_hi)
        hit_mlam, _ = arm_with(p_lo)
        hit_pr, _ = arm_with(r_hi)
        hit_mr, _ = arm_with(r_lo)
        piv_sum = 0.0
        if with_pivotal and not infinite_r:
            dfn = _edge_prob_fn(t, ells, np.asarray(dlam), clamp=False)
            piv = perc.pivotal_edges_annulus(sg_mid, t, alpha, beta, center)
            piv_sum = float(sum(dfn(e.length) for e in piv))
    except model.MissingCoverageValue:
        return rep, True, ()
    return rep, False, (hit_mid, hit_plam, hit_mlam, hit_pr, hit_mr, piv_sum)


def _coverage_knots(
    lam: float, r: float, ell_lo: float, ell_hi: float, kpd: int, n_samples: int, seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    tab = CoverageTable.build(
        ell_lo, ell_hi, lam=lam, r=r, n_samples=n_samples, seed=seed,
        knots_per_decade=kpd,
    )
    return tab.ells, tab.probs


def _pooled_record(values: np.ndarray, seed: int, wall: float, scale: float = 1.0) -> EstimateRecord:
    n = values.size
    if n == 0:
        return EstimateRecord(math.nan, math.nan, 0, seed, wall)
    mean = float(np.mean(values)) * scale
    sd = float(np.std(values, ddof=1)) if n > 1 else 0.0
    return EstimateRecord(mean, sd * scale / math.sqrt(n), n, seed, wall)


def _russo_point(
    config: RunConfig,
    p: float,
    lam: float,
    r: float,
    alpha: float,
    beta: float,
    reps: int,
    with_pivotal: bool,
) -> tuple:
    """Derivative estimates of the arm probability at one (lambda, r)."""
    h_lam = config.fparam("h_lam", 0.25)
    h_r = config.fparam("h_r", 0.1 * r if math.isfinite(r) else 0.1)
    if not 0.0 < h_lam <= lam or lam == 0.0:
        h_lam = min(max(h_lam, 0.05), lam) if lam > 0.0 else 0.25
    if math.isfinite(r) and not 0.0 < h_r < r:
        h_r = 0.1 * r
    infinite_r = math.isinf(r)
    side = 2.0 * beta + 2.0 * config.effective_margin
    kpd = int(config.param("knots_per_decade", 16))
    knot_samples = int(config.param("knot_samples", 30_000))
    ell_lo, ell_hi = 1e-3, 1.5 * side

    if infinite_r:
        ells = np.array([ell_lo, ell_hi])
        p_mid = p_lo = p_hi = r_lo = r_hi = np.array([1.0, 1.0])
        dlam = np.array([0.0, 0.0])
    else:
        tab_seed = derive_seed(config.seed, 0xAB1E)
        lam_lo, lam_hi = max(lam - h_lam, 0.0), lam + h_lam
        ells, p_mid = _coverage_knots(lam, r, ell_lo, ell_hi, kpd, knot_samples, tab_seed)
        _, p_lo = _coverage_knots(lam_lo, r, ell_lo, ell_hi, kpd, knot_samples, tab_seed)
        _, p_hi = _coverage_knots(lam_hi, r, ell_lo, ell_hi, kpd, knot_samples, tab_seed)
        _, r_lo = _coverage_knots(lam, r - h_r, ell_lo, ell_hi, kpd, knot_samples, tab_seed)
        _, r_hi = _coverage_knots(lam, r + h_r, ell_lo, ell_hi, kpd, knot_samples, tab_seed)
        dlam = np.array(
            [
                mc_dlambda(
                    CoverageParams(float(e), lam, r), knot_samples,
                    derive_seed(config.seed, 0xD1, k),
                ).value
                for k, e in enumerate(ells)
            ]
        )
        lam_span = lam_hi - lam_lo
    tasks = [
        (
            config.seed,
            rep,
            side,
            config.effective_margin,
            alpha,
            beta,
            p,
            infinite_r,
            tuple(float(x) for x in ells),
            tuple(float(x) for x in p_lo),
            tuple(float(x) for x in p_mid),
            tuple(float(x) for x in p_hi),
            tuple(float(x) for x in r_lo),
            tuple(float(x) for x in r_hi),
            tuple(float(x) for x in dlam),
            with_pivotal,
        )
        for rep in range(reps)
    ]
    t0 = time.perf_counter()
    results = _run_batch(_russo_task, tasks, config.threads)
    wall = time.perf_counter() - t0
    rows = [vals for _rep, excluded, vals in results if not excluded]
    n_excluded = reps - len(rows)
    arr = np.array(rows, dtype=float) if rows else np.zeros((0, 6))
    theta = _pooled_record(arr[:, 0], config.seed, wall)
    span = (2.0 * h_lam) if infinite_r else lam_span
    fd_lam_samples = (arr[:, 1] - arr[:, 2]) / span
    fd_lam = _pooled_record(fd_lam_samples, config.seed, wall)
    fd_r = _pooled_record(arr[:, 3] - arr[:, 4], config.seed, wall, scale=1.0 / (2.0 * h_r))
    piv = _pooled_record(arr[:, 5], config.seed, wall) if with_pivotal else None
    # shared replicates: the agreement test uses the paired difference
    agree = (
        _pooled_record(arr[:, 5] - fd_lam_samples, config.seed, wall)
        if with_pivotal
        else None
    )
    return theta, fd_lam, fd_r, piv, agree, n_excluded


def _derivative_bound(lam: float, r: float, fd_lam: EstimateRecord, fd_r: EstimateRecord) -> DerivativeLink:
    factor = c_sup(r) * math.exp(lam * r / 2.0)
    rhs = factor * fd_r.value
    sigma = math.hypot(fd_lam.stderr, factor * fd_r.stderr)
    return DerivativeLink(
        lhs=fd_lam.value,
        rhs=rhs,
        sigma=sigma,
        satisfied=bool(fd_lam.value <= rhs + 3.0 * sigma),
    )


def cmd_russo(config: RunConfig) -> RussoReport:
    """Annulus-crossing derivative in lambda, two independent routes.

    Route (a) sums the lambda-derivative of the edge coverage probability
    over the pivotal streets of each replicate; route (b) is a coupled
    central finite difference of the crossing frequency.  The r-derivative
    comes from the same coupled finite-difference scheme, and each
    (lambda, r) point evaluates d_lambda <= c_sup(r) e^{lambda r/2} d_r
    with three-sigma slack.
    """
    p = config.fparam("p", 0.8)
    lam = config.fparam("lam", 0.5)
    r = config.fparam("r", 1.5)
    beta = config.fparam("n", 6.0)
    alpha = config.fparam("alpha", 1.0)
    if not 0.0 < alpha < beta:
        raise ConfigError(f"need 0 < alpha < n, got alpha={alpha}, n={beta}")
    if beta > 8.0:
        raise ConfigError(f"annulus outer radius n must be <= 8, got {beta}")

    theta, fd_lam, fd_r, piv, agree, n_excluded = _russo_point(
        config, p, lam, r, alpha, beta, config.reps, with_pivotal=True
    )
    agreement_z = agree.value / agree.stderr if agree.stderr > 0 else 0.0
    inequality = None
    if math.isfinite(r):
        inequality = _derivative_bound(lam, r, fd_lam, fd_r)

    grid_points: List[RussoPoint] = []
    if "lams" in config.params or "rs" in config.params:
        lams = config.grid_param("lams", [lam])
        rs = config.grid_param("rs", [r])
        grid_reps = int(config.param("grid_reps", max(200, config.reps // 10)))
        for gl in lams:
            for gr in rs:
                _th, g_lam, g_r, _piv, _agree, _exc = _russo_point(
                    config, p, gl, gr, alpha, beta, grid_reps, with_pivotal=False
                )
                grid_points.append(
                    RussoPoint(
                        lam=gl,
                        r=gr,
                        d_lambda=g_lam,
                        d_r=g_r,
                        bound=_derivative_bound(gl, gr, g_lam, g_r),
                    )
                )
    return RussoReport(
        theta=theta,
        pivotal_sum=piv,
        fd_lambda=fd_lam,
        fd_r=fd_r,
        agreement_z=agreement_z,
        inequality=inequality,
        n_excluded=n_excluded,
        grid=tuple(grid_points),
    )


# ---------------------------------------------------------------------------
# property fuzzing


def _fuzz_points(rng, n_max: int) -> np.ndarray:
    n = int(rng.integers(3, n_max + 1))
    return rng.uniform(0.0, 10.0, size=(n, 2))


def _fuzz_delaunay(rng, n_max: int, mutate: bool) -> Optional[str]:
    from .geometry import incircle_sign

    pts = _fuzz_points(rng, max(6, n_max // 4))
    try:
        t = delaunay.build_xy(pts[:, 0], pts[:, 1])
    except delaunay.AllCollinear:
        return None
    tris = list(t.triangles)
    if mutate and tris:
        tris = tris[1:]
    n, h = len(t.vertices), len(t.hull)
    if len(tris) != 2 * n - 2 - h or len(t.edges) != 3 * n - 3 - h:
        return f"euler counts off for n={n}, hull={h}"
    for tri in tris:
        a, b, c = (t.vertices[v] for v in tri)
        for v in range(n):
            if v in tri:
                continue
            d = t.vertices[v]
            if incircle_sign(a.x, a.y, b.x, b.y, c.x, c.y, d.x, d.y) > 0:
                return f"vertex {v} inside circumdisk of triangle {tuple(tri)}"
    return None


def _fuzz_trace(rng, n_max: int, mutate: bool) -> Optional[str]:
    from .geometry import Ball

    pts = _fuzz_points(rng, n_max)
    try:
        t = delaunay.build_xy(pts[:, 0], pts[:, 1])
    except delaunay.AllCollinear:
        return None
    cx, cy = rng.uniform(2.0, 8.0, 2)
    rad = float(rng.uniform(0.8, 4.0))
    tg = delaunay.trace_in_ball(t, Ball(center=Point2(cx, cy), radius=rad))
    nodes = set(tg.node_set())
    if not nodes:
        return None
    if mutate:
        nodes.add(-1)
    adj = {v: [] for v in nodes}
    for e in tg.edges:
        adj[e.u].append(e.v)
        adj[e.v].append(e.u)
    seen = {next(iter(sorted(nodes)))}
    stack = list(seen)
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != len(nodes):
        return f"trace in ball({cx:.2f},{cy:.2f};{rad:.2f}) disconnected"
    return None


def _fuzz_half_disk(rng, n_max: int, mutate: bool) -> Optional[str]:
    from .geometry import HalfDiskStatus, empty_half_disk

    pts = _fuzz_points(rng, max(6, n_max // 4))
    try:
        t = delaunay.build_xy(pts[:, 0], pts[:, 1])
    except delaunay.AllCollinear:
        return None
    coords = t.vertices
    for e in t.edges:
        others = [coords[k] for k in range(len(coords)) if k not in (e.u, e.v)]
        if mutate:
            # plant a point just off the midpoint on each side of the chord
            a, b = coords[e.u], coords[e.v]
            mx, my = 0.5 * (a.x + b.x), 0.5 * (a.y + b.y)
            nx, ny = -(b.y - a.y), b.x - a.x
            scale = 0.01 / math.hypot(nx, ny)
            others = others + [
                Point2(mx + scale * e.length * nx, my + scale * e.length * ny),
                Point2(mx - scale * e.length * nx, my - scale * e.length * ny),
            ]
        if empty_half_disk(coords[e.u], coords[e.v], others) == HalfDiskStatus.NEITHER:
            return f"edge {e.pair} has no empty half-disk"
    return None


def _fuzz_coverage(rng, _n_max: int, mutate: bool) -> Optional[str]:
    from .coverage1d import phi, psi, w

    ell = float(rng.uniform(0.05, 8.0))
    r = float(rng.uniform(0.1, 4.0))
    x = float(rng.uniform(0.0, ell))
    y = float(rng.uniform(x, ell))
    bias = 1e-6 if mutate else 0.0
    ident = phi(x, x, ell, r) + psi(x, x, ell, r) + bias - 1.0
    if abs(ident) > 1e-12:
        return f"phi+psi identity off by {ident:.2e} at (x={x:.3f}, ell={ell:.3f}, r={r:.3f})"
    v = phi(x, x, ell, r)
    if not (w(ell, 2.0 * r) - 1e-12 <= v <= w(ell, r) + 1e-12):
        return f"phi diagonal outside W bounds at (x={x:.3f}, ell={ell:.3f}, r={r:.3f})"
    if phi(x, y, ell, r) > v + 1e-12:
        return f"interval avoidance above point avoidance at (x={x:.3f}, y={y:.3f})"
    return None


def _fuzz_monotone(rng, _n_max: int, mutate: bool) -> Optional[str]:
    master = int(rng.integers(0, 2**32))
    rep = int(rng.integers(0, 1000))
    side, margin, inner = 26.0, 8.0, 10.0
    grids = {
        "p": [(q, 0.5, 1.0) for q in (0.3, 0.6, 0.9)],
        "lam": [(0.7, q, 1.0) for q in (0.0, 1.0, 3.0)],
        "r": [(0.7, 0.5, q) for q in (0.5, 1.0, 2.0)],
    }
    for axis, grid in grids.items():
        lam_max = max(lam for _p, lam, _r in grid)
        _rep, excluded, inds = _crossing_task(
            (master, rep, side, margin, inner, tuple(grid), lam_max)
        )
        if excluded:
            continue
        inds = list(inds)
        if mutate:
            inds[0], inds[-1] = True, False
        for a, b in zip(inds, inds[1:]):
            if a > b:
                return f"crossing indicator decreased along {axis} (seed {master})"
    return None


_FUZZ_SUITES = (
    ("delaunay_oracle", _fuzz_delaunay, 20),
    ("trace_connectivity", _fuzz_trace, 1),
    ("half_disk", _fuzz_half_disk, 5),
    ("coverage_identities", _fuzz_coverage, 1),
    ("monotone_coupling", _fuzz_monotone, 100),
)


def cmd_fuzz(config: RunConfig) -> FuzzReport:
    """Randomized property suites with counts and first counterexample.

    ``params["fault"]`` names a suite whose checked object is corrupted
    on purpose (sensitivity self-test); the suite must then report at
    least one failure.
    """
    budget = int(config.param("budget", 1000))
    n_max = int(config.param("n_max", 60))
    fault = config.param("fault", None)
    only = config.param("suites", None)
    if budget < 1:
        raise ConfigError(f"budget must be >= 1, got {budget}")
    suites = []
    for si, (name, fn, divisor) in enumerate(_FUZZ_SUITES):
        if only is not None and name not in only:
            continue
        cases = max(1, budget // divisor)
        rng = np.random.default_rng(derive_seed(config.seed, 0xF0, si))
        failures = 0
        first = None
        for case in range(cases):
            msg = fn(rng, n_max, mutate=(fault == name))
            if msg is not None:
                failures += 1
                if first is None:
                    first = f"case {case}: {msg}"
        suites.append(FuzzSuite(name=name, cases=cases, failures=failures, first_failure=first))
    if only is not None and not suites:
        raise ConfigError(f"no such fuzz suite: {only!r}")
    return FuzzReport(suites=tuple(suites))
