"""Monte Carlo sweep orchestration and aggregation.

Runs deterministic batches of missions over randomly sampled
(availability, latency) pairs and reduces the records into
success-rate/completion-time surfaces, communicability curves, and the
fixed-availability latency-blockage report.  Sampling derives one 64-bit
seed per run index from the base seed, so results are independent of
worker count and scheduling.
"""

from __future__ import annotations

import math
import multiprocessing as mp
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rcp
from .channel import LossPolicy
from .errors import ConfigError
from .mission import MissionContext, RunConfig, RunRecord, ScenarioConfig, run_mission
from .params import AircraftParams

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def mix_seed(base_seed: int, index: int, stream: int = 0) -> int:
    """Avalanche-quality 64-bit mix of (base seed, run index, stream)."""
    z = (base_seed + (index + 1) * _GOLDEN + stream * 0xD1B54A32D192ED03) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def _unit_double(bits: int) -> float:
    return (bits >> 11) * (1.0 / (1 << 53))


@dataclass(frozen=True)
class SweepConfig:
    """Sampling plan for one scenario sweep.

    Availability is uniform on [pa_lo, pa_hi], latency uniform on
    [eps_lo, eps_hi]; both snap to the grid step, which must divide the
    ranges exactly.
    """

    n_samples: int
    base_seed: int = 0
    worker_count: int = 1
    pa_lo: float = 0.5
    pa_hi: float = 1.0
    eps_lo: float = 0.0
    eps_hi: float = 0.1
    grid_step: float = 1e-3
    loss_policy: LossPolicy = field(default_factory=LossPolicy)

    def __post_init__(self):
        if self.n_samples <= 0:
            raise ConfigError("n_samples must be positive")
        if self.worker_count <= 0:
            raise ConfigError("worker_count must be positive")
        inv = round(1.0 / self.grid_step)
        if abs(inv * self.grid_step - 1.0) > 1e-9:
            raise ConfigError("grid step must be the reciprocal of an integer")
        for lo, hi, what in (
            (self.pa_lo, self.pa_hi, "availability"),
            (self.eps_lo, self.eps_hi, "latency"),
        ):
            if not lo < hi:
                raise ConfigError(f"{what} range must be increasing")
            ratio = (hi - lo) / self.grid_step
            if abs(ratio - round(ratio)) > 1e-9:
                raise ConfigError(f"grid step must divide the {what} range exactly")

    def sample(self, index: int) -> RunConfig:
        """The (p_a, epsilon, seed) triple for a run index, grid-snapped.

        Snapped values are computed as integer grid counts over the
        step reciprocal, so they are exact decimal grid points.
        """
        pa_bits = mix_seed(self.base_seed, index, stream=1)
        eps_bits = mix_seed(self.base_seed, index, stream=2)
        inv = round(1.0 / self.grid_step)
        pa = self.pa_lo + _unit_double(pa_bits) * (self.pa_hi - self.pa_lo)
        eps = self.eps_lo + _unit_double(eps_bits) * (self.eps_hi - self.eps_lo)
        pa = round(pa * inv) / inv
        eps = round(eps * inv) / inv
        return RunConfig(
            p_a=pa,
            epsilon=eps,
            seed=mix_seed(self.base_seed, index, stream=0),
            loss_policy=self.loss_policy,
        )


_WORKER_CTX: MissionContext | None = None
_WORKER_SWEEP: SweepConfig | None = None


def _worker_init(ctx: MissionContext, sweep: SweepConfig):
    global _WORKER_CTX, _WORKER_SWEEP
    _WORKER_CTX = ctx
    _WORKER_SWEEP = sweep


def _worker_run(index: int) -> RunRecord:
    run = _WORKER_SWEEP.sample(index)
    return run_mission(_WORKER_CTX, run, run_id=index).record


def run_sweep(
    scenario: ScenarioConfig,
    sweep: SweepConfig,
    params: AircraftParams | None = None,
    gains_path: str | Path | None = None,
    progress: bool = False,
) -> list[RunRecord]:
    """Execute the full sweep; records come back ordered by run index.

    Workers are forked processes sharing the prepared mission context
    read-only; per-index seeding makes the record set identical for any
    worker count.  A worker crash aborts the sweep with the partial
    results noted in the raised error.
    """
    ctx = MissionContext.prepare(scenario, params, gains_path)
    indices = range(sweep.n_samples)

    if sweep.worker_count == 1:
        records = []
        for i in indices:
            _worker_init(ctx, sweep)
            records.append(_worker_run(i))
            if progress and (i + 1) % 500 == 0:
                print(f"sweep: {i + 1}/{sweep.n_samples}", file=sys.stderr, flush=True)
        return records

    mp_ctx = mp.get_context("fork")
    chunk = max(16, sweep.n_samples // (sweep.worker_count * 8))
    done = 0
    results: list[RunRecord | None] = [None] * sweep.n_samples
    try:
        with mp_ctx.Pool(
            sweep.worker_count, initializer=_worker_init, initargs=(ctx, sweep)
        ) as pool:
            for rec in pool.imap_unordered(_worker_run, indices, chunksize=chunk):
                results[rec.run_id] = rec
                done += 1
                if progress and done % 500 == 0:
                    print(f"sweep: {done}/{sweep.n_samples}", file=sys.stderr, flush=True)
    except Exception as exc:
        n_done = sum(r is not None for r in results)
        raise RuntimeError(
            f"sweep aborted after {n_done}/{sweep.n_samples} runs: {exc}"
        ) from exc
    return results  # every slot filled; ordered by run index


def write_records_csv(records: list[RunRecord], path_or_handle) -> None:
    if hasattr(path_or_handle, "write"):
        fh = path_or_handle
        fh.write(RunRecord.CSV_HEADER + "\n")
        for rec in records:
            fh.write(rec.csv_row() + "\n")
    else:
        with open(path_or_handle, "w", newline="") as fh:
            write_records_csv(records, fh)


def read_records_csv(path) -> list[RunRecord]:
    import csv as _csv

    with open(path, newline="") as fh:
        reader = _csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != RunRecord.CSV_HEADER:
            raise ConfigError(f"{path}: not a records CSV (bad header)")
        return [RunRecord.from_csv_row(row) for row in reader]


@dataclass
class EnvelopeCell:
    """Merge-friendly per-bin tally: a commutative monoid under merge."""

    count: int = 0
    successes: int = 0
    time_sum: float = 0.0
    time_count: int = 0

    def add(self, rec: RunRecord):
        self.count += 1
        if rec.success:
            self.successes += 1
            self.time_sum += rec.completion_time
            self.time_count += 1

    def merge(self, other: "EnvelopeCell") -> "EnvelopeCell":
        return EnvelopeCell(
            self.count + other.count,
            self.successes + other.successes,
            self.time_sum + other.time_sum,
            self.time_count + other.time_count,
        )

    @property
    def success_rate(self) -> float:
        return self.successes / self.count

    @property
    def mean_completion_time(self) -> float | None:
        return self.time_sum / self.time_count if self.time_count else None


@dataclass
class EnvelopeGrid:
    """Binned (availability x latency) mission statistics.

    Only bins that received samples are materialized; empty bins are
    absent rather than zero-filled.
    """

    pa_edges: np.ndarray
    eps_edges: np.ndarray
    cells: dict[tuple[int, int], EnvelopeCell]

    CSV_HEADER = (
        "pa_bin_lo,pa_bin_hi,eps_bin_lo,eps_bin_hi,count,success_rate,mean_completion_time_s"
    )

    def merge(self, other: "EnvelopeGrid") -> "EnvelopeGrid":
        if not (
            np.array_equal(self.pa_edges, other.pa_edges)
            and np.array_equal(self.eps_edges, other.eps_edges)
        ):
            raise ValueError("cannot merge grids with different bin edges")
        cells = dict(self.cells)
        for key, cell in other.cells.items():
            cells[key] = cells[key].merge(cell) if key in cells else cell
        return EnvelopeGrid(self.pa_edges, self.eps_edges, cells)

    def rows(self):
        for (i, j) in sorted(self.cells):
            cell = self.cells[(i, j)]
            mt = cell.mean_completion_time
            yield (
                f"{self.pa_edges[i]:.6g},{self.pa_edges[i + 1]:.6g},"
                f"{self.eps_edges[j]:.6g},{self.eps_edges[j + 1]:.6g},"
                f"{cell.count},{cell.success_rate:.6f},"
                f"{'' if mt is None else f'{mt:.6f}'}"
            )

    def write_csv(self, path_or_handle):
        if hasattr(path_or_handle, "write"):
            fh = path_or_handle
            fh.write(self.CSV_HEADER + "\n")
            for row in self.rows():
                fh.write(row + "\n")
        else:
            with open(path_or_handle, "w", newline="") as fh:
                self.write_csv(fh)


def _bin_index(value: float, edges: np.ndarray) -> int:
    """Half-open bins [lo, hi); the final bin includes its upper edge."""
    idx = int(np.searchsorted(edges, value, side="right")) - 1
    if idx == len(edges) - 1 and value == edges[-1]:
        idx -= 1
    if not 0 <= idx < len(edges) - 1:
        raise ValueError(f"value {value} outside bin range [{edges[0]}, {edges[-1]}]")
    return idx


def build_surface(
    records: list[RunRecord],
    pa_bins: int,
    eps_bins: int,
    pa_range: tuple[float, float] = (0.5, 1.0),
    eps_range: tuple[float, float] = (0.0, 0.1),
) -> EnvelopeGrid:
    """Success-rate and completion-time surface over the parameter grid.

    Success rate is successes over samples per bin; mean completion time
    averages successful runs only (absent when a bin has no successes).
    Aggregation is associative: any partition of the records merges to
    the same grid.
    """
    if not records:
        raise ValueError("no records to aggregate")
    pa_edges = np.linspace(pa_range[0], pa_range[1], pa_bins + 1)
    eps_edges = np.linspace(eps_range[0], eps_range[1], eps_bins + 1)
    cells: dict[tuple[int, int], EnvelopeCell] = {}
    for rec in records:
        key = (_bin_index(rec.p_a, pa_edges), _bin_index(rec.epsilon, eps_edges))
        cells.setdefault(key, EnvelopeCell()).add(rec)
    return EnvelopeGrid(pa_edges, eps_edges, cells)


@dataclass(frozen=True)
class CurvePoint:
    eps_lo: float
    eps_hi: float
    p_comm_bin: float
    success_rate: float
    count: int


CURVES_CSV_HEADER = "eps_interval_lo,eps_interval_hi,p_comm_bin,success_rate,count"


def communicability_curves(
    records: list[RunRecord],
    msg: rcp.MessageSpec,
    eps_intervals: list[tuple[float, float]],
    p_comm_bins: int = 20,
) -> list[CurvePoint]:
    """Mission success rate versus communicability, per latency interval.

    Each record maps to its communicability value; within each latency
    interval, records are binned by that value and reduced to success
    rates.  Intervals are half-open [lo, hi) with the last closed, and
    must cover every record exactly once.
    """
    for (lo, hi) in eps_intervals:
        if not lo < hi:
            raise ValueError("latency intervals must be increasing")

    def interval_of(eps: float) -> int:
        matches = [
            k
            for k, (lo, hi) in enumerate(eps_intervals)
            if (lo <= eps < hi) or (k == len(eps_intervals) - 1 and eps == hi)
        ]
        if len(matches) != 1:
            raise ValueError(
                f"latency {eps} covered by {len(matches)} intervals; need exactly one"
            )
        return matches[0]

    edges = np.linspace(0.0, 1.0, p_comm_bins + 1)
    tallies: dict[tuple[int, int], list[int]] = {}
    for rec in records:
        k = interval_of(rec.epsilon)
        p_comm = rcp.communicability(rec.p_a, msg, rec.epsilon)
        b = _bin_index(p_comm, edges)
        cell = tallies.setdefault((k, b), [0, 0])
        cell[0] += 1
        cell[1] += int(rec.success)
    points = []
    for (k, b) in sorted(tallies):
        count, succ = tallies[(k, b)]
        lo, hi = eps_intervals[k]
        points.append(
            CurvePoint(
                eps_lo=lo,
                eps_hi=hi,
                p_comm_bin=float(0.5 * (edges[b] + edges[b + 1])),
                success_rate=succ / count,
                count=count,
            )
        )
    return points


def write_curves_csv(points: list[CurvePoint], path_or_handle):
    if hasattr(path_or_handle, "write"):
        fh = path_or_handle
        fh.write(CURVES_CSV_HEADER + "\n")
        for pt in points:
            fh.write(
                f"{pt.eps_lo:.6g},{pt.eps_hi:.6g},{pt.p_comm_bin:.6f},"
                f"{pt.success_rate:.6f},{pt.count}\n"
            )
    else:
        with open(path_or_handle, "w", newline="") as fh:
            write_curves_csv(points, fh)


@dataclass(frozen=True)
class BlockageReport:
    """Deterministic latency sweep at full availability, plus flagged bands.

    A band is a maximal run of failing latencies strictly between
    succeeding ones: evidence that success is non-monotonic in latency.
    """

    epsilons: np.ndarray
    successes: np.ndarray
    completion_times: np.ndarray  # nan where failed
    bands: list[tuple[float, float]]

    CSV_HEADER = "epsilon,success,completion_time_s"

    def write_csv(self, path_or_handle):
        if hasattr(path_or_handle, "write"):
            fh = path_or_handle
            fh.write(self.CSV_HEADER + "\n")
            for e, s, t in zip(self.epsilons, self.successes, self.completion_times):
                ts = f"{t:.6f}" if math.isfinite(t) else ""
                fh.write(f"{e:.6g},{'true' if s else 'false'},{ts}\n")
            fh.write("# blockage_bands\n")
            for lo, hi in self.bands:
                fh.write(f"# band,{lo:.6g},{hi:.6g}\n")
        else:
            with open(path_or_handle, "w", newline="") as fh:
                self.write_csv(fh)


def find_blockage_bands(
    epsilons: np.ndarray, successes: np.ndarray
) -> list[tuple[float, float]]:
    """Maximal failure runs with success on both sides (S..F..S patterns)."""
    bands = []
    n = len(epsilons)
    i = 0
    while i < n:
        if not successes[i]:
            j = i
            while j + 1 < n and not successes[j + 1]:
                j += 1
            if i > 0 and successes[i - 1] and j < n - 1 and successes[j + 1]:
                bands.append((float(epsilons[i]), float(epsilons[j])))
            i = j + 1
        else:
            i += 1
    return bands


def latency_blockage_sweep(
    scenario: ScenarioConfig,
    eps_grid: np.ndarray,
    params: AircraftParams | None = None,
    gains_path: str | Path | None = None,
    p_a: float = 1.0,
    progress: bool = False,
) -> BlockageReport:
    """One deterministic run per latency at fixed availability.

    With p_a = 1 the link never drops, so each run is free of sampling
    randomness and the report isolates latency-induced failures.
    """
    eps_grid = np.asarray(eps_grid, dtype=float)
    if eps_grid.ndim != 1 or len(eps_grid) == 0 or np.any(np.diff(eps_grid) <= 0.0):
        raise ValueError("latency grid must be strictly increasing")
    ctx = MissionContext.prepare(scenario, params, gains_path)
    succ = np.zeros(len(eps_grid), dtype=bool)
    times = np.full(len(eps_grid), np.nan)
    for i, eps in enumerate(eps_grid):
        rec = run_mission(ctx, RunConfig(p_a=p_a, epsilon=float(eps), seed=0)).record
        succ[i] = rec.success
        if rec.success:
            times[i] = rec.completion_time
        if progress and (i + 1) % 10 == 0:
            print(f"blockage: {i + 1}/{len(eps_grid)}", file=sys.stderr, flush=True)
    return BlockageReport(
        epsilons=eps_grid,
        successes=succ,
        completion_times=times,
        bands=find_blockage_bands(eps_grid, succ),
    )
