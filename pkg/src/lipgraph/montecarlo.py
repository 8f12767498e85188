"""Repeated trials of N_n and scaling sweeps over n.

Trial t of a batch draws its cloud from ``SeedSpec(master_seed, t)``. Cell i
of a scaling study runs a batch with master seed ``mix64(master_seed, i)``.
Work may be spread over processes, but results are always assembled by
trial/cell index, so output never depends on the worker count.
"""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .chain import LipClass, LipLike, as_lipclass, longest_chain_fast
from .pointcloud import GENERATOR_ID, SeedSpec, generate_uniform, mix64

DEFAULT_TRIALS = 50
DEFAULT_GRID = (100, 316, 1000, 3162, 10_000, 31_623, 100_000)


@dataclass(frozen=True)
class TrialBatch:
    n: int
    cls: LipClass
    trials: int
    master_seed: int
    values: tuple[int, ...]
    generator_id: str = GENERATOR_ID

    @property
    def L(self) -> float:
        return self.cls.L


@dataclass(frozen=True)
class ScalingRecord:
    n: int
    L: float
    trials: int
    median_N: float
    mean_N: float
    ratio_median: float
    ratio_mean: float
    median_over_sqrt2n: float
    stderr_mean: float


SCALING_FIELDS = tuple(ScalingRecord.__dataclass_fields__)


def trial_value(n: int, L: float, master_seed: int, trial: int) -> int:
    cloud = generate_uniform(n, SeedSpec(master_seed, trial))
    return longest_chain_fast(cloud, L, witness=False).value


def _trial_job(args):
    return trial_value(*args)


def _map_ordered(jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [_trial_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        # map() yields in submission order whatever the completion order
        return list(pool.map(_trial_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def run_trials(n: int, cls: LipLike, T: int, master_seed: int, workers: int = 1) -> TrialBatch:
    cls = as_lipclass(cls)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    SeedSpec(master_seed, 0)  # validates the seed range up front
    jobs = [(n, cls.L, master_seed, t) for t in range(T)]
    values = _map_ordered(jobs, workers)
    return TrialBatch(n=n, cls=cls, trials=T, master_seed=master_seed, values=tuple(values))


def summarize(batch: TrialBatch) -> ScalingRecord:
    values = list(batch.values)
    T = len(values)
    if T == 0:
        raise ValueError("cannot summarize an empty batch")
    median = float(statistics.median(values))
    mean = statistics.fmean(values)
    stderr = statistics.stdev(values) / math.sqrt(T) if T > 1 else 0.0
    root_n = math.sqrt(batch.n)
    return ScalingRecord(
        n=batch.n,
        L=batch.cls.L,
        trials=T,
        median_N=median,
        mean_N=mean,
        ratio_median=median / root_n,
        ratio_mean=mean / root_n,
        median_over_sqrt2n=median / math.sqrt(2 * batch.n),
        stderr_mean=stderr,
    )


def cell_seed(master_seed: int, cell: int) -> int:
    return mix64(master_seed, cell)


def scaling_study(n_grid: Sequence[int], cls: LipLike, T: int, master_seed: int,
                  workers: int = 1) -> list[ScalingRecord]:
    cls = as_lipclass(cls)
    grid = [int(n) for n in n_grid]
    if not grid:
        raise ValueError("n_grid must not be empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"n_grid must be strictly increasing, got {grid}")
    if grid[0] < 1:
        raise ValueError(f"grid sizes must be >= 1, got {grid[0]}")
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    SeedSpec(master_seed, 0)

    # one flat job list so every worker stays busy across cells
    seeds = [cell_seed(master_seed, i) for i in range(len(grid))]
    jobs = [(n, cls.L, s, t) for n, s in zip(grid, seeds) for t in range(T)]
    values = _map_ordered(jobs, workers)

    records = []
    for i, (n, s) in enumerate(zip(grid, seeds)):
        batch = TrialBatch(n=n, cls=cls, trials=T, master_seed=s,
                           values=tuple(values[i * T:(i + 1) * T]))
        records.append(summarize(batch))
    return records
