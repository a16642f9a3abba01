"""Deterministic parallel batch evaluation and reductions.

Work is split into contiguous chunks and handed to a thread pool.  Every
result lands in its own output slot and no task reads another task's
output, so the returned values are bit-identical to a sequential pass no
matter how many workers run or how the OS schedules them.  Threads pay off
because the hot kernels release the GIL (see _kernels); the pure-numpy
fallback stays correct, just slower.

The environment variable QPMDESIGN_MAX_WORKERS, when set, caps the worker
count of every batch (useful on shared CI runners).
"""

import math
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

_POOLS: dict[int, ThreadPoolExecutor] = {}


class BatchEvaluationError(RuntimeError):
    """A batch failed; item_index locates the first offending item."""

    def __init__(self, item_index: int, cause: BaseException):
        super().__init__(f"evaluation of item {item_index} failed: {cause!r}")
        self.item_index = item_index
        self.__cause__ = cause


def resolve_workers(workers: int) -> int:
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    cap = os.environ.get("QPMDESIGN_MAX_WORKERS")
    if cap:
        workers = min(workers, max(1, int(cap)))
    return workers


def _pool(workers: int) -> ThreadPoolExecutor:
    pool = _POOLS.get(workers)
    if pool is None:
        pool = ThreadPoolExecutor(max_workers=workers)
        _POOLS[workers] = pool
    return pool


def default_chunk_size(n_items: int, workers: int) -> int:
    # ~4 chunks per worker; uneven per-item costs then balance out.
    return max(1, math.ceil(n_items / (4 * workers)))


@dataclass
class BatchJob:
    """items is a (rows, D) int8 matrix or any sequence of task payloads."""

    items: Sequence
    chunk_size: int | None = None
    workers: int = 1

    def __post_init__(self):
        if len(self.items) == 0:
            raise ValueError("batch items must be non-empty")
        if self.chunk_size is not None and self.chunk_size < 1:
            raise ValueError(f"chunk_size must be >= 1, got {self.chunk_size}")


def evaluate_batch(job: BatchJob, objective: Callable) -> np.ndarray:
    """Fitness of every item, in item order.

    objective must be pure per item.  When the items are a 2-d array and
    the objective provides evaluate_block, whole chunks go through the
    block path (one Python call per chunk); rows are still evaluated
    independently, so the output does not depend on chunking.  Any failure
    raises BatchEvaluationError with the item index attached and no partial
    results escape.
    """
    n = len(job.items)
    workers = resolve_workers(job.workers)
    chunk = job.chunk_size or default_chunk_size(n, workers)
    out = np.empty(n, dtype=np.float64)

    blockwise = (
        isinstance(job.items, np.ndarray)
        and job.items.ndim == 2
        and hasattr(objective, "evaluate_block")
    )

    def run_span(start: int, stop: int) -> None:
        if blockwise:
            try:
                out[start:stop] = objective.evaluate_block(job.items[start:stop])
                return
            except Exception:
                pass  # fall through to per-item to locate the failure
        for i in range(start, stop):
            try:
                out[i] = objective(job.items[i])
            except Exception as exc:
                raise BatchEvaluationError(i, exc) from exc

    spans = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]
    if workers == 1 or len(spans) == 1:
        for span in spans:
            run_span(*span)
    else:
        futures = [_pool(workers).submit(run_span, *span) for span in spans]
        first_error = None
        for fut in futures:
            exc = fut.exception()
            if exc is not None and first_error is None:
                first_error = exc
        if first_error is not None:
            raise first_error
    return out


def reduce_best(values: Sequence[float], k: int, workers: int = 1,
                chunk_size: int | None = None) -> list[int]:
    """Indices of the k largest values, best first, ties to the lower index.

    Chunked partial reductions (each chunk yields its local top-k) merged by
    one global sort of the k*chunks survivors; equals the sequential result
    for any chunking or worker count.
    """
    vals = np.asarray(values, dtype=np.float64)
    n = vals.size
    if n == 0:
        raise ValueError("cannot reduce an empty list")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    workers = resolve_workers(workers)
    chunk = chunk_size or default_chunk_size(n, workers)

    def local_top(start: int, stop: int) -> np.ndarray:
        idx = np.arange(start, stop)
        sub = vals[start:stop]
        take = min(k, stop - start)
        order = np.lexsort((idx, -sub))[:take]
        return idx[order]

    spans = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]
    if workers == 1 or len(spans) == 1:
        partials = [local_top(*span) for span in spans]
    else:
        partials = list(_pool(workers).map(lambda sp: local_top(*sp), spans))
    cand = np.concatenate(partials)
    order = np.lexsort((cand, -vals[cand]))[:k]
    return [int(i) for i in cand[order]]


@dataclass
class TimingReport:
    """Median wall times per worker count plus speedups vs the baseline."""

    rows: list[tuple[int, float, float]] = field(default_factory=list)

    @property
    def speedups(self) -> dict[int, float]:
        return {w: s for w, _, s in self.rows}


def time_run(items: Sequence, objective: Callable, workers_list: Sequence[int],
             repetitions: int = 5, warmup: int = 1,
             chunk_size: int | None = None) -> TimingReport:
    """Median-of-repetitions wall time of the batch at each worker count.

    One warm-up pass per worker count (also triggers JIT compilation) before
    timed repetitions on a monotonic clock.  Speedup is relative to the
    workers=1 entry when present, else to the first entry.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    medians = []
    for w in workers_list:
        job = BatchJob(items=items, chunk_size=chunk_size, workers=w)
        for _ in range(warmup):
            evaluate_batch(job, objective)
        times = []
        for _ in range(repetitions):
            t0 = time.perf_counter()
            evaluate_batch(job, objective)
            times.append(time.perf_counter() - t0)
        medians.append((int(w), statistics.median(times)))
    baseline = dict(medians).get(1, medians[0][1])
    report = TimingReport()
    for w, med in medians:
        report.rows.append((w, med, baseline / med))
    return report
