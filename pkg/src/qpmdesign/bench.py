"""Statistical experiment harness: repeated trials, algorithm comparisons,
exhaustive oracles, and kernel/worker benchmarks.

Trial t of a batch always uses seed base_seed + t, and algorithm
comparisons reuse the same seed sequence per algorithm, so reports are
reproducible and seed-matched.  Aggregates use the sample standard
deviation (ddof=1, zero for a single trial).
"""

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from concurrent.futures import ThreadPoolExecutor

from . import _kernels, optimizer, parexec, rng
from .config import RunConfig
from .objectives import ObjectiveSpec, PatternObjective, make_objective
from .physics import MismatchTable, PhaseMismatchPair, ThgEvaluator


@dataclass(frozen=True)
class RunStatistics:
    """One algorithm's aggregate over repeated trials (one table row)."""

    algorithm: str
    trials: int
    average: float
    maximum: float
    minimum: float
    std: float
    mean_time_s: float
    mean_deff_norm: float

    def as_row(self) -> tuple:
        return (self.algorithm, self.average, self.maximum, self.minimum,
                self.std, self.mean_time_s, self.mean_deff_norm)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    final_fitness: float
    time_s: float
    deff_norm: float

    def as_row(self) -> tuple:
        return (self.trial, self.seed, self.final_fitness, self.time_s)


@dataclass(frozen=True)
class ComparisonReport:
    stats: dict
    mean_ratios: dict

    def ratio(self, numerator: str, denominator: str) -> float:
        return self.mean_ratios[f"{numerator}/{denominator}"]


def build_objective(cfg: RunConfig) -> PatternObjective:
    return make_objective(
        cfg.objective_spec(), cfg.mismatch_provider(), cfg.domain_thickness_um,
        cfg.n_domains,
    )


def run_scenario(cfg: RunConfig, algorithm: str = "hybrid", seed: int | None = None,
                 workers: int | None = None,
                 objective: PatternObjective | None = None) -> optimizer.RunResult:
    """Run one algorithm on the scenario a config describes."""
    if objective is None:
        objective = build_objective(cfg)
    return optimizer.run(
        algorithm,
        objective,
        dimension=cfg.n_domains,
        pop_size=cfg.np,
        generations=cfg.generations,
        seed=cfg.seed if seed is None else seed,
        de_params=cfg.de_params(),
        gwo_params=cfg.gwo_params(),
        schedules=cfg.schedules(),
        workers=cfg.workers if workers is None else workers,
        chunk_size=cfg.chunk_size or None,
    )


def run_trials(cfg: RunConfig, algorithm, trials: int, base_seed: int,
               workers: int | None = None,
               parallel_trials: bool = False) -> tuple[RunStatistics, list[TrialRecord]]:
    """Aggregate repeated runs; trial t uses seed base_seed + t.

    algorithm is one of optimizer.ALGORITHMS, or any callable
    (cfg, seed, objective) -> RunResult, which is how tests plug in stubs.
    Trials run sequentially by default (one trial already keeps the worker
    pool busy); parallel_trials runs them on a thread pool instead, which
    cannot change any result because seeds are per-trial.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    objective = build_objective(cfg)
    name = algorithm if isinstance(algorithm, str) else getattr(
        algorithm, "__name__", "custom")

    def one_trial(t: int) -> TrialRecord:
        seed = base_seed + t
        t0 = time.perf_counter()
        if callable(algorithm):
            result = algorithm(cfg, seed, objective)
        else:
            result = run_scenario(cfg, algorithm, seed=seed, workers=workers,
                                  objective=objective)
        elapsed = time.perf_counter() - t0
        deff = float(np.mean(objective.normalized_gains(result.best.projection)))
        return TrialRecord(trial=t, seed=seed, final_fitness=result.best.fitness,
                           time_s=elapsed, deff_norm=deff)

    if parallel_trials and trials > 1:
        with ThreadPoolExecutor(parexec.resolve_workers(min(trials, 4))) as pool:
            records = list(pool.map(one_trial, range(trials)))
    else:
        records = [one_trial(t) for t in range(trials)]

    finals = np.array([r.final_fitness for r in records])
    stats = RunStatistics(
        algorithm=name,
        trials=trials,
        average=float(np.mean(finals)),
        maximum=float(np.max(finals)),
        minimum=float(np.min(finals)),
        std=float(np.std(finals, ddof=1)) if trials > 1 else 0.0,
        mean_time_s=float(np.mean([r.time_s for r in records])),
        mean_deff_norm=float(np.mean([r.deff_norm for r in records])),
    )
    return stats, records


def compare_algorithms(cfg: RunConfig, trials: int, base_seed: int,
                       algorithms: Sequence = optimizer.ALGORITHMS,
                       workers: int | None = None) -> ComparisonReport:
    """Seed-matched comparison; includes every pairwise ratio of means.

    Requires at least 10 trials so the mean ratios carry some weight.
    """
    if trials < 10:
        raise ValueError(f"algorithm comparisons need trials >= 10, got {trials}")
    stats = {}
    for algorithm in algorithms:
        result, _ = run_trials(cfg, algorithm, trials, base_seed, workers=workers)
        stats[result.algorithm] = result
    ratios = {}
    for a in stats:
        for b in stats:
            if a != b and stats[b].average != 0.0:
                ratios[f"{a}/{b}"] = stats[a].average / stats[b].average
    return ComparisonReport(stats=stats, mean_ratios=ratios)


# ---------------------------------------------------------------------------
# exhaustive oracle
# ---------------------------------------------------------------------------

_ORACLE_LIMIT = 20


def lexicographic_signs(index: int, n: int) -> np.ndarray:
    """Pattern number `index` in the documented order: +1 sorts before -1.

    Bit n-1-j of the index gives sign j (0 -> +1, 1 -> -1), so index 0 is
    the all-up pattern and enumeration is lexicographic in that order.
    """
    bits = (index >> np.arange(n - 1, -1, -1)) & 1
    return (1 - 2 * bits).astype(np.int8)


def brute_force_oracle(objective, n: int,
                       chunk: int = 4096) -> tuple[np.ndarray, float]:
    """Global optimum over all 2^n sign patterns.

    Ties go to the lexicographically first pattern in the documented order
    (+1 before -1), so the all-up pattern beats its global flip.  Refuses
    n > 20 with a cost estimate rather than attempting it.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > _ORACLE_LIMIT:
        raise ValueError(
            f"n={n} needs 2^{n} = {2 ** n} evaluations; the exhaustive oracle "
            f"refuses n > {_ORACLE_LIMIT}"
        )
    total = 1 << n
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    best_fit = -np.inf
    best_index = -1
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        signs = (1 - 2 * ((idx[:, None] >> shifts) & 1)).astype(np.int8)
        if hasattr(objective, "evaluate_block"):
            fits = np.asarray(objective.evaluate_block(signs), dtype=np.float64)
        else:
            fits = np.array([objective(row) for row in signs], dtype=np.float64)
        local = int(np.argmax(fits))
        if fits[local] > best_fit:
            best_fit = float(fits[local])
            best_index = int(idx[local])
    return lexicographic_signs(best_index, n), best_fit


# ---------------------------------------------------------------------------
# desk-scale speedup and backend benchmarks
# ---------------------------------------------------------------------------

def random_population_matrix(rows: int, n: int, seed: int = 0) -> np.ndarray:
    u = rng.stream(seed, 0).uniforms(rows * n)
    return np.where(u < 0.5, -1, 1).astype(np.int8).reshape(rows, n)


def speedup_report(workers_list: Sequence[int], rows: int = 5000, n: int = 660,
                   repetitions: int = 5, seed: int = 0) -> parexec.TimingReport:
    """Wall-time scaling of one THG population evaluation across workers."""
    spec = ObjectiveSpec(variant="single_thg", pump_wavelengths_nm=(1404.0,))
    provider = MismatchTable({1404.0: PhaseMismatchPair(0.3, 0.7)})
    objective = make_objective(spec, provider, 1.0, n)
    items = random_population_matrix(rows, n, seed)
    return parexec.time_run(items, objective, workers_list, repetitions=repetitions)


def backend_benchmark(rows: int = 2000, n: int = 660, repetitions: int = 5,
                      seed: int = 0) -> list[tuple[str, float, float]]:
    """Median seconds per THG batch for each kernel backend.

    Rows: (backend, median_seconds, speedup_vs_numpy).  The numba row is
    present only when numba is importable and enabled.
    """
    signs = random_population_matrix(rows, n, seed)
    ev = ThgEvaluator(1.0, n, PhaseMismatchPair(0.3, 0.7))
    e1, b = ev._e1, ev._b

    def run_with(block_fn) -> float:
        out = np.empty(rows, dtype=np.complex128)
        block_fn(signs, e1, b, out)  # warm-up / JIT
        times = []
        for _ in range(repetitions):
            t0 = time.perf_counter()
            block_fn(signs, e1, b, out)
            times.append(time.perf_counter() - t0)
        times.sort()
        return times[len(times) // 2]

    numpy_t = run_with(_kernels.thg_block_numpy)
    rows_out = [("numpy", numpy_t, 1.0)]
    if _kernels.HAVE_NUMBA:
        numba_t = run_with(_kernels.thg_block_numba)
        rows_out.append(("numba", numba_t, numpy_t / numba_t))
    return rows_out
