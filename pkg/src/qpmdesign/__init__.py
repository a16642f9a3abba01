"""Aperiodic poling design for quasi-phase-matched crystals.

Exact evaluators for the effective nonlinear coefficients of +/-1 domain
patterns, a hybrid differential-evolution / discrete grey-wolf optimizer
with deterministic parallel evaluation, and the benchmarking and file I/O
around them.
"""

from ._kernels import backend as kernel_backend
from .bench import (
    ComparisonReport,
    RunStatistics,
    brute_force_oracle,
    compare_algorithms,
    run_scenario,
    run_trials,
)
from .config import ConfigError, RunConfig, load_config
from .objectives import (
    ObjectiveSpec,
    PatternObjective,
    fitness_multi,
    fitness_single,
    make_objective,
    multi_objective,
)
from .optimizer import (
    AdaptiveState,
    DEParams,
    GWOParams,
    Individual,
    Population,
    RunResult,
    Schedules,
    run,
    run_de,
    run_gwo,
    run_hybrid,
)
from .parexec import BatchJob, TimingReport, evaluate_batch, reduce_best, time_run
from .physics import (
    DispersionModel,
    DomainPattern,
    MismatchTable,
    PhaseMismatchPair,
    deff_shg,
    deff_thg,
    phase_mismatches,
    refractive_index,
    sweep_spectrum,
)

__version__ = "0.1.0"
