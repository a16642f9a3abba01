"""Hybrid DE / discrete grey-wolf search over +/-1 domain patterns.

Individuals carry a continuous genome; the +/-1 projection (sign of each
gene) is what gets evaluated.  Each generation runs, in order:

1. DE rand/1 mutation, binomial crossover, batch evaluation, greedy
   selection for every individual;
2. a parallel top-k reduction that ranks the leader wolves;
3. a discrete wolf-pack update of every non-leader: per dimension, either
   imitate a random leader (social learning), or follow the leaders' state
   distribution with early-phase random disturbance, or late-phase majority
   adoption with a small flip probability;
4. greedy re-selection of the updated wolves against their previous selves;
5. an update of the variation factor F from a cosine schedule modulated by
   population-diversity triggers and a quadratic late-run damping.

Randomness comes from counter-based streams keyed by (seed, generation,
individual); parallel evaluation consumes no randomness, so traces are
identical for any worker count.  All draws per individual per generation
follow a fixed documented order (mutation indices, crossover point, mask,
then the 6 x D wolf-update matrix), which makes streams replayable in
tests.
"""

import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import parexec, rng


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass
class Individual:
    """Continuous genome, its +/-1 projection, and a cached fitness.

    The genome is the single source of truth: projection[j] is +1 iff
    genome[j] >= 0.  Instances are treated as immutable; updates construct
    new Individuals, which keeps fitness caches trivially consistent.
    """

    genome: np.ndarray
    projection: np.ndarray
    fitness: float | None = None

    @classmethod
    def from_genome(cls, genome: np.ndarray, fitness: float | None = None) -> "Individual":
        genome = np.ascontiguousarray(genome, dtype=np.float64)
        projection = np.where(genome >= 0.0, 1, -1).astype(np.int8)
        return cls(genome=genome, projection=projection, fitness=fitness)


@dataclass
class Population:
    individuals: list[Individual]
    generation: int = 0
    rng_seed: int = 0

    def __post_init__(self):
        if len(self.individuals) < 4:
            raise ValueError(f"population size must be >= 4, got {len(self.individuals)}")

    @property
    def size(self) -> int:
        return len(self.individuals)

    @property
    def dimension(self) -> int:
        return int(self.individuals[0].genome.size)

    def fitness_values(self) -> np.ndarray:
        vals = [ind.fitness for ind in self.individuals]
        if any(v is None for v in vals):
            raise ValueError("population has unevaluated individuals")
        return np.asarray(vals, dtype=np.float64)


@dataclass
class DEParams:
    """DE control parameters; f is the current variation factor."""

    f: float = 0.1
    cr: float = 0.9
    f_min: float = 0.01
    f_max: float = 0.1
    x_min: float = -1.0
    x_max: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.f_min <= self.f_max <= 2.0):
            raise ValueError(f"need 0 < f_min <= f_max <= 2, got [{self.f_min}, {self.f_max}]")
        if not (0.0 <= self.cr <= 1.0):
            raise ValueError(f"cr must be in [0, 1], got {self.cr}")
        if not (self.f_min <= self.f <= self.f_max):
            raise ValueError(f"f={self.f} outside [{self.f_min}, {self.f_max}]")


@dataclass
class GWOParams:
    """Wolf-pack parameters; the p_* rates are per-generation values.

    a decays linearly from a to a_final over a continuous-GWO run (the
    canonical choice is 2 -> 0; sign-pattern comparison scenarios constrain
    it to 0.1 -> 0.01 like the variation factor, since larger steps flip
    too many domains at once).
    """

    a: float = 2.0
    a_final: float = 0.0
    leader_count: int = 4
    p_dist: float = 0.1
    p_sl: float = 0.05
    p_flip: float = 0.02
    discreteness_factor: float = 1.0
    divide_by_leader_count: bool = False

    def __post_init__(self):
        if not (0.0 <= self.a <= 2.0):
            raise ValueError(f"a must be in [0, 2], got {self.a}")
        if not (0.0 <= self.a_final <= self.a):
            raise ValueError(f"a_final must be in [0, a], got {self.a_final}")
        if self.leader_count not in (3, 4):
            raise ValueError(f"leader_count must be 3 or 4, got {self.leader_count}")
        for name in ("p_dist", "p_sl", "p_flip", "discreteness_factor"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass
class Schedules:
    """Generation-dependent rates and the diversity-trigger thresholds.

    Rates decrease linearly to zero over the run; the exploration phase
    ends at phase_split of the run.  Diversity thresholds scale with the
    generation-0 fitness std so the triggers are unit-free.
    """

    p_dist0: float = 0.1
    p_sl0: float = 0.05
    p_flip0: float = 0.02
    phase_split: float = 0.5
    decay_strength: float = 0.2
    theta_low_frac: float = 0.05
    theta_high_frac: float = 0.5
    range_trigger_frac: float = 1.0
    explore_boost: float = 1.2
    exploit_factor: float = 0.8
    conv_threshold: float = 0.1
    conv_window: int = 10
    adaptive_branches: bool = True

    def p_dist(self, g: int, total: int) -> float:
        return self.p_dist0 * (1.0 - g / total) if total else 0.0

    def p_sl(self, g: int, total: int) -> float:
        return self.p_sl0 * (1.0 - g / total) if total else 0.0

    def p_flip(self, g: int, total: int) -> float:
        return self.p_flip0 * (1.0 - g / total) if total else 0.0

    def decay_coeff(self, g: int, total: int) -> float:
        prog = g / total if total else 0.0
        return 1.0 - self.decay_strength * prog * prog

    def is_early(self, g: int, total: int) -> bool:
        return (g / total if total else 0.0) < self.phase_split


@dataclass
class AdaptiveState:
    """Population-diversity snapshot feeding the F update."""

    generation: int
    total_generations: int
    pop_std: float
    fit_range: float
    convergence_rate: float
    decay_coeff: float
    baseline_std: float


def make_trace_row(generation, best, mean, f, pop_std):
    return (int(generation), float(best), float(mean), float(f), float(pop_std))


@dataclass
class RunResult:
    best: Individual
    trace: list[tuple]

    def trace_column(self, name: str) -> np.ndarray:
        cols = {"generation": 0, "best": 1, "mean": 2, "f": 3, "pop_std": 4}
        return np.array([row[cols[name]] for row in self.trace])


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def init_population(pop_size: int, dimension: int, bounds: tuple[float, float],
                    seed: int) -> Population:
    """Uniform initialization from per-individual counter streams.

    Individual i draws its genome from stream (seed, 0, i), dimension j
    being draw j of that stream; bit-reproducible for a given seed.
    """
    if pop_size < 4:
        raise ValueError(f"population size must be >= 4, got {pop_size}")
    if dimension < 1:
        raise ValueError(f"dimension must be >= 1, got {dimension}")
    lo, hi = bounds
    if hi < lo:
        raise ValueError(f"bounds must satisfy min <= max, got ({lo}, {hi})")
    individuals = []
    for i in range(pop_size):
        u = rng.stream(seed, 0, i).uniforms(dimension)
        genome = lo + u * (hi - lo)
        individuals.append(Individual.from_genome(genome))
    return Population(individuals=individuals, generation=0, rng_seed=seed)


def de_mutate(pop: Population, i: int, params: DEParams,
              stream: rng.CounterStream) -> np.ndarray:
    """rand/1 mutant: x_r1 + F * (x_r2 - x_r3) with r1, r2, r3, i distinct.

    Indices are drawn by rejection from the stream (one draw per candidate,
    rejected draws consume stream positions).  No bound clamping: only the
    sign of a gene matters downstream.
    """
    n = pop.size
    chosen = {i}
    picks = []
    while len(picks) < 3:
        r = stream.randint(n)
        if r not in chosen:
            chosen.add(r)
            picks.append(r)
    r1, r2, r3 = picks
    g = pop.individuals
    return g[r1].genome + params.f * (g[r2].genome - g[r3].genome)


def de_crossover(target: np.ndarray, mutant: np.ndarray, cr: float,
                 stream: rng.CounterStream) -> np.ndarray:
    """Binomial crossover with one forced mutant gene.

    Draw order: one index draw for j_rand, then D uniforms for the mask;
    gene j takes the mutant value iff u_j <= cr or j == j_rand.
    """
    d = target.size
    j_rand = stream.randint(d)
    u = stream.uniforms(d)
    take = u <= cr
    take[j_rand] = True
    return np.where(take, mutant, target)


def de_select(target: Individual, trial: Individual) -> Individual:
    """Greedy one-to-one selection; exact ties keep the target."""
    if target.fitness is None or trial.fitness is None:
        raise ValueError("de_select requires both fitnesses to be evaluated")
    return trial if trial.fitness > target.fitness else target


def rank_leaders(pop: Population, k: int, workers: int = 1) -> list[int]:
    """Indices of the k best individuals, best first, ties to lower index."""
    return parexec.reduce_best(pop.fitness_values(), k, workers=workers)


def adaptive_f_update(state: AdaptiveState, params: DEParams,
                      schedules: Schedules) -> float:
    """Next variation factor F.

    Cosine envelope f_min + (f_max - f_min) cos(pi g / 2G), boosted by
    explore_boost when diversity is low (pop_std < theta_low) or progress
    has stalled (convergence rate below threshold), shrunk by exploit_factor
    when diversity is high (pop_std > theta_high) or the fitness range has
    collapsed, then damped by decay_coeff and clamped to [f_min, f_max].
    """
    total = state.total_generations
    progress = state.generation / total if total > 0 else 0.0
    f = params.f_min + (params.f_max - params.f_min) * math.cos(0.5 * math.pi * progress)
    if schedules.adaptive_branches:
        theta_low = schedules.theta_low_frac * state.baseline_std
        theta_high = schedules.theta_high_frac * state.baseline_std
        range_trigger = schedules.range_trigger_frac * state.baseline_std
        if state.pop_std < theta_low or state.convergence_rate < schedules.conv_threshold:
            f *= schedules.explore_boost
        if state.pop_std > theta_high or state.fit_range < range_trigger:
            f *= schedules.exploit_factor
    f *= state.decay_coeff
    return min(max(f, params.f_min), params.f_max)


def gwo_reference_update(wolf: Individual, leaders: Sequence[Individual], a: float,
                         stream: rng.CounterStream,
                         divide_by_leader_count: bool = False) -> np.ndarray:
    """Continuous grey-wolf position update (comparison baseline).

    Per leader m (in rank order, r1 then r2 drawn as D-vectors):
        A = 2 a r1 - a,  C = 2 r2,  d = |C X_m - X|,  X'_m = X_m - A d.
    The new position is the |X'|-weighted combination of the X'_m; where
    all |X'_m| vanish the weights fall back to 1/len(leaders).  With
    divide_by_leader_count the weighted sum is additionally divided by the
    leader count (a historical variant that shrinks every step toward the
    origin; off by default).
    """
    x = wolf.genome
    moved = np.empty((len(leaders), x.size))
    for m, leader in enumerate(leaders):
        r1 = stream.uniforms(x.size)
        r2 = stream.uniforms(x.size)
        a_vec = 2.0 * a * r1 - a
        c_vec = 2.0 * r2
        dist = np.abs(c_vec * leader.genome - x)
        moved[m] = leader.genome - a_vec * dist
    mags = np.abs(moved)
    denom = mags.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        weights = np.where(denom > 0.0, mags / np.where(denom > 0.0, denom, 1.0),
                           1.0 / len(leaders))
    new = (weights * moved).sum(axis=0)
    if divide_by_leader_count:
        new /= len(leaders)
    return new


def gwo_discrete_update(wolf: Individual, leaders: Sequence[Individual],
                        params: GWOParams, early: bool,
                        stream: rng.CounterStream) -> np.ndarray:
    """Discrete +/-1 wolf update guided by the leader pack's states.

    One uniforms(6 * D) call supplies rows [social, pick, disturb, state,
    plus, flip].  Per dimension j:
      * with probability p_sl copy the state of one uniformly chosen leader;
      * otherwise, early phase: with probability p_dist take a uniform
        random state, else sample +1 with probability p_plus(j), the
        fraction of leaders at +1 (sharpened toward 0.5 when
        discreteness_factor < 1);
      * otherwise, late phase: adopt the leaders' majority state (exact
        ties resolved uniformly), then flip with probability p_flip.
    Returns a +/-1 genome, so projection and genome agree exactly.
    """
    k = len(leaders)
    d = wolf.genome.size
    leader_states = np.stack([l.projection for l in leaders])
    counts_plus = (leader_states > 0).sum(axis=0)
    p_plus = counts_plus / k
    if params.discreteness_factor != 1.0:
        p_plus = 0.5 + params.discreteness_factor * (p_plus - 0.5)

    u = stream.uniforms(6 * d).reshape(6, d)
    u_social, u_pick, u_disturb, u_state, u_plus, u_flip = u

    pick = np.minimum((u_pick * k).astype(np.int64), k - 1)
    leader_state = leader_states[pick, np.arange(d)]
    random_state = np.where(u_state < 0.5, 1, -1).astype(np.int8)

    if early:
        sampled = np.where(u_plus < p_plus, 1, -1).astype(np.int8)
        base = np.where(u_disturb < params.p_dist, random_state, sampled)
    else:
        majority = np.where(
            2 * counts_plus > k, 1, np.where(2 * counts_plus < k, -1, random_state)
        ).astype(np.int8)
        base = np.where(u_flip < params.p_flip, -majority, majority)

    new_state = np.where(u_social < params.p_sl, leader_state, base)
    return new_state.astype(np.float64)


# ---------------------------------------------------------------------------
# run drivers
# ---------------------------------------------------------------------------

def _evaluate_matrix(objective: Callable, matrix: np.ndarray, workers: int,
                     chunk_size: int | None) -> np.ndarray:
    job = parexec.BatchJob(items=matrix, chunk_size=chunk_size, workers=workers)
    return parexec.evaluate_batch(job, objective)


def _evaluate_population(objective, individuals, workers, chunk_size) -> None:
    matrix = np.stack([ind.projection for ind in individuals])
    fits = _evaluate_matrix(objective, matrix, workers, chunk_size)
    for ind, fit in zip(individuals, fits):
        ind.fitness = float(fit)


def _stats_row(g, fits, f_value):
    return make_trace_row(g, np.max(fits), np.mean(fits), f_value, np.std(fits))


def run_hybrid(objective: Callable, *, dimension: int, pop_size: int,
               generations: int, seed: int, de_params: DEParams | None = None,
               gwo_params: GWOParams | None = None,
               schedules: Schedules | None = None, workers: int = 1,
               chunk_size: int | None = None) -> RunResult:
    """Full hybrid loop; see the module docstring for the phase order.

    The trace has generations + 1 rows (row 0 is the initial population);
    row g records the post-generation best/mean/std and the F value that
    the next generation's DE phase will use.  Identical (config, seed)
    gives identical results for any worker count.
    """
    de = replace(de_params) if de_params else DEParams()
    gwo = replace(gwo_params) if gwo_params else GWOParams()
    sch = replace(schedules) if schedules else Schedules()

    pop = init_population(pop_size, dimension, (de.x_min, de.x_max), seed)
    _evaluate_population(objective, pop.individuals, workers, chunk_size)
    fits = pop.fitness_values()
    baseline_std = float(np.std(fits))
    de.f = de.f_max

    trace = [_stats_row(0, fits, de.f)]
    best_prev = float(np.max(fits))
    window: deque = deque(maxlen=max(1, sch.conv_window))

    for g in range(1, generations + 1):
        streams = [rng.stream(seed, g, i) for i in range(pop.size)]

        # DE phase: mutate, cross over, evaluate, greedy select
        trials = []
        for i in range(pop.size):
            mutant = de_mutate(pop, i, de, streams[i])
            trial = de_crossover(pop.individuals[i].genome, mutant, de.cr, streams[i])
            trials.append(Individual.from_genome(trial))
        matrix = np.stack([t.projection for t in trials])
        trial_fits = _evaluate_matrix(objective, matrix, workers, chunk_size)
        for i, trial in enumerate(trials):
            trial.fitness = float(trial_fits[i])
            pop.individuals[i] = de_select(pop.individuals[i], trial)

        # leader ranking via parallel reduction
        leader_idx = rank_leaders(pop, gwo.leader_count, workers=workers)
        leader_set = set(leader_idx)
        leaders = [pop.individuals[j] for j in leader_idx]

        # discrete wolf update of the non-leaders, then greedy re-selection
        gwo_now = replace(
            gwo,
            p_dist=sch.p_dist(g, generations),
            p_sl=sch.p_sl(g, generations),
            p_flip=sch.p_flip(g, generations),
        )
        early = sch.is_early(g, generations)
        movers = [i for i in range(pop.size) if i not in leader_set]
        candidates = [
            Individual.from_genome(
                gwo_discrete_update(pop.individuals[i], leaders, gwo_now, early,
                                    streams[i])
            )
            for i in movers
        ]
        if candidates:
            matrix = np.stack([c.projection for c in candidates])
            cand_fits = _evaluate_matrix(objective, matrix, workers, chunk_size)
            for i, cand, fit in zip(movers, candidates, cand_fits):
                cand.fitness = float(fit)
                pop.individuals[i] = de_select(pop.individuals[i], cand)

        # parameter update and trace
        fits = pop.fitness_values()
        best_now = float(np.max(fits))
        window.append(best_now > best_prev)
        best_prev = best_now
        state = AdaptiveState(
            generation=g,
            total_generations=generations,
            pop_std=float(np.std(fits)),
            fit_range=float(np.max(fits) - np.min(fits)),
            convergence_rate=float(np.mean(window)) if window else 1.0,
            decay_coeff=sch.decay_coeff(g, generations),
            baseline_std=baseline_std,
        )
        de.f = adaptive_f_update(state, de, sch)
        trace.append(_stats_row(g, fits, de.f))
        pop.generation = g

    best_idx = rank_leaders(pop, 1)[0]
    return RunResult(best=pop.individuals[best_idx], trace=trace)


def run_de(objective: Callable, *, dimension: int, pop_size: int, generations: int,
           seed: int, de_params: DEParams | None = None,
           schedules: Schedules | None = None, workers: int = 1,
           chunk_size: int | None = None) -> RunResult:
    """DE-only baseline: the hybrid loop without the wolf phase."""
    de = replace(de_params) if de_params else DEParams()
    sch = replace(schedules) if schedules else Schedules()

    pop = init_population(pop_size, dimension, (de.x_min, de.x_max), seed)
    _evaluate_population(objective, pop.individuals, workers, chunk_size)
    fits = pop.fitness_values()
    baseline_std = float(np.std(fits))
    de.f = de.f_max

    trace = [_stats_row(0, fits, de.f)]
    best_prev = float(np.max(fits))
    window: deque = deque(maxlen=max(1, sch.conv_window))

    for g in range(1, generations + 1):
        streams = [rng.stream(seed, g, i) for i in range(pop.size)]
        trials = []
        for i in range(pop.size):
            mutant = de_mutate(pop, i, de, streams[i])
            trial = de_crossover(pop.individuals[i].genome, mutant, de.cr, streams[i])
            trials.append(Individual.from_genome(trial))
        matrix = np.stack([t.projection for t in trials])
        trial_fits = _evaluate_matrix(objective, matrix, workers, chunk_size)
        for i, trial in enumerate(trials):
            trial.fitness = float(trial_fits[i])
            pop.individuals[i] = de_select(pop.individuals[i], trial)

        fits = pop.fitness_values()
        best_now = float(np.max(fits))
        window.append(best_now > best_prev)
        best_prev = best_now
        state = AdaptiveState(
            generation=g,
            total_generations=generations,
            pop_std=float(np.std(fits)),
            fit_range=float(np.max(fits) - np.min(fits)),
            convergence_rate=float(np.mean(window)) if window else 1.0,
            decay_coeff=sch.decay_coeff(g, generations),
            baseline_std=baseline_std,
        )
        de.f = adaptive_f_update(state, de, sch)
        trace.append(_stats_row(g, fits, de.f))
        pop.generation = g

    best_idx = rank_leaders(pop, 1)[0]
    return RunResult(best=pop.individuals[best_idx], trace=trace)


def run_gwo(objective: Callable, *, dimension: int, pop_size: int, generations: int,
            seed: int, gwo_params: GWOParams | None = None, workers: int = 1,
            chunk_size: int | None = None,
            bounds: tuple[float, float] = (-1.0, 1.0)) -> RunResult:
    """Classical continuous grey-wolf baseline with three leaders.

    Positions of non-leader wolves are replaced unconditionally each
    generation (standard behavior), so the trace's best column can dip;
    the returned best is the best individual ever evaluated.  The trace's
    f column records the decaying coefficient a.
    """
    gwo = replace(gwo_params) if gwo_params else GWOParams()
    pop = init_population(pop_size, dimension, bounds, seed)
    _evaluate_population(objective, pop.individuals, workers, chunk_size)
    fits = pop.fitness_values()
    best_idx = rank_leaders(pop, 1)[0]
    best_ever = pop.individuals[best_idx]
    trace = [_stats_row(0, fits, gwo.a)]

    for g in range(1, generations + 1):
        progress = g / generations if generations else 0.0
        a_now = gwo.a_final + (gwo.a - gwo.a_final) * (1.0 - progress)
        leader_idx = rank_leaders(pop, 3, workers=workers)
        leader_set = set(leader_idx)
        leaders = [pop.individuals[j] for j in leader_idx]
        streams = [rng.stream(seed, g, i) for i in range(pop.size)]

        movers = [i for i in range(pop.size) if i not in leader_set]
        updated = [
            Individual.from_genome(
                gwo_reference_update(pop.individuals[i], leaders, a_now, streams[i],
                                     gwo.divide_by_leader_count)
            )
            for i in movers
        ]
        if updated:
            matrix = np.stack([u.projection for u in updated])
            new_fits = _evaluate_matrix(objective, matrix, workers, chunk_size)
            for i, ind, fit in zip(movers, updated, new_fits):
                ind.fitness = float(fit)
                pop.individuals[i] = ind

        fits = pop.fitness_values()
        best_idx = rank_leaders(pop, 1)[0]
        if best_ever.fitness is None or fits[best_idx] > best_ever.fitness:
            best_ever = pop.individuals[best_idx]
        trace.append(_stats_row(g, fits, a_now))
        pop.generation = g

    return RunResult(best=best_ever, trace=trace)


ALGORITHMS = ("hybrid", "de", "gwo")


def run(algorithm: str, objective: Callable, *, dimension: int, pop_size: int,
        generations: int, seed: int, de_params: DEParams | None = None,
        gwo_params: GWOParams | None = None, schedules: Schedules | None = None,
        workers: int = 1, chunk_size: int | None = None) -> RunResult:
    """Dispatch to one of the three search algorithms by name."""
    if algorithm == "hybrid":
        return run_hybrid(objective, dimension=dimension, pop_size=pop_size,
                          generations=generations, seed=seed, de_params=de_params,
                          gwo_params=gwo_params, schedules=schedules,
                          workers=workers, chunk_size=chunk_size)
    if algorithm == "de":
        return run_de(objective, dimension=dimension, pop_size=pop_size,
                      generations=generations, seed=seed, de_params=de_params,
                      schedules=schedules, workers=workers, chunk_size=chunk_size)
    if algorithm == "gwo":
        return run_gwo(objective, dimension=dimension, pop_size=pop_size,
                       generations=generations, seed=seed, gwo_params=gwo_params,
                       workers=workers, chunk_size=chunk_size)
    raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
