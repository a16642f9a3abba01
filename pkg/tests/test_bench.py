import numpy as np
import pytest

from qpmdesign import bench
from qpmdesign.config import parse_config_text
from qpmdesign.formats import TRIAL_HEADER, read_csv, write_csv
from qpmdesign.objectives import ObjectiveSpec, make_objective
from qpmdesign.optimizer import Individual, RunResult
from qpmdesign.physics import MismatchTable, PhaseMismatchPair

SMALL_CFG = """
crystal_length_um = 12
domain_thickness_um = 1
process = single_thg
pump_wavelengths_nm = 1404
dk_override = 0.3:0.7
np = 16
generations = 10
"""


def small_cfg():
    return parse_config_text(SMALL_CFG)


def constant_stub(value):
    def algorithm(cfg, seed, objective):
        ind = Individual.from_genome(np.ones(cfg.n_domains), fitness=value)
        return RunResult(best=ind, trace=[(0, value, value, 0.1, 0.0)])

    algorithm.__name__ = f"stub_{value}"
    return algorithm


class TestRunTrials:
    def test_constant_stub_statistics(self):
        stats, records = bench.run_trials(small_cfg(), constant_stub(5.0), 6, 100)
        assert stats.average == stats.maximum == stats.minimum == 5.0
        assert stats.std == 0.0
        assert stats.trials == 6

    def test_trial_count_and_seeds(self):
        stats, records = bench.run_trials(small_cfg(), constant_stub(1.0), 30, 7)
        assert len(records) == 30
        assert [r.seed for r in records] == list(range(7, 37))

    def test_statistics_recompute_from_persisted_log(self, tmp_path):
        cfg = small_cfg()
        stats, records = bench.run_trials(cfg, "hybrid", 4, 3)
        path = tmp_path / "trials.csv"
        write_csv(path, TRIAL_HEADER, [r.as_row() for r in records])
        header, rows = read_csv(path)
        assert header == list(TRIAL_HEADER)
        finals = np.array([float(r[2]) for r in rows])
        assert stats.average == pytest.approx(finals.mean(), rel=1e-11)
        assert stats.maximum == pytest.approx(finals.max(), rel=1e-11)
        assert stats.minimum == pytest.approx(finals.min(), rel=1e-11)
        assert stats.std == pytest.approx(finals.std(ddof=1), rel=1e-9, abs=1e-12)

    @staticmethod
    def deterministic_fields(stats):
        # wall time legitimately varies between repeats
        return (stats.algorithm, stats.trials, stats.average, stats.maximum,
                stats.minimum, stats.std, stats.mean_deff_norm)

    def test_deterministic_given_seed(self):
        a, _ = bench.run_trials(small_cfg(), "hybrid", 3, 11)
        b, _ = bench.run_trials(small_cfg(), "hybrid", 3, 11)
        assert self.deterministic_fields(a) == self.deterministic_fields(b)

    def test_parallel_trials_match_sequential(self):
        seq, _ = bench.run_trials(small_cfg(), "hybrid", 4, 5)
        par, _ = bench.run_trials(small_cfg(), "hybrid", 4, 5, parallel_trials=True)
        assert self.deterministic_fields(seq) == self.deterministic_fields(par)


class TestCompareAlgorithms:
    def test_stub_ratios_exact(self):
        cfg = small_cfg()
        report = bench.compare_algorithms(
            cfg, trials=10, base_seed=0,
            algorithms=(constant_stub(6.0), constant_stub(2.0)),
        )
        assert report.ratio("stub_6.0", "stub_2.0") == pytest.approx(3.0)

    def test_matched_seeds_across_algorithms(self):
        cfg = small_cfg()
        report = bench.compare_algorithms(cfg, trials=10, base_seed=42,
                                          algorithms=("hybrid", "de"))
        assert set(report.stats) == {"hybrid", "de"}
        assert "hybrid/de" in report.mean_ratios

    def test_too_few_trials_rejected(self):
        with pytest.raises(ValueError, match="trials >= 10"):
            bench.compare_algorithms(small_cfg(), trials=3, base_seed=0)


class TestBruteForceOracle:
    def objective(self, n, variant="single_shg", dk=(0.05, 0.0)):
        spec = ObjectiveSpec(variant=variant, pump_wavelengths_nm=(1404.0,))
        provider = MismatchTable({1404.0: PhaseMismatchPair(*dk)})
        return make_objective(spec, provider, 1.0, n)

    def test_n1_tie_returns_documented_order_winner(self):
        signs, fit = bench.brute_force_oracle(self.objective(1), 1)
        assert signs.tolist() == [1]  # +1 sorts before -1

    def test_n2_small_mismatch_all_up_wins(self):
        signs, fit = bench.brute_force_oracle(self.objective(2, dk=(0.001, 0.0)), 2)
        assert signs.tolist() == [1, 1]

    def test_matches_explicit_enumeration(self):
        obj = self.objective(10, variant="single_thg", dk=(0.3, 0.7))
        signs, fit = bench.brute_force_oracle(obj, 10)
        best = max(
            (float(obj(bench.lexicographic_signs(m, 10))), -m) for m in range(1 << 10)
        )
        assert fit == pytest.approx(best[0], rel=1e-15)
        assert np.array_equal(signs, bench.lexicographic_signs(-best[1], 10))

    def test_refuses_large_n_with_cost_estimate(self):
        with pytest.raises(ValueError, match=r"2\^21 = 2097152"):
            bench.brute_force_oracle(self.objective(4), 21)

    def test_chunking_invariant(self):
        obj = self.objective(8, variant="single_thg", dk=(0.3, 0.7))
        a = bench.brute_force_oracle(obj, 8, chunk=7)
        b = bench.brute_force_oracle(obj, 8, chunk=256)
        assert a[1] == b[1] and np.array_equal(a[0], b[0])


class TestOracleDominance:
    def test_optimizer_never_beats_oracle(self):
        cfg = small_cfg()
        objective = bench.build_objective(cfg)
        _, oracle_fit = bench.brute_force_oracle(objective, cfg.n_domains)
        for seed in range(3):
            result = bench.run_scenario(cfg, "hybrid", seed=seed)
            assert result.best.fitness <= oracle_fit + 1e-9


class TestBackendBenchmark:
    def test_rows_well_formed(self):
        rows = bench.backend_benchmark(rows=64, n=32, repetitions=2)
        names = [r[0] for r in rows]
        assert names[0] == "numpy"
        for name, seconds, speedup in rows:
            assert seconds > 0 and speedup > 0
