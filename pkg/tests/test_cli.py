import os

import pytest

from qpmdesign import bench
from qpmdesign.cli import main
from qpmdesign.config import load_config
from qpmdesign.formats import read_csv, read_pattern
from qpmdesign.physics import deff_thg

SMALL = """
crystal_length_um = 12
domain_thickness_um = 1
process = single_thg
pump_wavelengths_nm = 1404
dk_override = 0.3:0.7
np = 12
generations = 8
seed = 3
"""

MODEL_BASED = """
crystal_length_um = 40
domain_thickness_um = 0.5
process = single_thg
pump_wavelengths_nm = 1404
np = 8
generations = 4
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestDesign:
    def test_outputs_and_determinism(self, tmp_path):
        cfg = write_cfg(tmp_path, SMALL)
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        assert main(["design", "--config", cfg, "--out", out1]) == 0
        assert main(["design", "--config", cfg, "--out", out2]) == 0
        for name in ("pattern.txt", "pattern.pgm", "convergence.csv", "resolved.cfg"):
            assert read_bytes(os.path.join(out1, name)) == read_bytes(
                os.path.join(out2, name)), name

    def test_convergence_csv_schema(self, tmp_path):
        cfg = write_cfg(tmp_path, SMALL)
        out = str(tmp_path / "o")
        main(["design", "--config", cfg, "--out", out])
        header, rows = read_csv(os.path.join(out, "convergence.csv"))
        assert header == ["generation", "best", "mean", "F", "pop_std"]
        assert len(rows) == 9  # generations + 1
        assert [int(r[0]) for r in rows] == list(range(9))

    def test_seed_override_changes_outputs(self, tmp_path):
        cfg = write_cfg(tmp_path, SMALL)
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        main(["design", "--config", cfg, "--out", out1])
        main(["design", "--config", cfg, "--out", out2, "--seed", "99"])
        assert read_bytes(os.path.join(out1, "convergence.csv")) != read_bytes(
            os.path.join(out2, "convergence.csv"))

    def test_resolved_config_loads_back(self, tmp_path):
        cfg_path = write_cfg(tmp_path, SMALL)
        out = str(tmp_path / "o")
        main(["design", "--config", cfg_path, "--out", out])
        cfg = load_config(cfg_path)
        echoed = load_config(os.path.join(out, "resolved.cfg"))
        assert echoed == cfg


class TestSweep:
    def test_single_wavelength_matches_direct_evaluation(self, tmp_path):
        cfg_path = write_cfg(tmp_path, MODEL_BASED)
        out = str(tmp_path / "o")
        assert main(["design", "--config", cfg_path, "--out", out]) == 0
        pattern_path = os.path.join(out, "pattern.txt")
        spectrum = os.path.join(out, "spectrum.csv")
        assert main(["sweep", "--config", cfg_path, "--pattern", pattern_path,
                     "--wavelengths-nm", "1404", "--out", spectrum]) == 0
        header, rows = read_csv(spectrum)
        assert header == ["wavelength_nm", "deff_abs", "deff_norm"]
        assert len(rows) == 1
        cfg = load_config(cfg_path)
        pattern = read_pattern(pattern_path)
        pair = cfg.mismatch_provider().mismatches_at(1404.0)
        direct = abs(deff_thg(pattern, pair))
        assert float(rows[0][1]) == pytest.approx(direct, rel=1e-11)

    def test_grid_sweep_row_count(self, tmp_path):
        cfg_path = write_cfg(tmp_path, MODEL_BASED)
        out = str(tmp_path / "o")
        main(["design", "--config", cfg_path, "--out", out])
        spectrum = os.path.join(out, "spectrum.csv")
        assert main(["sweep", "--config", cfg_path,
                     "--pattern", os.path.join(out, "pattern.txt"),
                     "--start-nm", "1380", "--stop-nm", "1420", "--points", "11",
                     "--out", spectrum]) == 0
        _, rows = read_csv(spectrum)
        assert len(rows) == 11

    def test_sweep_requires_grid_or_list(self, tmp_path):
        cfg_path = write_cfg(tmp_path, MODEL_BASED)
        with pytest.raises(SystemExit) as info:
            main(["sweep", "--config", cfg_path, "--pattern", "x.txt"])
        assert info.value.code == 2


class TestBench:
    def test_comparison_outputs(self, tmp_path):
        cfg_path = write_cfg(tmp_path, SMALL)
        out = str(tmp_path / "o")
        assert main(["bench", "--config", cfg_path, "--out", out, "--trials", "3",
                     "--base-seed", "5", "--algorithms", "hybrid,de"]) == 0
        header, rows = read_csv(os.path.join(out, "bench_summary.csv"))
        assert header == ["algorithm", "average", "max", "min", "std",
                          "mean_time_s", "mean_deff_norm"]
        assert [r[0] for r in rows] == ["hybrid", "de"]
        header, rows = read_csv(os.path.join(out, "trials_hybrid.csv"))
        assert header == ["trial", "seed", "final_fitness", "time_s"]
        assert len(rows) == 3
        assert [int(r[1]) for r in rows] == [5, 6, 7]

    def test_timing_table(self, tmp_path):
        cfg_path = write_cfg(tmp_path, SMALL)
        out = str(tmp_path / "o")
        assert main(["bench", "--config", cfg_path, "--out", out, "--timing",
                     "--workers-list", "1,2", "--timing-rows", "64",
                     "--timing-domains", "16", "--repetitions", "1"]) == 0
        header, rows = read_csv(os.path.join(out, "timing.csv"))
        assert header == ["workers", "median_seconds", "speedup"]
        assert [int(r[0]) for r in rows] == [1, 2]
        assert float(rows[0][2]) == 1.0

    def test_backend_table(self, tmp_path):
        cfg_path = write_cfg(tmp_path, SMALL)
        out = str(tmp_path / "o")
        assert main(["bench", "--config", cfg_path, "--out", out, "--backends",
                     "--repetitions", "1"]) == 0
        header, rows = read_csv(os.path.join(out, "backends.csv"))
        assert header == ["backend", "median_seconds", "speedup_vs_numpy"]
        assert rows[0][0] == "numpy"


class TestOracle:
    def test_oracle_then_design_dominance(self, tmp_path):
        cfg_path = write_cfg(tmp_path, SMALL)
        out = str(tmp_path / "o")
        assert main(["oracle", "--config", cfg_path, "--out", out]) == 0
        _, rows = read_csv(os.path.join(out, "oracle.csv"))
        n, evaluations, best = int(rows[0][0]), int(rows[0][1]), float(rows[0][2])
        assert n == 12 and evaluations == 4096
        design_out = str(tmp_path / "d")
        main(["design", "--config", cfg_path, "--out", design_out])
        cfg = load_config(cfg_path)
        objective = bench.build_objective(cfg)
        pattern = read_pattern(os.path.join(design_out, "pattern.txt"))
        assert objective(pattern.signs) <= best + 1e-9

    def test_oracle_refuses_large_n(self, tmp_path):
        big = SMALL.replace("crystal_length_um = 12", "crystal_length_um = 30")
        cfg_path = write_cfg(tmp_path, big)
        assert main(["oracle", "--config", cfg_path, "--out", str(tmp_path / "o")]) == 1

    def test_oracle_n_override(self, tmp_path):
        cfg_path = write_cfg(tmp_path, SMALL)
        out = str(tmp_path / "o")
        assert main(["oracle", "--config", cfg_path, "--out", out, "--n", "8"]) == 0
        _, rows = read_csv(os.path.join(out, "oracle.csv"))
        assert int(rows[0][0]) == 8 and int(rows[0][1]) == 256


class TestErrors:
    def test_bad_subcommand_exit_2(self):
        with pytest.raises(SystemExit) as info:
            main(["frobnicate"])
        assert info.value.code == 2

    def test_bad_flag_exit_2(self):
        with pytest.raises(SystemExit) as info:
            main(["design", "--no-such-flag"])
        assert info.value.code == 2

    def test_missing_config_exit_1(self, tmp_path, capsys):
        assert main(["design", "--config", str(tmp_path / "nope.cfg")]) == 1
        assert "error:" in capsys.readouterr().err

    def test_config_error_exit_1(self, tmp_path, capsys):
        bad = SMALL.replace("domain_thickness_um = 1", "domain_thickness_um = 0.7")
        cfg_path = write_cfg(tmp_path, bad)
        assert main(["design", "--config", cfg_path]) == 1
        assert "integer domain count" in capsys.readouterr().err
