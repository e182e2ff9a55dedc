import csv
import json
import math

import numpy as np
import pytest

from lowreg_nls.cli import CONVERGE_HEADER, main
from lowreg_nls.experiments import RoughDataSpec, run_convergence
from lowreg_nls.spectral import Grid

SMALL = ["--dim", "1", "--n", "64", "--length", str(2 * math.pi), "--T", "0.25", "--tau-max", "0.125"]


def read_csv(path):
    with open(path) as fh:
        first = fh.readline()
        assert first.startswith("# schema_version:")
        return list(csv.reader(fh))


def read_json(path):
    return json.loads(path.read_text())


class TestConverge:
    def test_golden_against_library(self, tmp_path):
        code = main(["converge", *SMALL, "--tau-levels", "3", "--out", str(tmp_path)])
        assert code == 0
        rows = read_csv(tmp_path / "converge.csv")
        assert rows[0] == CONVERGE_HEADER and len(rows) == 4
        rep = run_convergence("lri-filtered", Grid(1, 64, 2 * math.pi), RoughDataSpec(), [0.125, 0.0625, 0.03125],
                              0.25, seeds=[0])
        col = CONVERGE_HEADER.index("error_L2")
        assert [float(r[col]) for r in rows[1:]] == rep.errors
        data = read_json(tmp_path / "converge.json")
        assert data["slope"] == rep.order and data["schema_version"] == 1
        assert data["config"]["seed"] == 0

    def test_six_levels_default_grid(self, tmp_path):
        args = ["converge", "--dim", "1", "--n", "256", "--scheme", "lri-filtered", "--s", "1", "--tau-levels", "6",
                "--T", "0.125", "--out", str(tmp_path)]
        assert main(args) == 0
        assert len(read_csv(tmp_path / "converge.csv")) == 7
        assert "slope" in read_json(tmp_path / "converge.json")

    def test_selftest_order(self, tmp_path):
        assert main(["converge", "--selftest-order", "0.75", "--tau-levels", "6", "--out", str(tmp_path)]) == 0
        assert abs(read_json(tmp_path / "converge.json")["slope"] - 0.75) < 1e-9

    def test_byte_identical_rerun(self, tmp_path):
        argv = ["converge", *SMALL, "--tau-levels", "2", "--seed", "3", "--out", str(tmp_path)]
        assert main(argv) == 0
        first = {name: (tmp_path / name).read_bytes() for name in ("converge.csv", "converge.json")}
        assert main(argv) == 0
        for name, content in first.items():
            assert (tmp_path / name).read_bytes() == content
        assert (tmp_path / "timing.json").exists()

    def test_config_file_and_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 32, "tau-levels": 2, "T": 0.25, "tau_max": 0.125, "seed": 4}))
        out = tmp_path / "o"
        assert main(["converge", "--config", str(cfg), "--seed", "9", "--out", str(out)]) == 0
        conf = read_json(out / "converge.json")["config"]
        assert conf["n"] == 32 and conf["seed"] == 9

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        assert main(["converge", "--config", str(cfg), "--out", str(tmp_path)]) == 2


class TestUsage:
    @pytest.mark.parametrize("argv", [[], ["nonsense"], ["converge", "--dim", "4"], ["converge", "--scheme", "rk4"],
                                      ["converge", "--tau-levels", "1"], ["diagnose", "strichartz", "--pair", "4,4"]])
    def test_exit_two(self, argv, tmp_path, capsys):
        assert main(argv + ["--out", str(tmp_path)] if argv else argv) == 2

    def test_numerical_abort(self, tmp_path):
        # huge amplitude overflows in the first step
        argv = ["simulate", *SMALL, "--init", "plane-wave", "--amplitude", "1e100", "--scheme", "lri-unfiltered",
                "--out", str(tmp_path)]
        assert main(argv) == 1


class TestSimulate:
    def test_zero_data(self, tmp_path):
        argv = ["simulate", *SMALL, "--init", "zero", "--times", "0,0.125,0.25", "--out", str(tmp_path)]
        assert main(argv) == 0
        data = np.load(tmp_path / "snapshots.npz")
        assert data["snapshots"].shape[0] == 3
        assert np.all(data["snapshots"] == 0)

    def test_plane_wave_oracle(self, tmp_path):
        A, T = 0.8, 0.25
        argv = ["simulate", *SMALL, "--init", "plane-wave", "--mode", "2", "--amplitude", str(A),
                "--scheme", "strang", "--tau", str(2.0**-8), "--out", str(tmp_path)]
        assert main(argv) == 0
        snaps = np.load(tmp_path / "snapshots.npz")["snapshots"]
        g = Grid(1, 64, 2 * math.pi)
        exact = A * np.exp(1j * (2 * g.coordinates[0] - T * (4 + A**2)))
        err = math.sqrt(np.sum(np.abs(snaps[-1] - exact) ** 2) * g.dx)
        assert err < 1e-8

    def test_csv_format(self, tmp_path):
        argv = ["simulate", *SMALL, "--n", "16", "--format", "csv", "--out", str(tmp_path)]
        assert main(argv) == 0
        rows = read_csv(tmp_path / "snapshots.csv")
        assert rows[0] == ["t", "index", "re", "im"] and len(rows) == 1 + 2 * 16


class TestDiagnose:
    def test_energy_pair(self, tmp_path):
        argv = ["diagnose", "strichartz", "--pair", "inf,2", "--n", "256", "--length", str(2 * math.pi),
                "--tau-levels", "3", "--ensemble", "4", "--alpha", "1.6666666666666667", "--out", str(tmp_path)]
        assert main(argv) == 0
        assert max(read_json(tmp_path / "strichartz.json")["ratios"]) <= 1 + 1e-12

    def test_dispersive_1d(self, tmp_path):
        assert main(["diagnose", "dispersive", "--dim", "1", "--out", str(tmp_path)]) == 0
        assert abs(read_json(tmp_path / "dispersive.json")["decay_exponent"] + 0.5) <= 0.15

    def test_filter_bound(self, tmp_path):
        assert main(["diagnose", "filter", "--s", "2", "--tau-levels", "8", "--out", str(tmp_path)]) == 0
        assert read_json(tmp_path / "filter.json")["sup_constant"] <= 3


class TestOtherCommands:
    def test_localerror(self, tmp_path):
        argv = ["localerror", *SMALL, "--scheme", "lri-unfiltered", "--tau-max", "0.0078125", "--tau-levels", "4",
                "--out", str(tmp_path)]
        assert main(argv) == 0
        assert abs(read_json(tmp_path / "localerror.json")["slope"] - 2) < 0.1

    def test_localerror_plane_wave(self, tmp_path):
        argv = ["localerror", *SMALL, "--init", "plane-wave", "--mode", "3", "--amplitude", "0.7",
                "--scheme", "lri-unfiltered", "--tau-max", "0.03125", "--tau-levels", "4", "--out", str(tmp_path)]
        assert main(argv) == 0
        assert abs(read_json(tmp_path / "localerror.json")["slope"] - 2) < 0.1

    def test_filtergap(self, tmp_path):
        argv = ["filtergap", "--n", "512", "--length", str(2 * math.pi), "--T", "0.125", "--tau-ref", "0.0078125",
                "--K-list", "8,16,32", "--out", str(tmp_path)]
        assert main(argv) == 0
        assert read_json(tmp_path / "filtergap.json")["slope"] < -0.5
