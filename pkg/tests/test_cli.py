import csv
import filecmp
import subprocess
import sys

import numpy as np
import pytest

from levy_smooth.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_NUMERIC, EXIT_OK, main

SOLVE = """\
[grid]
d = 1
N = 64

[operator]
alpha = 0.5

[drift]
mode = weierstrass
amplitude = 0.3
delta = 0.8

[data]
kind = rough

[time]
dt = 0.01
T = 0.1
snapshot_times = 0.05 0.1

[experiment]
seed = 4
"""


@pytest.fixture
def ini(tmp_path):
    def make(text, name="run.ini"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return make


def run(*argv):
    return main([str(a) for a in argv])


class TestSolve:
    def test_outputs(self, ini, tmp_path, capsys):
        out = tmp_path / "o"
        assert run("solve", "--config", ini(SOLVE), "--out", out, "--svg") == EXIT_OK
        snaps = sorted(p.name for p in (out / "snapshots").iterdir())
        assert snaps == ["t0.000000.json", "t0.000000.npy", "t0.050000.json", "t0.050000.npy", "t0.100000.json", "t0.100000.npy"]
        rows = list(csv.DictReader(open(out / "norms.csv")))
        assert float(rows[-1]["t"]) == pytest.approx(0.1)
        assert (out / "histories.csv").exists() and (out / "histories.svg").exists()
        assert "hash=" in capsys.readouterr().out

    def test_byte_identical_reruns(self, ini, tmp_path):
        cfg = ini(SOLVE)
        for name in ("a", "b"):
            assert run("solve", "--config", cfg, "--out", tmp_path / name) == EXIT_OK
        for f in ("norms.csv", "histories.csv", "snapshots/t0.100000.npy"):
            assert filecmp.cmp(tmp_path / "a" / f, tmp_path / "b" / f, shallow=False)

    def test_seed_flag_changes_data(self, ini, tmp_path):
        cfg = ini(SOLVE)
        run("solve", "--config", cfg, "--out", tmp_path / "a")
        run("solve", "--config", cfg, "--out", tmp_path / "b", "--seed", 5)
        a = np.load(tmp_path / "a/snapshots/t0.100000.npy")
        b = np.load(tmp_path / "b/snapshots/t0.100000.npy")
        assert not np.allclose(a, b)

    def test_cfl_violation_is_numeric(self, ini, tmp_path):
        text = SOLVE.replace("amplitude = 0.3", "amplitude = 50").replace("dt = 0.01", "dt = 0.1")
        assert run("solve", "--config", ini(text), "--out", tmp_path / "o") == EXIT_NUMERIC

    @pytest.mark.parametrize("edit", [("alpha = 0.5", ""), ("[grid]", "[grid]\nbogus = 1"),
                                      ("N = 64", "N = 6")])
    def test_config_errors(self, ini, tmp_path, edit, capsys):
        assert run("solve", "--config", ini(SOLVE.replace(*edit)), "--out", tmp_path / "o") == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run("solve", "--config", tmp_path / "nope.ini", "--out", tmp_path / "o") == EXIT_CONFIG


class TestSymbol:
    def test_lambda_list(self, ini, tmp_path):
        text = "[grid]\nN = 64\n[operator]\nform = logdamped\nalpha = 1.0\nsigma = 0.25\nmu = 1\nlambda = 2 3 5\n"
        out = tmp_path / "o"
        assert run("symbol", "--config", ini(text), "--out", out) == EXIT_OK
        for lam in ("2", "3", "5"):
            rows = list(csv.DictReader(open(out / f"symbol_lambda{lam}.csv")))
            assert len(rows) == 64 and float(rows[0]["A"]) == 0.0

    def test_fractional_symbol_values(self, ini, tmp_path):
        out = tmp_path / "o"
        assert run("symbol", "--config", ini("[operator]\nalpha = 0.5\n[grid]\nN = 16\n"),
                   "--out", out, "--svg") == EXIT_OK
        rows = list(csv.DictReader(open(out / "symbol.csv")))
        for r in rows:
            assert float(r["A"]) == pytest.approx(float(r["abs_xi"]) ** 0.5, rel=5e-3)
        assert (out / "symbol.svg").exists()


class TestDecompose:
    def test_field_argument(self, ini, tmp_path, capsys):
        x = 2 * np.pi * np.arange(64) / 64
        np.save(tmp_path / "f.npy", np.sin(3 * x) + 0.5 * np.cos(20 * x))
        out = tmp_path / "o"
        assert run("decompose", tmp_path / "f.npy", "--config", ini(SOLVE), "--out", out) == EXIT_OK
        row = next(csv.DictReader(open(out / "besov.csv")))
        assert float(row["reconstruction_residual"]) < 1e-12
        assert "reconstruction residual" in capsys.readouterr().out

    def test_shape_mismatch(self, ini, tmp_path):
        np.save(tmp_path / "f.npy", np.zeros(32))
        assert run("decompose", tmp_path / "f.npy", "--config", ini(SOLVE),
                   "--out", tmp_path / "o") == EXIT_CONFIG


class TestVerify:
    def test_named_check(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert run("verify", "--checks", "timeweight-33", "--out", out) == EXIT_OK
        assert "[PASS] time-weight" in capsys.readouterr().out
        assert (out / "reports.csv").exists() and (out / "summary.txt").exists()

    def test_failed_check_exit_code(self, ini, tmp_path):
        text = "[grid]\nN = 64\n[operator]\nform = logdamped\nalpha = 1.0\nsigma = 0.1\nmu = 1\n"
        assert run("verify", "--checks", "symbol-41", "--config", ini(text),
                   "--out", tmp_path / "o") == EXIT_FAIL

    def test_signed_kernel_not_applicable(self, ini, tmp_path, capsys):
        text = ("[grid]\nN = 32\n[operator]\nform = signed\nalpha = 0.8\n"
                "[data]\nkind = modes\n[time]\ndt = 0.01\nT = 0.2\n")
        assert run("verify", "--checks", "mp-31", "--config", ini(text),
                   "--out", tmp_path / "o") == EXIT_OK
        assert "[N/A ] max-principle" in capsys.readouterr().out

    def test_checks_from_experiment_section(self, ini, tmp_path):
        text = "[experiment]\nchecks = timeweight-33\n"
        assert run("verify", "--config", ini(text), "--out", tmp_path / "o") == EXIT_OK

    @pytest.mark.parametrize("checks", ["", "nonsense"])
    def test_bad_selection(self, tmp_path, checks):
        assert run("verify", "--checks", checks, "--out", tmp_path / "o") == EXIT_CONFIG


class TestSweep:
    def test_single_value_matches_solve(self, ini, tmp_path):
        cfg = ini(SOLVE)
        run("solve", "--config", cfg, "--out", tmp_path / "s")
        assert run("sweep", "--config", cfg, "--axis", "dt", "--values", "0.01",
                   "--out", tmp_path / "w") == EXIT_OK
        assert filecmp.cmp(tmp_path / "s/snapshots/t0.100000.npy",
                           tmp_path / "w/dt=0.01/snapshots/t0.100000.npy", shallow=False)

    def test_epsilon_sweep_report(self, ini, tmp_path):
        out = tmp_path / "o"
        rc = run("sweep", "--config", ini(SOLVE), "--values", "0.1 0.05 0.025", "--out", out)
        assert rc in (EXIT_OK, EXIT_FAIL)
        rows = list(csv.DictReader(open(out / "sweep.csv")))
        assert [r["value"] for r in rows] == ["0.1", "0.05"]
        assert "vanishing-viscosity" in (out / "reports.csv").read_text()

    def test_increasing_epsilon_rejected(self, ini, tmp_path):
        assert run("sweep", "--config", ini(SOLVE), "--values", "0.01 0.02 0.04",
                   "--out", tmp_path / "o") == EXIT_CONFIG

    def test_nyquist_axis(self, ini, tmp_path):
        rc = run("sweep", "--config", ini(SOLVE), "--axis", "N", "--values", "64 128",
                 "--out", tmp_path / "o")
        assert rc == EXIT_OK


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "levy_smooth", "verify", "--checks", "timeweight-33",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
