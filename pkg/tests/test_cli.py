"""End-to-end checks of the command-line entry point."""

import os
import subprocess
import sys

import pytest

import graphdenoise as gd


def run_cli(*args, env_extra=None, cwd=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "graphdenoise.cli", *args],
        capture_output=True, text=True, env=env, cwd=cwd)


def _write_clique_graph(path):
    """Two 4-cliques joined by one bridge edge (3, 4)."""
    edges = []
    for base in (0, 4):
        for a in range(base, base + 4):
            for b in range(a + 1, base + 4):
                edges.append((a, b))
    edges.append((3, 4))
    with open(path, "w") as fh:
        fh.write("8 %d\n" % len(edges))
        for i, j in edges:
            fh.write("%d %d 1.0\n" % (i, j))


class TestDenoise:
    def test_round_trip(self, tmp_path):
        graph = tmp_path / "g.txt"
        _write_clique_graph(graph)
        res = run_cli("denoise", str(graph), "--rule", "jdr",
                      "--q", "0.9", "--out", str(tmp_path))
        assert res.returncode == 0, res.stderr
        assert "bridges=1" in res.stdout
        bset = gd.read_bridge_set(tmp_path / "bridges_jdr.txt")
        assert bset.edges == {(3, 4)}
        assert bset.rule == "jdr"

    def test_epsilon_keyword_accepted(self, tmp_path):
        graph = tmp_path / "g.txt"
        _write_clique_graph(graph)
        res = run_cli("denoise", str(graph), "--rule", "npdr",
                      "--q", "0.9", "--epsilon", "median-half",
                      "--out", str(tmp_path))
        assert res.returncode == 0, res.stderr
        assert (tmp_path / "bridges_npdr.txt").exists()

    def test_malformed_line_reported(self, tmp_path):
        graph = tmp_path / "bad.txt"
        graph.write_text("3 2\n0 1 1.0\n0 two 1.0\n")
        res = run_cli("denoise", str(graph), "--rule", "ldr",
                      "--out", str(tmp_path))
        assert res.returncode == 2
        assert "line 3" in res.stderr

    def test_missing_file(self, tmp_path):
        res = run_cli("denoise", str(tmp_path / "absent.txt"),
                      "--rule", "ldr", "--out", str(tmp_path))
        assert res.returncode == 2
        assert res.stderr.startswith("input error:")

    def test_bad_flag_value(self, tmp_path):
        graph = tmp_path / "g.txt"
        _write_clique_graph(graph)
        res = run_cli("denoise", str(graph), "--rule", "npdr",
                      "--epsilon", "-3", "--out", str(tmp_path))
        assert res.returncode == 2


SMALL_ROLL = ("swissroll", "--n", "100", "--trials", "2", "--mu", "0.5",
              "--rule", "npdr", "--q", "0.95", "--delta", "6", "--seed", "1")


class TestSwissroll:
    def test_outputs_and_table(self, tmp_path):
        res = run_cli(*SMALL_ROLL, "--table", "--out", str(tmp_path))
        assert res.returncode == 0, res.stderr
        for name in ("swissroll_trials.csv", "swissroll_aggregate.csv",
                     "swissroll_bridge_counts.dat", "swissroll_table.txt"):
            assert (tmp_path / name).exists()
        table = (tmp_path / "swissroll_table.txt").read_text().splitlines()
        assert table[0].split() == ["mu", "SP", "NPDR,q=0.95"]
        assert table[1].split()[0] == "0.5"
        assert "mu=0.5" in res.stdout

    def test_reruns_byte_identical(self, tmp_path):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        for d in (d1, d2):
            res = run_cli(*SMALL_ROLL, "--out", str(d))
            assert res.returncode == 0, res.stderr
        for name in ("swissroll_trials.csv", "swissroll_aggregate.csv",
                     "swissroll_bridge_counts.dat"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_worker_count_does_not_change_results(self, tmp_path):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        for d, workers in ((d1, "1"), (d2, "2")):
            res = run_cli(*SMALL_ROLL, "--out", str(d),
                          env_extra={"GD_THREADS": workers})
            assert res.returncode == 0, res.stderr
        assert (d1 / "swissroll_trials.csv").read_bytes() == \
            (d2 / "swissroll_trials.csv").read_bytes()


SMALL_TOMO = ("tomo", "--side", "64", "--n", "96", "--r", "64", "--k", "12",
              "--snr-db", "2", "--seed", "1", "--rule", "npdr")


class TestTomo:
    def test_outputs_and_sanity_line(self, tmp_path):
        res = run_cli(*SMALL_TOMO, "--out", str(tmp_path))
        assert res.returncode == 0, res.stderr
        lines = res.stdout.splitlines()
        assert lines[0].startswith("true-order rho=")
        assert 0.0 <= float(lines[0].split("=")[1]) <= 1.0
        assert any(l.startswith("rule=npdr") for l in lines)
        for name in ("phantom.pgm", "sinogram.bin",
                     "tomo_ordering_npdr.csv", "tomo_recon_npdr.pgm"):
            assert (tmp_path / name).exists()

    def test_ordering_csv_records_config(self, tmp_path):
        res = run_cli(*SMALL_TOMO, "--out", str(tmp_path))
        assert res.returncode == 0, res.stderr
        text = (tmp_path / "tomo_ordering_npdr.csv").read_text()
        assert "# side=64" in text
        assert "# rule=npdr" in text

    def test_reruns_byte_identical(self, tmp_path):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        for d in (d1, d2):
            res = run_cli(*SMALL_TOMO, "--out", str(d))
            assert res.returncode == 0, res.stderr
        for name in ("sinogram.bin", "tomo_ordering_npdr.csv",
                     "tomo_recon_npdr.pgm"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_side_validation(self, tmp_path):
        res = run_cli("tomo", "--side", "8", "--out", str(tmp_path))
        assert res.returncode == 2
        assert res.stderr.startswith("input error:")


class TestTopLevel:
    def test_help_exits_zero(self):
        res = run_cli("--help")
        assert res.returncode == 0
        assert "denoise" in res.stdout

    def test_unknown_subcommand(self):
        res = run_cli("frobnicate")
        assert res.returncode == 2
