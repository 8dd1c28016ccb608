"""CLI tests: exit-code contract (0 ok / 2 config / 3 numeric), replay via
--config, byte-identical outputs across --jobs, scan table shape, and
structural checks on the emitted SVG."""

import json
import os
import re

import pytest
from posterior_lab.cli import main, parse_grid, parse_seeds, parse_truth


def run_cli(*argv):
    return main(list(argv))


class TestParsers:
    def test_truth(self):
        assert parse_truth("uniform").kind == "uniform"
        g = parse_truth("gauss:0.5")
        assert g.kind == "gauss_exp" and g.theta == 0.5
        s = parse_truth("step:2:0,3,5,7")
        assert s.kind == "step" and s.level == 2 and s.selected == (0, 3, 5, 7)
        f = parse_truth("file:/tmp/x.csv")
        assert f.kind == "external" and f.path == "/tmp/x.csv"

    def test_truth_errors(self):
        from posterior_lab.cli import ConfigError
        for bad in ("gauss:1.5", "gauss:x", "step:2", "step:2:0,1", "whatever"):
            with pytest.raises(ConfigError):
                parse_truth(bad)

    def test_seeds(self):
        assert parse_seeds("1..4") == (1, 2, 3, 4)
        assert parse_seeds("5,2,9") == (5, 2, 9)

    def test_grid(self):
        assert parse_grid("0.2:0.6:0.2") == [0.2, 0.4, 0.6]


class TestTrajCommand:
    def test_writes_files_and_replays(self, tmp_path):
        out = str(tmp_path / "r1")
        assert run_cli("traj", "--model", "barron", "--truth", "uniform",
                       "--n-max", "30", "--seed", "1", "--out", out) == 0
        assert os.path.exists(out + ".csv") and os.path.exists(out + ".json")
        with open(out + ".json") as fh:
            side = json.load(fh)
        assert side["seed"] == 1 and side["config"]["n_max"] == 30

        out2 = str(tmp_path / "r2")
        assert run_cli("traj", "--config", out + ".json", "--out", out2) == 0
        assert open(out + ".csv").read() == open(out2 + ".csv").read()

    def test_bad_truth_exits_2(self, tmp_path):
        code = run_cli("traj", "--truth", "gauss:1.5", "--n-max", "5",
                       "--seed", "1", "--out", str(tmp_path / "x"))
        assert code == 2

    def test_unknown_flag_exits_2(self, tmp_path):
        code = run_cli("traj", "--nope", "1", "--out", str(tmp_path / "x"))
        assert code == 2

    def test_help_exits_0(self, capsys):
        for sub in ("traj", "replicate", "scan", "plot"):
            assert run_cli(sub, "--help") == 0
            out = capsys.readouterr().out
            assert "--" in out


class TestReplicateCommand:
    def test_jobs_determinism(self, tmp_path):
        d1, d8 = str(tmp_path / "j1"), str(tmp_path / "j8")
        args = ["replicate", "--truth", "uniform", "--n-max", "25",
                "--seeds", "1..3"]
        assert run_cli(*args, "--jobs", "1", "--out-dir", d1) == 0
        assert run_cli(*args, "--jobs", "8", "--out-dir", d8) == 0
        for name in ("traj_seed1.csv", "traj_seed2.csv", "traj_seed3.csv",
                     "summary.csv", "summary.json"):
            a = open(os.path.join(d1, name), "rb").read()
            b = open(os.path.join(d8, name), "rb").read()
            assert a == b, name

    def test_duplicate_seeds_exit_2(self, tmp_path):
        code = run_cli("replicate", "--truth", "uniform", "--n-max", "10",
                       "--seeds", "2,2", "--jobs", "1",
                       "--out-dir", str(tmp_path / "d"))
        assert code == 2


class TestScanCommand:
    def test_scan_table(self, tmp_path):
        out = str(tmp_path / "scan.csv")
        code = run_cli("scan", "--truth", "uniform", "--n-max", "25",
                       "--seeds", "1,2", "--alpha-grid", "0.2:0.6:0.4",
                       "--beta-grid", "0.4:0.75:0.35",
                       "--delta-grid", "0.5:0.5:1", "--out", out)
        assert code == 0
        lines = open(out).read().strip().splitlines()
        assert lines[0].startswith("alpha,beta,delta")
        cells = [tuple(float(v) for v in ln.split(",")[:2]) for ln in lines[1:]]
        assert all(a <= b for a, b in cells)          # alpha > beta omitted
        assert (0.2, 0.4) in cells and (0.6, 0.75) in cells

    def test_single_cell(self, tmp_path):
        out = str(tmp_path / "one.csv")
        code = run_cli("scan", "--truth", "uniform", "--n-max", "12",
                       "--seeds", "1", "--alpha-grid", "0.6:0.6:1",
                       "--beta-grid", "0.75:0.75:1", "--out", out)
        assert code == 0
        assert len(open(out).read().strip().splitlines()) == 2

    def test_empty_band_grid_exits_2(self, tmp_path):
        code = run_cli("scan", "--truth", "uniform", "--n-max", "12",
                       "--seeds", "1", "--alpha-grid", "0.8:0.8:1",
                       "--beta-grid", "0.3:0.3:1",
                       "--out", str(tmp_path / "no.csv"))
        assert code == 2


class TestPlotCommand:
    @pytest.fixture()
    def traj_csv(self, tmp_path):
        out = str(tmp_path / "base")
        assert run_cli("traj", "--truth", "uniform", "--n-max", "30",
                       "--seed", "1", "--out", out) == 0
        return out + ".csv"

    def test_refline_and_band(self, traj_csv, tmp_path):
        svg_path = str(tmp_path / "p.svg")
        code = run_cli("plot", "--input", traj_csv, "--columns",
                       "band_prior_exponent", "--refline", "0.693147",
                       "--out", svg_path)
        assert code == 0
        svg = open(svg_path).read()
        assert "stroke-dasharray" in svg            # the reference line
        assert "y=0.693147" in svg

    def test_two_series_two_polylines(self, traj_csv, tmp_path):
        svg_path = str(tmp_path / "p2.svg")
        code = run_cli("plot", "--input", traj_csv, "--columns",
                       "mass_fstep,mass_f0", "--out", svg_path)
        assert code == 0
        svg = open(svg_path).read()
        assert len(re.findall(r"<polyline ", svg)) == 2
        assert len(re.findall(r"<polygon ", svg)) == 2   # two bracket bands

    def test_missing_column_exits_2_and_names_it(self, traj_csv, tmp_path, capsys):
        code = run_cli("plot", "--input", traj_csv, "--columns", "zzz_missing",
                       "--out", str(tmp_path / "x.svg"))
        assert code == 2
        assert "zzz_missing" in capsys.readouterr().err

    def test_deterministic_output(self, traj_csv, tmp_path):
        a, b = str(tmp_path / "a.svg"), str(tmp_path / "b.svg")
        for path in (a, b):
            assert run_cli("plot", "--input", traj_csv, "--columns",
                           "gamma_stat", "--out", path) == 0
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_empty_trajectory_exits_2(self, tmp_path):
        prefix = str(tmp_path / "empty")
        with open(prefix + ".csv", "w") as fh:
            fh.write("n,gamma_stat.lower,gamma_stat.upper\n")
        side = {"config": {"truth": {"kind": "uniform"}, "n_max": 1},
                "seed": 1, "grid": [],
                "columns": ["n", "gamma_stat.lower", "gamma_stat.upper"],
                "version": 1}
        with open(prefix + ".json", "w") as fh:
            json.dump(side, fh)
        code = run_cli("plot", "--input", prefix + ".csv", "--columns",
                       "gamma_stat", "--out", str(tmp_path / "e.svg"))
        assert code == 2


class TestNumericFailureExit:
    def test_numeric_failure_exits_3(self, monkeypatch, tmp_path, capsys):
        import posterior_lab.cli as cli

        def boom(cfg, seed):
            raise RuntimeError("synthetic numeric failure")

        monkeypatch.setattr(cli, "run_trajectory", boom)
        code = run_cli("traj", "--truth", "uniform", "--n-max", "5",
                       "--seed", "1", "--out", str(tmp_path / "x"))
        assert code == 3
        assert "numeric failure" in capsys.readouterr().err
