import csv
import json
import os
import subprocess
import sys

import pytest

from gam.cli import CSV_FIELDS, main, parse_snr_list
from gam.constellation import entropy_bits, load_json


def run_cli(*args, env=None, cwd=None):
    full = dict(os.environ)
    full.update(env or {})
    return subprocess.run([sys.executable, "-m", "gam", *map(str, args)],
                          capture_output=True, env=full, cwd=cwd)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestSnrParsing:
    def test_forms(self):
        assert parse_snr_list("12.5") == [12.5]
        assert parse_snr_list("0,3,6") == [0.0, 3.0, 6.0]
        assert parse_snr_list("0:2:6") == [0.0, 2.0, 4.0, 6.0]
        assert parse_snr_list("0:0.25:1") == [0.0, 0.25, 0.5, 0.75, 1.0]

    @pytest.mark.parametrize("bad", ["0:0:5", "5:1:0", "a", "1:2"])
    def test_rejects(self, bad, capsys):
        from gam.cli import UsageError
        with pytest.raises(UsageError):
            parse_snr_list(bad)


class TestGen:
    def test_gb_hr(self, tmp_path, capsys):
        out = tmp_path / "c.json"
        assert main(["gen", "--scheme", "gb-hr", "--n", "1024", "--power", "1",
                     "--out", str(out)]) == 0
        c = load_json(out)
        assert c.n_points == 1024
        assert entropy_bits(c) == pytest.approx(10.0)
        assert "entropy=10.000000" in capsys.readouterr().out

    def test_generalized_papr(self, capsys):
        assert main(["gen", "--scheme", "disc-generalized", "--n-low", "512",
                     "--n-high", "1535"]) == 0
        assert "PAPR=1.76" in capsys.readouterr().out

    def test_precondition_exit_code(self, capsys):
        assert main(["gen", "--scheme", "gb-hr", "--n", "1"]) == 2
        assert "n_points must be >= 2" in capsys.readouterr().err

    def test_usage_exit_code(self, capsys):
        assert main(["gen", "--scheme", "nope", "--n", "4"]) == 2
        assert main(["frobnicate"]) == 2


class TestMi:
    @pytest.fixture
    def const(self, tmp_path):
        path = tmp_path / "c.json"
        main(["gen", "--scheme", "gb-hr", "--n", "16", "--out", str(path)])
        return path

    def test_quadrature(self, const, tmp_path):
        out = tmp_path / "mi.csv"
        assert main(["mi", "--const", str(const), "--snr-db", "11.7609",
                     "--csv", str(out)]) == 0
        rows = read_csv(out)
        assert list(rows[0]) == CSV_FIELDS
        assert float(rows[0]["mi_bits"]) == pytest.approx(3.440, abs=0.02)
        assert rows[0]["method"] == "quadrature"
        assert rows[0]["seed"] == "" and rows[0]["ser"] == ""

    def test_very_low_snr(self, const, tmp_path):
        out = tmp_path / "mi.csv"
        main(["mi", "--const", str(const), "--snr-db", "-40", "--csv", str(out)])
        assert float(read_csv(out)[0]["mi_bits"]) < 1e-3

    def test_mc_needs_seed(self, const, capsys):
        assert main(["mi", "--const", str(const), "--snr-db", "10", "--method", "mc"]) == 2
        assert "--seed" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["mi", "--const", str(tmp_path / "none.json"), "--snr-db", "10"]) == 2

    def test_mc_repeatable(self, const, tmp_path):
        outs = []
        for k in range(2):
            p = tmp_path / f"r{k}.csv"
            main(["mi", "--const", str(const), "--snr-db", "10", "--method", "mc",
                  "--kmc", "50000", "--seed", "7", "--csv", str(p)])
            outs.append(p.read_bytes())
        assert outs[0] == outs[1]

    def test_mc_threads_byte_identical(self, const, tmp_path):
        outs = []
        for threads in ("1", "4"):
            p = tmp_path / f"t{threads}.csv"
            r = run_cli("mi", "--const", const, "--snr-db", "0:10:20", "--method", "mc",
                        "--kmc", "100000", "--seed", "7", "--csv", p,
                        env={"GAM_THREADS": threads})
            assert r.returncode == 0, r.stderr
            outs.append(p.read_bytes())
        assert outs[0] == outs[1]


class TestSer:
    def test_analytic_and_mc(self, tmp_path):
        out = tmp_path / "ser.csv"
        assert main(["ser", "--scheme", "disc", "--n", "256", "--snr-db", "18:4:30",
                     "--analytic", "--mc", "--kmc", "40000", "--seed", "1",
                     "--csv", str(out)]) == 0
        rows = read_csv(out)
        assert list(rows[0]) == CSV_FIELDS
        an = {r["snr_db"]: float(r["ser"]) for r in rows if r["method"] == "analytic"}
        mc = {r["snr_db"]: float(r["ser"]) for r in rows if r["method"] == "monte_carlo"}
        assert set(an) == set(mc)
        for k in an:
            if 1e-2 <= an[k] <= 0.5:
                assert 1 / 1.5 <= mc[k] / an[k] <= 1.5
        assert all(r["mi_bits"] == "" for r in rows)

    def test_analytic_needs_known_scheme(self):
        assert main(["ser", "--scheme", "qam", "--n", "16", "--snr-db", "10",
                     "--analytic"]) == 2

    def test_mc_needs_seed(self):
        assert main(["ser", "--scheme", "disc", "--n", "16", "--snr-db", "10", "--mc"]) == 2


class TestOptimize:
    def test_writes_outputs(self, tmp_path):
        out, diag = tmp_path / "o.json", tmp_path / "d.json"
        assert main(["optimize", "--formulation", "p2", "--n", "16", "--snr-db", "11.7609",
                     "--out", str(out), "--diag", str(diag)]) == 0
        d = json.loads(diag.read_text())
        for key in ("mi_bits", "iterations", "converged", "trace", "residuals"):
            assert key in d
        assert load_json(out).n_points == 16
        assert d["mi_bits"] >= 3.549

    def test_config_and_flag_precedence(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"formulation": "P2", "n_points": 8, "snr_db": 5.0}))
        diag = tmp_path / "d.json"
        assert main(["optimize", "--config", str(cfg), "--n", "12",
                     "--diag", str(diag), "--out", str(tmp_path / "o.json")]) == 0
        assert load_json(tmp_path / "o.json").n_points == 12

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"formulation": "P2", "n_points": 8, "snr_db": 5.0,
                                   "bogus": 1}))
        assert main(["optimize", "--config", str(cfg)]) == 2

    def test_missing_snr(self):
        assert main(["optimize", "--formulation", "g2", "--n", "8"]) == 2


class TestSweep:
    def test_resumable(self, tmp_path):
        args = ["sweep", "--schemes", "gb-hr,qam", "--n", "16", "--snr-db", "0:5:15"]
        full = tmp_path / "full.csv"
        assert main(args + ["--csv", str(full)]) == 0
        part = tmp_path / "part.csv"
        main(["sweep", "--schemes", "gb-hr", "--n", "16", "--snr-db", "0:5:5",
              "--csv", str(part)])
        main(args + ["--csv", str(part)])
        assert sorted(read_csv(part), key=str) == sorted(read_csv(full), key=str)
        before = full.read_bytes()
        main(args + ["--csv", str(full)])
        assert full.read_bytes() == before

    def test_interrupted_run_completes(self, tmp_path):
        args = ["sweep", "--schemes", "disc", "--n", "16,64", "--snr-db", "0:10:20",
                "--csv"]
        ref = tmp_path / "ref.csv"
        main(args + [str(ref)])
        cut = tmp_path / "cut.csv"
        lines = ref.read_text().splitlines(keepends=True)
        cut.write_text("".join(lines[:4]))
        main(args + [str(cut)])
        assert cut.read_bytes() == ref.read_bytes()

    def test_mc_sweep_keys_on_seed(self, tmp_path):
        out = tmp_path / "s.csv"
        base = ["sweep", "--schemes", "disc", "--n", "16", "--snr-db", "10",
                "--method", "mc", "--kmc", "2000", "--csv", str(out)]
        main(base + ["--seed", "1"])
        main(base + ["--seed", "2"])
        main(base + ["--seed", "1"])
        assert [r["seed"] for r in read_csv(out)] == ["1", "2"]

    def test_rejects_bad_header(self, tmp_path):
        out = tmp_path / "s.csv"
        out.write_text("a,b\n1,2\n")
        assert main(["sweep", "--schemes", "disc", "--n", "16", "--snr-db", "0",
                     "--csv", str(out)]) == 2

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "sweep.json"
        cfg.write_text(json.dumps({"schemes": ["psk"], "n_points": [8],
                                   "snr_db_start": 0, "snr_db_step": 5, "snr_db_stop": 10}))
        out = tmp_path / "s.csv"
        assert main(["sweep", "--config", str(cfg), "--csv", str(out)]) == 0
        assert len(read_csv(out)) == 3


def test_tables_rejects_unknown():
    assert main(["tables", "--table", "3"]) == 2
