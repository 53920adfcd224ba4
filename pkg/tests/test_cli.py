import csv
import io
import json

import numpy as np
import pytest

from dpmeans.cli import main

CAUCHY = {"kind": "cauchy", "params": {"theta": 0.0, "sigma": 1.0}}
TWO_POINT = {"kind": "discrete", "atoms": [{"x": 0.0, "mass": 1.0}, {"x": 1.0, "mass": 1.0}]}
SKEWED = {"kind": "discrete", "atoms": [{"x": 2.0, "mass": 1.0}, {"x": -1.0, "mass": 1.0}]}


@pytest.fixture
def measure_file(tmp_path):
    def make(doc, name="m.json"):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        return str(p)

    return make


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestDensity:
    def test_cauchy_grid(self, measure_file, tmp_path):
        out = tmp_path / "d.csv"
        assert main(["density", "--measure", measure_file(CAUCHY), "--grid", "-5:5:21", "--out", str(out)]) == 0
        rows = read_rows(out)
        assert len(rows) == 21
        centre = [r for r in rows if float(r["xi"]) == 0.0][0]
        assert abs(float(centre["density"]) - 0.31831) <= 1e-4
        assert (tmp_path / "d.csv.manifest.json").exists()

    def test_two_point_uniform(self, measure_file, tmp_path):
        out = tmp_path / "d.csv"
        assert main(["density", "--measure", measure_file(TWO_POINT), "--grid", "0.1:0.9:9", "--out", str(out)]) == 0
        np.testing.assert_allclose([float(r["density"]) for r in read_rows(out)], 1.0, atol=1e-9)

    def test_round_trip_mass(self, measure_file, tmp_path):
        out = tmp_path / "d.csv"
        main(["density", "--measure", measure_file(TWO_POINT), "--grid", "0.005:0.995:199", "--out", str(out)])
        rows = read_rows(out)
        x = np.array([float(r["xi"]) for r in rows])
        d = np.array([float(r["density"]) for r in rows])
        assert np.trapezoid(d, x) == pytest.approx(0.99, abs=1e-6)

    def test_malformed_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"kind": "discrete", "atoms": [')
        out = tmp_path / "d.csv"
        assert main(["density", "--measure", str(bad), "--grid", "0:1:3", "--out", str(out)]) == 1
        assert not out.exists()

    def test_bad_grid(self, measure_file, tmp_path):
        out = tmp_path / "d.csv"
        assert main(["density", "--measure", measure_file(TWO_POINT), "--grid", "0:1", "--out", str(out)]) == 1
        assert not out.exists()

    def test_failed_points(self, measure_file, tmp_path):
        out = tmp_path / "d.csv"
        assert main(["density", "--measure", measure_file(TWO_POINT), "--grid", "0:1:3", "--out", str(out)]) == 2
        rows = read_rows(out)
        assert rows[0]["err"] == "FAILED" and rows[2]["err"] == "FAILED"
        assert float(rows[1]["density"]) == pytest.approx(1.0)

    def test_json_embeds_manifest(self, measure_file, tmp_path):
        out = tmp_path / "d.json"
        main(["density", "--measure", measure_file(CAUCHY), "--grid", "-1:1:3", "--out", str(out), "--format", "json"])
        doc = json.loads(out.read_text())
        assert doc["manifest"]["command"][1] == "density"
        assert len(doc["manifest"]["measure_sha256"]) == 64


class TestOtherCommands:
    def test_charfn_at_zero(self, measure_file, capsys):
        assert main(["charfn", "--measure", measure_file(TWO_POINT), "--t", "0"]) == 0
        row = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))[0]
        assert float(row["re"]) == 1.0 and float(row["im"]) == 0.0

    def test_var_mgf_at_zero(self, measure_file, capsys):
        assert main(["var-mgf", "--measure", measure_file(TWO_POINT), "--t", "0"]) == 0
        row = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))[0]
        assert float(row["value"]) == 1.0

    def test_stieltjes_cauchy(self, measure_file, capsys):
        assert main(["stieltjes", "--measure", measure_file(CAUCHY), "--t", "3", "--c", "1"]) == 0
        row = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))[0]
        assert complex(float(row["re"]), float(row["im"])) == pytest.approx(0.25, abs=1e-12)

    def test_sample_is_reproducible(self, measure_file, tmp_path):
        m = measure_file(TWO_POINT)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            assert main(["sample", "--measure", m, "--seed", "7", "--n", "1000", "--out", str(p)]) == 0
        assert a.read_bytes() == b.read_bytes()
        manifest = json.loads((tmp_path / "a.csv.manifest.json").read_text())
        assert manifest["seed"] == 7


class TestVerify:
    def test_cauchy_fixed_point(self, capsys):
        assert main(["verify", "--suite", "cauchy-fixed-point"]) == 0
        assert "FAIL " not in capsys.readouterr().out

    def test_symmetry_with_asymmetric_user_measure(self, measure_file, capsys):
        assert main(["verify", "--suite", "symmetry", "--measure", measure_file(SKEWED)]) == 0
        out = capsys.readouterr().out
        assert "EXPECTED-FAIL-PASSED" in out and "user" in out

    def test_unknown_suite(self):
        assert main(["verify", "--suite", "nonsense"]) == 1
