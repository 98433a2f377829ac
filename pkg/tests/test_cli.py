import csv
import io
import json
import math
import subprocess
import sys

import pytest

from agenttemp.cli import main
from agenttemp.simulator import batch_means


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def write(tmp_path, text, name="counts.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


HEADER = "label,n_plus,n_minus,B,mu,k,J,z\n"


class TestMeasure:
    def test_bundled_table1(self, capsys):
        code, out, _ = run(["measure", "--bundled"], capsys)
        assert code == 0
        r1, r2 = rows(out)
        assert list(r1) == ["label", "M", "T", "T_std_error", "inverted", "variant"]
        assert float(r1["M"]) == pytest.approx(0.353, abs=5e-4)
        assert float(r1["T"]) == pytest.approx(2.709, abs=1e-3)
        assert float(r2["M"]) == pytest.approx(0.316, abs=5e-4)
        assert float(r2["T"]) == pytest.approx(2.746, abs=1e-3)
        assert r1["inverted"] == "false" and r1["variant"] == "exact_eq7"

    def test_empty_file(self, tmp_path, capsys):
        code, _, err = run(["measure", write(tmp_path, "")], capsys)
        assert code == 2 and "error" in err

    def test_header_only(self, tmp_path, capsys):
        assert run(["measure", write(tmp_path, HEADER)], capsys)[0] == 2

    def test_malformed_row_reports_row(self, tmp_path, capsys):
        text = HEADER + "a,10,5,1,1,1,0,1\nb,ten,5,1,1,1,0,1\n"
        code, _, err = run(["measure", write(tmp_path, text)], capsys)
        assert code == 2 and "row 3" in err

    def test_balanced_row_error(self, tmp_path, capsys):
        text = HEADER + "ok,10,5,1,1,1,0,1\nbalanced,7,7,1,1,1,0,1\n"
        code, out, _ = run(["measure", write(tmp_path, text)], capsys)
        assert code == 0
        ok, bad = rows(out)
        assert ok["error"] == ""
        assert "temperature unbounded" in bad["error"] and bad["T"] == ""

    def test_all_rows_fail(self, tmp_path, capsys):
        text = HEADER + "balanced,7,7,1,1,1,0,1\n"
        assert run(["measure", write(tmp_path, text)], capsys)[0] == 3

    def test_inverted_row(self, tmp_path, capsys):
        text = HEADER + "inv,2805,5869,1,1,1,0,1\n"
        _, out, _ = run(["measure", write(tmp_path, text)], capsys)
        (row,) = rows(out)
        assert row["inverted"] == "true"
        assert float(row["T"]) == pytest.approx(-2.709, abs=1e-3)

    def test_variants(self, capsys):
        _, out, _ = run(["measure", "--bundled", "--variant", "ideal"], capsys)
        r1 = rows(out)[0]
        assert r1["variant"] == "ideal_eq9"
        assert float(r1["T"]) == pytest.approx(1 / float(r1["M"]))

    def test_as_sample_gives_error_bars(self, capsys):
        _, out, _ = run(["measure", "--bundled", "--as-sample"], capsys)
        assert all(float(r["T_std_error"]) > 0 for r in rows(out))

    def test_missing_input(self, capsys):
        assert run(["measure"], capsys)[0] == 2


class TestSimulate:
    def test_ideal_table1(self, capsys):
        code, out, _ = run(["simulate", "--sampler", "ideal", "--n", "1000000", "--T", "2.709",
                            "--samples", "20", "--seed", "3"], capsys)
        assert code == 0
        ms = [float(r["M"]) for r in rows(out)]
        sigma = math.sqrt((1 - 0.35325**2) / 1e6 / len(ms))
        assert abs(sum(ms) / len(ms) - 0.35325) < 4 * sigma

    def test_mcmc_matches_ideal_at_zero_coupling(self, capsys):
        common = ["--topology", "ring", "--n", "50", "--T", "2.0", "--samples", "5000",
                  "--interval", "2", "--burn-in", "50", "--seed", "4"]
        _, ideal, _ = run(["simulate", "--sampler", "ideal", *common], capsys)
        _, mcmc, _ = run(["simulate", "--sampler", "mcmc", *common], capsys)
        a = [float(r["M"]) for r in rows(ideal)]
        m_mc, se_mc = batch_means([float(r["M"]) for r in rows(mcmc)])
        se_ideal = math.sqrt((1 - math.tanh(0.5) ** 2) / 50 / len(a))
        assert abs(sum(a) / len(a) - m_mc) < 4 * math.hypot(se_ideal, se_mc)

    def test_lattice_against_oracle(self, capsys):
        physics = ["--topology", "square", "--side", "4", "--J", "1", "--B", "0.5"]
        _, out, _ = run(["oracle", *physics, "--T", "3"], capsys)
        exact = float(rows(out)[0]["mean_M"])
        _, out, err = run(["simulate", *physics, "--T", "3", "--samples", "200000",
                           "--interval", "1", "--seed", "5"], capsys)
        m, se = batch_means([float(r["M"]) for r in rows(out)])
        assert abs(m - exact) < 4 * se
        assert "mean M" in err


class TestCurve:
    def test_fig1(self, capsys):
        code, out, _ = run(["curve", "--grid", "0.01:0.99:50"], capsys)
        assert code == 0
        data = rows(out)
        assert len(data) == 200 and list(data[0]) == ["J", "M", "T_over_T0"]

    def test_point(self, capsys):
        _, out, _ = run(["curve", "--J", "0", "--grid", "0.5"], capsys)
        assert float(rows(out)[0]["T_over_T0"]) == pytest.approx(1.8205, abs=1e-4)

    @pytest.mark.parametrize("grid", ["0.9:0.1:5", "0.5,0.4", "a:b:c"])
    def test_bad_grid(self, grid, capsys):
        assert run(["curve", "--grid", grid], capsys)[0] == 2


class TestEquilibrium:
    def test_reference(self, capsys):
        code, out, _ = run(["equilibrium", "--J", "1", "--mu", "1", "--z", "12", "--B", "1",
                            "--m1", "0.01"], capsys)
        assert code == 0
        (row,) = rows(out)
        assert float(row["M2_exact"]) == pytest.approx(0.0106383, abs=1e-7)
        assert float(row["M2_linear"]) == pytest.approx(0.0106, abs=1e-12)
        assert float(row["dM2_dmu"]) == pytest.approx(-6e-4, abs=1e-12)

    def test_regime_warning(self, capsys):
        code, _, err = run(["equilibrium", "--m1", "0.1"], capsys)
        assert code == 0 and "small-surplus" in err

    def test_breakdown_row(self, capsys):
        code, out, _ = run(["equilibrium", "--m1", "0.01,0.2"], capsys)
        assert code == 0
        assert "breaks down" in rows(out)[1]["error"]


class TestOracle:
    def test_ideal_rows(self, capsys):
        code, out, _ = run(["oracle", "--topology", "ring", "--n", "10", "--J", "0",
                            "--T", "0.5:5:7"], capsys)
        assert code == 0
        for row in rows(out):
            assert float(row["mean_M"]) == pytest.approx(math.tanh(1 / float(row["T"])), abs=1e-12)

    def test_size_cap(self, capsys):
        assert run(["oracle", "--topology", "ring", "--n", "30"], capsys)[0] == 2


@pytest.mark.parametrize("argv", [
    ["measure", "--bundled"],
    ["curve", "--grid", "0.05:0.95:10"],
    ["equilibrium", "--m1", "0.001:0.01:5"],
    ["oracle", "--topology", "square", "--n", "9", "--J", "1", "--B", "0.5"],
    ["simulate", "--topology", "square", "--side", "3", "--J", "1", "--T", "2", "--samples", "50",
     "--seed", "9"],
])
def test_formats_agree_and_output_is_deterministic(argv, tmp_path, capsys):
    paths = [tmp_path / f"{i}.out" for i in range(3)]
    assert main([*argv, "--output", str(paths[0])]) == 0
    assert main([*argv, "--output", str(paths[1])]) == 0
    assert main([*argv, "--format", "json", "--output", str(paths[2])]) == 0
    capsys.readouterr()
    assert paths[0].read_bytes() == paths[1].read_bytes()
    from_csv = rows(paths[0].read_text())
    from_json = json.loads(paths[2].read_text())
    assert len(from_csv) == len(from_json)
    for c, j in zip(from_csv, from_json):
        assert set(c) == set(j)
        for key, value in j.items():
            if isinstance(value, float):
                assert float(c[key]) == value
            elif isinstance(value, bool):
                assert c[key] == str(value).lower()
            else:
                assert c[key] == ("" if value is None else str(value))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "agenttemp", "measure", "--bundled"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.startswith("label,M,T,T_std_error,inverted,variant")
