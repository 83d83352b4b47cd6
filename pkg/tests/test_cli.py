import json
import subprocess
import sys

import pytest

from leibniz3.cli import main
from leibniz3.config import ConfigError, RunConfig, load_config
from leibniz3.report import CaseResult, ResidualReport, dumps, run_document, strip_timing, to_csv

FAST = """[run]
suites = identities, faa, counterexample
corpus = square, sin, two_plus_sin, three_plus_x2, exp_1x, const_four
points_per_check = 4
triples = 3
seed = 7

[operator.mixed]
family = characterized
c0 = 1
c1 = x
c2 = 3
d00 = 4

[operator.d2]
family = second_derivative
"""


@pytest.fixture
def fast_config(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text(FAST)
    return p


def read_report(path):
    return json.loads(path.read_text(encoding="utf-8"))


def without_timing_lines(text):
    return [line for line in text.splitlines() if '"wall_time"' not in line]


class TestConfig:
    def test_defaults_validate(self):
        RunConfig().validate()

    def test_load(self, fast_config):
        cfg = load_config(fast_config)
        assert cfg.suites == ["identities", "faa", "counterexample"]
        assert cfg.seed == 7 and cfg.points_per_check == 4
        assert [n for n, _ in cfg.operators] == ["mixed", "d2"]

    @pytest.mark.parametrize("body,msg", [
        ("[run]\ntolerance = 0\n", "tolerance"),
        ("[run]\ntolerance = -1e-9\n", "tolerance"),
        ("[run]\nsuites = \n", "suite"),
        ("[run]\nsuites = bogus\n", "unknown suites"),
        ("[run]\ncorpus = nothing_here\n", "unknown corpus"),
        ("[run]\nformat = xml\n", "format"),
        ("[run]\nseed = abc\n", "bad value"),
        ("[operator.bad]\nfamily = characterized\nc1 = 1\nk = 0\n", "k=0"),
        ("[operator.bad]\nfamily = nope\n", "unknown family"),
        ("[operator.bad]\nfamily = characterized\nc0 = tan(x)\n", "unknown coefficient"),
        ("not an ini file", "malformed"),
    ])
    def test_rejections(self, tmp_path, body, msg):
        p = tmp_path / "bad.ini"
        p.write_text(body)
        with pytest.raises(ConfigError, match=msg):
            load_config(p)


class TestReport:
    def test_pass_semantics(self):
        assert CaseResult("c", "D", [], 1, 1e-10, 2.0, 1e-10).passed
        assert not CaseResult("c", "D", [], 1, 3e-10, 2.0, 1e-10).passed
        assert CaseResult("c", "D", [], 1, 5.0, 1.0, 1e-6, expect="violation").passed
        assert not CaseResult("c", "D", [], 1, 0.0, 1.0, 1e-6, expect="violation").passed

    def test_json_keys_and_precision(self):
        rep = ResidualReport("s", 3, [CaseResult("c", "D", ["f"], 2, 1 / 3, 1.0, 1e-9)], 0.5)
        text = dumps(run_document([rep], 3, 1e-9))
        doc = json.loads(text)
        assert doc["schema"] == 1
        case = doc["reports"][0]["cases"][0]
        assert set(case) == {"case", "operator", "functions", "sample_count", "max_residual",
                             "scale", "tolerance", "expect", "pass"}
        assert case["max_residual"] == 1 / 3
        assert "3.3333333333333331e-01" in text

    def test_nan_becomes_null(self):
        assert json.loads(dumps({"v": float("nan")}))["v"] is None

    def test_strip_timing(self):
        doc = {"a": 1, "wall_time": 2.0, "b": [{"wall_time": 1.0, "c": 3}]}
        assert strip_timing(doc) == {"a": 1, "b": [{"c": 3}]}

    def test_csv_header(self):
        rep = ResidualReport("s", 3, [CaseResult("c", "D", ["f", "g"], 2, 0.0, 1.0, 1e-9)])
        lines = to_csv([rep]).splitlines()
        assert lines[0].startswith("suite,case,operator,functions")
        assert lines[1].startswith("s,c,D,f;g,2,")


class TestVerify:
    def test_runs_and_writes(self, fast_config, tmp_path):
        out = tmp_path / "r.json"
        assert main(["verify", "--config", str(fast_config), "--report", str(out), "--quiet"]) == 0
        doc = read_report(out)
        assert doc["pass"] is True
        assert [r["suite"] for r in doc["reports"]] == ["identities", "faa", "counterexample"]

    def test_deterministic(self, fast_config, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            assert main(["verify", "--config", str(fast_config), "--report", str(p),
                         "--quiet"]) == 0
        assert without_timing_lines(a.read_text()) == without_timing_lines(b.read_text())
        assert strip_timing(read_report(a)) == strip_timing(read_report(b))

    def test_seed_changes_samples(self, fast_config, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["verify", "--config", str(fast_config), "--report", str(a), "--quiet"])
        main(["verify", "--config", str(fast_config), "--report", str(b), "--quiet",
              "--seed", "8"])
        assert strip_timing(read_report(a)) != strip_timing(read_report(b))
        assert read_report(b)["seed"] == 8

    def test_csv(self, fast_config, tmp_path):
        out = tmp_path / "r.csv"
        assert main(["verify", "--config", str(fast_config), "--report", str(out),
                     "--format", "csv", "--quiet"]) == 0
        assert out.read_text().startswith("suite,case,")

    def test_counterexample_suite_flags_expected_violation(self, tmp_path):
        cfg = tmp_path / "c.ini"
        cfg.write_text("[run]\nsuites = counterexample\n")
        out = tmp_path / "r.json"
        assert main(["verify", "--config", str(cfg), "--report", str(out), "--quiet"]) == 0
        cases = {c["case"]: c for c in read_report(out)["reports"][0]["cases"]}
        assert cases["id_powers/composition"]["pass"] is True
        assert cases["id_powers/composition"]["expect"] == "holds"
        assert cases["id2/composition"]["expect"] == "violation"
        assert cases["id2/composition"]["pass"] is True

    def test_tolerance_zero_is_config_error(self, tmp_path, capsys):
        cfg = tmp_path / "z.ini"
        cfg.write_text("[run]\ntolerance = 0\n")
        assert main(["verify", "--config", str(cfg)]) != 0
        assert "tolerance" in capsys.readouterr().err

    def test_illegal_operator_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "k.ini"
        cfg.write_text("[operator.bad]\nfamily = characterized\nc1 = 2\nk = 0\n")
        assert main(["verify", "--config", str(cfg)]) != 0
        assert "k=0" in capsys.readouterr().err

    def test_unwritable_report(self, fast_config, tmp_path, capsys):
        bad = tmp_path / "missing" / "r.json"
        assert main(["verify", "--config", str(fast_config), "--report", str(bad)]) != 0
        assert "cannot write" in capsys.readouterr().err

    def test_failing_case_gives_nonzero_exit(self, fast_config, tmp_path, capsys):
        # round-off alone exceeds a 1e-300 tolerance
        out = tmp_path / "r.json"
        assert main(["verify", "--config", str(fast_config), "--tol", "1e-300",
                     "--report", str(out)]) == 1
        assert "FAIL identities/id2/mixed" in capsys.readouterr().out
        assert read_report(out)["pass"] is False

    def test_env_report_path(self, fast_config, tmp_path, monkeypatch):
        env = tmp_path / "env.json"
        monkeypatch.setenv("LEIBNIZ3_REPORT", str(env))
        assert main(["verify", "--config", str(fast_config), "--quiet"]) == 0
        assert env.exists()
        flag = tmp_path / "flag.json"
        assert main(["verify", "--config", str(fast_config), "--quiet",
                     "--report", str(flag)]) == 0
        assert flag.exists()


class TestSubcommands:
    def test_faa(self, capsys):
        assert main(["faa", "--order", "3"]) == 0
        out = capsys.readouterr().out
        assert "has 3 terms" in out and "-3 * f^(1) f^(2) / f^2" in out

    def test_recover(self, capsys):
        assert main(["recover", "--operator", "char_1234", "--points", "3"]) == 0
        rows = capsys.readouterr().out.splitlines()[1:]
        assert len(rows) == 3
        for row in rows:
            assert [float(v) for v in row.split()[1:5]] == pytest.approx([1, 2, 3, 4])

    def test_recover_rejects_log_polynomial(self, capsys):
        assert main(["recover", "--operator", "log_poly", "--points", "2"]) != 0
        assert "not in the characterized family" in capsys.readouterr().err

    def test_recover_unknown(self, capsys):
        assert main(["recover", "--operator", "nope", "--points", "1"]) == 2

    def test_counterexample(self, capsys):
        assert main(["counterexample", "--trials", "100"]) == 0
        out = capsys.readouterr().out
        assert "violating triple" in out and "phi quadratic-fit residual" in out

    def test_counterexample_unreachable(self, capsys):
        assert main(["counterexample", "--trials", "5", "--threshold", "1e300"]) == 1
        assert "no violation found" in capsys.readouterr().err

    def test_aichinger(self, capsys):
        assert main(["aichinger", "--dim", "3", "--samples", "40"]) == 0
        assert "max misfit" in capsys.readouterr().out

    def test_aichinger_dimension_mismatch(self):
        assert main(["aichinger", "--dim", "2", "--samples", "40",
                     "--operator", "char_1234"]) == 2

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "leibniz3", "faa", "--order", "2"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0 and "has 2 terms" in proc.stdout
