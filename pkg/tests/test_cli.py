import json

import numpy as np
import pytest

from gefzeros.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


class TestConstants:
    def test_table(self, capsys):
        code, out, _ = run(capsys, "constants", "--p-grid", "0:1:0.5",
                           "--no-timestamp")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("#") and "seed=0" in lines[0]
        assert lines[1] == "p,q,Z_p,G_p"
        assert len(lines) == 5  # header + columns + p in {0, 0.5, 1}
        first = lines[2].split(",")
        assert float(first[1]) == pytest.approx(np.e)

    def test_reproducible_bytes(self, capsys):
        a = run(capsys, "constants", "--p-grid", "0:1:0.25", "--no-timestamp")
        b = run(capsys, "constants", "--p-grid", "0:1:0.25", "--no-timestamp")
        assert a == b

    def test_bad_grid_is_config_error(self, capsys):
        code, _, err = run(capsys, "constants", "--p-grid", "nonsense")
        assert code == 2
        assert json.loads(err)["error"] == "config"


class TestMeasures:
    def test_json_payload(self, capsys):
        code, out, _ = run(capsys, "measures", "--p", "0.5", "--alpha", "8",
                           "--no-timestamp")
        assert code == 0
        payload = json.loads(out)
        assert payload["total_mass"] == pytest.approx(1.0)
        f = payload["functional"]
        assert f["I_alpha"] == pytest.approx(f["I_closed_form"], abs=1e-9)

    def test_csv_potential_profile(self, capsys):
        code, out, _ = run(capsys, "measures", "--p", "0", "--alpha", "8",
                           "--format", "csv", "--no-timestamp")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[1] == "radius,U"
        assert len(lines) == 202

    def test_invalid_p(self, capsys):
        code, _, err = run(capsys, "measures", "--p", "1", "--alpha", "8")
        assert code == 2
        assert json.loads(err)["error"] == "config"


class TestOptimize:
    def test_small_run(self, capsys, tmp_path):
        trace = tmp_path / "trace.csv"
        code, out, _ = run(capsys, "optimize", "--p", "0", "--alpha", "4",
                           "--shells", "80", "--budget", "150",
                           "--trace-out", str(trace), "--no-timestamp")
        assert code == 0
        payload = json.loads(out)
        # wiring smoke test: 80 shells leaves ~1e-2 discretization error
        assert abs(payload["gap"]) < 2e-2
        assert len(payload["masses"]) == 80
        rows = trace.read_text().strip().splitlines()
        assert rows[1] == "iter,I_best,feasibility,argmax_radius"
        assert len(rows) > 3


class TestSampleAndHist:
    def test_pipeline(self, capsys, tmp_path):
        nd = tmp_path / "zeros.ndjson"
        code, _, _ = run(capsys, "sample", "--n-samples", "6", "--N", "12",
                         "--L", "1.0", "--seed", "5", "--out", str(nd),
                         "--no-timestamp")
        assert code == 0
        body = [ln for ln in nd.read_text().splitlines()
                if ln and not ln.startswith("#")]
        assert len(body) == 6
        rec = json.loads(body[0])
        assert len(rec["zeros"]) == 12

        code, out, _ = run(capsys, "hist", "--input", str(nd), "--bins", "8",
                           "--no-timestamp")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[1] == "bin_lo,bin_hi,density,stderr"
        assert len(lines) == 10

    def test_sample_reproducible(self, capsys):
        a = run(capsys, "sample", "--n-samples", "3", "--N", "8", "--L", "1.0",
                "--seed", "9", "--no-timestamp")
        b = run(capsys, "sample", "--n-samples", "3", "--N", "8", "--L", "1.0",
                "--seed", "9", "--no-timestamp")
        assert a == b

    def test_missing_input_is_config_error(self, capsys):
        code, _, err = run(capsys, "hist", "--input", "/nonexistent.ndjson")
        assert code == 2
        assert json.loads(err)["error"] == "config"


class TestHoleMcmc:
    def test_short_chain(self, capsys):
        code, out, _ = run(capsys, "hole-mcmc", "--N", "6", "--L", "1.0",
                           "--hole-radius", "0.8", "--sweeps", "300",
                           "--seed", "3", "--no-timestamp")
        assert code == 0
        lines = out.strip().splitlines()
        assert "acceptance=" in lines[0]
        for ln in lines[1:]:
            rec = json.loads(ln)
            radii = [abs(complex(x, y)) for x, y in rec["zeros"]]
            assert min(radii) >= 0.8


class TestConstruct:
    def test_certified_draws(self, capsys):
        code, out, _ = run(capsys, "construct", "--r", "4", "--p", "0.5",
                           "--draws", "5", "--seed", "1", "--no-timestamp")
        assert code == 0
        for ln in out.strip().splitlines()[1:]:
            rec = json.loads(ln)
            assert rec["holds"] and rec["count"] == rec["k0"] == 8

    def test_config_file_with_flag_precedence(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"r": 4, "p": 0.5, "draws": 2, "seed": 7}))
        code, out, _ = run(capsys, "construct", "--p", "2", "--config",
                           str(cfg), "--no-timestamp")
        assert code == 0
        body = out.strip().splitlines()[1:]
        assert len(body) == 2  # draws from file
        assert json.loads(body[0])["k0"] == 32  # p from the flag wins


class TestVerify:
    def test_all_pass(self, capsys):
        code, out, _ = run(capsys, "verify", "--fast", "--no-timestamp")
        assert code == 0
        assert "FAIL" not in out and "PASS" in out
