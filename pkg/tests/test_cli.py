"""Command-line interface: formats, exit codes, golden regression."""

import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

import sgwhiten as sg
from sgwhiten.cli import main, read_csv_column, write_csv

GOLDEN = Path(__file__).parent / "golden"


def run(args):
    return main([str(a) for a in args])


class TestDesign:
    def test_preset_a_stdout_and_artifact(self, tmp_path, capsys):
        rc = run(["design", "--preset", "A", "--M", 17, "--L", 5,
                  "--out", tmp_path])
        assert rc == 0
        out = capsys.readouterr().out
        wng = float(out.split("WNG=")[1].split()[0])
        assert wng == pytest.approx(0.2103, abs=5e-4)
        doc = json.loads((tmp_path / "filter_A.json").read_text())
        assert doc["M"] == 17 and doc["L"] == 5 and doc["d"] == 0
        assert len(doc["h"]) == 17

    def test_roundtrip_exact(self, tmp_path, presets):
        rc = run(["design", "--preset", "E", "--M", 17, "--L", 5,
                  "--out", tmp_path])
        assert rc == 0
        doc = json.loads((tmp_path / "filter_E.json").read_text())
        assert np.array_equal(np.asarray(doc["h"]), presets["E"].h)

    def test_pole_budget_validation_fails(self, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps(
            {"design": {"omega_list": list(np.linspace(0.2, 3.0, 9))}}))
        rc = run(["design", "--preset", "E", "--M", 17, "--L", 5,
                  "--config", config, "--out", tmp_path])
        assert rc == 2

    def test_missing_m_names_field(self, tmp_path, capsys):
        rc = run(["design", "--preset", "A", "--L", 5, "--out", tmp_path])
        assert rc == 2
        assert "'M'" in capsys.readouterr().err

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"design": {"bogus_key": 1}}))
        rc = run(["design", "--preset", "A", "--M", 17, "--L", 5,
                  "--config", config, "--out", tmp_path])
        assert rc == 2
        assert "bogus_key" in capsys.readouterr().err

    def test_custom_noise_model_from_config(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"design": {
            "noise": {"kind": "wide-band", "omega_c": 0.6884,
                      "omega_d": math.pi, "ts": 1.0}}}))
        rc = run(["design", "--M", 17, "--L", 5, "--config", config,
                  "--out", tmp_path])
        assert rc == 0
        doc = json.loads((tmp_path / "filter_custom.json").read_text())
        assert doc["wng"] == pytest.approx(0.2119, abs=2e-3)

    def test_numerical_failure_exit_code(self, tmp_path):
        # Damping too weak: the whitening inverse misses its residual bound.
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"design": {"sigma_nb": -1e-14}}))
        rc = run(["design", "--preset", "E", "--M", 17, "--L", 5,
                  "--config", config, "--out", tmp_path])
        assert rc == 3


class TestResponse:
    @pytest.fixture()
    def filter_a(self, tmp_path):
        run(["design", "--preset", "A", "--M", 17, "--L", 5, "--out", tmp_path])
        return tmp_path / "filter_A.json"

    def test_dc_row_unity(self, tmp_path, filter_a):
        rc = run(["response", filter_a, "--grid", 64, "--out", tmp_path])
        assert rc == 0
        mags = read_csv_column(tmp_path / "response_A.csv", "magnitude")
        omegas = read_csv_column(tmp_path / "response_A.csv", "omega")
        assert omegas[0] == 0.0
        assert mags[0] == pytest.approx(1.0, abs=1e-12)

    def test_two_point_grid(self, tmp_path, filter_a):
        run(["response", filter_a, "--grid", 2, "--out", tmp_path])
        omegas = read_csv_column(tmp_path / "response_A.csv", "omega")
        assert np.allclose(omegas, [0.0, math.pi])

    def test_notch_depths_in_decibels(self, tmp_path):
        run(["design", "--preset", "E", "--M", 17, "--L", 5, "--out", tmp_path])
        rc = run(["response", tmp_path / "filter_E.json", "--grid", 4096,
                  "--out", tmp_path])
        assert rc == 0
        omegas = read_csv_column(tmp_path / "response_E.csv", "omega")
        db = read_csv_column(tmp_path / "response_E.csv", "db")
        for null in (0.8608, 1.6022, math.pi):
            assert db[np.argmin(np.abs(omegas - null))] <= -40.0

    def test_json_format(self, tmp_path, filter_a):
        rc = run(["response", filter_a, "--grid", 16, "--format", "json",
                  "--out", tmp_path])
        assert rc == 0
        doc = json.loads((tmp_path / "response_A.json").read_text())
        assert len(doc["omega"]) == 16

    def test_unreadable_file(self, tmp_path):
        rc = run(["response", tmp_path / "nope.json", "--out", tmp_path])
        assert rc == 4

    def test_invalid_filter_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run(["response", bad, "--out", tmp_path]) == 4


class TestFilterCommand:
    @pytest.fixture()
    def filter_a(self, tmp_path):
        run(["design", "--preset", "A", "--M", 17, "--L", 5, "--out", tmp_path])
        return tmp_path / "filter_A.json"

    def test_constant_passthrough(self, tmp_path, filter_a):
        data = tmp_path / "in.csv"
        write_csv(data, ("x",), [(3.25,)] * 40)
        rc = run(["filter", filter_a, "--input", data, "--out", tmp_path])
        assert rc == 0
        y = read_csv_column(tmp_path / "filtered.csv", "y")
        assert len(y) == 40 - 16
        assert np.allclose(y, 3.25, atol=1e-10)

    def test_short_input_rejected(self, tmp_path, filter_a):
        data = tmp_path / "in.csv"
        write_csv(data, ("x",), [(1.0,)] * 10)
        assert run(["filter", filter_a, "--input", data, "--out", tmp_path]) == 2

    def test_malformed_row_reports_line(self, tmp_path, filter_a, capsys):
        data = tmp_path / "in.csv"
        data.write_text("x\n1.0\n2.0\nnot-a-number\n4.0\n")
        rc = run(["filter", filter_a, "--input", data, "--out", tmp_path])
        assert rc == 4
        assert "line 4" in capsys.readouterr().err

    def test_wrong_field_count_reports_line(self, tmp_path, filter_a, capsys):
        data = tmp_path / "in.csv"
        data.write_text("x\n1.0\n2.0,7\n")
        rc = run(["filter", filter_a, "--input", data, "--out", tmp_path])
        assert rc == 4
        assert "line 3" in capsys.readouterr().err

    def test_missing_column(self, tmp_path, filter_a, capsys):
        data = tmp_path / "in.csv"
        write_csv(data, ("value",), [(1.0,)] * 20)
        rc = run(["filter", filter_a, "--input", data, "--out", tmp_path])
        assert rc == 4
        assert "'x'" in capsys.readouterr().err

    def test_golden_output_bytes(self, tmp_path):
        rc = run(["filter", GOLDEN / "filter_A.json",
                  "--input", GOLDEN / "trace_low_white_seed0.csv",
                  "--out", tmp_path])
        assert rc == 0
        assert (tmp_path / "filtered.csv").read_bytes() \
            == (GOLDEN / "filtered_A.csv").read_bytes()

    def test_derivative_flag_rederives_taps(self, tmp_path, filter_a):
        data = tmp_path / "in.csv"
        write_csv(data, ("x",), [(float(i),) for i in range(40)])
        rc = run(["filter", filter_a, "--input", data, "--d", 1,
                  "--out", tmp_path])
        assert rc == 0
        y = read_csv_column(tmp_path / "filtered.csv", "y")
        assert np.allclose(y, 1.0, atol=1e-9)


class TestSimulate:
    def test_repeat_seed_identical_files(self, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        for out in (out1, out2):
            rc = run(["simulate", "--scenario", "low-white", "--seed", 3,
                      "--out", out])
            assert rc == 0
        name = "trace_low-white_seed3.csv"
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        assert (out1 / "table.json").read_bytes() \
            == (out2 / "table.json").read_bytes()

    def test_unknown_scenario(self, tmp_path, capsys):
        rc = run(["simulate", "--scenario", "turquoise", "--out", tmp_path])
        assert rc == 2
        assert "turquoise" in capsys.readouterr().err

    def test_outputs_present(self, tmp_path):
        rc = run(["simulate", "--scenario", "high-white", "--seeds", 2,
                  "--out", tmp_path])
        assert rc == 0
        for seed in (0, 1):
            assert (tmp_path / f"trace_high-white_seed{seed}.csv").exists()
            assert (tmp_path / f"detections_high-white_seed{seed}.json").exists()
        assert (tmp_path / "table.csv").exists()
        table = json.loads((tmp_path / "table.json").read_text())
        assert set(table["median_peak_db"]) == {"high-white"}

    def test_matched_column_e_dominates(self, tmp_path):
        rc = run(["simulate", "--scenario", "matched-colored", "--seeds", 4,
                  "--out", tmp_path])
        assert rc == 0
        table = json.loads((tmp_path / "table.json").read_text())
        row = table["median_peak_db"]["matched-colored"]
        assert max(row, key=row.get) == "E"

    def test_trace_columns(self, tmp_path):
        run(["simulate", "--scenario", "matched-colored", "--seed", 0,
             "--out", tmp_path])
        path = tmp_path / "trace_matched-colored_seed0.csv"
        header = [line for line in path.read_text().splitlines()
                  if not line.startswith("#")][0].split(",")
        assert header[:2] == ["n", "x"]
        for lab in sg.PRESET_LABELS:
            for col in (f"y_{lab}", f"zdb_{lab}", f"det_{lab}"):
                assert col in header

    def test_exit_zero_even_without_detections(self, tmp_path):
        # Detection content is data, not process status.
        rc = run(["simulate", "--scenario", "mismatched-colored", "--seed", 5,
                  "--out", tmp_path])
        assert rc == 0


class TestDetectionCsv:
    def test_schema_and_roundtrip(self, tmp_path, presets):
        from sgwhiten.cli import write_detection_csv

        trace = sg.build_trace("low-white", seed=2, amplitude=10.0)
        report = sg.run_detector(presets["A"], trace)
        path = tmp_path / "detections.csv"
        write_detection_csv(report, path)
        z = read_csv_column(path, "z")
        z_db = read_csv_column(path, "z_db")
        detected = read_csv_column(path, "detected")
        assert len(z) == len(report.z)
        assert np.allclose(z, report.z, rtol=0, atol=0)
        assert np.all(z_db >= -300.0)
        flagged = np.nonzero(detected)[0] + report.offset
        assert np.array_equal(flagged, report.events)


class TestGoldenTrace:
    def test_seeded_trace_matches_fixture(self):
        # Committed trace: low-white, seed 0, default amplitude and gap.
        # Comparison is on parsed numbers, not raw bytes.
        x_golden = read_csv_column(GOLDEN / "trace_low_white_seed0.csv", "x")
        trace = sg.build_trace("low-white", seed=0)
        assert len(x_golden) == len(trace.x)
        assert np.allclose(trace.x, x_golden, rtol=1e-12, atol=1e-12)


class TestEntryPoint:
    def test_console_script(self, tmp_path):
        result = subprocess.run(
            [sys.executable, "-m", "sgwhiten.cli", "design", "--preset", "A",
             "--M", "17", "--L", "5", "--out", str(tmp_path)],
            capture_output=True, text=True)
        assert result.returncode == 0
        wng = float(result.stdout.split("WNG=")[1].split()[0])
        assert wng == pytest.approx(0.2103, abs=5e-4)

    def test_help_lists_commands(self):
        result = subprocess.run(
            [sys.executable, "-m", "sgwhiten.cli", "--help"],
            capture_output=True, text=True)
        assert result.returncode == 0
        for cmd in ("design", "response", "filter", "simulate"):
            assert cmd in result.stdout
