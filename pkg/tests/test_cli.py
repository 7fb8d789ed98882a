"""Command-line interface: exit codes, formats, manifests, determinism.

Most cases drive ``main()`` in-process for speed; a few go through a real
subprocess to cover the installed entry point end to end.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import subprocess
import sys

import pytest

from dotwire.cli import main

PI = math.pi

CSV_FLOAT = re.compile(r"^-?\d\.\d{17}e[+-]\d{2}$")

# Smallest useful invocation: one table, three detunings.
TINY = ["spectrum", "--single-dot", "--n-points", "3"]


def run_main(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestUsageErrors:
    def test_no_subcommand(self, capsys):
        code, _, err = run_main(capsys)
        assert code == 1
        assert "subcommand" in err

    def test_unknown_flag(self, capsys):
        code, _, err = run_main(capsys, "spectrum", "--frequency", "3")
        assert code == 1
        assert "error:" in err

    def test_bad_choice(self, capsys):
        code, _, err = run_main(capsys, "spectrum", "--sr", "sideways")
        assert code == 1
        assert "invalid choice" in err

    def test_threads_must_be_positive(self, capsys):
        code, _, err = run_main(capsys, "--threads", "0", *TINY)
        assert code == 1
        assert "--threads" in err

    def test_missing_config_file(self, capsys, tmp_path):
        code, _, err = run_main(
            capsys, "--config", str(tmp_path / "nope.ini"), *TINY
        )
        assert code == 1
        assert "not found" in err

    def test_invalid_parameter_value(self, capsys):
        # Library-level validation surfaces as a usage error, not a crash.
        code, _, err = run_main(capsys, "storage", "--pulse-ratio", "0.9")
        assert code == 1
        assert "pulse_ratio" in err


class TestSpectrumOutput:
    def test_single_table_csv(self, capsys):
        code, out, _ = run_main(capsys, *TINY)
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "delta,T,R,Loss"
        assert len(lines) == 4
        for cell in lines[1].split(","):
            assert CSV_FLOAT.match(cell), cell

    def test_multi_table_csv_has_name_markers(self, capsys):
        code, out, _ = run_main(
            capsys, "spectrum", "--kd", "0.785", "--gamma-nr", "0.025",
            "--sr", "both", "--n-points", "3",
        )
        assert code == 0
        names = [line[2:] for line in out.split("\n") if line.startswith("# ")]
        assert names == [
            "spectrum_kd0.785_gnr0.025_sr.csv",
            "spectrum_kd0.785_gnr0.025_nosr.csv",
            "spectrum_single_gp0.05.csv",
        ]
        assert out.count("delta,T,R,Loss") == 3

    def test_single_table_json(self, capsys):
        code, out, _ = run_main(capsys, "--format", "json", *TINY)
        assert code == 0
        doc = json.loads(out)
        assert doc["columns"] == ["delta", "T", "R", "Loss"]
        assert len(doc["rows"]) == 3
        assert isinstance(doc["rows"][0][1], float)

    def test_multi_table_json(self, capsys):
        code, out, _ = run_main(
            capsys, "--format", "json", "spectrum", "--kd", "0.785",
            "--gamma-nr", "0.1", "--n-points", "3",
        )
        assert code == 0
        doc = json.loads(out)
        names = [t["name"] for t in doc["tables"]]
        assert names == ["spectrum_kd0.785_gnr0.1_sr",
                         "spectrum_single_gp0.05"]

    def test_flux_conservation_in_output(self, capsys):
        _, out, _ = run_main(capsys, *TINY)
        for line in out.strip().split("\n")[1:]:
            _, T, R, Loss = map(float, line.split(","))
            assert T + R + Loss == pytest.approx(1.0, abs=1e-12)


class TestNanHandling:
    SINGULAR = [
        "concurrence-map",
        "--kd-min", str(2 * PI), "--kd-max", str(2 * PI), "--n-kd", "1",
        "--delta-min", "-1", "--delta-max", "1", "--n-delta", "3",
    ]

    def test_csv_nan_literal(self, capsys):
        code, out, _ = run_main(capsys, *self.SINGULAR)
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "kd,delta,C"
        assert lines[2].split(",")[2] == "nan"

    def test_json_null(self, capsys):
        code, out, _ = run_main(capsys, "--format", "json", *self.SINGULAR)
        assert code == 0
        doc = json.loads(out)
        assert doc["rows"][1][2] is None
        assert doc["rows"][0][2] == pytest.approx(1.0)


class TestConfigResolution:
    def test_config_fills_defaults(self, capsys, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text("[spectrum]\nsingle_dot = true\nn_points = 5\n")
        code, out, _ = run_main(capsys, "--config", str(ini), "spectrum")
        assert code == 0
        assert len(out.strip().split("\n")) == 6

    def test_flag_overrides_config(self, capsys, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text("[spectrum]\nsingle_dot = true\nn_points = 5\n")
        code, out, _ = run_main(
            capsys, "--config", str(ini), "spectrum", "--n-points", "3"
        )
        assert code == 0
        assert len(out.strip().split("\n")) == 4

    def test_other_sections_ignored(self, capsys, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text(
            "[spectrum]\nsingle_dot = true\nn_points = 3\n"
            "[storage]\npulse_ratio = 5\n"
        )
        code, out, _ = run_main(capsys, "--config", str(ini), "spectrum")
        assert code == 0
        assert len(out.strip().split("\n")) == 4


class TestExitCodeContracts:
    def test_singular_point_is_2(self, capsys):
        code, _, err = run_main(
            capsys, "spectrum", "--kd", str(2 * PI), "--gamma0", "0",
            "--gamma-nr", "0", "--n-points", "3",
            "--delta-min", "-1", "--delta-max", "1",
        )
        assert code == 2
        assert "singular" in err

    def test_population_underflow_is_2(self, capsys):
        code, _, err = run_main(capsys, "storage", "--pulse-ratio", "1.05")
        assert code == 2
        assert "error:" in err

    def test_bandwidth_is_2(self, capsys):
        code, _, err = run_main(
            capsys, "storage", "--pulse-ratio", "5", "--sigma-t", "4"
        )
        assert code == 2
        assert "bandwidth" in err

    def test_grid_too_coarse_is_3(self, capsys):
        code, _, err = run_main(
            capsys, "oracle-verify", "--quick", "--sigma-k", "0.0005"
        )
        assert code == 3
        assert "error:" in err


class TestOutDirAndManifest:
    def test_writes_files_and_manifest(self, capsys, tmp_path):
        out = tmp_path / "run"
        code, stdout, _ = run_main(capsys, "--out", str(out), *TINY)
        assert code == 0
        assert stdout == ""  # data went to files, not the console
        data = out / "spectrum_single_gp0.05.csv"
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "spectrum"
        assert manifest["format"] == "csv"
        assert manifest["parameters"]["n_points"] == 3
        assert manifest["parameters"]["single_dot"] is True
        assert manifest["warnings"] == []
        assert manifest["wall_time_s"] >= 0.0
        (entry,) = manifest["outputs"]
        payload = data.read_bytes()
        assert entry["path"] == data.name
        assert entry["size_bytes"] == len(payload)
        assert entry["sha256"] == hashlib.sha256(payload).hexdigest()

    def test_every_file_listed_with_checksum(self, capsys, tmp_path):
        out = tmp_path / "run"
        code, _, _ = run_main(
            capsys, "--out", str(out), "spectrum", "--kd", "0.785",
            "--sr", "both", "--n-points", "3",
        )
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        listed = {e["path"] for e in manifest["outputs"]}
        on_disk = {p.name for p in out.iterdir()} - {"manifest.json"}
        assert listed == on_disk
        assert len(listed) == 2 * 3 + 1  # sr x gamma_nr grid + single ref
        for entry in manifest["outputs"]:
            payload = (out / entry["path"]).read_bytes()
            assert entry["sha256"] == hashlib.sha256(payload).hexdigest()

    def test_data_bytes_are_deterministic(self, capsys, tmp_path):
        args = ["concurrence-map", "--n-kd", "4", "--n-delta", "4"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert run_main(capsys, "--out", str(a), *args)[0] == 0
        assert run_main(capsys, "--out", str(b), *args)[0] == 0
        name = "concurrence_map.csv"
        assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_manifest_echo_reruns_identically(self, capsys, tmp_path):
        first = tmp_path / "first"
        args = ["spectrum", "--kd", "0.9", "--gamma-nr", "0.3",
                "--n-points", "7"]
        assert run_main(capsys, "--out", str(first), *args)[0] == 0
        params = json.loads((first / "manifest.json").read_text())["parameters"]

        lines = ["[spectrum]"]
        for key, value in params.items():
            if isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, list):
                text = ", ".join(repr(v) for v in value)
            elif isinstance(value, str):
                text = value
            else:
                text = repr(value)
            lines.append(f"{key} = {text}")
        ini = tmp_path / "echo.ini"
        ini.write_text("\n".join(lines) + "\n")

        second = tmp_path / "second"
        code, _, _ = run_main(
            capsys, "--config", str(ini), "--out", str(second), "spectrum"
        )
        assert code == 0
        names = {p.name for p in first.iterdir()}
        assert {p.name for p in second.iterdir()} == names
        for name in names - {"manifest.json"}:
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_threaded_error_path(self, capsys):
        args = ["oracle-verify", "--quick", "--sigma-k", "0.0005"]
        # The probe cannot fit this grid, so setup fails fast on every
        # worker; byte-level agreement under threads is covered above.
        assert run_main(capsys, "--threads", "4", *args)[0] == 3

    def test_nothing_written_on_compute_error(self, capsys, tmp_path):
        out = tmp_path / "run"
        code, _, _ = run_main(
            capsys, "--out", str(out), "spectrum", "--kd", str(2 * PI),
            "--gamma0", "0", "--gamma-nr", "0", "--n-points", "3",
            "--delta-min", "-1", "--delta-max", "1",
        )
        assert code == 2
        assert not out.exists()

    def test_unwritable_target_is_config_error(self, capsys, tmp_path):
        blocker = tmp_path / "occupied"
        blocker.write_text("not a directory")
        code, _, err = run_main(capsys, "--out", str(blocker), *TINY)
        assert code == 1
        assert "cannot write output" in err


class TestStorageCommand:
    def test_efficiency_tracks_bound(self, capsys):
        code, out, _ = run_main(capsys, "storage", "--pulse-ratio", "5")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "P,efficiency,bound"
        ratio, eff, bound = map(float, lines[1].split(","))
        assert ratio == 5.0
        assert bound == pytest.approx(0.8)
        assert eff == pytest.approx(0.8, abs=5e-3)


class TestSubprocessEntryPoints:
    def run(self, *argv):
        return subprocess.run(
            [sys.executable, "-m", "dotwire", *argv],
            capture_output=True, text=True, timeout=300,
        )

    def test_version(self):
        proc = self.run("--version")
        assert proc.returncode == 0
        assert proc.stdout.startswith("dotwire ")

    def test_help_lists_commands(self):
        proc = self.run("--help")
        assert proc.returncode == 0
        for name in ("spectrum", "peaks", "concurrence-map", "phase",
                     "oracle-verify", "storage"):
            assert name in proc.stdout

    def test_tiny_spectrum_round_trip(self):
        proc = self.run(*TINY)
        assert proc.returncode == 0
        assert proc.stdout.startswith("delta,T,R,Loss\n")

    def test_quick_verification_passes_then_fails_tolerance(self):
        passing = self.run("oracle-verify", "--quick")
        assert passing.returncode == 0
        report = json.loads(passing.stdout)
        assert report["all_within_tolerance"] is True
        assert report["n_points"] == 3
        assert report["max_error"] < 1e-3

        failing = self.run("oracle-verify", "--quick", "--tolerance", "1e-9")
        assert failing.returncode == 2
        assert "tolerance" in failing.stderr
        # The report is still emitted so the failure can be inspected.
        assert json.loads(failing.stdout)["all_within_tolerance"] is False
