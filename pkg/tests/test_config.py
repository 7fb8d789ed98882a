"""INI config loading: schema coverage, strict rejection, value parsing."""

from __future__ import annotations

import pytest

from dotwire.cli import _DEFAULTS
from dotwire.config import CONFIG_SCHEMA, load_config
from dotwire.errors import ConfigError


def write(tmp_path, text):
    path = tmp_path / "run.ini"
    path.write_text(text)
    return path


class TestSchema:
    def test_sections_match_cli_commands(self):
        assert set(CONFIG_SCHEMA) == set(_DEFAULTS)

    def test_keys_match_cli_defaults(self):
        for command, schema in CONFIG_SCHEMA.items():
            assert set(schema) == set(_DEFAULTS[command]), command


class TestLoadConfig:
    def test_full_file_round_trip(self, tmp_path):
        path = write(
            tmp_path,
            """
            [spectrum]
            kd = 0.5, 1.25
            delta_min = -2.5
            n_points = 101
            sr = on

            [storage]
            pulse_ratio = 5 10 20
            parity = odd
            sigma_t = 8.0
            """,
        )
        cfg = load_config(path)
        assert cfg["spectrum"] == {
            "kd": [0.5, 1.25],
            "delta_min": -2.5,
            "n_points": 101,
            "sr": "on",
        }
        assert cfg["storage"] == {
            "pulse_ratio": [5.0, 10.0, 20.0],
            "parity": "odd",
            "sigma_t": 8.0,
        }

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.ini")

    def test_unknown_section(self, tmp_path):
        path = write(tmp_path, "[spektrum]\nkd = 1\n")
        with pytest.raises(ConfigError, match=r"unknown config section \[spektrum\]"):
            load_config(path)

    def test_unknown_key_lists_known_ones(self, tmp_path):
        path = write(tmp_path, "[spectrum]\nkd_points = 1\n")
        with pytest.raises(ConfigError, match="unknown key 'kd_points'") as info:
            load_config(path)
        assert "n_points" in str(info.value)

    def test_bad_number_names_section_and_key(self, tmp_path):
        path = write(tmp_path, "[spectrum]\nn_points = soup\n")
        with pytest.raises(ConfigError, match=r"\[spectrum\] n_points:"):
            load_config(path)

    def test_bad_choice(self, tmp_path):
        path = write(tmp_path, "[phase]\nkd_policy = sideways\n")
        with pytest.raises(ConfigError, match="expected one of even, odd"):
            load_config(path)

    def test_float_rejected_for_int(self, tmp_path):
        path = write(tmp_path, "[peaks]\nn_kd = 10.5\n")
        with pytest.raises(ConfigError, match="expected an integer"):
            load_config(path)

    def test_empty_list_rejected(self, tmp_path):
        path = write(tmp_path, "[storage]\npulse_ratio =\n")
        with pytest.raises(ConfigError, match="at least one number"):
            load_config(path)

    def test_malformed_ini(self, tmp_path):
        path = write(tmp_path, "kd = 1\n")  # key before any section header
        with pytest.raises(ConfigError, match="malformed config"):
            load_config(path)

    def test_duplicate_key_rejected(self, tmp_path):
        path = write(tmp_path, "[spectrum]\nkd = 1\nkd = 2\n")
        with pytest.raises(ConfigError, match="malformed config"):
            load_config(path)

    def test_scientific_notation(self, tmp_path):
        path = write(tmp_path, "[oracle-verify]\ntolerance = 1e-3\nmode = coarse\n")
        cfg = load_config(path)
        assert cfg["oracle-verify"] == {"tolerance": 1e-3, "mode": "coarse"}
