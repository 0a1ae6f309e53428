# -*- coding: utf-8 -*-
# ------------------------------------------------------------------------------
#
#   Copyright 2026 Valory AG
#
#   Licensed under the Apache License, Version 2.0 (the "License");
#   you may not use this file except in compliance with the License.
#   You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#   Unless required by applicable law or agreed to in writing, software
#   distributed under the License is distributed on an "AS IS" BASIS,
#   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#   See the License for the specific language governing permissions and
#   limitations under the License.
#
# ------------------------------------------------------------------------------

"""Test the models.py module of the package."""

# pylint: skip-file

from pathlib import Path

import pytest

from twomode_metrology.exceptions import ConfigurationError
from twomode_metrology.models import (
    WORKERS_ENV_VAR,
    NumericsParams,
    get_params,
    load_yaml_config,
    set_params,
)


class TestNumericsParams:
    """Tests for NumericsParams."""

    def test_defaults(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """The packaged defaults load and validate."""
        monkeypatch.delenv(WORKERS_ENV_VAR, raising=False)
        params = NumericsParams.from_yaml()
        assert params.tail_tolerance == 1e-12
        assert params.ml_grid_resolution == 2048
        assert params.workers == 1
        assert params.log_level == "INFO"

    def test_overrides_and_int_coercion(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Keyword overrides win, and integers are accepted for float fields."""
        monkeypatch.delenv(WORKERS_ENV_VAR, raising=False)
        params = NumericsParams.from_yaml(derivative_step=1, workers=3)
        assert params.derivative_step == 1.0
        assert isinstance(params.derivative_step, float)
        assert params.workers == 3

    def test_user_file(self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        """A user YAML overrides only the keys it names."""
        monkeypatch.delenv(WORKERS_ENV_VAR, raising=False)
        path = tmp_path / "numerics.yaml"
        path.write_text("ml_grid_resolution: 512\nlog_level: DEBUG\n")
        params = NumericsParams.from_yaml(path)
        assert params.ml_grid_resolution == 512
        assert params.log_level == "DEBUG"
        assert params.direction_grid_size == 200

    def test_environment_workers(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """The worker count is read from the environment."""
        monkeypatch.setenv(WORKERS_ENV_VAR, "6")
        assert NumericsParams.from_yaml().workers == 6

    @pytest.mark.parametrize("value", ["many", "0"])
    def test_bad_environment_workers(
        self, monkeypatch: pytest.MonkeyPatch, value: str
    ) -> None:
        """Invalid worker counts are rejected."""
        monkeypatch.setenv(WORKERS_ENV_VAR, value)
        with pytest.raises(ConfigurationError):
            NumericsParams.from_yaml()

    @pytest.mark.parametrize(
        "overrides",
        [
            {"derivative_step": "small"},
            {"ml_grid_resolution": 2.5},
            {"workers": True},
            {"derivative_step": 0.0},
            {"log_level": "LOUD"},
            {"unexpected": 1},
        ],
    )
    def test_invalid(self, monkeypatch: pytest.MonkeyPatch, overrides: dict) -> None:
        """Wrong types, ranges and unknown keys raise ConfigurationError."""
        monkeypatch.delenv(WORKERS_ENV_VAR, raising=False)
        with pytest.raises(ConfigurationError):
            NumericsParams.from_yaml(**overrides)

    def test_missing_key(self) -> None:
        """Every key is required."""
        with pytest.raises(ConfigurationError, match="required"):
            NumericsParams(tail_tolerance=1e-12)

    def test_as_dict_round_trip(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """as_dict feeds back into the constructor."""
        monkeypatch.delenv(WORKERS_ENV_VAR, raising=False)
        params = NumericsParams.from_yaml()
        assert NumericsParams(**params.as_dict()).as_dict() == params.as_dict()


def test_load_yaml_config_rejects_lists(tmp_path: Path) -> None:
    """A configuration file must hold a mapping."""
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigurationError):
        load_yaml_config(path)


def test_set_params() -> None:
    """set_params replaces the process-wide parameters."""
    original = get_params()
    try:
        replacement = NumericsParams(**{**original.as_dict(), "workers": 5})
        set_params(replacement)
        assert get_params().workers == 5
    finally:
        set_params(original)
