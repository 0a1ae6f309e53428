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

"""This module contains the configuration models of the metrology package."""

import os
from pathlib import Path
from typing import Any, Dict, Optional, Type

from aea.exceptions import enforce
from aea.helpers.yaml_utils import yaml_load

from twomode_metrology.exceptions import ConfigurationError


DEFAULTS_FILE = Path(__file__).parent / "defaults.yaml"
WORKERS_ENV_VAR = "TWOMODE_WORKERS"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def load_yaml_config(path: Path) -> Dict[str, Any]:
    """Load a YAML mapping from disk."""
    with path.open("r", encoding="utf-8") as stream:
        data = yaml_load(stream)
    enforce(
        isinstance(data, dict),
        f"configuration file {path} must contain a mapping",
        ConfigurationError,
    )
    return data


class NumericsParams:  # pylint: disable=too-many-instance-attributes
    """Numerical parameters shared by the estimation and search routines."""

    def __init__(self, **kwargs: Any) -> None:
        """Initialize the parameters, checking every key against its type."""
        self.tail_tolerance: float = self._ensure("tail_tolerance", kwargs, float)
        self.derivative_step: float = self._ensure("derivative_step", kwargs, float)
        self.probability_floor: float = self._ensure(
            "probability_floor", kwargs, float
        )
        self.derivative_floor: float = self._ensure("derivative_floor", kwargs, float)
        self.ml_grid_resolution: int = self._ensure("ml_grid_resolution", kwargs, int)
        self.ml_refine_tolerance: float = self._ensure(
            "ml_refine_tolerance", kwargs, float
        )
        self.direction_grid_size: int = self._ensure(
            "direction_grid_size", kwargs, int
        )
        self.workers: int = self._ensure("workers", kwargs, int)
        self.log_level: str = self._ensure("log_level", kwargs, str)
        enforce(
            not kwargs,
            f"unknown configuration keys: {sorted(kwargs)}",
            ConfigurationError,
        )
        enforce(
            self.tail_tolerance >= 0.0,
            "tail_tolerance must be nonnegative",
            ConfigurationError,
        )
        enforce(
            self.derivative_step > 0.0,
            "derivative_step must be positive",
            ConfigurationError,
        )
        enforce(
            self.ml_grid_resolution >= 3,
            "ml_grid_resolution must be at least 3",
            ConfigurationError,
        )
        enforce(self.workers >= 1, "workers must be at least 1", ConfigurationError)
        enforce(
            self.log_level in LOG_LEVELS,
            f"log_level must be one of {LOG_LEVELS}",
            ConfigurationError,
        )

    @staticmethod
    def _ensure(key: str, kwargs: Dict[str, Any], type_: Type) -> Any:
        """Pop a configuration field and check it is set and of the right type."""
        enforce(
            key in kwargs,
            f"'{key}' of type '{type_.__name__}' required, but it is not set",
            ConfigurationError,
        )
        value = kwargs.pop(key)
        if type_ is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        enforce(
            isinstance(value, type_) and not isinstance(value, bool),
            f"'{key}' must be of type '{type_.__name__}', got {value!r}",
            ConfigurationError,
        )
        return value

    @classmethod
    def from_yaml(
        cls, path: Optional[Path] = None, **overrides: Any
    ) -> "NumericsParams":
        """
        Build the parameters from the packaged defaults.

        :param path: optional user file whose keys override the defaults.
        :param overrides: explicit keyword overrides, applied last.
        :return: the validated parameters.
        """
        args = load_yaml_config(DEFAULTS_FILE)
        if path is not None:
            args.update(load_yaml_config(path))
        workers = os.environ.get(WORKERS_ENV_VAR)
        if workers is not None:
            enforce(
                workers.isdigit(),
                f"{WORKERS_ENV_VAR} must be a positive integer",
                ConfigurationError,
            )
            args["workers"] = int(workers)
        args.update(overrides)
        return cls(**args)

    def as_dict(self) -> Dict[str, Any]:
        """Return the parameters as a plain mapping."""
        return dict(vars(self))


_params: Optional[NumericsParams] = None


def get_params() -> NumericsParams:
    """Return the process-wide parameters, loading the defaults on first use."""
    global _params  # pylint: disable=global-statement
    if _params is None:
        _params = NumericsParams.from_yaml()
    return _params


def set_params(params: NumericsParams) -> None:
    """Replace the process-wide parameters."""
    global _params  # pylint: disable=global-statement
    _params = params
