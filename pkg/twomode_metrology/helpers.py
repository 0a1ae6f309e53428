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

"""This module contains the output helpers: number formatting, JSON/CSV emission and run manifests."""

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field, is_dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from aea.exceptions import enforce
from aea.helpers.logging import setup_logger

from twomode_metrology import __version__
from twomode_metrology.exceptions import ConfigurationError
from twomode_metrology.models import LOG_LEVELS


SIGNIFICANT_DIGITS = 12
PACKAGE_LOGGER = "twomode_metrology"
MANIFEST_SUFFIX = ".manifest.json"

_logger = setup_logger("twomode_metrology.helpers")


def format_number(value: Any) -> str:
    """Render a number with 12 significant digits, non-finite values as JSON spells them."""
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def rounded(value: Any) -> Any:
    """Convert a report to plain JSON types, floats rounded to 12 significant digits."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if not math.isfinite(value) else float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(value, np.ndarray):
        return rounded(value.tolist())
    if isinstance(value, Path):
        return str(value)
    if is_dataclass(value) and not isinstance(value, type):
        return rounded(asdict(value))
    if isinstance(value, dict):
        return {str(key): rounded(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [rounded(item) for item in value]
    return value


def dump_json(value: Any) -> str:
    """Serialize a report."""
    return json.dumps(rounded(value), indent=2)


def dump_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Serialize a table, numbers formatted by format_number."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [item if isinstance(item, str) else format_number(item) for item in row]
        )
    return buffer.getvalue()


def set_log_level(level: str) -> None:
    """Apply a level to every package logger."""
    level = level.upper()
    enforce(level in LOG_LEVELS, f"log level must be one of {LOG_LEVELS}", ConfigurationError)
    for name in list(logging.root.manager.loggerDict):
        if name == PACKAGE_LOGGER or name.startswith(PACKAGE_LOGGER + "."):
            logging.getLogger(name).setLevel(level)


def utc_now() -> str:
    """Return the current time in ISO 8601."""
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class RunManifest:
    """Provenance of one CLI run."""

    subcommand: str
    config: Dict[str, Any]
    started_at: str
    finished_at: str
    outputs: Tuple[str, ...] = ()
    seed: Optional[int] = None
    version: str = field(default=__version__)

    def to_dict(self) -> Dict[str, Any]:
        """Return the manifest as JSON types."""
        return rounded(asdict(self))


def manifest_path(output: Path) -> Path:
    """Return the sidecar path of an output file."""
    return output.with_name(output.name + MANIFEST_SUFFIX)


def write_output(output: Path, text: str, manifest: RunManifest) -> Path:
    """
    Write an artifact and its manifest sidecar.

    :param output: the artifact path.
    :param text: the artifact content.
    :param manifest: the run manifest; the artifact path is added to its outputs.
    :return: the sidecar path.
    """
    output.write_text(text, encoding="utf-8")
    sidecar = manifest_path(output)
    record = manifest.to_dict()
    record["outputs"] = list(record["outputs"]) + [str(output)]
    sidecar.write_text(json.dumps(record, indent=2), encoding="utf-8")
    _logger.info(f"wrote {output} and {sidecar}")
    return sidecar
