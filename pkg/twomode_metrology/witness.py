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

"""This module contains shot-noise and Heisenberg limits and the entanglement witnesses."""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence

import numpy as np
from aea.exceptions import enforce
from aea.helpers.logging import setup_logger

from twomode_metrology.exceptions import (
    CoherenceMismatchError,
    InconsistentInputsError,
    InvalidParametersError,
)
from twomode_metrology.fisher import optimal_direction, qfi
from twomode_metrology.fockspace import (
    NORMALIZATION_TOLERANCE,
    State,
    has_number_coherences,
    moments,
    project_number_sectors,
)
from twomode_metrology.spinops import Direction


DEPTH_TOLERANCE = 1e-9
EULER_GAMMA = float(np.euler_gamma)

__all__ = [
    "BoundReport",
    "CrossoverPoint",
    "DepthReport",
    "Regime",
    "chi_squared",
    "crossover_curve",
    "entanglement_depth",
    "kprod_bound_fixed",
    "kprod_bound_fluctuating",
    "sensitivity_bounds",
    "ssw_heisenberg_asymptote",
    "ssw_mcl_asymptote",
]

_logger = setup_logger("twomode_metrology.witness")


class Regime(Enum):
    """Whether m repetitions reach the central limit."""

    SMALL_M = "small-m"
    CENTRAL_LIMIT = "central-limit"


@dataclass(frozen=True)
class BoundReport:
    """Sensitivity limits for m repetitions of a probe with the given number moments."""

    shot_noise: float
    heisenberg: float
    qcr_ceiling: float
    m_cl_threshold: float
    regime: Regime
    mean_n: float
    mean_n2: float
    m: float


def _check_moments(mean_n: float, mean_n2: float, m: float) -> None:
    enforce(mean_n > 0.0, f"<N> must be positive, got {mean_n}", InvalidParametersError)
    enforce(
        mean_n2 >= mean_n**2 * (1.0 - NORMALIZATION_TOLERANCE),
        f"<N^2>={mean_n2} is below <N>^2={mean_n ** 2}",
        InvalidParametersError,
    )
    enforce(m >= 1, f"the number of repetitions must be at least 1, got {m}", InvalidParametersError)


def sensitivity_bounds(mean_n: float, mean_n2: float, m: float) -> BoundReport:
    """
    Return the shot-noise limit, the Heisenberg limit and the central-limit threshold.

    heisenberg = max(1/sqrt(m <N^2>), 1/(m <N>)); the second branch dominates until
    m reaches m_cl = <N^2>/<N>^2.

    :param mean_n: <N>.
    :param mean_n2: <N^2>.
    :param m: the number of repetitions.
    :return: the report.
    """
    _check_moments(mean_n, mean_n2, m)
    qcr_ceiling = 1.0 / math.sqrt(m * mean_n2)
    m_cl = mean_n2 / mean_n**2
    return BoundReport(
        shot_noise=1.0 / math.sqrt(m * mean_n),
        heisenberg=max(qcr_ceiling, 1.0 / (m * mean_n)),
        qcr_ceiling=qcr_ceiling,
        m_cl_threshold=m_cl,
        regime=Regime.CENTRAL_LIMIT if m >= m_cl else Regime.SMALL_M,
        mean_n=mean_n,
        mean_n2=mean_n2,
        m=m,
    )


class CrossoverPoint(NamedTuple):
    """The two Heisenberg branches at one value of m."""

    m: float
    inverse_m_mean: float
    qcr_ceiling: float
    heisenberg: float


def crossover_curve(mean_n: float, mean_n2: float, m_values: Sequence[float]) -> List[CrossoverPoint]:
    """Return 1/(m<N>), 1/sqrt(m<N^2>) and their maximum over a range of m."""
    points = []
    for m in m_values:
        _check_moments(mean_n, mean_n2, m)
        small_m, ceiling = 1.0 / (m * mean_n), 1.0 / math.sqrt(m * mean_n2)
        points.append(CrossoverPoint(float(m), small_m, ceiling, max(small_m, ceiling)))
    return points


def kprod_bound_fixed(n: int, k: int) -> float:
    """Return s k^2 + r^2 with s = floor(N/k) and r = N - s k."""
    enforce(n >= 1, f"the particle number must be at least 1, got {n}", InvalidParametersError)
    enforce(1 <= k <= n, f"k must lie in [1, {n}], got {k}", InvalidParametersError)
    s, r = divmod(n, k)
    return float(s * k**2 + r**2)


def kprod_bound_fluctuating(weights: Mapping[int, float], k: int) -> float:
    """Return sum_N Q_N (s_N k^2 + r_N^2), the k-producible ceiling of F_Q."""
    enforce(k >= 1, f"k must be at least 1, got {k}", InvalidParametersError)
    enforce(
        all(total >= 0 and weight >= -NORMALIZATION_TOLERANCE for total, weight in weights.items()),
        "weights must be nonnegative and indexed by nonnegative totals",
        InvalidParametersError,
    )
    enforce(
        abs(sum(weights.values()) - 1.0) <= NORMALIZATION_TOLERANCE,
        "weights must sum to 1",
        InvalidParametersError,
    )
    bound = 0.0
    for total, weight in weights.items():
        s, r = divmod(total, k)
        bound += weight * (s * k**2 + r**2)
    return bound


def chi_squared(state: State, direction: Optional[Direction] = None) -> float:
    """
    Return chi^2 = <N> / F_Q[rho, J_n]; values below 1 certify useful entanglement.

    States with number coherences are rejected. F_Q = 0 yields +inf. Without a
    direction the QFI-maximizing one is used.

    :param state: a state without number coherences.
    :param direction: the rotation axis n.
    :return: the witness value.
    """
    enforce(
        not has_number_coherences(state),
        "chi^2 certifies entanglement only for states without number coherences",
        CoherenceMismatchError,
    )
    blocks = project_number_sectors(state)
    if direction is None:
        value = optimal_direction(blocks).value
    else:
        value = qfi(blocks, direction)
    mean_n = moments(blocks).mean_n
    if value <= 0.0:
        return math.inf
    return mean_n / value


@dataclass(frozen=True)
class DepthReport:
    """The entanglement depth certified by a QFI value."""

    fq_value: float
    depth: int
    bound_curve: Dict[int, float]


def entanglement_depth(fq_value: float, weights: Mapping[int, float]) -> DepthReport:
    """
    Return the smallest k whose k-producible bound reaches fq_value.

    A QFI above the bound of k-producible states proves (k+1)-particle entanglement.

    :param fq_value: a QFI value.
    :param weights: the sector weights Q_N.
    :return: the depth and the bound for every k up to the largest occupied N.
    """
    enforce(fq_value >= 0.0, f"a QFI is nonnegative, got {fq_value}", InvalidParametersError)
    largest = max((total for total, weight in weights.items() if weight > 0.0), default=0)
    curve = {k: kprod_bound_fluctuating(weights, k) for k in range(1, max(largest, 1) + 1)}
    ceiling = curve[max(curve)]
    enforce(
        fq_value <= ceiling + DEPTH_TOLERANCE * max(1.0, ceiling),
        f"F_Q={fq_value} exceeds <N^2>={ceiling}, which no state without number coherences reaches",
        InconsistentInputsError,
    )
    depth = next(k for k, bound in curve.items() if bound >= fq_value - DEPTH_TOLERANCE)
    _logger.debug(f"F_Q={fq_value} certifies depth {depth}")
    return DepthReport(fq_value, depth, curve)


def ssw_heisenberg_asymptote(mean_n: float, m: float) -> float:
    """Return the large-M Heisenberg limit of the SSW state as a function of <N>."""
    _check_moments(mean_n, mean_n**2, m)
    ceiling = (
        math.pi
        * math.exp(EULER_GAMMA / 2.0)
        / (2.0 * math.sqrt(3.0 * m))
        * math.exp(-math.pi**2 / 12.0 * (mean_n / 2.0 + 1.0))
    )
    return max(ceiling, 1.0 / (m * mean_n))


def ssw_mcl_asymptote(mean_n: float) -> float:
    """Return the large-M lower estimate of m_cl for the SSW state."""
    enforce(mean_n > 0.0, f"<N> must be positive, got {mean_n}", InvalidParametersError)
    return (
        math.pi**2
        * math.exp(-EULER_GAMMA)
        / 12.0
        * math.exp(math.pi**2 / 6.0 * (mean_n / 2.0 + 1.0))
        / mean_n**2
    )
