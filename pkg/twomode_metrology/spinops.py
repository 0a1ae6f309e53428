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

"""This module contains the collective spin operators and the two-mode unitaries."""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Sequence, Tuple, Union

import numpy as np
from aea.exceptions import enforce
from aea.helpers.logging import setup_logger

from twomode_metrology.exceptions import (
    DegenerateRotationError,
    DimensionMismatchError,
    InvalidParametersError,
)
from twomode_metrology.fockspace import (
    BlockState,
    CutoffPolicy,
    GeneralState,
    Sector,
    State,
    StateVector,
    basis_totals,
    sector_offset,
)


DIRECTION_TOLERANCE = 1e-12
DEGENERACY_TOLERANCE = 1e-9
UNITARITY_TOLERANCE = 1e-10

_logger = setup_logger("twomode_metrology.spinops")


@dataclass(frozen=True)
class Direction:
    """A unit vector n = (alpha, beta, gamma) on the Bloch sphere."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        """Check the vector has unit length."""
        norm = self.alpha**2 + self.beta**2 + self.gamma**2
        enforce(
            abs(norm - 1.0) <= DIRECTION_TOLERANCE,
            f"direction must be a unit vector, |n|^2 = {norm}",
            InvalidParametersError,
        )

    @classmethod
    def x(cls) -> "Direction":
        """The x axis."""
        return cls(1.0, 0.0, 0.0)

    @classmethod
    def y(cls) -> "Direction":
        """The y axis."""
        return cls(0.0, 1.0, 0.0)

    @classmethod
    def z(cls) -> "Direction":
        """The z axis."""
        return cls(0.0, 0.0, 1.0)

    @classmethod
    def from_vector(cls, vector: Sequence[float]) -> "Direction":
        """Normalize a nonzero three-vector."""
        array = np.asarray(vector, dtype=float)
        enforce(array.shape == (3,), "a direction has three components", InvalidParametersError)
        norm = float(np.linalg.norm(array))
        enforce(norm > 0.0, "cannot normalize the zero vector", InvalidParametersError)
        alpha, beta, gamma = (array / norm).tolist()
        return cls(alpha, beta, gamma)

    @classmethod
    def from_angles(cls, polar: float, azimuth: float) -> "Direction":
        """Build the direction with the given polar and azimuthal angles."""
        return cls.from_vector(
            [
                math.sin(polar) * math.cos(azimuth),
                math.sin(polar) * math.sin(azimuth),
                math.cos(polar),
            ]
        )

    @classmethod
    def parse(cls, value: Union[str, Sequence[float]]) -> "Direction":
        """Parse 'x', 'y', 'z', 'a,b,c' or a three-vector."""
        if isinstance(value, str):
            axes = {"x": cls.x, "y": cls.y, "z": cls.z}
            key = value.strip().lower()
            if key in axes:
                return axes[key]()
            try:
                value = [float(part) for part in key.split(",")]
            except ValueError as e:
                raise InvalidParametersError(f"cannot parse direction {value!r}") from e
        return cls.from_vector(value)

    def as_array(self) -> np.ndarray:
        """Return (alpha, beta, gamma)."""
        return np.array([self.alpha, self.beta, self.gamma])


def fibonacci_directions(count: int) -> List[Direction]:
    """Return `count` nearly uniform directions on the sphere."""
    enforce(count >= 1, "need at least one direction", InvalidParametersError)
    golden = math.pi * (3.0 - math.sqrt(5.0))
    directions = []
    for i in range(count):
        gamma = 1.0 - 2.0 * (i + 0.5) / count
        radius = math.sqrt(max(0.0, 1.0 - gamma**2))
        angle = golden * i
        directions.append(
            Direction.from_vector([radius * math.cos(angle), radius * math.sin(angle), gamma])
        )
    return directions


@dataclass(frozen=True)
class U2EulerParams:
    """Euler angles of e^{-i phi0 N} e^{-i psi Jz} e^{-i vartheta Jy} e^{-i phi Jz}."""

    phi0: float
    psi: float
    vartheta: float
    phi: float

    @property
    def phi_t(self) -> float:
        """Transmission phase (psi + phi) / 2."""
        return (self.psi + self.phi) / 2.0

    @property
    def phi_r(self) -> float:
        """Reflection phase (psi - phi) / 2."""
        return (self.psi - self.phi) / 2.0

    @property
    def transmittance(self) -> float:
        """t = cos^2(vartheta / 2)."""
        return math.cos(self.vartheta / 2.0) ** 2

    @property
    def reflectance(self) -> float:
        """r = 1 - t."""
        return 1.0 - self.transmittance


@dataclass(frozen=True)
class U2AxisParams:
    """The transformation e^{-i phi0 N} e^{-i theta J_n}."""

    phi0: float
    theta: float
    axis: Direction
    axis_defined: bool = True


@dataclass(frozen=True)
class OperatorMatrix:
    """
    The number-conserving operator plus J+ + minus J- + z Jz + number N.

    Blocks are built on demand for each sector.
    """

    label: str
    cutoff: CutoffPolicy
    plus: complex = 0j
    minus: complex = 0j
    z: float = 0.0
    number: float = 0.0

    def block(self, total: int) -> np.ndarray:
        """Return the (N+1)x(N+1) block of sector `total`."""
        enforce(
            0 <= total <= self.cutoff.n_max,
            f"sector {total} outside the cutoff n_max={self.cutoff.n_max}",
            DimensionMismatchError,
        )
        return _operator_block(self.plus, self.minus, self.z, self.number, total).copy()

    def to_dense(self) -> np.ndarray:
        """Return the operator over the whole truncated basis."""
        dimension = self.cutoff.dimension
        matrix = np.zeros((dimension, dimension), dtype=complex)
        for total in range(self.cutoff.n_max + 1):
            start = sector_offset(total)
            matrix[start : start + total + 1, start : start + total + 1] = self.block(total)
        return matrix

    def apply(self, state: StateVector) -> Tuple[np.ndarray, np.ndarray]:
        """
        Apply the operator to a sparse state.

        :param state: the state.
        :return: sorted flat indices and amplitudes of the (unnormalized) image.
        """
        _check_cutoff(self.cutoff, state.cutoff)
        totals, positions = state.totals, state.positions
        amplitudes = state.amplitudes
        half = totals / 2.0
        diagonal = (self.z * (half - positions) + self.number * totals) * amplitudes
        raising = self.plus * np.sqrt(positions * (totals - positions + 1.0)) * amplitudes
        lowering = self.minus * np.sqrt((totals - positions) * (positions + 1.0)) * amplitudes
        targets = np.concatenate(
            [state.indices, state.indices - 1, state.indices + 1]
        )
        values = np.concatenate([diagonal, raising, lowering])
        valid = np.concatenate(
            [np.ones(totals.size, bool), positions > 0, positions < totals]
        )
        targets, values = targets[valid], values[valid]
        support, inverse = np.unique(targets, return_inverse=True)
        image = np.zeros(support.size, dtype=complex)
        np.add.at(image, inverse, values)
        return support, image

    def exponential(self, theta: float, total: int) -> np.ndarray:
        """Return exp(-i theta H) on sector `total`."""
        eigenvalues, vectors = np.linalg.eigh(self.block(total))
        return (vectors * np.exp(-1j * theta * eigenvalues)) @ vectors.conj().T


@lru_cache(maxsize=512)
def _operator_block(
    plus: complex, minus: complex, z: float, number: float, total: int
) -> np.ndarray:
    positions = np.arange(total + 1)
    block = np.diag(z * (total / 2.0 - positions) + number * total).astype(complex)
    k = positions[1:]
    block[k - 1, k] = plus * np.sqrt(k * (total - k + 1.0))
    k = positions[:-1]
    block[k + 1, k] = minus * np.sqrt((total - k) * (k + 1.0))
    block.flags.writeable = False
    return block


def _check_cutoff(expected: CutoffPolicy, actual: CutoffPolicy) -> None:
    enforce(
        expected.n_max == actual.n_max,
        f"objects built for n_max={expected.n_max} and n_max={actual.n_max} cannot be combined",
        DimensionMismatchError,
    )


def collective_spin(direction: Direction, cutoff: CutoffPolicy) -> OperatorMatrix:
    """Return J_n = alpha Jx + beta Jy + gamma Jz."""
    return OperatorMatrix(
        label=f"J({direction.alpha:.6g},{direction.beta:.6g},{direction.gamma:.6g})",
        cutoff=cutoff,
        plus=complex(direction.alpha, -direction.beta) / 2.0,
        minus=complex(direction.alpha, direction.beta) / 2.0,
        z=direction.gamma,
    )


def number_operator(cutoff: CutoffPolicy) -> OperatorMatrix:
    """Return the total number operator N."""
    return OperatorMatrix(label="N", cutoff=cutoff, number=1.0)


@lru_cache(maxsize=256)
def spin_eigensystem(alpha: float, beta: float, gamma: float, total: int) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvectors of J_n on sector N with eigenvalues snapped to -N/2, ..., N/2."""
    block = _operator_block(
        complex(alpha, -beta) / 2.0, complex(alpha, beta) / 2.0, gamma, 0.0, total
    )
    eigenvalues, vectors = np.linalg.eigh(block)
    exact = np.arange(total + 1) - total / 2.0
    enforce(
        np.max(np.abs(eigenvalues - exact)) <= 1e-8 * max(1, total),
        f"spectrum of J_n on sector {total} deviates from -N/2..N/2",
        InvalidParametersError,
    )
    vectors.flags.writeable = False
    exact.flags.writeable = False
    return exact, vectors


def rotation_block(direction: Direction, theta: float, total: int) -> np.ndarray:
    """Return exp(-i theta J_n) on sector `total`."""
    if theta == 0.0:
        return np.eye(total + 1, dtype=complex)
    if direction.alpha == 0.0 and direction.beta == 0.0:
        return np.diag(np.exp(-1j * theta * direction.gamma * (total / 2.0 - np.arange(total + 1))))
    eigenvalues, vectors = spin_eigensystem(
        direction.alpha, direction.beta, direction.gamma, total
    )
    return (vectors * np.exp(-1j * theta * eigenvalues)) @ vectors.conj().T


@dataclass(frozen=True)
class BlockUnitary:
    """
    The product e^{-i phi0 N} R_1 R_2 ... of rotations R_k = exp(-i theta_k J_{n_k}).

    The rightmost rotation acts first.
    """

    cutoff: CutoffPolicy
    rotations: Tuple[Tuple[Direction, float], ...] = ()
    phi0: float = 0.0

    def block(self, total: int) -> np.ndarray:
        """Return the unitary on sector `total`."""
        enforce(
            0 <= total <= self.cutoff.n_max,
            f"sector {total} outside the cutoff n_max={self.cutoff.n_max}",
            DimensionMismatchError,
        )
        matrix = np.exp(-1j * self.phi0 * total) * np.eye(total + 1, dtype=complex)
        for direction, theta in self.rotations:
            matrix = matrix @ rotation_block(direction, theta, total)
        return matrix

    def su2_block(self, total: int) -> np.ndarray:
        """Return the unitary on sector `total` without the common phase."""
        return BlockUnitary(self.cutoff, self.rotations).block(total)

    def dagger(self) -> "BlockUnitary":
        """Return the inverse transformation."""
        inverse = tuple((direction, -theta) for direction, theta in reversed(self.rotations))
        return BlockUnitary(self.cutoff, inverse, -self.phi0)

    def compose(self, other: "BlockUnitary") -> "BlockUnitary":
        """Return self @ other."""
        _check_cutoff(self.cutoff, other.cutoff)
        return BlockUnitary(
            self.cutoff, self.rotations + other.rotations, self.phi0 + other.phi0
        )

    def to_dense(self) -> np.ndarray:
        """Return the unitary over the whole truncated basis."""
        dimension = self.cutoff.dimension
        matrix = np.zeros((dimension, dimension), dtype=complex)
        for total in range(self.cutoff.n_max + 1):
            start = sector_offset(total)
            matrix[start : start + total + 1, start : start + total + 1] = self.block(total)
        return matrix

    def apply(self, state: State) -> State:
        """Return U rho U^dagger (or U psi) in the representation of the input."""
        _check_cutoff(self.cutoff, state.cutoff)
        if isinstance(state, StateVector):
            indices: List[np.ndarray] = []
            amplitudes: List[np.ndarray] = []
            for total in state.sector_slices:
                indices.append(sector_offset(total) + np.arange(total + 1))
                amplitudes.append(self.block(total) @ state.sector_vector(total))
            return StateVector.from_arrays(
                np.concatenate(indices),
                np.concatenate(amplitudes),
                state.cutoff,
                normalize=True,
                truncation_loss=state.truncation_loss,
            )
        if isinstance(state, BlockState):
            sectors = []
            for sector in state.sectors:
                unitary = self.block(sector.total)
                rho = unitary @ sector.rho @ unitary.conj().T
                sectors.append(Sector(sector.total, sector.weight, rho))
            return BlockState(tuple(sectors), state.cutoff, state.truncation_loss)
        unitary = self.to_dense()
        return GeneralState(
            unitary @ state.matrix @ unitary.conj().T, state.cutoff, state.truncation_loss
        )


def su2_unitary(direction: Direction, theta: float, cutoff: CutoffPolicy) -> BlockUnitary:
    """Return exp(-i theta J_n), built per sector from the spectrum of J_n."""
    enforce(math.isfinite(theta), "rotation angle must be finite", InvalidParametersError)
    return BlockUnitary(cutoff, ((direction, float(theta)),))


def u2_unitary(params: U2AxisParams, cutoff: CutoffPolicy) -> BlockUnitary:
    """Return e^{-i phi0 N} exp(-i theta J_n)."""
    enforce(
        math.isfinite(params.theta) and math.isfinite(params.phi0),
        "transformation angles must be finite",
        InvalidParametersError,
    )
    return BlockUnitary(cutoff, ((params.axis, float(params.theta)),), float(params.phi0))


def euler_unitary(params: U2EulerParams, cutoff: CutoffPolicy) -> BlockUnitary:
    """Return e^{-i phi0 N} e^{-i psi Jz} e^{-i vartheta Jy} e^{-i phi Jz}."""
    z, y = Direction.z(), Direction.y()
    return BlockUnitary(
        cutoff,
        ((z, params.psi), (y, params.vartheta), (z, params.phi)),
        params.phi0,
    )


def mode_matrix(params: U2EulerParams) -> np.ndarray:
    """Return the 2x2 matrix acting on the mode operators."""
    cos_half, sin_half = math.cos(params.vartheta / 2.0), math.sin(params.vartheta / 2.0)
    matrix = np.array(
        [
            [np.exp(-1j * params.phi_t) * cos_half, -np.exp(-1j * params.phi_r) * sin_half],
            [np.exp(1j * params.phi_r) * sin_half, np.exp(1j * params.phi_t) * cos_half],
        ]
    )
    return np.exp(-1j * params.phi0) * matrix


def euler_to_axis(params: U2EulerParams, strict: bool = False) -> U2AxisParams:
    """
    Convert Euler angles to the rotation angle and axis of the SU(2) part.

    theta is returned in [0, 2 pi]. When the rotation is trivial (+-identity) the
    axis is undefined: it defaults to z and the result carries axis_defined=False.

    :param params: the Euler angles.
    :param strict: raise instead of flagging an undefined axis.
    :return: the axis-angle parameters, phi0 unchanged.
    """
    cos_half_vartheta = math.cos(params.vartheta / 2.0)
    sin_half_vartheta = math.sin(params.vartheta / 2.0)
    cos_half_theta = cos_half_vartheta * math.cos(params.phi_t)
    cos_half_theta = min(1.0, max(-1.0, cos_half_theta))
    theta = 2.0 * math.acos(cos_half_theta)
    denominator = math.sqrt(max(0.0, 1.0 - cos_half_theta**2))
    if denominator < DEGENERACY_TOLERANCE:
        enforce(
            not strict,
            "the rotation is trivial and its axis is undefined",
            DegenerateRotationError,
        )
        _logger.warning("trivial rotation: axis undefined, defaulting to z")
        return U2AxisParams(params.phi0, theta, Direction.z(), axis_defined=False)
    axis = Direction.from_vector(
        [
            -sin_half_vartheta * math.sin(params.phi_r) / denominator,
            sin_half_vartheta * math.cos(params.phi_r) / denominator,
            cos_half_vartheta * math.sin(params.phi_t) / denominator,
        ]
    )
    return U2AxisParams(params.phi0, theta, axis)


@dataclass(frozen=True)
class MzDecomposition:
    """Mode phases theta1, theta2 conjugated by exp(-i chi J_s)."""

    theta1: float
    theta2: float
    chi: float
    s_axis: Direction


def mzlike_decomposition(params: U2AxisParams) -> MzDecomposition:
    """
    Write e^{-i phi0 N} e^{-i theta J_n} as e^{i chi J_s} e^{-i theta1 n1 - i theta2 n2} e^{-i chi J_s}.

    s is perpendicular to z and n, cos(chi) = n.z; for n parallel to +-z, s = x.

    :param params: the transformation.
    :return: the decomposition.
    """
    axis = params.axis
    gamma = min(1.0, max(-1.0, axis.gamma))
    transverse = math.hypot(axis.alpha, axis.beta)
    if transverse < DIRECTION_TOLERANCE:
        s_axis = Direction.x()
    else:
        s_axis = Direction(axis.beta / transverse, -axis.alpha / transverse, 0.0)
    return MzDecomposition(
        theta1=params.phi0 + params.theta / 2.0,
        theta2=params.phi0 - params.theta / 2.0,
        chi=math.acos(gamma),
        s_axis=s_axis,
    )


def mz_like_unitary(decomposition: MzDecomposition, cutoff: CutoffPolicy) -> BlockUnitary:
    """Rebuild the transformation from its Mach-Zehnder-like decomposition."""
    phi0 = (decomposition.theta1 + decomposition.theta2) / 2.0
    theta = decomposition.theta1 - decomposition.theta2
    return BlockUnitary(
        cutoff,
        (
            (decomposition.s_axis, -decomposition.chi),
            (Direction.z(), theta),
            (decomposition.s_axis, decomposition.chi),
        ),
        phi0,
    )


def is_unitary(matrix: np.ndarray, tolerance: float = UNITARITY_TOLERANCE) -> bool:
    """Return whether U U^dagger equals the identity within tolerance."""
    identity = np.eye(matrix.shape[0])
    return bool(np.max(np.abs(matrix @ matrix.conj().T - identity), initial=0.0) <= tolerance)


def commutes_with_number(matrix: np.ndarray, cutoff: CutoffPolicy, tolerance: float) -> bool:
    """Return whether a dense operator commutes with N within tolerance."""
    totals = basis_totals(cutoff.n_max)
    return bool(np.max(np.abs(matrix * np.subtract.outer(totals, totals)), initial=0.0) <= tolerance)


def sparse_inner(
    left_indices: np.ndarray,
    left: np.ndarray,
    right_indices: np.ndarray,
    right: np.ndarray,
) -> complex:
    """Return <left|right> for two vectors stored on sorted supports."""
    _, left_at, right_at = np.intersect1d(
        left_indices, right_indices, assume_unique=True, return_indices=True
    )
    return complex(np.vdot(left[left_at], right[right_at]))

