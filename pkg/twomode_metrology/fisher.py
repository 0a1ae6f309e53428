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

"""This module contains the classical and quantum Fisher information and the Cramer-Rao bounds."""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Hashable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from aea.exceptions import enforce
from aea.helpers.logging import setup_logger
from scipy.optimize import minimize

from twomode_metrology.exceptions import (
    InvalidFisherInformationError,
    InvalidParametersError,
    SingularFisherMatrixError,
    StateValidationError,
)
from twomode_metrology.fockspace import (
    NORMALIZATION_TOLERANCE,
    BlockState,
    State,
    StateVector,
    sector_offset,
    to_density_matrix,
)
from twomode_metrology.measurement import Povm, outcome_distribution
from twomode_metrology.models import get_params
from twomode_metrology.spinops import (
    Direction,
    OperatorMatrix,
    U2AxisParams,
    collective_spin,
    fibonacci_directions,
    sparse_inner,
)


PAIR_CUTOFF = 1e-12
PSD_SLACK = 1e-9
SINGULAR_RATIO = 1e-12
RICHARDSON_THRESHOLD = 1e-9

_logger = setup_logger("twomode_metrology.fisher")


def qfi_pure(state: StateVector, generator: OperatorMatrix) -> float:
    """Return F_Q = 4 (<H^2> - <H>^2) of a pure state."""
    norm = float(np.vdot(state.amplitudes, state.amplitudes).real)
    enforce(
        abs(norm - 1.0) <= NORMALIZATION_TOLERANCE,
        f"qfi_pure needs a normalized state, norm is {norm}",
        StateValidationError,
    )
    support, image = generator.apply(state)
    mean = sparse_inner(state.indices, state.amplitudes, support, image).real
    second = float(np.vdot(image, image).real)
    return max(0.0, 4.0 * (second - mean**2))


def _spectral_weights(rho: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenvectors of rho and the pair weights 2 (p_i - p_j)^2 / (p_i + p_j)."""
    eigenvalues, vectors = np.linalg.eigh(rho)
    eigenvalues = np.clip(eigenvalues, 0.0, None)
    sums = np.add.outer(eigenvalues, eigenvalues)
    differences = np.subtract.outer(eigenvalues, eigenvalues)
    weights = np.zeros_like(sums)
    kept = sums > PAIR_CUTOFF
    weights[kept] = 2.0 * differences[kept] ** 2 / sums[kept]
    return eigenvalues, vectors, weights


def spectral_qfi(rho: np.ndarray, generator: np.ndarray) -> float:
    """Return 2 sum (p_i - p_j)^2 / (p_i + p_j) |<i|H|j>|^2, skipping vanishing pairs."""
    _, vectors, weights = _spectral_weights(rho)
    rotated = vectors.conj().T @ generator @ vectors
    return float(np.sum(weights * np.abs(rotated) ** 2))


def qfi_mixed(state: State, generator: OperatorMatrix) -> float:
    """Return the QFI of a density matrix from its spectral decomposition."""
    return spectral_qfi(to_density_matrix(state).matrix, generator.to_dense())


def qfi_block(state: BlockState, direction: Direction) -> float:
    """Return sum_N Q_N F_Q[rho_N, J_n^(N)]."""
    generator = collective_spin(direction, state.cutoff)
    return float(
        sum(
            sector.weight * spectral_qfi(sector.rho, generator.block(sector.total))
            for sector in state.sectors
        )
    )


def qfi(state: State, direction: Direction) -> float:
    """Return F_Q[rho, J_n] with the formula suited to the state representation."""
    if isinstance(state, StateVector):
        return qfi_pure(state, collective_spin(direction, state.cutoff))
    if isinstance(state, BlockState):
        return qfi_block(state, direction)
    return qfi_mixed(state, collective_spin(direction, state.cutoff))


def sld(state: State, generator: OperatorMatrix, theta: float) -> np.ndarray:
    """
    Return the symmetric logarithmic derivative of rho(theta) = e^{-i theta H} rho e^{i theta H}.

    L solves d rho / d theta = (L rho + rho L) / 2 on the support of rho(theta); its
    block on the kernel is zero.

    :param state: the probe state.
    :param generator: the Hermitian generator H.
    :param theta: the rotation angle.
    :return: L over the whole truncated basis.
    """
    rho = to_density_matrix(state).matrix
    dimension = rho.shape[0]
    unitary = np.zeros((dimension, dimension), dtype=complex)
    for total in range(state.cutoff.n_max + 1):
        start = sector_offset(total)
        unitary[start : start + total + 1, start : start + total + 1] = generator.exponential(
            theta, total
        )
    rho_theta = unitary @ rho @ unitary.conj().T
    hamiltonian = generator.to_dense()
    derivative = -1j * (hamiltonian @ rho_theta - rho_theta @ hamiltonian)
    eigenvalues, vectors = np.linalg.eigh(rho_theta)
    eigenvalues = np.clip(eigenvalues, 0.0, None)
    sums = np.add.outer(eigenvalues, eigenvalues)
    rotated = vectors.conj().T @ derivative @ vectors
    logarithmic = np.zeros_like(rotated)
    kept = sums > PAIR_CUTOFF
    logarithmic[kept] = 2.0 * rotated[kept] / sums[kept]
    result = vectors @ logarithmic @ vectors.conj().T
    return (result + result.conj().T) / 2.0


@dataclass(frozen=True)
class CfiResult:
    """A classical Fisher information and the outcomes excluded from it."""

    value: float
    singular_outcomes: Tuple[Hashable, ...] = ()
    richardson: bool = False

    @property
    def flags(self) -> List[str]:
        """Diagnostic flags for reports."""
        flags = []
        if self.singular_outcomes:
            flags.append("singular_outcome")
        if self.richardson:
            flags.append("richardson")
        return flags

    def __float__(self) -> float:
        """Return the value."""
        return self.value


def _central_derivative(
    function: Callable[[float], np.ndarray], x: float, step: float
) -> Tuple[np.ndarray, bool]:
    """Central difference with a Richardson step when halving the step changes the result."""
    coarse = (function(x + step) - function(x - step)) / (2.0 * step)
    fine = (function(x + step / 2.0) - function(x - step / 2.0)) / step
    scale = max(1.0, float(np.max(np.abs(fine), initial=0.0)))
    if float(np.max(np.abs(coarse - fine), initial=0.0)) > RICHARDSON_THRESHOLD * scale:
        return (4.0 * fine - coarse) / 3.0, True
    return coarse, False


def _screen_outcomes(
    probabilities: np.ndarray, gradients: Sequence[np.ndarray], labels: Sequence[Hashable]
) -> Tuple[np.ndarray, Tuple[Hashable, ...]]:
    """Return the mask of usable outcomes and the singular ones."""
    params = get_params()
    small = probabilities < params.probability_floor
    steep = np.zeros_like(small)
    for gradient in gradients:
        steep |= np.abs(gradient) >= params.derivative_floor
    singular = tuple(label for label, flag in zip(labels, small & steep) if flag)
    if singular:
        _logger.warning(f"outcomes {singular} have vanishing probability but nonzero slope")
    return ~small, singular


def cfi(
    state: State,
    direction: Direction,
    povm: Povm,
    theta: float,
    phi0: float = 0.0,
    step: Optional[float] = None,
) -> CfiResult:
    """
    Return F = sum_eps (dP/dtheta)^2 / P for the family e^{-i phi0 N} e^{-i theta J_n}.

    Outcomes with P below the probability floor and a slope below the derivative floor
    are skipped; those with a larger slope are excluded and flagged as singular.

    :param state: the probe state.
    :param direction: the rotation axis n.
    :param povm: the measurement.
    :param theta: the phase at which the information is evaluated.
    :param phi0: the common phase.
    :param step: the finite-difference step, from the configuration when omitted.
    :return: the information and its diagnostics.
    """
    step = step or get_params().derivative_step

    def probabilities(angle: float) -> np.ndarray:
        transform = U2AxisParams(phi0, angle, direction)
        return outcome_distribution(state, transform, povm).probabilities

    centre = probabilities(theta)
    derivative, richardson = _central_derivative(probabilities, theta, step)
    if richardson:
        _logger.warning(f"Richardson extrapolation used for dP/dtheta at theta={theta}")
    usable, singular = _screen_outcomes(centre, [derivative], povm.labels)
    value = float(np.sum(derivative[usable] ** 2 / centre[usable]))
    return CfiResult(value, singular, richardson)


class Parameterization(Enum):
    """Parameter pairs of the two-parameter U(2) family."""

    MODE_PHASES = "mode_phases"
    COMMON_RELATIVE = "common_relative"

    @property
    def labels(self) -> Tuple[str, str]:
        """Parameter names."""
        if self is Parameterization.MODE_PHASES:
            return ("theta1", "theta2")
        return ("phi0", "theta")

    def to_transform(self, first: float, second: float) -> Tuple[float, float]:
        """Return (phi0, theta) for a parameter pair."""
        if self is Parameterization.MODE_PHASES:
            return (first + second) / 2.0, first - second
        return first, second


@dataclass(frozen=True, eq=False)
class FisherMatrix:
    """A symmetric, nonnegative definite Fisher matrix."""

    entries: np.ndarray
    parameterization: Tuple[str, ...]
    singular_outcomes: Tuple[Hashable, ...] = ()

    def __post_init__(self) -> None:
        """Check symmetry and nonnegativity."""
        entries = np.array(self.entries, dtype=float)
        size = len(self.parameterization)
        enforce(
            entries.shape == (size, size),
            f"a Fisher matrix over {size} parameters must be {size}x{size}",
            InvalidParametersError,
        )
        scale = max(1.0, float(np.max(np.abs(entries), initial=0.0)))
        enforce(
            np.max(np.abs(entries - entries.T), initial=0.0) <= PSD_SLACK * scale,
            "Fisher matrix is not symmetric",
            InvalidFisherInformationError,
        )
        entries = (entries + entries.T) / 2.0
        enforce(
            float(np.linalg.eigvalsh(entries)[0]) >= -PSD_SLACK * scale,
            "Fisher matrix is not nonnegative definite",
            InvalidFisherInformationError,
        )
        object.__setattr__(self, "entries", entries)

    @property
    def determinant(self) -> float:
        """det F."""
        return float(np.linalg.det(self.entries))

    def is_singular(self) -> bool:
        """Return whether det F <= 1e-12 trace(F)^n."""
        trace = float(np.trace(self.entries))
        if trace <= 0.0:
            return True
        if self.entries.shape[0] == 1:
            return trace <= SINGULAR_RATIO
        return self.determinant <= SINGULAR_RATIO * trace ** self.entries.shape[0]

    def inverse(self) -> np.ndarray:
        """Return F^-1, refusing singular matrices."""
        enforce(
            not self.is_singular(),
            f"Fisher matrix over {self.parameterization} is singular",
            SingularFisherMatrixError,
        )
        if self.entries.shape == (2, 2):
            (f11, f12), (_, f22) = self.entries
            return np.array([[f22, -f12], [-f12, f11]]) / (f11 * f22 - f12**2)
        return np.linalg.inv(self.entries)

    def scaled(self, m: int) -> "FisherMatrix":
        """Return the information of m independent repetitions."""
        return FisherMatrix(m * self.entries, self.parameterization, self.singular_outcomes)


def fisher_matrix_2param(
    state: State,
    povm: Povm,
    at: Tuple[float, float],
    direction: Direction,
    parameterization: Parameterization = Parameterization.MODE_PHASES,
    step: Optional[float] = None,
) -> FisherMatrix:
    """
    Return F_ij = sum_eps d_i P d_j P / P for two parameters of e^{-i phi0 N} e^{-i theta J_n}.

    :param state: the probe state.
    :param povm: the measurement.
    :param at: the parameter pair where the matrix is evaluated.
    :param direction: the rotation axis n.
    :param parameterization: which parameter pair `at` refers to.
    :param step: the finite-difference step.
    :return: the 2x2 Fisher matrix.
    """
    step = step or get_params().derivative_step

    def probabilities(first: float, second: float) -> np.ndarray:
        phi0, theta = parameterization.to_transform(first, second)
        transform = U2AxisParams(phi0, theta, direction)
        return outcome_distribution(state, transform, povm).probabilities

    first, second = at
    centre = probabilities(first, second)
    gradient_first, richardson_first = _central_derivative(
        lambda x: probabilities(x, second), first, step
    )
    gradient_second, richardson_second = _central_derivative(
        lambda x: probabilities(first, x), second, step
    )
    if richardson_first or richardson_second:
        _logger.warning(f"Richardson extrapolation used for the Fisher matrix at {at}")
    usable, singular = _screen_outcomes(
        centre, [gradient_first, gradient_second], povm.labels
    )
    gradients = np.vstack([gradient_first[usable], gradient_second[usable]])
    entries = (gradients / centre[usable]) @ gradients.T
    return FisherMatrix(entries, parameterization.labels, singular)


def qfi_matrix_pure(state: StateVector, generators: Sequence[OperatorMatrix]) -> FisherMatrix:
    """Return [F_Q]_ij = 2 <{H_i, H_j}> - 4 <H_i><H_j> for a pure state."""
    images = [generator.apply(state) for generator in generators]
    means = np.array(
        [sparse_inner(state.indices, state.amplitudes, *image).real for image in images]
    )
    size = len(generators)
    entries = np.zeros((size, size))
    for i in range(size):
        for j in range(i, size):
            product = sparse_inner(*images[i], *images[j]).real
            entries[i, j] = entries[j, i] = 4.0 * product - 4.0 * means[i] * means[j]
    return FisherMatrix(entries, tuple(generator.label for generator in generators))


class CRKind(Enum):
    """Kinds of Cramer-Rao report."""

    CR = "CR"
    QCR = "QCR"
    MATRIX_CR = "matrix-CR"


@dataclass(frozen=True)
class CRReport:
    """A variance bound for m repetitions."""

    variance_bound: float
    m: int
    bias_derivative: float = 1.0
    kind: CRKind = CRKind.CR

    @property
    def delta_theta(self) -> float:
        """The standard-deviation bound."""
        return math.sqrt(self.variance_bound)


def _check_repetitions(m: int) -> None:
    enforce(m >= 1, f"the number of repetitions must be at least 1, got {m}", InvalidParametersError)


def cr_bound(fisher: float, m: int, b: float = 1.0) -> CRReport:
    """Return (Delta theta)^2 >= b^2 / (m F)."""
    _check_repetitions(m)
    enforce(
        math.isfinite(fisher) and fisher > 0.0,
        f"the Cramer-Rao bound needs a positive finite Fisher information, got {fisher}",
        InvalidFisherInformationError,
    )
    return CRReport(b**2 / (m * fisher), m, b, CRKind.CR)


def qcr_bound(fq: float, m: int) -> CRReport:
    """Return (Delta theta)^2 >= 1 / (m F_Q)."""
    _check_repetitions(m)
    enforce(
        math.isfinite(fq) and fq > 0.0,
        f"the quantum Cramer-Rao bound needs a positive finite QFI, got {fq}",
        InvalidFisherInformationError,
    )
    return CRReport(1.0 / (m * fq), m, 1.0, CRKind.QCR)


def cr_matrix(fisher: FisherMatrix, m: int, jacobian: Optional[np.ndarray] = None) -> np.ndarray:
    """Return the covariance bound b F^-1 b^T / m."""
    _check_repetitions(m)
    size = fisher.entries.shape[0]
    jacobian = np.eye(size) if jacobian is None else np.asarray(jacobian, dtype=float)
    enforce(
        jacobian.shape == (size, size),
        f"the bias Jacobian must be {size}x{size}",
        InvalidParametersError,
    )
    return jacobian @ fisher.inverse() @ jacobian.T / m


def qfi_tensor(state: State) -> np.ndarray:
    """Return the 3x3 matrix G with F_Q[rho, J_n] = n^T G n."""
    cutoff = state.cutoff
    spins = [collective_spin(axis, cutoff) for axis in (Direction.x(), Direction.y(), Direction.z())]
    if isinstance(state, StateVector):
        return qfi_matrix_pure(state, spins).entries
    tensor = np.zeros((3, 3))
    if isinstance(state, BlockState):
        parts = [
            (sector.weight, sector.rho, [spin.block(sector.total) for spin in spins])
            for sector in state.sectors
        ]
    else:
        parts = [(1.0, state.matrix, [spin.to_dense() for spin in spins])]
    for weight, rho, generators in parts:
        _, vectors, pair_weights = _spectral_weights(rho)
        rotated = [vectors.conj().T @ generator @ vectors for generator in generators]
        for a in range(3):
            for b in range(a, 3):
                value = np.sum(pair_weights * (rotated[a] * rotated[b].T).real)
                tensor[a, b] += weight * value
                tensor[b, a] = tensor[a, b]
    return tensor


class OptimalDirection(NamedTuple):
    """The direction maximizing F_Q[rho, J_n] and the maximum."""

    direction: Direction
    value: float


def optimal_direction(state: State, grid_size: Optional[int] = None) -> OptimalDirection:
    """
    Maximize F_Q[rho, J_n] over directions n.

    A Fibonacci grid seeds a local refinement over the polar and azimuthal angles.

    :param state: the probe state.
    :param grid_size: number of grid directions, from the configuration when omitted.
    :return: the best direction found and its QFI.
    """
    tensor = qfi_tensor(state)
    grid = fibonacci_directions(grid_size or get_params().direction_grid_size)
    values = [float(d.as_array() @ tensor @ d.as_array()) for d in grid]
    best = grid[int(np.argmax(values))]

    def negative(angles: np.ndarray) -> float:
        vector = Direction.from_angles(*angles).as_array()
        return -float(vector @ tensor @ vector)

    start = np.array([math.acos(max(-1.0, min(1.0, best.gamma))), math.atan2(best.beta, best.alpha)])
    result = minimize(negative, start, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
    refined = Direction.from_angles(*result.x)
    if -result.fun >= max(values):
        return OptimalDirection(refined, float(-result.fun))
    return OptimalDirection(best, float(max(values)))

