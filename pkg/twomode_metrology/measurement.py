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

"""This module contains POVMs and the outcome distributions of two-mode interferometers."""

import ast
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from aea.exceptions import enforce
from aea.helpers.logging import setup_logger

from twomode_metrology.exceptions import (
    CoherenceMismatchError,
    ConfigurationError,
    DimensionMismatchError,
    PovmValidationError,
)
from twomode_metrology.fockspace import (
    BlockState,
    CutoffPolicy,
    State,
    StateVector,
    has_number_coherences,
    project_number_sectors,
    sector_offset,
    to_density_matrix,
)
from twomode_metrology.spinops import (
    Direction,
    U2AxisParams,
    commutes_with_number,
    rotation_block,
    spin_eigensystem,
    u2_unitary,
)


EFFECT_PSD_TOLERANCE = 1e-10
COMPLETENESS_TOLERANCE = 1e-9
NUMBER_DIAGONAL_TOLERANCE = 1e-12
PROBABILITY_TOLERANCE = 1e-12

POVM_KINDS = (
    "relative_number",
    "port1_number",
    "parity_port1",
    "total_and_relative",
    "custom_f",
)

_logger = setup_logger("twomode_metrology.measurement")


@dataclass(frozen=True, eq=False)
class PovmEffect:
    """
    One effect E(eps) of a POVM.

    Number-diagonal effects are stored per sector in `blocks` (a one-dimensional array
    is a diagonal block, missing sectors are zero); other effects in `matrix`.
    """

    label: Hashable
    blocks: Optional[Mapping[int, np.ndarray]] = None
    matrix: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        """Check exactly one representation is given."""
        enforce(
            (self.blocks is None) != (self.matrix is None),
            f"effect {self.label!r} needs exactly one of blocks or matrix",
            PovmValidationError,
        )

    def block(self, total: int) -> np.ndarray:
        """Return the diagonal block pi_N E pi_N as a matrix."""
        if self.matrix is not None:
            start = sector_offset(total)
            return self.matrix[start : start + total + 1, start : start + total + 1]
        block = self.blocks.get(total)
        if block is None:
            return np.zeros((total + 1, total + 1))
        return np.diag(block) if block.ndim == 1 else block

    def expectation(self, total: int, vector: np.ndarray) -> float:
        """Return <v|pi_N E pi_N|v> for a sector vector."""
        if self.blocks is not None:
            block = self.blocks.get(total)
            if block is None:
                return 0.0
            if block.ndim == 1:
                return float(np.dot(block, np.abs(vector) ** 2))
            return float(np.vdot(vector, block @ vector).real)
        return float(np.vdot(vector, self.block(total) @ vector).real)

    def to_dense(self, cutoff: CutoffPolicy) -> np.ndarray:
        """Return the effect over the whole truncated basis."""
        if self.matrix is not None:
            return self.matrix
        dimension = cutoff.dimension
        matrix = np.zeros((dimension, dimension), dtype=complex)
        for total in self.blocks:
            start = sector_offset(total)
            matrix[start : start + total + 1, start : start + total + 1] = self.block(total)
        return matrix


@dataclass(frozen=True, eq=False)
class Povm:
    """A complete set of nonnegative effects on the truncated space."""

    effects: Tuple[PovmEffect, ...]
    cutoff: CutoffPolicy
    kind: str = "custom"
    diagonal_flag: bool = field(init=False)

    def __post_init__(self) -> None:
        """Check positivity and completeness and cache number-diagonality."""
        effects = tuple(self.effects)
        enforce(len(effects) > 0, "a POVM needs at least one effect", PovmValidationError)
        labels = [effect.label for effect in effects]
        enforce(len(set(labels)) == len(labels), "POVM labels must be unique", PovmValidationError)
        object.__setattr__(self, "effects", effects)
        if all(effect.blocks is not None for effect in effects):
            self._check_blocks()
            diagonal = True
        else:
            self._check_dense()
            diagonal = all(
                commutes_with_number(
                    effect.to_dense(self.cutoff), self.cutoff, NUMBER_DIAGONAL_TOLERANCE
                )
                for effect in effects
            )
        object.__setattr__(self, "diagonal_flag", diagonal)

    def _check_blocks(self) -> None:
        for total in range(self.cutoff.n_max + 1):
            completeness = np.zeros((total + 1, total + 1), dtype=complex)
            for effect in self.effects:
                block = effect.blocks.get(total)
                if block is None:
                    continue
                enforce(
                    block.shape in ((total + 1,), (total + 1, total + 1)),
                    f"effect {effect.label!r} has a malformed block in sector {total}",
                    PovmValidationError,
                )
                matrix = np.diag(block) if block.ndim == 1 else block
                _check_effect(matrix, effect.label)
                completeness += matrix
            _check_completeness(completeness, f"sector {total}")

    def _check_dense(self) -> None:
        dimension = self.cutoff.dimension
        completeness = np.zeros((dimension, dimension), dtype=complex)
        for effect in self.effects:
            matrix = effect.to_dense(self.cutoff)
            enforce(
                matrix.shape == (dimension, dimension),
                f"effect {effect.label!r} must be {dimension}x{dimension}",
                DimensionMismatchError,
            )
            _check_effect(matrix, effect.label)
            completeness += matrix
        _check_completeness(completeness, "the truncated space")

    @property
    def labels(self) -> Tuple[Hashable, ...]:
        """Outcome labels in effect order."""
        return tuple(effect.label for effect in self.effects)

    def rotated(self, direction: Direction, angle: float) -> "Povm":
        """Return the POVM R^dagger E R measured after the readout rotation R = exp(-i angle J_n)."""
        if self.diagonal_flag and all(effect.blocks is not None for effect in self.effects):
            rotations = {
                total: rotation_block(direction, angle, total)
                for total in range(self.cutoff.n_max + 1)
            }
            effects = tuple(
                PovmEffect(
                    effect.label,
                    blocks={
                        total: rotations[total].conj().T
                        @ effect.block(total)
                        @ rotations[total]
                        for total in effect.blocks
                    },
                )
                for effect in self.effects
            )
        else:
            unitary = u2_unitary(U2AxisParams(0.0, angle, direction), self.cutoff).to_dense()
            effects = tuple(
                PovmEffect(
                    effect.label,
                    matrix=unitary.conj().T @ effect.to_dense(self.cutoff) @ unitary,
                )
                for effect in self.effects
            )
        return Povm(effects, self.cutoff, kind=self.kind)


def _check_effect(matrix: np.ndarray, label: Hashable) -> None:
    enforce(
        np.max(np.abs(matrix - matrix.conj().T), initial=0.0) <= EFFECT_PSD_TOLERANCE,
        f"effect {label!r} is not Hermitian",
        PovmValidationError,
    )
    if np.any(matrix):
        lowest = float(np.linalg.eigvalsh(matrix)[0])
        enforce(
            lowest >= -EFFECT_PSD_TOLERANCE,
            f"effect {label!r} is not positive (eigenvalue {lowest:.3e})",
            PovmValidationError,
        )


def _check_completeness(total: np.ndarray, where: str) -> None:
    deviation = float(np.max(np.abs(total - np.eye(total.shape[0])), initial=0.0))
    enforce(
        deviation <= COMPLETENESS_TOLERANCE,
        f"effects do not sum to the identity on {where} (deviation {deviation:.3e})",
        PovmValidationError,
    )


def is_number_diagonal(povm: Povm) -> bool:
    """Return whether every effect commutes with N."""
    return povm.diagonal_flag


_BINARY_OPERATORS: Dict[type, Callable[[Any, Any], Any]] = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: lambda a, b: Fraction(a) / Fraction(b),
    ast.FloorDiv: operator.floordiv,
    ast.Mod: operator.mod,
    ast.Pow: lambda a, b: Fraction(a) ** b if b < 0 else a**b,
}
_UNARY_OPERATORS: Dict[type, Callable[[Any], Any]] = {
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}
_FUNCTIONS: Dict[str, Callable[..., Any]] = {"abs": abs, "min": min, "max": max}
_VARIABLES = ("n1", "n2", "N")


def _evaluate(node: ast.AST, env: Mapping[str, int]) -> Any:
    if isinstance(node, ast.Expression):
        return _evaluate(node.body, env)
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return node.value
    if isinstance(node, ast.Name) and node.id in _VARIABLES:
        return env[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINARY_OPERATORS:
        return _BINARY_OPERATORS[type(node.op)](
            _evaluate(node.left, env), _evaluate(node.right, env)
        )
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY_OPERATORS:
        return _UNARY_OPERATORS[type(node.op)](_evaluate(node.operand, env))
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCTIONS
        and not node.keywords
    ):
        return _FUNCTIONS[node.func.id](*(_evaluate(arg, env) for arg in node.args))
    raise PovmValidationError(f"unsupported element in outcome function: {ast.dump(node)}")


def compile_outcome_function(expression: str) -> Callable[[int, int], Hashable]:
    """
    Compile an integer expression f(n1, n2) used to bin Fock states.

    Only integer constants, the variables n1, n2 and N, arithmetic operators and the
    functions abs, min and max are accepted. Division is exact.

    :param expression: the expression source.
    :return: a function mapping occupations to an exact label.
    """
    try:
        tree = ast.parse(expression, mode="eval")
    except SyntaxError as e:
        raise PovmValidationError(f"cannot parse outcome function {expression!r}") from e

    def outcome(n1: int, n2: int) -> Hashable:
        try:
            value = _evaluate(tree, {"n1": n1, "n2": n2, "N": n1 + n2})
        except (ZeroDivisionError, TypeError, ValueError) as e:
            raise PovmValidationError(
                f"outcome function {expression!r} fails at n1={n1}, n2={n2}: {e}"
            ) from e
        if isinstance(value, Fraction) and value.denominator == 1:
            return int(value)
        return value

    outcome(0, 0)
    return outcome


_LABELERS: Dict[str, Callable[[int, int], Hashable]] = {
    "relative_number": lambda n1, n2: Fraction(n1 - n2, 2),
    "port1_number": lambda n1, n2: n1,
    "parity_port1": lambda n1, n2: 1 if n1 % 2 == 0 else -1,
    "total_and_relative": lambda n1, n2: (n1 + n2, Fraction(n1 - n2, 2)),
}


def _binned_povm(
    labeler: Callable[[int, int], Hashable], cutoff: CutoffPolicy, kind: str
) -> Povm:
    """Group the Fock states into projective effects by label."""
    groups: Dict[Hashable, Dict[int, np.ndarray]] = {}
    for total in range(cutoff.n_max + 1):
        for n2 in range(total + 1):
            sectors = groups.setdefault(labeler(total - n2, n2), {})
            diagonal = sectors.setdefault(total, np.zeros(total + 1))
            diagonal[n2] = 1.0
    try:
        labels = sorted(groups)
    except TypeError:
        labels = list(groups)
    return Povm(
        tuple(PovmEffect(label, blocks=groups[label]) for label in labels), cutoff, kind
    )


def named_povm(
    kind: str,
    cutoff: CutoffPolicy,
    f: Optional[str] = None,
    readout: Optional[Tuple[Direction, float]] = None,
) -> Povm:
    """
    Build one of the number-diagonal counting POVMs.

    :param kind: one of POVM_KINDS.
    :param cutoff: the truncation policy.
    :param f: expression over (n1, n2) for custom_f.
    :param readout: optional (axis, angle) rotation applied before counting.
    :return: the POVM.
    """
    enforce(kind in POVM_KINDS, f"unknown POVM kind {kind!r}", PovmValidationError)
    if kind == "custom_f":
        enforce(f is not None, "custom_f needs an expression f", PovmValidationError)
        labeler = compile_outcome_function(f)
    else:
        labeler = _LABELERS[kind]
    povm = _binned_povm(labeler, cutoff, kind)
    if readout is not None:
        povm = povm.rotated(*readout)
    _logger.debug(f"built {kind} POVM with {len(povm.effects)} outcomes")
    return povm


def projective_povm(
    vectors: np.ndarray, cutoff: CutoffPolicy, labels: Optional[Sequence[Hashable]] = None
) -> Povm:
    """Return the POVM of projectors onto the columns of a unitary matrix."""
    enforce(
        vectors.shape == (cutoff.dimension, cutoff.dimension),
        "projective POVM needs a full basis",
        DimensionMismatchError,
    )
    labels = list(range(cutoff.dimension)) if labels is None else list(labels)
    effects = tuple(
        PovmEffect(label, matrix=np.outer(vectors[:, k], vectors[:, k].conj()))
        for k, label in enumerate(labels)
    )
    return Povm(effects, cutoff, kind="projective")


def _parse_matrix(value: Any) -> np.ndarray:
    if isinstance(value, Mapping):
        real = np.asarray(value["real"], dtype=float)
        imag = np.asarray(value.get("imag", np.zeros_like(real)), dtype=float)
        return real + 1j * imag
    return np.asarray(value, dtype=complex)


def load_povm(spec: Mapping[str, Any], cutoff: CutoffPolicy) -> Povm:
    """
    Build a POVM from its JSON description.

    Accepted forms are {"kind": ..., "f": ..., "readout": {"axis": ..., "angle": ...}}
    and {"matrices": [...], "labels": [...]}, each matrix a nested list or a
    {"real": ..., "imag": ...} object.

    :param spec: the description.
    :param cutoff: the truncation policy shared with the state.
    :return: the POVM.
    """
    enforce(isinstance(spec, Mapping), "a POVM description must be an object", ConfigurationError)
    readout = None
    if spec.get("readout") is not None:
        readout = (Direction.parse(spec["readout"]["axis"]), float(spec["readout"]["angle"]))
    if "matrices" in spec:
        matrices = [_parse_matrix(value) for value in spec["matrices"]]
        labels = spec.get("labels") or list(range(len(matrices)))
        enforce(len(labels) == len(matrices), "one label per matrix", ConfigurationError)
        labels = [tuple(label) if isinstance(label, list) else label for label in labels]
        povm = Povm(
            tuple(PovmEffect(label, matrix=m) for label, m in zip(labels, matrices)),
            cutoff,
        )
        return povm if readout is None else povm.rotated(*readout)
    enforce("kind" in spec, "a POVM description needs 'kind' or 'matrices'", ConfigurationError)
    return named_povm(spec["kind"], cutoff, f=spec.get("f"), readout=readout)


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Outcome probabilities evaluated at (phi0, theta)."""

    entries: Dict[Hashable, float]
    parameters: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        """Check nonnegativity and normalization."""
        values = np.array(list(self.entries.values()), dtype=float)
        enforce(values.size > 0, "a distribution needs an outcome", PovmValidationError)
        enforce(
            float(values.min()) >= -PROBABILITY_TOLERANCE,
            f"negative probability {values.min():.3e}",
            PovmValidationError,
        )
        enforce(
            abs(float(values.sum()) - 1.0) <= COMPLETENESS_TOLERANCE,
            f"probabilities sum to {values.sum()}",
            PovmValidationError,
        )

    @property
    def labels(self) -> Tuple[Hashable, ...]:
        """Outcome labels."""
        return tuple(self.entries)

    @property
    def probabilities(self) -> np.ndarray:
        """Probabilities in label order."""
        return np.array(list(self.entries.values()), dtype=float)


@dataclass(frozen=True, eq=False)
class SectorOutcome:
    """The weight Q_N of a sector and the conditional distribution P(eps|N, theta)."""

    weight: float
    distribution: OutcomeDistribution


def _check_shared_cutoff(state: State, povm: Povm) -> None:
    enforce(
        state.cutoff.n_max == povm.cutoff.n_max,
        f"state n_max={state.cutoff.n_max} differs from POVM n_max={povm.cutoff.n_max}",
        DimensionMismatchError,
    )


def _sector_probabilities(
    state: State, direction: Direction, theta: float, povm: Povm
) -> Dict[int, Tuple[float, np.ndarray]]:
    """Return Q_N and P(eps|N, theta) for every occupied sector."""
    result: Dict[int, Tuple[float, np.ndarray]] = {}
    if isinstance(state, StateVector):
        for total, weight in state.sector_weights().items():
            vector = rotation_block(direction, theta, total) @ state.sector_vector(total)
            probabilities = np.array(
                [effect.expectation(total, vector) for effect in povm.effects]
            )
            result[total] = (weight, probabilities / weight)
        return result
    blocks = state if isinstance(state, BlockState) else project_number_sectors(state)
    for sector in blocks.sectors:
        unitary = rotation_block(direction, theta, sector.total)
        rho = unitary @ sector.rho @ unitary.conj().T
        probabilities = np.array(
            [np.einsum("ij,ji->", effect.block(sector.total), rho).real for effect in povm.effects]
        )
        result[sector.total] = (sector.weight, probabilities)
    return result


def _decomposable(state: State, povm: Povm) -> bool:
    return povm.diagonal_flag or not has_number_coherences(state)


def outcome_distribution(state: State, transform: U2AxisParams, povm: Povm) -> OutcomeDistribution:
    """
    Return P(eps|theta) = Tr[E(eps) U rho U^dagger] for U = e^{-i phi0 N} e^{-i theta J_n}.

    When the state or the POVM is number-diagonal the probabilities are accumulated
    sector by sector and do not depend on phi0.

    :param state: the probe state.
    :param transform: the two-mode transformation.
    :param povm: the measurement.
    :return: the distribution.
    """
    _check_shared_cutoff(state, povm)
    if _decomposable(state, povm):
        probabilities = np.zeros(len(povm.effects))
        for weight, conditional in _sector_probabilities(
            state, transform.axis, transform.theta, povm
        ).values():
            probabilities += weight * conditional
    else:
        unitary = u2_unitary(transform, state.cutoff).to_dense()
        rho = to_density_matrix(state).matrix
        rotated = unitary @ rho @ unitary.conj().T
        probabilities = np.array(
            [
                np.einsum("ij,ji->", effect.to_dense(povm.cutoff), rotated).real
                for effect in povm.effects
            ]
        )
    return OutcomeDistribution(
        dict(zip(povm.labels, probabilities.tolist())), (transform.phi0, transform.theta)
    )


def sector_distribution(
    state: State, direction: Direction, theta: float, povm: Povm
) -> Dict[int, SectorOutcome]:
    """
    Return the sector decomposition P(eps|theta) = sum_N Q_N P(eps|N, theta).

    :param state: the probe state.
    :param direction: the rotation axis n.
    :param theta: the rotation angle.
    :param povm: the measurement.
    :return: for every occupied sector, its weight and conditional distribution.
    """
    _check_shared_cutoff(state, povm)
    enforce(
        _decomposable(state, povm),
        "the state has number coherences and the POVM is not number-diagonal; "
        "the sector decomposition does not apply",
        CoherenceMismatchError,
    )
    return {
        total: SectorOutcome(
            weight, OutcomeDistribution(dict(zip(povm.labels, conditional.tolist())), (0.0, theta))
        )
        for total, (weight, conditional) in _sector_probabilities(
            state, direction, theta, povm
        ).items()
    }


class PhaseLikelihood:
    """
    Fourier form of P(eps|N, theta) for a fixed state, rotation axis and POVM.

    On sector N the likelihood is a trigonometric polynomial
    sum_{d=-N}^{N} c_d e^{-i theta d}; the coefficients are computed once.
    """

    def __init__(self, state: State, direction: Direction, povm: Povm) -> None:
        """Precompute the coefficients of every sector."""
        _check_shared_cutoff(state, povm)
        enforce(
            _decomposable(state, povm),
            "a phase likelihood needs a number-diagonal state or POVM",
            CoherenceMismatchError,
        )
        self.labels: Tuple[Hashable, ...] = povm.labels
        self.direction = direction
        self.weights: Dict[int, float] = {}
        self._coefficients: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
        for sector in project_number_sectors(state).sectors:
            self.weights[sector.total] = sector.weight
            self._coefficients[sector.total] = self._sector_coefficients(
                sector.total, sector.rho, povm
            )

    def _sector_coefficients(
        self, total: int, rho: np.ndarray, povm: Povm
    ) -> Tuple[np.ndarray, np.ndarray]:
        _, vectors = spin_eigensystem(
            self.direction.alpha, self.direction.beta, self.direction.gamma, total
        )
        active = [k for k, effect in enumerate(povm.effects) if np.any(effect.block(total))]
        rho_eigen = vectors.conj().T @ rho @ vectors
        coefficients = np.zeros((len(active), 2 * total + 1), dtype=complex)
        for row, k in enumerate(active):
            effect_eigen = vectors.conj().T @ povm.effects[k].block(total) @ vectors
            products = effect_eigen.T * rho_eigen
            for d in range(-total, total + 1):
                coefficients[row, d + total] = np.trace(products, offset=-d)
        return np.array(active, dtype=np.int64), coefficients

    @property
    def sectors(self) -> List[int]:
        """Occupied sectors."""
        return list(self.weights)

    def sector_probabilities(self, total: int, thetas: Any) -> np.ndarray:
        """Return P(eps|N, theta) with shape (len(thetas), outcomes)."""
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        enforce(total in self._coefficients, f"sector {total} is not occupied", CoherenceMismatchError)
        active, coefficients = self._coefficients[total]
        frequencies = np.arange(-total, total + 1)
        phases = np.exp(-1j * np.outer(frequencies, thetas))
        probabilities = np.zeros((thetas.size, len(self.labels)))
        probabilities[:, active] = (coefficients @ phases).real.T
        return np.clip(probabilities, 0.0, None)

    def probabilities(self, thetas: Any) -> np.ndarray:
        """Return P(eps|theta) = sum_N Q_N P(eps|N, theta)."""
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        total = np.zeros((thetas.size, len(self.labels)))
        for sector, weight in self.weights.items():
            total += weight * self.sector_probabilities(sector, thetas)
        return total


class DistributionLikelihood:
    """P(eps|theta) evaluated directly, for states and POVMs that both carry coherences."""

    def __init__(self, state: State, direction: Direction, povm: Povm, phi0: float = 0.0) -> None:
        """Store the experiment."""
        self.state, self.direction, self.povm, self.phi0 = state, direction, povm, phi0
        self.labels: Tuple[Hashable, ...] = povm.labels

    def probabilities(self, thetas: Any) -> np.ndarray:
        """Return P(eps|theta) with shape (len(thetas), outcomes)."""
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        rows = [
            outcome_distribution(
                self.state, U2AxisParams(self.phi0, float(theta), self.direction), self.povm
            ).probabilities
            for theta in thetas
        ]
        return np.clip(np.array(rows), 0.0, None)


def format_label(label: Hashable) -> str:
    """Render an outcome label for CSV and JSON output."""
    if isinstance(label, tuple):
        return "(" + ", ".join(format_label(part) for part in label) + ")"
    return str(label)
