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

"""
This module contains the truncated two-mode Fock space and its probe states.

Basis states |N, mu> are ordered sector-major: ascending total number N and, inside
a sector, descending mu. The position of a state inside its sector is the
occupation n2 of the second mode, so the flat index is N(N+1)/2 + n2.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Dict, List, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np
from aea.exceptions import enforce
from aea.helpers.logging import setup_logger
from scipy.special import gammaln, xlogy

from twomode_metrology.exceptions import (
    ConfigurationError,
    CutoffTooSmallError,
    InvalidParametersError,
    StateValidationError,
)
from twomode_metrology.models import get_params


NORMALIZATION_TOLERANCE = 1e-10
PSD_TOLERANCE = 1e-10
HERMITICITY_TOLERANCE = 1e-10
COHERENCE_TOLERANCE = 1e-12
EMPTY_SECTOR_WEIGHT = 1e-14

_logger = setup_logger("twomode_metrology.fockspace")


def sector_offset(total: int) -> int:
    """Return the flat index of the first basis state of sector `total`."""
    return total * (total + 1) // 2


def basis_dimension(n_max: int) -> int:
    """Return the number of basis states with at most `n_max` particles."""
    return (n_max + 1) * (n_max + 2) // 2


def basis_totals(n_max: int) -> np.ndarray:
    """Return the total particle number of every flat basis index."""
    return np.repeat(np.arange(n_max + 1), np.arange(1, n_max + 2))


def decode_flat(flat: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split flat basis indices into totals and in-sector positions.

    :param flat: array of flat indices.
    :return: the pair (totals, positions).
    """
    flat = np.asarray(flat, dtype=np.int64)
    totals = ((np.sqrt(8.0 * flat + 1.0) - 1.0) // 2).astype(np.int64)
    totals = np.where(totals * (totals + 1) // 2 > flat, totals - 1, totals)
    totals = np.where((totals + 1) * (totals + 2) // 2 <= flat, totals + 1, totals)
    return totals, flat - totals * (totals + 1) // 2


def flat_index(n1: int, n2: int) -> int:
    """Return the flat index of the Fock state |n1, n2>."""
    return sector_offset(n1 + n2) + n2


@dataclass(frozen=True)
class BasisIndex:
    """A basis state |N, mu>, with mu stored as the integer 2 mu."""

    total: int
    mu_twice: int

    def __post_init__(self) -> None:
        """Check the index is a valid |N, mu> label."""
        enforce(
            self.total >= 0,
            f"total particle number must be nonnegative, got {self.total}",
            InvalidParametersError,
        )
        enforce(
            abs(self.mu_twice) <= self.total
            and (self.total - self.mu_twice) % 2 == 0,
            f"2mu={self.mu_twice} is not in {{-N, -N+2, ..., N}} for N={self.total}",
            InvalidParametersError,
        )

    @classmethod
    def from_occupations(cls, n1: int, n2: int) -> "BasisIndex":
        """Build the index of the Fock state |n1, n2>."""
        return cls(total=n1 + n2, mu_twice=n1 - n2)

    @classmethod
    def from_flat(cls, flat: int) -> "BasisIndex":
        """Build the index stored at a flat position."""
        totals, positions = decode_flat(np.array([flat]))
        total, n2 = int(totals[0]), int(positions[0])
        return cls(total=total, mu_twice=total - 2 * n2)

    @property
    def n1(self) -> int:
        """Occupation of the first mode."""
        return (self.total + self.mu_twice) // 2

    @property
    def n2(self) -> int:
        """Occupation of the second mode."""
        return (self.total - self.mu_twice) // 2

    @property
    def mu(self) -> Fraction:
        """Relative number (n1 - n2) / 2."""
        return Fraction(self.mu_twice, 2)

    @property
    def flat(self) -> int:
        """Flat position in the sector-major ordering."""
        return sector_offset(self.total) + self.n2


@dataclass(frozen=True)
class CutoffPolicy:
    """Truncation of the two-mode Fock space."""

    n_max: int
    tail_tolerance: float = 1e-12

    def __post_init__(self) -> None:
        """Check the policy."""
        enforce(
            isinstance(self.n_max, (int, np.integer)) and self.n_max >= 0,
            f"n_max must be a nonnegative integer, got {self.n_max!r}",
            InvalidParametersError,
        )
        enforce(
            self.tail_tolerance >= 0.0,
            f"tail_tolerance must be nonnegative, got {self.tail_tolerance}",
            InvalidParametersError,
        )

    @property
    def dimension(self) -> int:
        """Dimension of the truncated space."""
        return basis_dimension(self.n_max)


def basis_enumerate(cutoff: CutoffPolicy) -> List[BasisIndex]:
    """Return every basis index with total <= n_max in sector-major order."""
    return [
        BasisIndex(total=total, mu_twice=total - 2 * n2)
        for total in range(cutoff.n_max + 1)
        for n2 in range(total + 1)
    ]


def _check_density_block(rho: np.ndarray, what: str) -> None:
    """Check a matrix is Hermitian, positive semidefinite and of unit trace."""
    enforce(
        rho.ndim == 2 and rho.shape[0] == rho.shape[1],
        f"{what} must be a square matrix",
        StateValidationError,
    )
    enforce(
        np.max(np.abs(rho - rho.conj().T), initial=0.0) <= HERMITICITY_TOLERANCE,
        f"{what} is not Hermitian",
        StateValidationError,
    )
    trace = float(np.trace(rho).real)
    enforce(
        abs(trace - 1.0) <= NORMALIZATION_TOLERANCE,
        f"{what} has trace {trace}, expected 1",
        StateValidationError,
    )
    lowest = float(np.linalg.eigvalsh(rho)[0])
    enforce(
        lowest >= -PSD_TOLERANCE,
        f"{what} is not positive semidefinite (eigenvalue {lowest:.3e})",
        StateValidationError,
    )


def _readonly(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class StateVector:
    """A pure state stored on its support, flat indices sorted ascending."""

    indices: np.ndarray
    amplitudes: np.ndarray
    cutoff: CutoffPolicy
    truncation_loss: float = 0.0

    def __post_init__(self) -> None:
        """Check the support and the normalization."""
        indices = np.array(self.indices, dtype=np.int64)
        amplitudes = np.array(self.amplitudes, dtype=complex)
        enforce(
            indices.ndim == 1 and indices.shape == amplitudes.shape,
            "indices and amplitudes must be matching one-dimensional arrays",
            StateValidationError,
        )
        enforce(indices.size > 0, "a state needs a nonempty support", StateValidationError)
        enforce(
            bool(np.all(np.diff(indices) > 0)),
            "support indices must be unique and sorted",
            StateValidationError,
        )
        enforce(
            indices[0] >= 0 and indices[-1] < self.cutoff.dimension,
            f"support exceeds the cutoff n_max={self.cutoff.n_max}",
            StateValidationError,
        )
        norm = float(np.vdot(amplitudes, amplitudes).real)
        enforce(
            abs(norm - 1.0) <= NORMALIZATION_TOLERANCE,
            f"state norm {norm} differs from 1",
            StateValidationError,
        )
        object.__setattr__(self, "indices", _readonly(indices))
        object.__setattr__(self, "amplitudes", _readonly(amplitudes))

    @classmethod
    def from_arrays(
        cls,
        indices: Any,
        amplitudes: Any,
        cutoff: CutoffPolicy,
        normalize: bool = False,
        truncation_loss: float = 0.0,
    ) -> "StateVector":
        """
        Build a state from unsorted flat indices, summing repeated entries.

        :param indices: flat basis indices.
        :param amplitudes: complex amplitudes, one per index.
        :param cutoff: the truncation policy.
        :param normalize: rescale the amplitudes to unit norm.
        :param truncation_loss: probability mass discarded by the caller.
        :return: the state.
        """
        indices = np.asarray(indices, dtype=np.int64)
        amplitudes = np.asarray(amplitudes, dtype=complex)
        support, inverse = np.unique(indices, return_inverse=True)
        summed = np.zeros(support.size, dtype=complex)
        np.add.at(summed, inverse, amplitudes)
        nonzero = summed != 0
        support, summed = support[nonzero], summed[nonzero]
        if normalize:
            norm = math.sqrt(float(np.vdot(summed, summed).real))
            enforce(norm > 0.0, "cannot normalize a zero vector", StateValidationError)
            summed = summed / norm
        return cls(support, summed, cutoff, truncation_loss)

    @classmethod
    def from_amplitudes(
        cls,
        amplitudes: Mapping[BasisIndex, complex],
        cutoff: CutoffPolicy,
        normalize: bool = False,
    ) -> "StateVector":
        """Build a state from a map of basis indices to amplitudes."""
        return cls.from_arrays(
            [index.flat for index in amplitudes],
            list(amplitudes.values()),
            cutoff,
            normalize=normalize,
        )

    @cached_property
    def totals(self) -> np.ndarray:
        """Total particle number of every support entry."""
        return decode_flat(self.indices)[0]

    @cached_property
    def positions(self) -> np.ndarray:
        """In-sector position (n2) of every support entry."""
        return decode_flat(self.indices)[1]

    @cached_property
    def sector_slices(self) -> Dict[int, slice]:
        """Contiguous support range of every occupied sector."""
        sectors, starts = np.unique(self.totals, return_index=True)
        stops = list(starts[1:]) + [self.indices.size]
        return {
            int(total): slice(int(start), int(stop))
            for total, start, stop in zip(sectors, starts, stops)
        }

    def sector_weights(self) -> Dict[int, float]:
        """Return the probability Q_N of every occupied sector."""
        probabilities = np.abs(self.amplitudes) ** 2
        return {
            total: float(np.sum(probabilities[window]))
            for total, window in self.sector_slices.items()
        }

    def sector_vector(self, total: int) -> np.ndarray:
        """Return the unnormalized amplitudes of sector `total`, indexed by n2."""
        vector = np.zeros(total + 1, dtype=complex)
        window = self.sector_slices.get(total)
        if window is not None:
            vector[self.positions[window]] = self.amplitudes[window]
        return vector

    def amplitude(self, index: BasisIndex) -> complex:
        """Return the amplitude of one basis state."""
        position = int(np.searchsorted(self.indices, index.flat))
        if position < self.indices.size and self.indices[position] == index.flat:
            return complex(self.amplitudes[position])
        return 0j

    def to_dense(self) -> np.ndarray:
        """Return the amplitudes over the whole truncated basis."""
        vector = np.zeros(self.cutoff.dimension, dtype=complex)
        vector[self.indices] = self.amplitudes
        return vector


@dataclass(frozen=True, eq=False)
class Sector:
    """One block Q_N rho_N of a state without number coherences."""

    total: int
    weight: float
    rho: np.ndarray


@dataclass(frozen=True, eq=False)
class BlockState:
    """A state without number coherences, stored as weighted sector blocks."""

    sectors: Tuple[Sector, ...]
    cutoff: CutoffPolicy
    truncation_loss: float = 0.0

    def __post_init__(self) -> None:
        """Check weights and blocks."""
        sectors = tuple(self.sectors)
        totals = [sector.total for sector in sectors]
        enforce(len(sectors) > 0, "a block state needs a sector", StateValidationError)
        enforce(
            totals == sorted(set(totals)),
            "sectors must be unique and sorted by total",
            StateValidationError,
        )
        enforce(
            totals[0] >= 0 and totals[-1] <= self.cutoff.n_max,
            f"sectors exceed the cutoff n_max={self.cutoff.n_max}",
            StateValidationError,
        )
        weights = np.array([sector.weight for sector in sectors])
        enforce(
            bool(np.all(weights >= -NORMALIZATION_TOLERANCE)),
            "sector weights must be nonnegative",
            StateValidationError,
        )
        enforce(
            abs(float(weights.sum()) - 1.0) <= NORMALIZATION_TOLERANCE,
            f"sector weights sum to {weights.sum()}, expected 1",
            StateValidationError,
        )
        for sector in sectors:
            enforce(
                sector.rho.shape == (sector.total + 1, sector.total + 1),
                f"block of sector {sector.total} must be {sector.total + 1}x{sector.total + 1}",
                StateValidationError,
            )
            _check_density_block(sector.rho, f"block of sector {sector.total}")
        object.__setattr__(self, "sectors", sectors)

    @classmethod
    def from_weights(
        cls,
        weights: Mapping[int, float],
        blocks: Mapping[int, np.ndarray],
        cutoff: CutoffPolicy,
        truncation_loss: float = 0.0,
    ) -> "BlockState":
        """Build a block state, omitting sectors of zero weight."""
        sectors = tuple(
            Sector(int(total), float(weight), np.asarray(blocks[total], dtype=complex))
            for total, weight in sorted(weights.items())
            if weight > 0.0
        )
        return cls(sectors, cutoff, truncation_loss)

    def sector_weights(self) -> Dict[int, float]:
        """Return the probability Q_N of every sector."""
        return {sector.total: sector.weight for sector in self.sectors}

    def sector(self, total: int) -> Optional[Sector]:
        """Return the block of one sector, if present."""
        for sector in self.sectors:
            if sector.total == total:
                return sector
        return None


@dataclass(frozen=True, eq=False)
class GeneralState:
    """A density matrix over the whole truncated basis."""

    matrix: np.ndarray
    cutoff: CutoffPolicy
    truncation_loss: float = 0.0

    def __post_init__(self) -> None:
        """Check the matrix is a density matrix on the truncated space."""
        matrix = np.array(self.matrix, dtype=complex)
        dimension = self.cutoff.dimension
        enforce(
            matrix.shape == (dimension, dimension),
            f"density matrix must be {dimension}x{dimension} for n_max={self.cutoff.n_max}",
            StateValidationError,
        )
        _check_density_block(matrix, "density matrix")
        object.__setattr__(self, "matrix", _readonly(matrix))

    def block(self, total: int) -> np.ndarray:
        """Return the diagonal block pi_N rho pi_N of sector `total`."""
        start = sector_offset(total)
        return np.array(self.matrix[start : start + total + 1, start : start + total + 1])


State = Union[StateVector, BlockState, GeneralState]


class Moments(NamedTuple):
    """Particle-number moments of a state."""

    mean_n: float
    mean_n2: float
    var_n: float


def sector_weights(state: State) -> Dict[int, float]:
    """Return the sector weights Q_N = Tr[pi_N rho pi_N] of any state."""
    if isinstance(state, GeneralState):
        weights = {
            total: float(np.trace(state.block(total)).real)
            for total in range(state.cutoff.n_max + 1)
        }
        return {total: weight for total, weight in weights.items() if weight > EMPTY_SECTOR_WEIGHT}
    return state.sector_weights()


def moments(state: State) -> Moments:
    """Return <N>, <N^2> and the number variance computed from the sector weights."""
    weights = sector_weights(state)
    totals = np.array(list(weights), dtype=float)
    probabilities = np.array(list(weights.values()))
    mean_n = float(np.dot(probabilities, totals))
    mean_n2 = float(np.dot(probabilities, totals**2))
    return Moments(mean_n, mean_n2, mean_n2 - mean_n**2)


def project_number_sectors(state: State) -> BlockState:
    """Return sum_N pi_N rho pi_N, dropping every coherence between sectors."""
    if isinstance(state, BlockState):
        return state
    weights: Dict[int, float] = {}
    blocks: Dict[int, np.ndarray] = {}
    if isinstance(state, StateVector):
        for total, weight in state.sector_weights().items():
            vector = state.sector_vector(total) / math.sqrt(weight)
            weights[total], blocks[total] = weight, np.outer(vector, vector.conj())
    else:
        for total, weight in sector_weights(state).items():
            weights[total], blocks[total] = weight, state.block(total) / weight
    return BlockState.from_weights(weights, blocks, state.cutoff, state.truncation_loss)


def embed_block_state(state: BlockState) -> GeneralState:
    """Return the block state as a density matrix over the truncated basis."""
    matrix = np.zeros((state.cutoff.dimension, state.cutoff.dimension), dtype=complex)
    for sector in state.sectors:
        start = sector_offset(sector.total)
        stop = start + sector.total + 1
        matrix[start:stop, start:stop] = sector.weight * sector.rho
    return GeneralState(matrix, state.cutoff, state.truncation_loss)


def to_density_matrix(state: State) -> GeneralState:
    """Return any state as a dense density matrix."""
    if isinstance(state, GeneralState):
        return state
    if isinstance(state, BlockState):
        return embed_block_state(state)
    vector = state.to_dense()
    return GeneralState(np.outer(vector, vector.conj()), state.cutoff, state.truncation_loss)


def has_number_coherences(state: State) -> bool:
    """Return whether ||[rho, N]||_max exceeds the coherence tolerance."""
    if isinstance(state, BlockState):
        return False
    if isinstance(state, GeneralState):
        totals = basis_totals(state.cutoff.n_max)
        commutator = state.matrix * np.subtract.outer(totals, totals)
        return bool(np.max(np.abs(commutator)) > COHERENCE_TOLERANCE)
    sectors = np.array(list(state.sector_slices), dtype=float)
    if sectors.size < 2:
        return False
    maxima = np.array(
        [np.max(np.abs(state.amplitudes[window])) for window in state.sector_slices.values()]
    )
    largest = maxima.max()
    keep = maxima > COHERENCE_TOLERANCE / (largest * max(state.cutoff.n_max, 1))
    maxima, sectors = maxima[keep], sectors[keep]
    spread = np.outer(maxima, maxima) * np.abs(np.subtract.outer(sectors, sectors))
    return bool(spread.max(initial=0.0) > COHERENCE_TOLERANCE)


def _geometric_cutoff(ratio: float, tail_tolerance: float) -> int:
    """Smallest n with ratio^(n+1) <= tail_tolerance."""
    if ratio == 0.0:
        return 0
    enforce(
        tail_tolerance > 0.0,
        "an infinite-support state needs a positive tail tolerance",
        CutoffTooSmallError,
    )
    if tail_tolerance >= 1.0:
        return 0
    n = max(0, math.ceil(math.log(tail_tolerance) / math.log(ratio)) - 1)
    while ratio ** (n + 1) > tail_tolerance:
        n += 1
    while n > 0 and ratio**n <= tail_tolerance:
        n -= 1
    return n


def minimal_cutoff(kind: str, params: Mapping[str, Any], tail_tolerance: float) -> int:
    """
    Return the smallest admissible n_max for a named state.

    :param kind: the named-state type.
    :param params: its constructor parameters.
    :param tail_tolerance: admissible probability mass above n_max.
    :return: the smallest n_max keeping the tail within tolerance.
    """
    if kind == "tmsv":
        squared = math.tanh(params["squeezing"]) ** 2
        return 2 * _geometric_cutoff(squared, tail_tolerance)
    if kind == "noon_mixture" and params.get("squeezing") is not None:
        return _geometric_cutoff(math.tanh(params["squeezing"]) ** 2, tail_tolerance)
    if kind in ("noon_mixture", "product_spin_coherent") and params.get("weights"):
        return max(int(total) for total, weight in params["weights"].items() if weight > 0)
    finite: Dict[str, Callable[[Mapping[str, Any]], int]] = {
        "noon": lambda p: p["n"],
        "moon": lambda p: max(p["n"], p["m"]),
        "vacuum_coherence": lambda p: p["n"],
        "twin_fock": lambda p: 2 * p["n"],
        "ssw": lambda p: 2 * p["m"],
        "product_spin_coherent": lambda p: p["n"],
        "biased_demo_mixture": lambda p: p["m"],
        "fock": lambda p: p["n1"] + p["n2"],
    }
    enforce(kind in finite, f"unknown named state '{kind}'", ConfigurationError)
    return int(finite[kind](params))


def _resolve_cutoff(cutoff: Optional[CutoffPolicy], kind: str, **params: Any) -> CutoffPolicy:
    if cutoff is not None:
        return cutoff
    tail_tolerance = get_params().tail_tolerance
    n_max = minimal_cutoff(kind, params, tail_tolerance)
    _logger.debug(f"chose n_max={n_max} for {kind}")
    return CutoffPolicy(n_max=n_max, tail_tolerance=tail_tolerance)


def _truncated_state(
    indices: List[int], amplitudes: np.ndarray, cutoff: CutoffPolicy
) -> StateVector:
    """Drop the support above n_max, check the lost mass and renormalize."""
    indices_array = np.asarray(indices, dtype=np.int64)
    amplitudes = np.asarray(amplitudes, dtype=complex)
    kept = decode_flat(indices_array)[0] <= cutoff.n_max
    loss = float(np.sum(np.abs(amplitudes[~kept]) ** 2))
    _check_tail(loss, cutoff)
    return StateVector.from_arrays(
        indices_array[kept],
        amplitudes[kept],
        cutoff,
        normalize=True,
        truncation_loss=loss,
    )


def _check_tail(loss: float, cutoff: CutoffPolicy) -> None:
    enforce(
        loss <= cutoff.tail_tolerance,
        f"probability mass {loss:.3e} above n_max={cutoff.n_max} exceeds the tail "
        f"tolerance {cutoff.tail_tolerance:.3e}",
        CutoffTooSmallError,
    )


def _noon_block(total: int, phase: float) -> np.ndarray:
    if total == 0:
        return np.ones((1, 1), dtype=complex)
    vector = np.zeros(total + 1, dtype=complex)
    vector[0], vector[total] = 1.0, np.exp(1j * phase)
    vector /= math.sqrt(2.0)
    return np.outer(vector, vector.conj())


def _weighted_blocks(
    weights: Mapping[int, float],
    block: Callable[[int], np.ndarray],
    cutoff: CutoffPolicy,
) -> BlockState:
    """Build a block state from weights that may reach above the cutoff."""
    enforce(
        all(total >= 0 and weight >= 0.0 for total, weight in weights.items()),
        "sector weights need nonnegative totals and weights",
        InvalidParametersError,
    )
    total_weight = float(sum(weights.values()))
    enforce(
        abs(total_weight - 1.0) <= NORMALIZATION_TOLERANCE,
        f"sector weights sum to {total_weight}, expected 1",
        InvalidParametersError,
    )
    loss = float(sum(w for total, w in weights.items() if total > cutoff.n_max))
    _check_tail(loss, cutoff)
    kept = {
        total: weight / (1.0 - loss)
        for total, weight in weights.items()
        if total <= cutoff.n_max and weight > 0.0
    }
    return BlockState.from_weights(kept, {total: block(total) for total in kept}, cutoff, loss)


def fock(n1: int, n2: int, cutoff: Optional[CutoffPolicy] = None) -> StateVector:
    """Return the Fock state |n1, n2>."""
    enforce(n1 >= 0 and n2 >= 0, "occupations must be nonnegative", InvalidParametersError)
    cutoff = _resolve_cutoff(cutoff, "fock", n1=n1, n2=n2)
    return _truncated_state([flat_index(n1, n2)], np.ones(1), cutoff)


def noon(n: int, phase: float = 0.0, cutoff: Optional[CutoffPolicy] = None) -> StateVector:
    """Return (|n,0> + e^{i phase}|0,n>)/sqrt(2)."""
    enforce(n >= 1, f"a NOON state needs n >= 1, got {n}", InvalidParametersError)
    cutoff = _resolve_cutoff(cutoff, "noon", n=n)
    amplitudes = np.array([1.0, np.exp(1j * phase)]) / math.sqrt(2.0)
    return _truncated_state([flat_index(n, 0), flat_index(0, n)], amplitudes, cutoff)


def noon_mixture(
    weights: Optional[Mapping[int, float]] = None,
    squeezing: Optional[float] = None,
    phase: float = 0.0,
    cutoff: Optional[CutoffPolicy] = None,
) -> BlockState:
    """
    Return an incoherent mixture of NOON states, sum_N Q_N |NOON_N><NOON_N|.

    The weights are either explicit or geometric, Q_N = tanh^{2N} r / cosh^2 r.
    Sector 0 holds the vacuum.

    :param weights: explicit sector weights.
    :param squeezing: the parameter r of geometric weights.
    :param phase: relative phase of every NOON component.
    :param cutoff: the truncation policy.
    :return: the mixture.
    """
    enforce(
        (weights is None) != (squeezing is None),
        "give exactly one of weights or squeezing",
        InvalidParametersError,
    )
    if weights is not None:
        cutoff = _resolve_cutoff(cutoff, "noon_mixture", weights=weights)
        return _weighted_blocks(weights, lambda total: _noon_block(total, phase), cutoff)
    enforce(squeezing >= 0.0, "squeezing must be nonnegative", InvalidParametersError)
    cutoff = _resolve_cutoff(cutoff, "noon_mixture", squeezing=squeezing)
    ratio = math.tanh(squeezing) ** 2
    loss = ratio ** (cutoff.n_max + 1)
    _check_tail(loss, cutoff)
    totals = np.arange(cutoff.n_max + 1)
    geometric = ratio**totals * (1.0 - ratio) / (1.0 - loss)
    return BlockState.from_weights(
        dict(zip(totals.tolist(), geometric.tolist())),
        {int(total): _noon_block(int(total), phase) for total in totals},
        cutoff,
        loss,
    )


def moon(
    n: int, m: int, phase: float = 0.0, cutoff: Optional[CutoffPolicy] = None
) -> StateVector:
    """Return sqrt(n/(n+m)) e^{i phase}|m,0> + sqrt(m/(n+m))|0,n>."""
    enforce(
        n > 0 and m > 0,
        f"a MOON state needs n > 0 and m > 0, got n={n}, m={m}",
        InvalidParametersError,
    )
    cutoff = _resolve_cutoff(cutoff, "moon", n=n, m=m)
    amplitudes = np.array(
        [math.sqrt(n / (n + m)) * np.exp(1j * phase), math.sqrt(m / (n + m))]
    )
    return _truncated_state([flat_index(m, 0), flat_index(0, n)], amplitudes, cutoff)


def vacuum_coherence(
    n: int, mean_n: float, phase: float = 0.0, cutoff: Optional[CutoffPolicy] = None
) -> StateVector:
    """Return sqrt(1 - <N>/n)|0,0> + sqrt(<N>/n) e^{i phase}|n,0>."""
    enforce(n >= 1, f"vacuum coherence needs n >= 1, got {n}", InvalidParametersError)
    enforce(
        0.0 <= mean_n <= n,
        f"mean particle number {mean_n} must lie in [0, {n}]",
        InvalidParametersError,
    )
    cutoff = _resolve_cutoff(cutoff, "vacuum_coherence", n=n)
    amplitudes = np.array(
        [math.sqrt(1.0 - mean_n / n), math.sqrt(mean_n / n) * np.exp(1j * phase)]
    )
    return _truncated_state([flat_index(0, 0), flat_index(n, 0)], amplitudes, cutoff)


def twin_fock(n: int, cutoff: Optional[CutoffPolicy] = None) -> StateVector:
    """Return the twin-Fock state |n, n> of 2n particles."""
    enforce(n >= 0, "twin-Fock occupation must be nonnegative", InvalidParametersError)
    cutoff = _resolve_cutoff(cutoff, "twin_fock", n=n)
    return _truncated_state([flat_index(n, n)], np.ones(1), cutoff)


def ssw_normalization(m: int) -> float:
    """Return A^2 = 1 / sum_{n=0}^{m} 1/(n+1)^2 exactly."""
    enforce(m >= 0, "the SSW cut-off must be nonnegative", InvalidParametersError)
    return float(1.0 / np.sum(1.0 / np.arange(1, m + 2, dtype=float) ** 2))


def ssw_normalization_asymptote(m: int) -> float:
    """Return the large-m series 6/pi^2 + 36/(pi^4 (m+1)) of A^2."""
    return 6.0 / math.pi**2 + 36.0 / (math.pi**4 * (m + 1))


def ssw(m: int, cutoff: Optional[CutoffPolicy] = None) -> StateVector:
    """Return sum_{n=0}^{m} A/(n+1) |n, n> with A fixed by normalization."""
    enforce(m >= 0, "the SSW cut-off must be nonnegative", InvalidParametersError)
    cutoff = _resolve_cutoff(cutoff, "ssw", m=m)
    pairs = np.arange(m + 1)
    amplitudes = math.sqrt(ssw_normalization(m)) / (pairs + 1.0)
    indices = [flat_index(int(n), int(n)) for n in pairs]
    return _truncated_state(indices, amplitudes, cutoff)


def tmsv(
    squeezing: float, psi: float = 0.0, cutoff: Optional[CutoffPolicy] = None
) -> StateVector:
    """
    Return the two-mode squeezed vacuum sum_n e^{-i psi n} tanh^n r / cosh r |n, n>.

    The series is cut at n = n_max // 2; the discarded mass tanh^{2(n+1)} r must stay
    within the tail tolerance and is recorded as the truncation loss.

    :param squeezing: the squeezing parameter r >= 0.
    :param psi: the squeezed-vacuum phase.
    :param cutoff: the truncation policy, chosen minimal when omitted.
    :return: the renormalized truncated state.
    """
    enforce(squeezing >= 0.0, "squeezing must be nonnegative", InvalidParametersError)
    cutoff = _resolve_cutoff(cutoff, "tmsv", squeezing=squeezing)
    ratio = math.tanh(squeezing)
    pairs = np.arange(cutoff.n_max // 2 + 1)
    loss = ratio ** (2 * (pairs[-1] + 1))
    _check_tail(loss, cutoff)
    amplitudes = np.exp(-1j * psi * pairs) * ratio**pairs / math.cosh(squeezing)
    indices = [flat_index(int(n), int(n)) for n in pairs]
    return StateVector.from_arrays(
        indices, amplitudes, cutoff, normalize=True, truncation_loss=loss
    )


def spin_coherent_amplitudes(total: int, polar: float, azimuth: float) -> np.ndarray:
    """Return the sector amplitudes of N copies of cos(polar/2)|1,0> + e^{i azimuth} sin(polar/2)|0,1>."""
    n2 = np.arange(total + 1)
    cos_half, sin_half = math.cos(polar / 2.0), math.sin(polar / 2.0)
    log_magnitude = (
        0.5 * (gammaln(total + 1) - gammaln(n2 + 1) - gammaln(total - n2 + 1))
        + xlogy(total - n2, abs(cos_half))
        + xlogy(n2, abs(sin_half))
    )
    signs = np.sign(cos_half) ** (total - n2) * np.sign(sin_half) ** n2
    return np.exp(log_magnitude) * signs * np.exp(1j * azimuth * n2)


def product_spin_coherent(
    n: Optional[int] = None,
    polar: float = 0.0,
    azimuth: float = 0.0,
    weights: Optional[Mapping[int, float]] = None,
    cutoff: Optional[CutoffPolicy] = None,
) -> Union[StateVector, BlockState]:
    """
    Return a product of single-particle states pointing along (polar, azimuth).

    With `n` the result is the pure N-particle state; with `weights` it is the
    separable mixture over sectors.

    :param n: a fixed particle number.
    :param polar: polar angle on the Bloch sphere.
    :param azimuth: azimuthal angle on the Bloch sphere.
    :param weights: sector weights of a mixture.
    :param cutoff: the truncation policy.
    :return: the state.
    """
    enforce(
        (n is None) != (weights is None),
        "give exactly one of n or weights",
        InvalidParametersError,
    )
    if n is not None:
        enforce(n >= 0, "particle number must be nonnegative", InvalidParametersError)
        cutoff = _resolve_cutoff(cutoff, "product_spin_coherent", n=n)
        amplitudes = spin_coherent_amplitudes(n, polar, azimuth)
        indices = [flat_index(n - k, k) for k in range(n + 1)]
        return _truncated_state(indices, amplitudes, cutoff)

    def block(total: int) -> np.ndarray:
        vector = spin_coherent_amplitudes(total, polar, azimuth)
        return np.outer(vector, vector.conj())

    cutoff = _resolve_cutoff(cutoff, "product_spin_coherent", weights=weights)
    return _weighted_blocks(weights, block, cutoff)


def biased_demo_mixture(
    p: float, m: int, phase: float = 0.0, cutoff: Optional[CutoffPolicy] = None
) -> BlockState:
    """Return (1-p)|0,0><0,0| + p |NOON_m><NOON_m|."""
    enforce(0.0 < p <= 1.0, f"p must lie in (0, 1], got {p}", InvalidParametersError)
    enforce(m >= 1, f"the NOON component needs m >= 1, got {m}", InvalidParametersError)
    cutoff = _resolve_cutoff(cutoff, "biased_demo_mixture", m=m)
    return _weighted_blocks(
        {0: 1.0 - p, m: p}, lambda total: _noon_block(total, phase), cutoff
    )


NAMED_STATES: Dict[str, Callable[..., Union[StateVector, BlockState]]] = {
    "noon": noon,
    "noon_mixture": noon_mixture,
    "moon": moon,
    "vacuum_coherence": vacuum_coherence,
    "twin_fock": twin_fock,
    "ssw": ssw,
    "tmsv": tmsv,
    "product_spin_coherent": product_spin_coherent,
    "biased_demo_mixture": biased_demo_mixture,
    "fock": fock,
}


def make_named_state(spec: Mapping[str, Any]) -> Union[StateVector, BlockState]:
    """
    Build a named state from its JSON description.

    The description reads {"type": name, "params": {...}, "cutoff": {"n_max": int,
    "tail_tolerance": real}}; a missing n_max selects the minimal admissible cutoff.

    :param spec: the description.
    :return: the state.
    """
    enforce(isinstance(spec, Mapping), "a state description must be an object", ConfigurationError)
    kind = spec.get("type")
    enforce(kind in NAMED_STATES, f"unknown named state {kind!r}", ConfigurationError)
    params = dict(spec.get("params", {}))
    if params.get("weights") is not None:
        params["weights"] = {int(total): float(w) for total, w in params["weights"].items()}
    cutoff_spec = dict(spec.get("cutoff") or {})
    unknown = set(cutoff_spec) - {"n_max", "tail_tolerance"}
    enforce(not unknown, f"unknown cutoff keys {sorted(unknown)}", ConfigurationError)
    cutoff = None
    if cutoff_spec:
        tail_tolerance = float(cutoff_spec.get("tail_tolerance", get_params().tail_tolerance))
        n_max = cutoff_spec.get("n_max")
        if n_max is None:
            n_max = minimal_cutoff(kind, params, tail_tolerance)
        cutoff = CutoffPolicy(n_max=int(n_max), tail_tolerance=tail_tolerance)
    try:
        state = NAMED_STATES[kind](**params, cutoff=cutoff)
    except TypeError as e:
        raise ConfigurationError(f"invalid parameters for '{kind}': {e}") from e
    _logger.info(f"built {kind} state with n_max={state.cutoff.n_max}")
    return state
