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

"""Test the fockspace.py module of the package."""

# pylint: skip-file

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import comb

from twomode_metrology.exceptions import (
    ConfigurationError,
    CutoffTooSmallError,
    InvalidParametersError,
    StateValidationError,
)
from twomode_metrology.fockspace import (
    BasisIndex,
    BlockState,
    CutoffPolicy,
    GeneralState,
    StateVector,
    basis_enumerate,
    biased_demo_mixture,
    decode_flat,
    embed_block_state,
    flat_index,
    fock,
    has_number_coherences,
    make_named_state,
    minimal_cutoff,
    moments,
    moon,
    noon,
    noon_mixture,
    product_spin_coherent,
    project_number_sectors,
    sector_weights,
    ssw,
    ssw_normalization,
    ssw_normalization_asymptote,
    tmsv,
    to_density_matrix,
    twin_fock,
    vacuum_coherence,
)


class TestBasis:
    """Tests for the sector-major basis ordering."""

    def test_flat_index(self) -> None:
        """|n1, n2> sits at N(N+1)/2 + n2."""
        assert flat_index(0, 0) == 0
        assert flat_index(1, 0) == 1
        assert flat_index(0, 1) == 2
        assert flat_index(3, 2) == 15 + 2

    def test_decode_flat(self) -> None:
        """Flat indices decode back to (N, n2) for every basis state."""
        cutoff = CutoffPolicy(n_max=30)
        indices = basis_enumerate(cutoff)
        totals, positions = decode_flat(np.array([index.flat for index in indices]))
        assert len(indices) == cutoff.dimension
        assert totals.tolist() == [index.total for index in indices]
        assert positions.tolist() == [index.n2 for index in indices]

    def test_basis_index(self) -> None:
        """BasisIndex exposes occupations and the relative number."""
        index = BasisIndex.from_occupations(3, 2)
        assert (index.total, index.n1, index.n2) == (5, 3, 2)
        assert index.mu == Fraction(1, 2)
        assert BasisIndex.from_flat(index.flat) == index

    def test_invalid_index(self) -> None:
        """mu must be compatible with N."""
        with pytest.raises(InvalidParametersError):
            BasisIndex(total=2, mu_twice=1)

    def test_invalid_cutoff(self) -> None:
        """n_max is a nonnegative integer."""
        with pytest.raises(InvalidParametersError):
            CutoffPolicy(n_max=-1)


class TestStateVector:
    """Tests for StateVector."""

    def test_rejects_unnormalized(self) -> None:
        """The norm must be one."""
        with pytest.raises(StateValidationError):
            StateVector(np.array([0, 1]), np.array([1.0, 1.0]), CutoffPolicy(1))

    def test_rejects_unsorted(self) -> None:
        """The support must be sorted and unique."""
        with pytest.raises(StateValidationError):
            StateVector(np.array([1, 0]), np.array([0.6, 0.8]), CutoffPolicy(1))

    def test_rejects_support_above_cutoff(self) -> None:
        """The support must fit in the truncated basis."""
        with pytest.raises(StateValidationError):
            StateVector(np.array([3]), np.array([1.0]), CutoffPolicy(1))

    def test_read_only(self) -> None:
        """Amplitudes cannot be modified in place."""
        state = noon(2)
        with pytest.raises(ValueError):
            state.amplitudes[0] = 0.0

    def test_from_arrays_sums_duplicates(self) -> None:
        """Repeated indices are summed and the result normalized on request."""
        state = StateVector.from_arrays(
            [2, 0, 2], [0.5, 1.0, 0.5], CutoffPolicy(1), normalize=True
        )
        assert state.indices.tolist() == [0, 2]
        assert state.amplitude(BasisIndex.from_occupations(0, 1)) == pytest.approx(
            1.0 / math.sqrt(2.0)
        )

    def test_sector_vector(self) -> None:
        """Sector vectors are indexed by n2."""
        state = moon(2, 1)
        assert state.sector_vector(1)[0] == pytest.approx(math.sqrt(2.0 / 3.0))
        assert state.sector_vector(2)[2] == pytest.approx(math.sqrt(1.0 / 3.0))
        assert not state.sector_vector(0).any()


class TestNamedStates:
    """Tests for the named-state constructors."""

    def test_noon(self) -> None:
        """NOON states live in one sector."""
        state = noon(4, phase=0.3)
        assert sector_weights(state) == {4: pytest.approx(1.0)}
        assert state.cutoff.n_max == 4
        assert not has_number_coherences(state)

    def test_moon_moments(self) -> None:
        """MOON(2, 1) has <N> = 4/3 and 4 (Delta N)^2 = 8/9."""
        state = moon(2, 1)
        number = moments(state)
        assert number.mean_n == pytest.approx(4.0 / 3.0)
        assert 4.0 * number.var_n == pytest.approx(8.0 / 9.0)
        assert has_number_coherences(state)

    def test_vacuum_coherence(self) -> None:
        """The mean number is the requested one."""
        state = vacuum_coherence(10, 2.0)
        assert moments(state).mean_n == pytest.approx(2.0)
        assert sector_weights(state)[0] == pytest.approx(0.8)

    def test_vacuum_coherence_range(self) -> None:
        """<N> cannot exceed n."""
        with pytest.raises(InvalidParametersError):
            vacuum_coherence(2, 3.0)

    def test_twin_fock(self) -> None:
        """|n, n> has 2n particles and zero relative number."""
        state = twin_fock(3)
        assert state.indices.tolist() == [flat_index(3, 3)]

    @pytest.mark.parametrize("squeezing", [0.3, 0.5, 1.0])
    def test_tmsv_moments(self, squeezing: float) -> None:
        """<N> = 2 sinh^2 r, (Delta N)^2 = <N>(<N>+2), <N^2> = 2<N>(<N>+1)."""
        state = tmsv(squeezing)
        number = moments(state)
        mean_n = 2.0 * math.sinh(squeezing) ** 2
        assert state.truncation_loss <= 1e-12
        assert number.mean_n == pytest.approx(mean_n, rel=1e-8)
        assert number.var_n == pytest.approx(mean_n * (mean_n + 2.0), rel=1e-8)
        assert number.mean_n2 == pytest.approx(2.0 * mean_n * (mean_n + 1.0), rel=1e-8)

    def test_tmsv_sector_weights(self) -> None:
        """Q_2n = tanh^2n r / cosh^2 r and odd sectors are empty."""
        state = tmsv(0.5, cutoff=CutoffPolicy(n_max=80))
        weights = sector_weights(state)
        assert all(total % 2 == 0 for total in weights)
        for pairs in range(5):
            expected = math.tanh(0.5) ** (2 * pairs) / math.cosh(0.5) ** 2
            assert weights[2 * pairs] == pytest.approx(expected, rel=1e-10)

    def test_tmsv_cutoff_too_small(self) -> None:
        """A cutoff that loses too much mass is refused."""
        with pytest.raises(CutoffTooSmallError):
            tmsv(0.5, cutoff=CutoffPolicy(n_max=4))

    def test_minimal_cutoff_is_minimal(self) -> None:
        """The chosen n_max keeps the tail in tolerance and n_max - 2 does not."""
        n_max = minimal_cutoff("tmsv", {"squeezing": 1.0}, 1e-12)
        tmsv(1.0, cutoff=CutoffPolicy(n_max=n_max))
        with pytest.raises(CutoffTooSmallError):
            tmsv(1.0, cutoff=CutoffPolicy(n_max=n_max - 2))

    def test_ssw_normalization(self) -> None:
        """A^2 approaches 6/pi^2 as its series predicts."""
        assert ssw_normalization(0) == pytest.approx(1.0)
        assert ssw_normalization(1) == pytest.approx(1.0 / 1.25)
        assert ssw_normalization(1000) == pytest.approx(
            ssw_normalization_asymptote(1000), rel=1e-5
        )

    def test_ssw_weights(self) -> None:
        """Sector 2n carries A^2 / (n+1)^2."""
        weights = sector_weights(ssw(50))
        norm = ssw_normalization(50)
        assert weights[0] == pytest.approx(norm)
        assert weights[20] == pytest.approx(norm / 121.0)

    def test_noon_mixture_geometric(self) -> None:
        """Geometric weights are tanh^2N r / cosh^2 r."""
        state = noon_mixture(squeezing=0.4)
        weights = state.sector_weights()
        ratio = math.tanh(0.4) ** 2
        assert weights[3] == pytest.approx(ratio**3 * (1.0 - ratio), rel=1e-9)

    def test_noon_mixture_weights(self) -> None:
        """Explicit weights give NOON blocks in each sector."""
        state = noon_mixture(weights={1: 0.5, 4: 0.5})
        assert isinstance(state, BlockState)
        block = state.sector(4).rho
        assert block[0, 4] == pytest.approx(0.5)

    def test_noon_mixture_needs_one_source(self) -> None:
        """Weights and squeezing are exclusive."""
        with pytest.raises(InvalidParametersError):
            noon_mixture(weights={1: 1.0}, squeezing=0.1)

    def test_weights_above_cutoff(self) -> None:
        """Weight beyond an explicit cutoff is lost mass."""
        with pytest.raises(CutoffTooSmallError):
            noon_mixture(weights={1: 0.5, 4: 0.5}, cutoff=CutoffPolicy(n_max=2))

    def test_biased_demo_mixture(self) -> None:
        """The vacuum carries 1 - p."""
        state = biased_demo_mixture(0.25, 4)
        assert state.sector_weights() == {0: pytest.approx(0.75), 4: pytest.approx(0.25)}

    def test_product_spin_coherent(self) -> None:
        """Equatorial product states are binomial over n2."""
        state = product_spin_coherent(n=4, polar=math.pi / 2)
        probabilities = np.abs(state.sector_vector(4)) ** 2
        expected = comb(4, np.arange(5)) / 16.0
        assert probabilities == pytest.approx(expected)

    def test_product_spin_coherent_mixture(self) -> None:
        """With weights the result is a separable block state."""
        state = product_spin_coherent(weights={2: 0.5, 3: 0.5}, polar=1.0)
        assert isinstance(state, BlockState)
        assert np.trace(state.sector(3).rho).real == pytest.approx(1.0)

    def test_fock(self) -> None:
        """|n1, n2> is a single basis state."""
        state = fock(2, 1)
        assert state.amplitude(BasisIndex.from_occupations(2, 1)) == pytest.approx(1.0)


class TestRepresentations:
    """Tests for conversions between the state representations."""

    def test_project_number_sectors(self) -> None:
        """Projection keeps the weights and drops coherences."""
        blocks = project_number_sectors(moon(2, 1))
        assert blocks.sector_weights() == {
            1: pytest.approx(2.0 / 3.0),
            2: pytest.approx(1.0 / 3.0),
        }
        assert not has_number_coherences(embed_block_state(blocks))

    def test_dense_state_coherences(self) -> None:
        """A dense matrix built from a coherent pure state keeps its coherences."""
        dense = to_density_matrix(vacuum_coherence(2, 1.0))
        assert isinstance(dense, GeneralState)
        assert has_number_coherences(dense)
        assert np.trace(dense.matrix).real == pytest.approx(1.0)
        assert moments(dense).mean_n == pytest.approx(1.0)

    def test_block_state_validation(self) -> None:
        """Weights must sum to one."""
        with pytest.raises(StateValidationError):
            BlockState.from_weights({1: 0.4}, {1: np.eye(2) / 2.0}, CutoffPolicy(1))


class TestMakeNamedState:
    """Tests for make_named_state."""

    def test_weights_keys(self) -> None:
        """JSON string keys become sector totals."""
        state = make_named_state(
            {"type": "noon_mixture", "params": {"weights": {"1": 0.5, "4": 0.5}}}
        )
        assert sector_weights(state) == {1: pytest.approx(0.5), 4: pytest.approx(0.5)}

    def test_explicit_cutoff(self) -> None:
        """An explicit n_max is honoured."""
        state = make_named_state(
            {"type": "noon", "params": {"n": 2}, "cutoff": {"n_max": 5}}
        )
        assert state.cutoff.n_max == 5

    def test_unknown_type(self) -> None:
        """Unknown names are configuration errors."""
        with pytest.raises(ConfigurationError):
            make_named_state({"type": "cat"})

    def test_bad_parameters(self) -> None:
        """Unknown constructor parameters are configuration errors."""
        with pytest.raises(ConfigurationError):
            make_named_state({"type": "noon", "params": {"size": 2}})
