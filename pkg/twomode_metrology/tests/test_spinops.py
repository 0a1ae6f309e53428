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

"""Test the spinops.py module of the package."""

# pylint: skip-file

import math

import numpy as np
import pytest

from twomode_metrology.exceptions import (
    DegenerateRotationError,
    DimensionMismatchError,
    InvalidParametersError,
)
from twomode_metrology.fockspace import (
    CutoffPolicy,
    embed_block_state,
    moon,
    noon,
    noon_mixture,
    tmsv,
    to_density_matrix,
)
from twomode_metrology.spinops import (
    BlockUnitary,
    Direction,
    U2AxisParams,
    U2EulerParams,
    collective_spin,
    commutes_with_number,
    euler_to_axis,
    euler_unitary,
    fibonacci_directions,
    is_unitary,
    mode_matrix,
    mz_like_unitary,
    mzlike_decomposition,
    number_operator,
    rotation_block,
    sparse_inner,
    spin_eigensystem,
    su2_unitary,
    u2_unitary,
)


RANDOM_EULER = [
    U2EulerParams(0.0, 0.4, 1.1, -0.7),
    U2EulerParams(0.3, 2.5, 0.2, 1.9),
    U2EulerParams(-1.2, -3.0, 2.8, 0.6),
]


class TestDirection:
    """Tests for Direction."""

    @pytest.mark.parametrize(
        "value, expected",
        [("x", (1, 0, 0)), ("Y", (0, 1, 0)), ("0,0,2", (0, 0, 1)), ([3, 4, 0], (0.6, 0.8, 0))],
    )
    def test_parse(self, value: object, expected: tuple) -> None:
        """Axis names and vectors are parsed and normalized."""
        assert Direction.parse(value).as_array() == pytest.approx(np.array(expected, float))

    @pytest.mark.parametrize("value", ["w", "1,2", [0, 0, 0]])
    def test_parse_invalid(self, value: object) -> None:
        """Malformed directions are rejected."""
        with pytest.raises(InvalidParametersError):
            Direction.parse(value)

    def test_from_angles(self) -> None:
        """Polar angle pi/2 at azimuth pi/2 is the y axis."""
        direction = Direction.from_angles(math.pi / 2, math.pi / 2)
        assert direction.as_array() == pytest.approx([0.0, 1.0, 0.0], abs=1e-12)

    def test_fibonacci_directions(self) -> None:
        """Grid directions are unit vectors spread over both hemispheres."""
        grid = fibonacci_directions(50)
        vectors = np.array([d.as_array() for d in grid])
        assert len(grid) == 50
        assert np.linalg.norm(vectors, axis=1) == pytest.approx(np.ones(50))
        assert vectors[:, 2].max() > 0.9 and vectors[:, 2].min() < -0.9


class TestOperators:
    """Tests for the collective spin operators."""

    def test_jz_diagonal(self) -> None:
        """Jz |n1, n2> = (n1 - n2)/2 |n1, n2>."""
        block = collective_spin(Direction.z(), CutoffPolicy(3)).block(3)
        assert np.diag(block).real == pytest.approx([1.5, 0.5, -0.5, -1.5])

    def test_spin_half(self) -> None:
        """On one particle J_n = n.sigma / 2."""
        cutoff = CutoffPolicy(1)
        jx = collective_spin(Direction.x(), cutoff).block(1)
        jy = collective_spin(Direction.y(), cutoff).block(1)
        assert jx == pytest.approx(np.array([[0, 0.5], [0.5, 0]]))
        assert jy == pytest.approx(np.array([[0, -0.5j], [0.5j, 0]]))

    def test_commutator(self) -> None:
        """[Jx, Jy] = i Jz on every sector."""
        cutoff = CutoffPolicy(5)
        jx, jy, jz = (
            collective_spin(axis, cutoff).block(5)
            for axis in (Direction.x(), Direction.y(), Direction.z())
        )
        assert jx @ jy - jy @ jx == pytest.approx(1j * jz)

    def test_casimir(self) -> None:
        """J^2 = N/2 (N/2 + 1) on sector N."""
        cutoff = CutoffPolicy(4)
        squares = sum(
            np.linalg.matrix_power(collective_spin(axis, cutoff).block(4), 2)
            for axis in (Direction.x(), Direction.y(), Direction.z())
        )
        assert squares == pytest.approx(6.0 * np.eye(5))

    def test_number_operator(self) -> None:
        """N is diagonal with the sector total."""
        dense = number_operator(CutoffPolicy(2)).to_dense()
        assert np.diag(dense).real == pytest.approx([0, 1, 1, 2, 2, 2])

    def test_apply_matches_dense(self) -> None:
        """The sparse product equals the dense one."""
        state = tmsv(0.4, cutoff=CutoffPolicy(30))
        generator = collective_spin(Direction.from_vector([0.3, -0.5, 0.8]), state.cutoff)
        support, image = generator.apply(state)
        dense = np.zeros(state.cutoff.dimension, dtype=complex)
        dense[support] = image
        assert dense == pytest.approx(generator.to_dense() @ state.to_dense())

    def test_apply_cutoff_mismatch(self) -> None:
        """Operators and states must share the cutoff."""
        with pytest.raises(DimensionMismatchError):
            collective_spin(Direction.z(), CutoffPolicy(2)).apply(noon(3))

    def test_block_outside_cutoff(self) -> None:
        """Sectors above n_max do not exist."""
        with pytest.raises(DimensionMismatchError):
            collective_spin(Direction.z(), CutoffPolicy(2)).block(3)

    def test_spin_eigensystem(self) -> None:
        """Eigenvalues are -N/2, ..., N/2 and eigenvectors diagonalize J_n."""
        direction = Direction.from_vector([1.0, 2.0, -0.5])
        values, vectors = spin_eigensystem(direction.alpha, direction.beta, direction.gamma, 4)
        block = collective_spin(direction, CutoffPolicy(4)).block(4)
        assert values.tolist() == [-2.0, -1.0, 0.0, 1.0, 2.0]
        assert vectors.conj().T @ block @ vectors == pytest.approx(np.diag(values), abs=1e-10)


class TestUnitaries:
    """Tests for the block-diagonal transformations."""

    def test_rotation_is_exponential(self) -> None:
        """The spectral rotation equals exp(-i theta J_n)."""
        direction = Direction.from_vector([0.2, 0.9, -0.4])
        generator = collective_spin(direction, CutoffPolicy(3))
        assert rotation_block(direction, 0.7, 3) == pytest.approx(
            generator.exponential(0.7, 3), abs=1e-12
        )

    def test_su2_is_unitary_and_number_conserving(self) -> None:
        """Transformations are unitary and commute with N."""
        cutoff = CutoffPolicy(4)
        dense = su2_unitary(Direction.from_vector([1, 1, 1]), 1.3, cutoff).to_dense()
        assert is_unitary(dense)
        assert commutes_with_number(dense, cutoff, 1e-12)

    def test_dagger_and_compose(self) -> None:
        """U^dagger U is the identity."""
        cutoff = CutoffPolicy(3)
        unitary = u2_unitary(U2AxisParams(0.4, 1.1, Direction.from_vector([0, 1, 1])), cutoff)
        product = unitary.dagger().compose(unitary).to_dense()
        assert product == pytest.approx(np.eye(cutoff.dimension), abs=1e-12)

    def test_compose_cutoff_mismatch(self) -> None:
        """Only transformations on the same space compose."""
        with pytest.raises(DimensionMismatchError):
            BlockUnitary(CutoffPolicy(1)).compose(BlockUnitary(CutoffPolicy(2)))

    def test_apply_representations_agree(self) -> None:
        """Pure, block and dense states transform consistently."""
        cutoff = CutoffPolicy(4)
        unitary = u2_unitary(U2AxisParams(0.2, 0.9, Direction.from_vector([1, -1, 0.5])), cutoff)
        dense = unitary.to_dense()
        pure = moon(2, 4)
        expected = dense @ to_density_matrix(pure).matrix @ dense.conj().T
        assert to_density_matrix(unitary.apply(pure)).matrix == pytest.approx(expected, abs=1e-12)
        blocks = noon_mixture(weights={2: 0.3, 4: 0.7})
        expected = dense @ embed_block_state(blocks).matrix @ dense.conj().T
        assert embed_block_state(unitary.apply(blocks)).matrix == pytest.approx(expected, abs=1e-12)
        general = to_density_matrix(blocks)
        assert unitary.apply(general).matrix == pytest.approx(expected, abs=1e-12)

    def test_common_phase(self) -> None:
        """phi0 multiplies sector N by exp(-i phi0 N)."""
        unitary = u2_unitary(U2AxisParams(0.5, 0.0, Direction.z()), CutoffPolicy(2))
        assert unitary.block(2) == pytest.approx(np.exp(-1j) * np.eye(3))


class TestEuler:
    """Tests for the Euler and axis-angle forms."""

    @pytest.mark.parametrize("params", RANDOM_EULER)
    def test_euler_to_axis(self, params: U2EulerParams) -> None:
        """The axis-angle form reproduces the Euler product on every sector."""
        cutoff = CutoffPolicy(3)
        axis = euler_to_axis(params)
        assert axis.axis_defined
        assert 0.0 <= axis.theta <= 2.0 * math.pi
        assert u2_unitary(axis, cutoff).to_dense() == pytest.approx(
            euler_unitary(params, cutoff).to_dense(), abs=1e-10
        )

    @pytest.mark.parametrize("params", RANDOM_EULER)
    def test_mode_matrix(self, params: U2EulerParams) -> None:
        """The mode matrix is the one-particle block and splits t + r = 1."""
        matrix = mode_matrix(params)
        assert is_unitary(matrix)
        assert matrix == pytest.approx(euler_unitary(params, CutoffPolicy(1)).block(1), abs=1e-12)
        assert abs(matrix[0, 0]) ** 2 == pytest.approx(params.transmittance)
        assert params.transmittance + params.reflectance == pytest.approx(1.0)

    def test_identity_rotation(self) -> None:
        """The trivial rotation has no axis: flagged, or refused when strict."""
        params = U2EulerParams(0.1, 0.3, 0.0, -0.3)
        axis = euler_to_axis(params)
        assert not axis.axis_defined
        assert axis.theta == pytest.approx(0.0)
        with pytest.raises(DegenerateRotationError):
            euler_to_axis(params, strict=True)

    @pytest.mark.parametrize(
        "direction",
        [Direction.from_vector([0.3, 0.4, 0.5]), Direction.z(), Direction.from_vector([0, 0, -1]), Direction.x()],
    )
    def test_mz_like_reconstruction(self, direction: Direction) -> None:
        """Mode phases conjugated by exp(-i chi J_s) rebuild the transformation."""
        cutoff = CutoffPolicy(3)
        params = U2AxisParams(0.6, 1.7, direction)
        decomposition = mzlike_decomposition(params)
        assert decomposition.chi == pytest.approx(math.acos(direction.gamma))
        assert decomposition.s_axis.gamma == 0.0
        assert mz_like_unitary(decomposition, cutoff).to_dense() == pytest.approx(
            u2_unitary(params, cutoff).to_dense(), abs=1e-10
        )


def test_sparse_inner() -> None:
    """Inner products use the shared support only."""
    value = sparse_inner(
        np.array([0, 2, 5]), np.array([1.0, 1j, 2.0]), np.array([2, 3, 5]), np.array([1.0, 4.0, 0.5])
    )
    assert value == pytest.approx(-1j + 1.0)
