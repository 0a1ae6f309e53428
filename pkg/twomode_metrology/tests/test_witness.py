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

"""Test the witness.py module of the package."""

# pylint: skip-file

import math

import numpy as np
import pytest

from twomode_metrology import witness
from twomode_metrology.exceptions import (
    CoherenceMismatchError,
    InconsistentInputsError,
    InvalidParametersError,
)
from twomode_metrology.fisher import qfi, qfi_block
from twomode_metrology.fockspace import (
    fock,
    moments,
    moon,
    noon,
    noon_mixture,
    product_spin_coherent,
    project_number_sectors,
    ssw,
)
from twomode_metrology.spinops import Direction, fibonacci_directions
from twomode_metrology.witness import (
    Regime,
    chi_squared,
    crossover_curve,
    entanglement_depth,
    kprod_bound_fixed,
    kprod_bound_fluctuating,
    sensitivity_bounds,
    ssw_heisenberg_asymptote,
    ssw_mcl_asymptote,
)


SSW_CUTOFFS = (100, 1000, 10000)


class TestSensitivityBounds:
    """Tests for the shot-noise and Heisenberg limits."""

    @pytest.mark.parametrize("m", [1, 4, 100])
    def test_fixed_number(self, m: int) -> None:
        """With <N^2> = N^2 the Heisenberg limit is 1/(sqrt(m) N)."""
        report = sensitivity_bounds(5.0, 25.0, m)
        assert report.heisenberg == pytest.approx(1.0 / (math.sqrt(m) * 5.0))
        assert report.shot_noise == pytest.approx(1.0 / math.sqrt(5.0 * m))
        assert report.regime is Regime.CENTRAL_LIMIT

    @pytest.mark.parametrize("m,expected", [(1, 1.0), (4, 0.25), (16, 0.125)])
    def test_squeezed_vacuum_moments(self, m: int, expected: float) -> None:
        """<N> = 1 and <N^2> = 4 give max(1/sqrt(4m), 1/m)."""
        report = sensitivity_bounds(1.0, 4.0, m)
        assert report.heisenberg == pytest.approx(expected)
        assert report.qcr_ceiling == pytest.approx(1.0 / math.sqrt(4.0 * m))
        assert report.m_cl_threshold == pytest.approx(4.0)
        assert report.regime is (Regime.CENTRAL_LIMIT if m >= 4 else Regime.SMALL_M)

    def test_crossover_point(self) -> None:
        """At m = 1, <N> = 2 and <N^2> = 4 both branches equal 1/2."""
        report = sensitivity_bounds(2.0, 4.0, 1)
        assert report.qcr_ceiling == pytest.approx(0.5)
        assert report.heisenberg == pytest.approx(0.5)
        assert 1.0 / (report.m * report.mean_n) == pytest.approx(0.5)

    def test_shot_noise_above_ceiling(self) -> None:
        """Shot noise never beats the QCR ceiling."""
        for mean_n, mean_n2 in [(1.0, 1.0), (2.5, 8.5), (3.0, 30.0)]:
            report = sensitivity_bounds(mean_n, mean_n2, 7)
            assert report.shot_noise >= report.qcr_ceiling

    @pytest.mark.parametrize("mean_n,mean_n2,m", [(0.0, 1.0, 1), (2.0, 3.0, 1), (1.0, 1.0, 0)])
    def test_invalid(self, mean_n: float, mean_n2: float, m: int) -> None:
        """Nonpositive means, <N^2> < <N>^2 and m < 1 are rejected."""
        with pytest.raises(InvalidParametersError):
            sensitivity_bounds(mean_n, mean_n2, m)


class TestCrossoverCurve:
    """Tests for the two Heisenberg branches over m."""

    def test_branch_equality_at_threshold(self) -> None:
        """Q = {1: 1/2, 4: 1/2} switches branch at m = 8.5 / 6.25."""
        stats = moments(noon_mixture({1: 0.5, 4: 0.5}))
        assert (stats.mean_n, stats.mean_n2) == pytest.approx((2.5, 8.5))
        threshold = 8.5 / 6.25
        (point,) = crossover_curve(2.5, 8.5, [threshold])
        assert point.inverse_m_mean == pytest.approx(point.qcr_ceiling)
        assert point.heisenberg == pytest.approx(point.qcr_ceiling)

    def test_branch_ordering(self) -> None:
        """Below the threshold 1/(m <N>) dominates, above it the QCR ceiling."""
        curve = crossover_curve(2.5, 8.5, np.geomspace(1.0, 1000.0, 200))
        for point in curve:
            assert point.heisenberg == max(point.inverse_m_mean, point.qcr_ceiling)
            if point.m < 8.5 / 6.25:
                assert point.inverse_m_mean > point.qcr_ceiling
            elif point.m > 8.5 / 6.25:
                assert point.inverse_m_mean < point.qcr_ceiling
        assert [point.heisenberg for point in curve] == sorted(
            (point.heisenberg for point in curve), reverse=True
        )


class TestProducibility:
    """Tests for the k-producible QFI ceilings."""

    @pytest.mark.parametrize("n,k,expected", [(5, 2, 9.0), (6, 3, 18.0), (7, 1, 7.0), (7, 7, 49.0)])
    def test_fixed_spot_values(self, n: int, k: int, expected: float) -> None:
        """s k^2 + r^2 with s = N // k and r = N - s k."""
        assert kprod_bound_fixed(n, k) == expected

    def test_fixed_curve_monotone(self) -> None:
        """The ceiling grows with k and reaches N^2 at k = N."""
        for n in range(1, 51):
            curve = [kprod_bound_fixed(n, k) for k in range(1, n + 1)]
            assert curve == sorted(curve)
            assert curve[0] == n
            assert curve[-1] == n**2

    @pytest.mark.parametrize("k", [0, 6])
    def test_fixed_invalid_k(self, k: int) -> None:
        """k must lie in [1, N]."""
        with pytest.raises(InvalidParametersError):
            kprod_bound_fixed(5, k)

    def test_fluctuating(self) -> None:
        """k = 1 gives <N>, k = max N gives <N^2>."""
        weights = {1: 0.5, 2: 0.5}
        assert kprod_bound_fluctuating(weights, 1) == pytest.approx(1.5)
        assert kprod_bound_fluctuating(weights, 2) == pytest.approx(2.5)
        assert kprod_bound_fluctuating({6: 1.0}, 3) == kprod_bound_fixed(6, 3)

    def test_fluctuating_invalid_weights(self) -> None:
        """Weights must form a distribution."""
        with pytest.raises(InvalidParametersError):
            kprod_bound_fluctuating({1: 0.5, 2: 0.6}, 1)
        with pytest.raises(InvalidParametersError):
            kprod_bound_fluctuating({1: 1.5, 2: -0.5}, 1)


class TestChiSquared:
    """Tests for the chi^2 witness."""

    def test_noon(self) -> None:
        """NOON_4 along z gives 4 / 16."""
        state = project_number_sectors(noon(4))
        assert chi_squared(state, Direction.z()) == pytest.approx(0.25)

    def test_product_states(self) -> None:
        """Product spin-coherent states are never certified."""
        rng = np.random.default_rng(41)
        for _ in range(20):
            state = product_spin_coherent(
                n=int(rng.integers(1, 7)),
                polar=float(rng.uniform(0.0, math.pi)),
                azimuth=float(rng.uniform(0.0, 2.0 * math.pi)),
            )
            assert chi_squared(state) >= 1.0 - 1e-9

    def test_separable_mixture(self) -> None:
        """Separable mixtures over sectors stay below the shot-noise QFI."""
        state = product_spin_coherent(polar=1.1, azimuth=0.4, weights={1: 0.3, 2: 0.3, 3: 0.4})
        mean_n = moments(state).mean_n
        for direction in fibonacci_directions(20):
            assert qfi_block(state, direction) <= mean_n + 1e-9

    def test_vacuum(self) -> None:
        """A state without phase sensitivity yields +inf."""
        assert chi_squared(fock(0, 0)) == math.inf

    def test_coherent_rejected(self) -> None:
        """States with number coherences are outside the witness."""
        with pytest.raises(CoherenceMismatchError):
            chi_squared(moon(2, 1), Direction.z())


class TestEntanglementDepth:
    """Tests for the depth classification."""

    def test_separable_value(self) -> None:
        """F_Q = <N> certifies nothing."""
        weights = {1: 0.2, 3: 0.5, 4: 0.3}
        mean_n = sum(total * weight for total, weight in weights.items())
        assert entanglement_depth(mean_n, weights).depth == 1

    def test_fixed_six(self) -> None:
        """18.1 exceeds the 3-producible ceiling 18 of N = 6."""
        report = entanglement_depth(18.1, {6: 1.0})
        assert report.depth == 4
        assert report.bound_curve[3] == 18.0
        assert report.bound_curve[4] == 20.0
        values = list(report.bound_curve.values())
        assert values == sorted(values)

    @pytest.mark.parametrize(
        "weights", [{1: 0.2, 3: 0.5, 4: 0.3}, {2: 0.5, 5: 0.5}, {6: 1.0}]
    )
    def test_noon_mixture_saturates(self, weights: dict) -> None:
        """NOON mixtures reach <N^2> along z and certify depth max N."""
        state = noon_mixture(weights)
        value = qfi(state, Direction.z())
        assert value == pytest.approx(moments(state).mean_n2, abs=1e-9)
        assert entanglement_depth(value, weights).depth == max(weights)

    def test_geometric_noon_mixture(self) -> None:
        """The geometric mixture also attains <N^2>."""
        state = noon_mixture(squeezing=0.5)
        assert qfi(state, Direction.z()) == pytest.approx(moments(state).mean_n2, abs=1e-9)

    def test_inconsistent(self) -> None:
        """A QFI above <N^2> cannot come from these weights."""
        with pytest.raises(InconsistentInputsError):
            entanglement_depth(40.0, {6: 1.0})
        with pytest.raises(InvalidParametersError):
            entanglement_depth(-1.0, {6: 1.0})


class TestSswScaling:
    """Tests for the large-M behavior of the SSW state."""

    @pytest.fixture(scope="class")
    def ssw_moments(self) -> dict:
        """Moments and QFI of the SSW state for several cut-offs."""
        results = {}
        for cutoff in SSW_CUTOFFS:
            state = ssw(cutoff)
            results[cutoff] = (moments(state), qfi(state, Direction.y()))
        return results

    def test_qfi_linear_in_cutoff(self, ssw_moments: dict) -> None:
        """F_Q approaches 12 (M + 1) / pi^2."""
        ratios = [
            ssw_moments[cutoff][1] * math.pi**2 / (12.0 * (cutoff + 1))
            for cutoff in SSW_CUTOFFS
        ]
        assert ratios[-1] == pytest.approx(1.0, rel=0.05)
        assert abs(ratios[-1] - 1.0) < abs(ratios[0] - 1.0)

    def test_mcl_superpolynomial(self, ssw_moments: dict) -> None:
        """m_cl grows faster than any fixed power of <N>, in step with the asymptote."""
        mean_n = [ssw_moments[cutoff][0].mean_n for cutoff in SSW_CUTOFFS]
        m_cl = [
            ssw_moments[cutoff][0].mean_n2 / ssw_moments[cutoff][0].mean_n ** 2
            for cutoff in SSW_CUTOFFS
        ]
        exponents = [
            math.log(m_cl[i + 1] / m_cl[i]) / math.log(mean_n[i + 1] / mean_n[i])
            for i in range(2)
        ]
        assert exponents[1] > exponents[0]
        for i in range(2):
            measured = m_cl[i + 1] / m_cl[i]
            predicted = ssw_mcl_asymptote(mean_n[i + 1]) / ssw_mcl_asymptote(mean_n[i])
            assert 0.5 <= measured / predicted <= 2.0

    def test_heisenberg_structure(self, ssw_moments: dict) -> None:
        """The QCR branch shrinks like 1/sqrt(M) while 1/(m <N>) only shrinks logarithmically."""
        reports = [
            sensitivity_bounds(ssw_moments[cutoff][0].mean_n, ssw_moments[cutoff][0].mean_n2, 1)
            for cutoff in SSW_CUTOFFS
        ]
        ceilings = [report.qcr_ceiling for report in reports]
        small_m = [1.0 / report.mean_n for report in reports]
        assert ceilings[0] / ceilings[-1] == pytest.approx(10.0, rel=0.1)
        assert small_m[0] / small_m[-1] < 3.0
        asymptotes = [ssw_heisenberg_asymptote(report.mean_n, 1) for report in reports]
        assert all(a >= s for a, s in zip(asymptotes, small_m))
        large_m = 1e6
        shapes = [
            ssw_heisenberg_asymptote(report.mean_n, large_m)
            / sensitivity_bounds(report.mean_n, report.mean_n2, large_m).qcr_ceiling
            for report in reports[1:]
        ]
        assert shapes[0] == pytest.approx(shapes[1], rel=0.05)


class TestExports:
    """Tests for the public names of the module."""

    def test_public_names_are_defined_here(self) -> None:
        """Every exported name belongs to the witness module itself."""
        for name in witness.__all__:
            assert getattr(witness, name).__module__ == witness.__name__, name

    def test_direction_grid_not_reexported(self) -> None:
        """The direction grid is exported by spinops only."""
        assert "fibonacci_directions" not in witness.__all__
        assert not hasattr(witness, "fibonacci_directions")
