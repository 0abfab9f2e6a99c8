"""
관측량 테스트: 해석적 분포, 모멘트, 비가우시안성, 위그너 함수
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import eval_laguerre

from app.core.exceptions import DegenerateDistributionError, UndefinedCorrelationError
from app.models.fock import DensityMatrix, FockSpace
from app.models.observables import (
    PhononDistribution,
    analytic_populations,
    engineered_populations,
    fock_distribution,
    g2_zero,
    laguerre,
    mean_phonon,
    mixture,
    non_gaussianity_fock,
    non_gaussianity_hs,
    selective_rates,
    thermal_reference,
    wigner,
)
from app.models.reference import REFERENCE_CELLS
from app.schemas.params import SystemParams
from app.schemas.scenario import WignerGridSpec

ORIGIN_GRID = WignerGridSpec(xmin=-1.0, xmax=1.0, ymin=-1.0, ymax=1.0, nx=3, ny=3)


def laguerre_exact(n: int, x: Fraction) -> float:
    return float(sum(Fraction(math.comb(n, k)) * (-x) ** k / math.factorial(k) for k in range(n + 1)))


def cell_params(eta: float, delta_a: float) -> SystemParams:
    return SystemParams(omega_m=1.0 / eta, delta_a=delta_a)


class TestPhononDistribution:
    def test_rejects_negative(self):
        with pytest.raises(DegenerateDistributionError):
            PhononDistribution(np.array([1.1, -0.1]))

    def test_clips_rounding_noise(self):
        dist = PhononDistribution(np.array([1.0, -1e-13]))
        assert dist.populations[1] == 0.0

    def test_rejects_unnormalized(self):
        with pytest.raises(DegenerateDistributionError):
            PhononDistribution(np.array([0.5, 0.4]))

    def test_rejects_bad_tail(self):
        with pytest.raises(DegenerateDistributionError):
            PhononDistribution(np.array([0.5, 0.5]), tail_ratio=1.0)

    def test_tail_counts_toward_total(self):
        dist = thermal_reference(3.0, n_c=5)
        assert dist.total == pytest.approx(1.0, abs=1e-14)
        assert dist.truncation_tail > 0


class TestEngineeredPopulations:
    @pytest.mark.parametrize("nbar,j,gamma_j", [(10.0, 1, 6e-3), (0.5, 0, 1e-4), (3.0, 3, 1e-2), (10.0, 2, 0.0)])
    def test_normalization_identity(self, nbar, j, gamma_j):
        gamma_p = 1e-5
        dist = engineered_populations(gamma_p, nbar, j, gamma_j)
        zeta = nbar / (nbar + 1.0)
        eps_j = gamma_j / (nbar + 1.0)
        varpi = gamma_p * (j + 1) / (gamma_p * (j + 1) + eps_j)
        series = math.fsum(zeta ** n for n in range(j + 1)) + varpi * math.fsum(
            zeta ** n for n in range(j + 1, 5000)
        )
        assert dist.populations[0] == pytest.approx(1.0 / series, abs=1e-14)
        assert dist.total == pytest.approx(1.0, abs=1e-13)

    def test_geometric_outside_link(self):
        dist = engineered_populations(1e-5, 10.0, 1, 6e-3)
        p = dist.populations
        for n in (0, 2, 3, 10):
            assert p[n + 1] / p[n] == pytest.approx(10.0 / 11.0, rel=1e-14)

    def test_no_selective_channel_is_thermal(self):
        dist = engineered_populations(1e-5, 10.0, 1, 0.0, n_c=40)
        np.testing.assert_allclose(dist.populations, thermal_reference(10.0, n_c=40).populations, rtol=1e-14)
        assert dist.populations[0] == pytest.approx(1.0 / 11.0, rel=1e-14)

    def test_truncation_too_small(self):
        with pytest.raises(ValueError):
            engineered_populations(1e-5, 10.0, 2, 1e-3, n_c=3)

    def test_degenerate_rates(self):
        with pytest.raises(DegenerateDistributionError):
            engineered_populations(0.0, 10.0, 1, 0.0)

    @pytest.mark.parametrize("convention", ["derived", "literal"])
    def test_target_levels_dominate(self, reference_params, ctrl, convention):
        dist = analytic_populations(reference_params, 1, ctrl, convention=convention)
        p = dist.populations
        assert p[1] / p[0] == pytest.approx(10.0 / 11.0, rel=1e-14)
        assert p[0] + p[1] > 0.8

    def test_selective_rates(self, reference_params, ctrl):
        rates = selective_rates(reference_params, 1, ctrl, "derived")
        assert rates.gamma_j == pytest.approx(2.0 * rates.alpha_j ** 2 / 0.15, rel=1e-14)
        assert rates.eps_j == pytest.approx(rates.gamma_j / 11.0, rel=1e-14)
        assert 0.0 < rates.varpi_j < 1.0


class TestMoments:
    @pytest.mark.parametrize("nbar", [0.5, 1.0, 10.0])
    def test_thermal(self, nbar):
        dist = thermal_reference(nbar)
        assert mean_phonon(dist) == pytest.approx(nbar, rel=1e-12)
        assert g2_zero(dist) == pytest.approx(2.0, abs=1e-10)

    def test_fock_two(self):
        dist = fock_distribution(2)
        assert mean_phonon(dist) == 2.0
        assert g2_zero(dist) == pytest.approx(0.5)

    def test_two_level_support(self):
        dist = PhononDistribution(np.array([0.4, 0.6]))
        assert mean_phonon(dist) == pytest.approx(0.6)
        assert g2_zero(dist) == 0.0

    def test_vacuum_correlation_undefined(self):
        dist = fock_distribution(0)
        assert mean_phonon(dist) == 0.0
        with pytest.raises(UndefinedCorrelationError):
            g2_zero(dist)


class TestNonGaussianity:
    @pytest.mark.parametrize("nbar", [0.0, 0.5, 2.0, 10.0])
    def test_thermal_is_gaussian(self, nbar):
        assert non_gaussianity_fock(thermal_reference(nbar)) == pytest.approx(0.0, abs=1e-10)

    def test_fock_one(self):
        assert non_gaussianity_fock(fock_distribution(1)) == pytest.approx(2.0 * math.log(2.0), rel=1e-12)

    def test_hilbert_schmidt_thermal(self):
        assert non_gaussianity_hs(thermal_reference(1.0)) == pytest.approx(0.0, abs=1e-12)

    def test_hilbert_schmidt_fock_one(self):
        assert non_gaussianity_hs(fock_distribution(1)) == pytest.approx(5.0 / 12.0, abs=1e-12)

    def test_hilbert_schmidt_density_matrix(self):
        rho = DensityMatrix.fock(FockSpace(40), 1)
        assert non_gaussianity_hs(rho) == pytest.approx(5.0 / 12.0, abs=1e-12)

    def test_mixing_with_reference_decreases(self):
        reference = thermal_reference(1.0)
        values = [
            non_gaussianity_hs(mixture(fock_distribution(1), reference, weight), reference)
            for weight in (0.0, 0.25, 0.5, 0.75, 1.0)
        ]
        assert values[0] == pytest.approx(5.0 / 12.0, abs=1e-12)
        assert values[-1] == pytest.approx(0.0, abs=1e-12)
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_mixture_weight_range(self):
        with pytest.raises(ValueError):
            mixture(fock_distribution(1), fock_distribution(2), 1.5)


class TestLaguerre:
    def test_low_orders(self):
        assert laguerre(0, 3.0) == 1.0
        assert laguerre(1, 3.0) == -2.0
        assert laguerre(2, 2.0) == pytest.approx(-1.0)

    @pytest.mark.parametrize("n", [5, 10, 20])
    def test_exact_rational(self, n):
        assert laguerre(n, 4.0) == pytest.approx(laguerre_exact(n, Fraction(4)), abs=1e-9)

    def test_matches_scipy(self):
        x = np.linspace(0.0, 10.0, 6)
        for n in range(21):
            np.testing.assert_allclose(laguerre(n, x), eval_laguerre(n, x), rtol=1e-9, atol=1e-10)

    def test_negative_order(self):
        with pytest.raises(ValueError):
            laguerre(-1, 0.0)


class TestWigner:
    def test_vacuum_origin(self):
        grid = wigner(fock_distribution(0), ORIGIN_GRID)
        assert grid.values[1, 1] == pytest.approx(2.0 / math.pi, rel=1e-14)

    def test_fock_one_origin(self):
        grid = wigner(fock_distribution(1), ORIGIN_GRID)
        assert grid.values[1, 1] == pytest.approx(-2.0 / math.pi, rel=1e-14)

    def test_rotational_symmetry(self):
        spec = WignerGridSpec(nx=41, ny=41)
        grid = wigner(fock_distribution(3), spec)
        np.testing.assert_allclose(grid.values, grid.values.T, atol=1e-12)

    def test_thermal_closed_form(self):
        nbar = 1.0
        spec = WignerGridSpec.covering(nbar, points=101)
        grid = wigner(thermal_reference(nbar), spec)
        xx, yy = np.meshgrid(grid.x_axis, grid.y_axis)
        expected = 2.0 / (math.pi * (2 * nbar + 1)) * np.exp(-2.0 * (xx ** 2 + yy ** 2) / (2 * nbar + 1))
        np.testing.assert_allclose(grid.values, expected, atol=1e-10)

    @pytest.mark.parametrize("dist", [thermal_reference(1.0), fock_distribution(2), fock_distribution(4)])
    def test_mass_on_covering_grid(self, dist):
        spec = WignerGridSpec.covering(mean_phonon(dist))
        assert wigner(dist, spec).mass == pytest.approx(1.0, abs=1e-4)

    def test_axis_layout(self):
        spec = WignerGridSpec(xmin=-2.0, xmax=2.0, ymin=-1.0, ymax=1.0, nx=5, ny=3)
        grid = wigner(fock_distribution(0), spec)
        assert grid.values.shape == (3, 5)
        # values[iy, ix]: x 방향이 더 넓으므로 같은 행 안에서 값이 달라짐
        assert grid.values[1, 0] < grid.values[1, 2]

    @pytest.mark.parametrize("cell", REFERENCE_CELLS, ids=lambda c: f"eta{c.eta}_j{c.j}")
    @pytest.mark.parametrize("convention", ["derived", "literal"])
    def test_engineered_states_positive(self, cell, convention, ctrl):
        dist = analytic_populations(cell_params(cell.eta, cell.delta_a), cell.j, ctrl, convention=convention)
        grid = wigner(dist, WignerGridSpec())
        assert grid.values.min() > -1e-10
