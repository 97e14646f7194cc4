import math

import numpy as np
import pytest

from src.cli.models import ExtrapolationConfig, SCFConfig
from src.core import radial_pekar
from src.core.constants import GAUSSIAN_PEKAR_VALUE
from src.core.exceptions import ConfigError, ConvergenceError, DomainError, NormalizationError
from src.core.models import RadialFunction
from tests.conftest import gaussian_closed_forms


def test_gaussian_terms_match_closed_forms(gaussian_phi):
    closed = gaussian_closed_forms()
    breakdown = radial_pekar.pekar_energy(gaussian_phi)
    assert breakdown.kinetic == pytest.approx(closed["T"], abs=1e-6)
    assert breakdown.attraction == pytest.approx(closed["W"], abs=1e-6)
    assert radial_pekar.density_coulomb(gaussian_phi.density()) == pytest.approx(closed["D"], abs=1e-6)
    assert breakdown.total == pytest.approx(breakdown.kinetic - breakdown.attraction, abs=1e-15)


def test_rescaled_gaussian_reaches_its_closed_form(fine_grid):
    breakdown = radial_pekar.pekar_energy(radial_pekar.gaussian_trial(fine_grid))
    lam, energy = radial_pekar.optimal_rescale(breakdown.kinetic, breakdown.attraction)
    assert lam == pytest.approx(2.0 / (3.0 * math.sqrt(math.pi)), abs=1e-8)
    assert energy == pytest.approx(GAUSSIAN_PEKAR_VALUE, abs=1e-9)


@pytest.fixture(scope="module")
def dilation_grid():
    # the lam = 3.7 state has width 0.27; Numerov kinetic error is about 0.036 (h / width)^4
    return radial_pekar.make_grid(0.005, 20.0)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0, 3.7])
def test_dilation_scales_kinetic_quadratically_and_attraction_linearly(dilation_grid, lam):
    phi = radial_pekar.gaussian_trial(dilation_grid)
    base = radial_pekar.pekar_energy(phi)
    scaled = radial_pekar.pekar_energy(radial_pekar.dilate(phi, lam))
    assert scaled.kinetic == pytest.approx(lam**2 * base.kinetic, rel=1e-8)
    assert scaled.attraction == pytest.approx(lam * base.attraction, rel=1e-8)


def test_dilate_rejects_nonpositive_factor(gaussian_phi):
    with pytest.raises(DomainError):
        radial_pekar.dilate(gaussian_phi, 0.0)


def test_pekar_energy_requires_normalization(grid):
    raw = RadialFunction(grid, 2.0 * np.exp(-grid.nodes**2 / 2.0))
    with pytest.raises(NormalizationError):
        radial_pekar.pekar_energy(raw)


def test_newton_potential_is_point_charge_outside_support(gaussian_phi):
    density = gaussian_phi.density()
    potential = radial_pekar.newton_potential(density)
    r = gaussian_phi.grid.nodes
    far = r > 10.0
    mass = density.integral()
    np.testing.assert_allclose(potential.values[far] * r[far], mass, rtol=1e-10)


def test_newton_potential_is_linear_and_monotone(grid):
    n1 = RadialFunction(grid, np.exp(-grid.nodes**2))
    n2 = RadialFunction(grid, n1.values + 0.5 * np.exp(-grid.nodes))
    v1, v2 = radial_pekar.newton_potential(n1), radial_pekar.newton_potential(n2)
    both = radial_pekar.newton_potential(RadialFunction(grid, n1.values + n2.values))
    np.testing.assert_allclose(both.values, v1.values + v2.values, rtol=1e-12, atol=1e-14)
    assert np.all(v2.values >= v1.values)


def test_optimal_rescale_edge_cases():
    assert radial_pekar.optimal_rescale(1.0, -0.5) == (0.0, 0.0)
    assert radial_pekar.optimal_rescale(2.0, 4.0) == (1.0, -2.0)
    with pytest.raises(DomainError):
        radial_pekar.optimal_rescale(0.0, 1.0)


def test_lowest_eigenpair_of_free_operator_matches_discrete_spectrum():
    grid = radial_pekar.make_grid(0.1, 5.0)
    h, n = grid.spacing, grid.node_count
    theta = math.pi / n
    expected = -0.5 * (2.0 * math.cos(theta) - 2.0) / h**2 * 12.0 / (10.0 + 2.0 * math.cos(theta))
    mu, u = radial_pekar.lowest_eigenpair(np.zeros(n - 1), h)
    assert mu == pytest.approx(expected, rel=1e-10)
    assert np.all(u > 0)


def test_richardson_removes_leading_power():
    c, a = -0.25, 3.0
    coarse, fine = c + a * 0.04**4, c + a * 0.02**4
    assert radial_pekar.richardson(coarse, fine, 2.0, 4) == pytest.approx(c, abs=1e-15)


def test_choquard_solution_is_converged_and_virial(pekar_solution):
    assert pekar_solution.energy == pytest.approx(-0.10851, abs=5e-4)
    assert pekar_solution.virial_defect < 1e-6
    assert pekar_solution.energy == pytest.approx(-pekar_solution.breakdown.kinetic, rel=1e-6)
    assert pekar_solution.multiplier < 0
    assert np.all(pekar_solution.phi.values[pekar_solution.phi.grid.nodes < 15.0] > 0)
    assert radial_pekar.trace_violations(pekar_solution.trace) == []
    assert abs(pekar_solution.phi.norm_sq() - 1.0) < 1e-12


def test_choquard_beats_the_gaussian(pekar_solution):
    assert pekar_solution.energy < GAUSSIAN_PEKAR_VALUE


def test_bad_mixing_is_a_config_error():
    with pytest.raises(ConfigError):
        radial_pekar.solve_choquard(SCFConfig.model_construct(mixing=1.5, tol=1e-10, max_iter=10))


def test_convergence_error_carries_last_iterate():
    config = SCFConfig(spacing=0.05, box=10.0, max_iter=1)
    with pytest.raises(ConvergenceError) as info:
        radial_pekar.solve_choquard(config)
    assert info.value.last_iterate is not None
    assert len(info.value.trace) == 1


def test_single_level_ladder_is_flagged():
    accuracy = ExtrapolationConfig(spacings=(0.05,), box=10.0, box_check=False)
    estimate = radial_pekar.compute_cp(accuracy, SCFConfig(tol=1e-9))
    assert not estimate.extrapolated
    assert math.isnan(estimate.error_estimate)
    assert any(flag.startswith("single level") for flag in estimate.flags)


@pytest.mark.slow
def test_extrapolated_cp_lies_in_the_reference_window():
    c_p, error = radial_pekar.compute_cp()
    assert -0.1090 <= c_p <= -0.1080
    assert error < 1e-4


def test_lower_bound_is_only_stated():
    assert "alpha^(9/5)" in radial_pekar.lower_bound_statement()


def test_gaussian_density_potential_is_erf_over_r(grid):
    density = RadialFunction(grid, math.pi**-1.5 * np.exp(-grid.nodes**2))
    potential = radial_pekar.newton_potential(density)
    expected = np.array([math.erf(r) / r for r in grid.nodes])
    assert np.max(np.abs(potential.values - expected)) < 1e-6


def test_zero_mixing_and_zero_function_are_rejected(grid):
    with pytest.raises(ConfigError):
        radial_pekar.solve_choquard(SCFConfig.model_construct(mixing=0.0, tol=1e-10, max_iter=10))
    with pytest.raises(NormalizationError):
        radial_pekar.pekar_energy(RadialFunction(grid, np.zeros(grid.node_count)))


def test_box_enlargement_lowers_the_energy():
    scf = SCFConfig(tol=1e-11)
    small = radial_pekar.solve_choquard(scf, grid=radial_pekar.make_grid(0.04, 12.0)).energy
    large = radial_pekar.solve_choquard(scf, grid=radial_pekar.make_grid(0.04, 24.0)).energy
    assert large <= small + 1e-9


def test_default_box_is_not_flagged():
    accuracy = ExtrapolationConfig(spacings=(0.04,))
    estimate = radial_pekar.compute_cp(accuracy, SCFConfig(tol=1e-11))
    assert estimate.box_sensitivity < accuracy.box_tol
    assert not any(flag.startswith("box-sensitive") for flag in estimate.flags)
    assert "box ladder not monotone" not in estimate.flags


def test_small_box_is_flagged():
    accuracy = ExtrapolationConfig(spacings=(0.04,), box=6.0)
    estimate = radial_pekar.compute_cp(accuracy, SCFConfig(tol=1e-11))
    assert any(flag.startswith("box-sensitive") for flag in estimate.flags)


def test_failed_level_is_named_in_the_error():
    accuracy = ExtrapolationConfig(spacings=(0.04, 0.02), box=12.0, box_check=False)
    with pytest.raises(ConvergenceError) as info:
        radial_pekar.compute_cp(accuracy, SCFConfig(max_iter=1))
    assert info.value.level in {(0.04, 12.0), (0.02, 12.0)}
    assert "spacing=" in str(info.value)


def test_threaded_levels_match_the_serial_run():
    serial = radial_pekar.compute_cp(ExtrapolationConfig(spacings=(0.08, 0.04), box=10.0, box_check=False))
    threaded = radial_pekar.compute_cp(ExtrapolationConfig(spacings=(0.08, 0.04), box=10.0, box_check=False, jobs=2))
    assert threaded.c_p == serial.c_p
    assert threaded.levels["energy"].tolist() == serial.levels["energy"].tolist()
