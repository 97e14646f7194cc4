import math

import numpy as np
import pytest

from src.core import coherent_bounds, ecg_pt, radial_pekar
from src.core.constants import FOURIER_NORM, SQRT2
from src.core.exceptions import DomainError, NormalizationError
from src.core.models import RadialFunction

KAPPA_LADDER = [2.0, 4.0, 8.0, 16.0, math.inf]


@pytest.fixture(scope="module")
def trial_states(grid, pekar_solution):
    gaussians = [radial_pekar.gaussian_trial(grid, width) for width in (0.8, 1.0, 1.3, 1.8)]
    return gaussians + [pekar_solution.phi]


def test_gaussian_form_factor_is_gaussian(gaussian_phi):
    k = np.linspace(0.0, 6.0, 25)
    ff = coherent_bounds.form_factor(gaussian_phi.density(), k)
    np.testing.assert_allclose(ff.values, FOURIER_NORM * np.exp(-k**2 / 4.0), atol=1e-12)
    assert ff.source_mass == pytest.approx(1.0, abs=1e-12)


def test_form_factor_rejects_negative_momenta(gaussian_phi):
    with pytest.raises(DomainError):
        coherent_bounds.form_factor(gaussian_phi.density(), [-0.1, 1.0])


@pytest.mark.filterwarnings("error::scipy.integrate.IntegrationWarning")
def test_uncut_bound_is_the_pekar_energy(trial_states):
    for phi in trial_states:
        bound = coherent_bounds.polaron_coherent_bound(phi, 1.0)
        assert bound.total == pytest.approx(radial_pekar.pekar_energy(phi).total, abs=1e-8)


@pytest.mark.parametrize("kappa", [0.3, 1.234, 2.5, 7.0])
def test_cutoff_field_matches_the_gaussian_closed_form(gaussian_phi, kappa):
    field = coherent_bounds.FieldIntegral(gaussian_phi.density())
    # 4 pi int_0^kappa (2 pi)^-3 exp(-k^2 / 2) dk
    expected = 4.0 * math.pi * (2.0 * math.pi) ** -3 * math.sqrt(math.pi / 2.0) * math.erf(kappa / SQRT2)
    assert field(kappa) == pytest.approx(expected, rel=1e-9)
    assert field(math.inf) >= field(kappa)


def test_bound_decreases_along_the_cutoff_ladder(gaussian_phi):
    field = coherent_bounds.FieldIntegral(gaussian_phi.density())
    totals = [coherent_bounds.polaron_coherent_bound(gaussian_phi, 1.0, kappa, field).total
              for kappa in KAPPA_LADDER]
    assert all(b <= a + 1e-14 for a, b in zip(totals, totals[1:]))
    assert totals[0] > totals[-1]


def test_zero_cutoff_leaves_only_kinetic_energy(gaussian_phi):
    bound = coherent_bounds.polaron_coherent_bound(gaussian_phi, 2.0, 0.0)
    assert bound.field_gain == 0.0
    assert bound.total == pytest.approx(radial_pekar.kinetic_energy(gaussian_phi), abs=1e-15)


def test_uncut_rows_follow_the_alpha_squared_law(gaussian_phi):
    frame = coherent_bounds.bound_table([1.0, 4.0, 16.0], [math.inf], gaussian_phi)
    ratios = frame["total_over_alpha_sq"].to_numpy()
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-10)
    breakdown = radial_pekar.pekar_energy(gaussian_phi)
    _, expected = radial_pekar.optimal_rescale(breakdown.kinetic, breakdown.attraction)
    assert ratios[0] == pytest.approx(expected, abs=1e-8)


def test_scale_optimized_cutoff_rows(gaussian_phi):
    frame = coherent_bounds.bound_table([1.0], KAPPA_LADDER, gaussian_phi)
    totals = frame["total"].to_numpy()
    assert all(b <= a + 1e-10 for a, b in zip(totals, totals[1:]))
    plain = coherent_bounds.polaron_coherent_bound(gaussian_phi, 1.0, 4.0).total
    assert totals[1] <= plain + 1e-12
    assert (frame["scale"] > 0).all()


def test_product_bound_is_the_product_functional(gaussian_phi, unit_product_ansatz):
    for U0 in (0.0, 1.0, 2.0):
        bound = coherent_bounds.bipolaron_coherent_bound(gaussian_phi, 1.0, U0)
        closed = ecg_pt.pt_energy(unit_product_ansatz, U0).total
        assert bound.total == pytest.approx(closed, abs=1e-6)


def test_product_binding_estimate_vanishes_at_sqrt2(gaussian_phi):
    frame = coherent_bounds.binding_bound_table([1.0, 3.0], [math.inf], gaussian_phi, SQRT2)
    np.testing.assert_allclose(frame["binding_estimate"].to_numpy(), 0.0, atol=1e-8)
    assert (frame["kind"] == "difference of upper bounds").all()


def test_strong_repulsion_gives_the_trivial_bound(gaussian_phi):
    frame = coherent_bounds.bound_table([1.0], [math.inf], gaussian_phi, U0=10.0)
    assert frame["total"].iloc[0] == 0.0
    assert frame["scale"].iloc[0] == 0.0


def test_inputs_are_validated(grid, gaussian_phi):
    with pytest.raises(DomainError):
        coherent_bounds.polaron_coherent_bound(gaussian_phi, 0.0)
    with pytest.raises(DomainError):
        coherent_bounds.polaron_coherent_bound(gaussian_phi, 1.0, -1.0)
    with pytest.raises(DomainError):
        coherent_bounds.bipolaron_coherent_bound(gaussian_phi, 1.0, -0.5)
    with pytest.raises(DomainError):
        coherent_bounds.bound_table([], [math.inf], gaussian_phi)
    with pytest.raises(NormalizationError):
        coherent_bounds.polaron_coherent_bound(RadialFunction(grid, 2.0 * gaussian_phi.values), 1.0)
