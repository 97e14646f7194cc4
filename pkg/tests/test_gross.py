import math

import numpy as np
import pytest

from src.core import gross
from src.core.constants import GROSS_COLUMNS, LAMBDA0, LAMBDA0_SQ, SQRT2
from src.core.exceptions import DomainError


@pytest.mark.parametrize("K", [1.0, 5.0, 10.0])
@pytest.mark.parametrize("kappa", [math.inf, 20.0])
def test_cutoff_energy_matches_closed_form(K, kappa):
    numeric = gross.e_cut(1.0, K, kappa)
    assert numeric == pytest.approx(gross.e_cut_closed(1.0, K, kappa), rel=1e-8)
    assert numeric <= 0.0


@pytest.mark.parametrize("K", [0.0, 0.5, 3.0])
def test_c_squared_matches_closed_form(K):
    assert gross.c_squared(2.0, K) == pytest.approx(gross.c_squared_closed(2.0, K), rel=1e-9)


def test_c2_is_linear_in_K():
    assert gross.c2(1.5, 4.0) == pytest.approx(1.5 * SQRT2 * 4.0 / math.pi, rel=1e-12)
    assert gross.c2(1.0, 0.0) == 0.0


def test_beta_vanishes_inside_the_split_and_has_the_right_size():
    assert gross.beta(0.5, 1.0, 1.0) == 0.0
    k = 3.0
    expected = LAMBDA0_SQ * (2.0 * math.pi) ** -3 / (k**2 * (1.0 + 0.5 * k**2) ** 2)
    assert gross.beta(k, 1.0, 1.0) ** 2 == pytest.approx(expected, rel=1e-12)
    assert gross.beta(k, 1.0, 1.0) < 0
    with pytest.raises(DomainError):
        gross.beta(0.0, 1.0, 1.0)


def test_constants_are_monotone_in_K():
    values = [gross.constants(1.0, K).C_K for K in (0.0, 1.0, 2.0, 5.0, 10.0)]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_empty_shell_is_flagged():
    c = gross.constants(1.0, 5.0, 2.0)
    assert c.empty_domain
    assert c.E_cut == 0.0
    assert c.C3_K == 0.0


def test_admissible_flag_follows_the_inequality():
    for K in (0.0, 2.0, 10.0, 40.0):
        c = gross.constants(1.0, K)
        assert c.admissible == (4.0 * c.C_K**2 + 4.0 * c.C_K < 1.0)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 4.0])
def test_admissible_threshold_is_tight(alpha):
    K_star = gross.admissible_threshold(alpha)
    C = math.sqrt(gross.c_squared(alpha, K_star))
    assert 4.0 * C**2 + 4.0 * C < 1.0
    C_below = math.sqrt(gross.c_squared_closed(alpha, K_star - 2e-6))
    assert 4.0 * C_below**2 + 4.0 * C_below >= 1.0 - 1e-9


def test_small_coupling_is_admissible_without_a_split():
    assert gross.admissible_threshold(0.01) == 0.0


def test_uniform_bound_vanishes_without_a_cutoff():
    assert gross.uniform_bound_coefficients(1.0, 2.0, math.inf) == (0.0, 0.0)
    form, constant = gross.uniform_bound_coefficients(1.0, 2.0, 50.0)
    assert form > 0 and constant > 0
    with pytest.raises(DomainError):
        gross.uniform_bound_coefficients(1.0, 2.0, 1.0)


def test_constants_table_layout():
    frame = gross.constants_table([1.0, 2.0], np.array([1.0, 10.0]), [math.inf, 30.0])
    assert list(frame.columns) == GROSS_COLUMNS
    assert len(frame) == 8
    assert (frame["E_cut"] <= 0).all()


def test_rejects_nonpositive_alpha():
    with pytest.raises(DomainError):
        gross.constants(0.0, 1.0)
    with pytest.raises(DomainError):
        gross.admissible_threshold(-1.0)


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_threshold_condition_fails_just_below(alpha):
    K_star = gross.admissible_threshold(alpha)
    C = math.sqrt(gross.c_squared(alpha, 0.99 * K_star))
    assert 4.0 * C**2 + 4.0 * C >= 1.0


def test_constants_scale_with_alpha():
    one = gross.constants(1.0, 3.0, 40.0)
    four = gross.constants(4.0, 3.0, 40.0)
    assert four.C_K == pytest.approx(2.0 * one.C_K, rel=1e-10)
    assert four.C2_K == pytest.approx(4.0 * one.C2_K, rel=1e-10)
    assert four.C3_K == pytest.approx(4.0 * one.C3_K, rel=1e-10)
    assert four.E_cut == pytest.approx(4.0 * one.E_cut, rel=1e-10)


def test_beta_scales_with_the_square_root_of_alpha():
    for k in (1.5, 3.0, 12.0):
        assert gross.beta(k, 4.0, 1.0) == pytest.approx(2.0 * gross.beta(k, 1.0, 1.0), rel=1e-14)
        assert gross.beta(k, 0.25, 1.0) == pytest.approx(0.5 * gross.beta(k, 1.0, 1.0), rel=1e-14)


def test_beta_decays_like_the_inverse_cube():
    k = 100.0
    asymptote = -2.0 * LAMBDA0 * (2.0 * math.pi) ** -1.5 / k**3
    assert gross.beta(k, 1.0, 1.0) / asymptote == pytest.approx(5000.0 / 5001.0, rel=1e-12)


def test_threshold_grows_with_alpha():
    thresholds = [gross.admissible_threshold(a) for a in (0.5, 1.0, 2.0, 4.0)]
    assert all(b >= a for a, b in zip(thresholds, thresholds[1:]))
    assert thresholds[-1] > thresholds[0]
    assert gross.admissible_threshold(1e-4) == 0.0


def test_cutoff_energy_deepens_with_kappa():
    values = [gross.e_cut(1.0, 1.0, kappa) for kappa in (2.0, 4.0, 8.0, 16.0, math.inf)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(gross.e_cut_closed(1.0, 1.0), rel=1e-8)
