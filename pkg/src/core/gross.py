"""Scalar constants of the Gross transformation with ultraviolet cutoff kappa and infrared split K.

Every integrand is radial, so each 3D integral is 4 pi int k^2 f(k) dk. With lambda_0^2 = 2 sqrt(2) pi
the common prefactor 4 pi lambda_0^2 / (2 pi)^3 equals sqrt(2)/pi.
"""
import math

import numpy as np
import pandas as pd
from scipy.integrate import quad

from .constants import FOURIER_NORM, GROSS_COLUMNS, LAMBDA0, SQRT2, TAIL_RTOL
from .debug_logger import print_debug, print_debug2
from .exceptions import DomainError, ToleranceError
from .models import GrossConstants

RADIAL_PREFACTOR = SQRT2 / math.pi
THRESHOLD_TOL = 1e-6


def beta(k_mag, alpha, K):
    """beta_K(k) = -sqrt(alpha) lambda_0 / ((2 pi)^(3/2) |k| (1 + k^2/2)) for |k| > K, else 0."""
    if not k_mag > 0:
        raise DomainError(f"k_mag must be positive, got {k_mag}")
    if k_mag <= K:
        return 0.0
    return -math.sqrt(alpha) * LAMBDA0 * FOURIER_NORM / (k_mag * (1.0 + 0.5 * k_mag**2))


def _radial(f, lo, hi):
    """int_lo^hi f(k) dk, split at a finite point when hi is infinite."""
    if hi <= lo:
        return 0.0
    pieces = [(lo, hi)] if math.isfinite(hi) else [(lo, max(lo, 10.0)), (max(lo, 10.0), math.inf)]
    total = 0.0
    for a, b in pieces:
        if b <= a:
            continue
        value, err = quad(f, a, b, epsabs=0.0, epsrel=TAIL_RTOL, limit=200)
        if err > 1e-8 * max(abs(value), 1e-300) and err > 1e-14:
            raise ToleranceError(f"quadrature on [{a}, {b}] did not converge: value {value}, error {err}")
        total += value
    return total


def c_squared(alpha, K):
    """C(K)^2 = int_{|k|>K} alpha lambda_0^2 / ((2 pi)^3 (1 + k^2/2)^2) dk."""
    return alpha * RADIAL_PREFACTOR * _radial(lambda k: k**2 / (1.0 + 0.5 * k**2) ** 2, K, math.inf)


def c2(alpha, K):
    return alpha * RADIAL_PREFACTOR * _radial(lambda k: 1.0, 0.0, K)


def c3(alpha, K, kappa=math.inf):
    """int_{K<|k|<=kappa} {beta^2 + 2 sqrt(alpha) lambda_0 / ((2 pi)^(3/2) |k|) |beta|} dk."""
    integrand = lambda k: 1.0 / (1.0 + 0.5 * k**2) ** 2 + 2.0 / (1.0 + 0.5 * k**2)
    return alpha * RADIAL_PREFACTOR * _radial(integrand, K, kappa)


def e_cut(alpha, K, kappa=math.inf):
    """E_{kappa,K} = -2 alpha lambda_0^2 int_{K<=|k|<=kappa} dk / ((2 pi)^3 (1 + k^2/2) k^2)."""
    return -2.0 * alpha * RADIAL_PREFACTOR * _radial(lambda k: 1.0 / (1.0 + 0.5 * k**2), K, kappa)


# Closed forms, used as cross-checks
def e_cut_closed(alpha, K, kappa=math.inf):
    upper = math.pi / 2 if math.isinf(kappa) else math.atan(kappa / SQRT2)
    return -(4.0 * alpha / math.pi) * (upper - math.atan(K / SQRT2))


def c_squared_closed(alpha, K):
    t = K / SQRT2
    return alpha * (2.0 / math.pi) * (math.pi / 2 - math.atan(t) + t / (1.0 + t**2))


def constants(alpha, K, kappa=math.inf):
    """Quadrature values of C(K), C2(K), C3(K) and E_{kappa,K} with the admissibility flag.

    kappa <= K is an empty momentum shell: E_cut = 0 and C3 is 0, flagged as empty_domain.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if not K >= 0:
        raise DomainError(f"K must be nonnegative, got {K}")
    empty = not kappa > K
    C_K = math.sqrt(c_squared(alpha, K))
    C2_K = c2(alpha, K)
    C3_K = 0.0 if empty else c3(alpha, K, kappa)
    E = 0.0 if empty else e_cut(alpha, K, kappa)
    if math.isinf(kappa):
        closed = e_cut_closed(alpha, K)
        if abs(E - closed) > 1e-8 * max(abs(closed), 1e-300):
            raise ToleranceError(f"E_cut quadrature {E} disagrees with closed form {closed}")
    admissible = 4.0 * C_K**2 + 4.0 * C_K < 1.0
    print_debug2(f"alpha={alpha} K={K} kappa={kappa}: C={C_K:.6g} C2={C2_K:.6g} C3={C3_K:.6g} E={E:.6g}")
    return GrossConstants(alpha=alpha, K=K, kappa=kappa, C_K=C_K, C2_K=C2_K, C3_K=C3_K,
                          E_cut=E, admissible=admissible, empty_domain=empty)


def _condition(alpha, K):
    C = math.sqrt(c_squared_closed(alpha, K))
    return 4.0 * C**2 + 4.0 * C - 1.0


def admissible_threshold(alpha):
    """Smallest K (to within 1e-6) with 4 C(K)^2 + 4 C(K) < 1."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if _condition(alpha, 0.0) < 0:
        return 0.0
    lo, hi = 0.0, 1.0
    while _condition(alpha, hi) >= 0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > THRESHOLD_TOL:
        mid = 0.5 * (lo + hi)
        if _condition(alpha, mid) < 0:
            hi = mid
        else:
            lo = mid
    # re-check with the quadrature value of C
    C = math.sqrt(c_squared(alpha, hi))
    if not 4.0 * C**2 + 4.0 * C < 1.0:
        raise ToleranceError(f"admissibility fails at the bisected K*={hi} for alpha={alpha}")
    print_debug(f"alpha={alpha}: K* = {hi:.6f}")
    return hi


def uniform_bound_coefficients(alpha, K, kappa):
    """Coefficients of the kappa-uniform bound on B_{kappa,K} - B_{infinity,K}.

    Returns (form_coefficient, constant) = (4 (C(kappa) + 2 C(K) C(kappa)), 2 C3(kappa) + |E_inf,K - E_kappa,K|),
    where C(kappa) and C3(kappa) are C and C3 with the infrared split moved to kappa.
    """
    if not kappa > K:
        raise DomainError(f"kappa must exceed K, got kappa={kappa}, K={K}")
    C_K = math.sqrt(c_squared(alpha, K))
    C_kappa = 0.0 if math.isinf(kappa) else math.sqrt(c_squared(alpha, kappa))
    C3_kappa = 0.0 if math.isinf(kappa) else c3(alpha, kappa)
    gap = abs(e_cut(alpha, K) - e_cut(alpha, K, kappa))
    return 4.0 * (C_kappa + 2.0 * C_K * C_kappa), 2.0 * C3_kappa + gap


def constants_table(alpha_values, K_values, kappa_values=(math.inf,)):
    rows = []
    for alpha in alpha_values:
        for K in K_values:
            for kappa in kappa_values:
                rows.append(constants(alpha, K, kappa).to_dict())
    return pd.DataFrame(rows, columns=GROSS_COLUMNS)


if __name__ == "__main__":
    for a in (0.5, 1.0, 2.0, 4.0):
        print(a, admissible_threshold(a))
    print(constants_table([1.0], np.array([0.0, 1.0, 10.0])))
