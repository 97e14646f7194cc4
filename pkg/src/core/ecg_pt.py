"""Pekar-Tomasevich upper bounds from symmetrized correlated Gaussians.

A term is the six-dimensional Gaussian

    g(x1, x2) = exp(-a |x1 - s e|^2 - a2 |x2 + s e|^2 - b |x1 - x2|^2)

with e a fixed unit vector, always used as g(x1, x2) + g(x2, x1). Writing x = (x1, x2) it is
exp(-(x - m)^T (A (x) 1_3) (x - m)) with A = [[a + b, -b], [-b, a2 + b]] and m = (s, -s) e,
so products of terms, their overlaps, gradients and every Coulomb element have closed forms.
Coulomb elements reduce to the expectation of 1/|r| over an isotropic Gaussian r, which is
erf(sqrt(p) |mu|) / |mu| with p = 1 / (2 sigma^2).
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import minimize
from scipy.special import erf

from .constants import (DEFAULT_BASIS_SIZE, DEFAULT_RESTARTS, DEFAULT_SEED, DISSOCIATED_SEPARATION,
                        GRAM_CONDITION_TOL, PRUNE_OVERLAP, SQRT2, UC_BISECTION_TOL)
from .debug_logger import print_debug, print_debug2, warn
from .exceptions import (ConditioningError, ConfigError, DomainError, ExtrapolationError,
                         NormalizationError, OptimizerError)
from .models import BindingCurve, BindingPoint, PTBreakdown, UcEstimate
from .radial_pekar import _check_normalized, density_coulomb, kinetic_energy

NORMALIZED_TOL = 1e-10
PENALTY = 1e3


# ---------------------------------------------------------------------------
# Trial family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelatedGaussianTerm:
    a: float
    b: float = 0.0
    s: float = 0.0
    a2: float = None

    def __post_init__(self):
        if self.a2 is None:
            object.__setattr__(self, "a2", self.a)
        values = (self.a, self.a2, self.b, self.s)
        if not all(math.isfinite(v) for v in values):
            raise DomainError(f"term parameters must be finite: {values}")
        if not (self.a > 0 and self.a2 > 0 and self.a + self.b > 0
                and self.a * self.a2 + self.b * (self.a + self.a2) > 0):
            raise DomainError(f"quadratic form of term {self} is not positive definite")

    @property
    def matrix(self):
        return np.array([[self.a + self.b, -self.b], [-self.b, self.a2 + self.b]])

    @property
    def center(self):
        return np.array([self.s, -self.s])

    def primitives(self):
        """(A, m) of g(x1, x2) and g(x2, x1) in a canonical order, so exchange is bitwise neutral."""
        A, m = self.matrix, self.center
        swap = np.array([[0, 1], [1, 0]])
        first = (A, m)
        second = (swap @ A @ swap, swap @ m)
        key = lambda p: (p[0][0, 0], p[0][1, 1], p[0][0, 1], p[1][0], p[1][1])
        return tuple(sorted((first, second), key=key))

    def swapped(self):
        return CorrelatedGaussianTerm(a=self.a2, b=self.b, s=-self.s, a2=self.a)

    def dilated(self, lam):
        """phi(lam x): exponents times lam^2, centers divided by lam."""
        return CorrelatedGaussianTerm(a=self.a * lam**2, b=self.b * lam**2, s=self.s / lam,
                                      a2=self.a2 * lam**2)

    def to_dict(self):
        return {"a": self.a, "a2": self.a2, "b": self.b, "s": self.s}


class Ansatz:
    def __init__(self, terms, coefficients, normalized=False):
        """Linear combination of symmetrized correlated Gaussian terms."""
        terms = list(terms)
        coefficients = np.asarray(coefficients, dtype=float)
        if len(terms) == 0:
            raise ConfigError("Ansatz needs at least one term")
        if coefficients.shape != (len(terms),):
            raise ConfigError(f"{len(terms)} terms but coefficients of shape {coefficients.shape}")
        self.terms = terms
        self.coefficients = coefficients
        self.normalized = normalized

    def __len__(self):
        return len(self.terms)

    def integrals(self):
        return AnsatzIntegrals(self.terms)

    def normalize(self, integrals=None):
        integrals = integrals or self.integrals()
        norm = float(self.coefficients @ integrals.overlap @ self.coefficients)
        if not norm > 0:
            raise NormalizationError(abs(norm - 1.0), "Ansatz has non-positive norm")
        return Ansatz(self.terms, self.coefficients / math.sqrt(norm), normalized=True)

    def exchanged(self):
        return Ansatz([t.swapped() for t in self.terms], self.coefficients, self.normalized)

    def dilated(self, lam):
        # the 6D L2 norm picks up lam^-6 from the overlaps, compensated by lam^3 on coefficients
        return Ansatz([t.dilated(lam) for t in self.terms], self.coefficients * lam**3, self.normalized)

    def padded(self, term):
        """Same state with an extra term at zero coefficient."""
        return Ansatz(self.terms + [term], np.append(self.coefficients, 0.0), self.normalized)

    def to_dict(self):
        return {"terms": [dict(t.to_dict(), coefficient=float(c)) for t, c in zip(self.terms, self.coefficients)],
                "normalized": self.normalized}

    def to_text(self):
        lines = ["# a\ta2\tb\ts\tcoefficient"]
        for t, c in zip(self.terms, self.coefficients):
            lines.append(f"{t.a!r}\t{t.a2!r}\t{t.b!r}\t{t.s!r}\t{float(c)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        terms, coefficients = [], []
        for line in text.splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            a, a2, b, s, c = (float(x) for x in line.split("\t"))
            terms.append(CorrelatedGaussianTerm(a=a, b=b, s=s, a2=a2))
            coefficients.append(c)
        return cls(terms, coefficients).normalize()

    def __repr__(self):
        return f"Ansatz({len(self.terms)} terms, normalized={self.normalized})"


# ---------------------------------------------------------------------------
# Closed-form integrals
# ---------------------------------------------------------------------------

def inverse_distance_mean(p, mu):
    """E[1/|r|] for an isotropic 3D Gaussian r with mean of length |mu| and p = 1/(2 sigma^2)."""
    p = np.asarray(p, dtype=float)
    mu = np.abs(np.asarray(mu, dtype=float))
    small = mu * np.sqrt(p) < 1e-6
    safe = np.where(small, 1.0, mu)
    far = erf(np.sqrt(p) * safe) / safe
    near = 2.0 * np.sqrt(p / math.pi) * (1.0 - p * mu**2 / 3.0)
    return np.where(small, near, far)


def _inv2(A):
    det = A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
    inv = np.empty_like(A)
    inv[..., 0, 0] = A[..., 1, 1] / det
    inv[..., 1, 1] = A[..., 0, 0] / det
    inv[..., 0, 1] = -A[..., 0, 1] / det
    inv[..., 1, 0] = -A[..., 1, 0] / det
    return inv, det


class AnsatzIntegrals:
    def __init__(self, terms):
        """Overlap, kinetic and repulsion matrices and the attraction tensor of a term list."""
        self.terms = list(terms)
        n = len(self.terms)
        self.size = n
        prims = [p for t in self.terms for p in t.primitives()]
        A = np.array([p[0] for p in prims], dtype=float)
        m = np.array([p[1] for p in prims], dtype=float)

        Ap, Aq = A[:, None], A[None, :]
        mp, mq = m[:, None], m[None, :]
        Asum = Ap + Aq
        inv, det = _inv2(Asum)
        v = np.einsum("...ij,...j->...i", Ap, mp) + np.einsum("...ij,...j->...i", Aq, mq)
        mc = np.einsum("...ij,...j->...i", inv, v)
        log_k = -(np.einsum("...i,...ij,...j->...", mp, Ap, mp)
                  + np.einsum("...i,...ij,...j->...", mq, Aq, mq)
                  - np.einsum("...i,...ij,...j->...", mc, Asum, mc))
        S = np.exp(log_k) * (math.pi**2 / det) ** 1.5

        ApAq = np.einsum("...ij,...jk->...ik", Ap, Aq)
        trace = np.einsum("...ij,...ji->...", ApAq, inv)
        shift = np.einsum("...i,...ij,...j->...", mc - mp, ApAq, mc - mq)
        grad = 4.0 * S * (1.5 * trace + shift)

        wAw = inv[..., 0, 0] + inv[..., 1, 1] - 2.0 * inv[..., 0, 1]
        rep = S * inverse_distance_mean(1.0 / wAw, mc[..., 0] - mc[..., 1])

        fold = lambda M: M.reshape(n, 2, n, 2).sum(axis=(1, 3))
        self.overlap = fold(S)
        self.kinetic = 0.5 * fold(grad)
        self.repulsion = fold(rep)

        # one-electron marginals of every primitive product: weight S, variance inv_aa/2, mean mc_a
        weight = np.stack([S, S], axis=-1).reshape(-1)
        var = np.stack([0.5 * inv[..., 0, 0], 0.5 * inv[..., 1, 1]], axis=-1).reshape(-1)
        mean = mc.reshape(-1)
        p = 1.0 / (2.0 * (var[:, None] + var[None, :]))
        D = weight[:, None] * weight[None, :] * inverse_distance_mean(p, mean[:, None] - mean[None, :])
        P = 2 * n
        D = D.reshape(P, P, 2, P, P, 2).sum(axis=(2, 5))
        self.coulomb = D.reshape(n, 2, n, 2, n, 2, n, 2).sum(axis=(1, 3, 5, 7))

    def check_conditioning(self, tol=GRAM_CONDITION_TOL):
        if not np.all(np.isfinite(self.overlap)):
            raise ConditioningError("Gram matrix has non-finite entries")
        d = np.sqrt(np.diag(self.overlap))
        Sn = self.overlap / np.outer(d, d)
        w = np.linalg.eigvalsh(Sn)
        if w[0] < tol * w[-1]:
            off = np.abs(Sn - np.eye(self.size))
            i, j = np.unravel_index(np.argmax(off), off.shape)
            raise ConditioningError(f"Gram matrix ill-conditioned (min/max eigenvalue {w[0] / w[-1]:.2e}); "
                                    f"terms {i} and {j} overlap {Sn[i, j]:.12f}", pair=(int(i), int(j)))

    def normalized_overlap(self):
        d = np.sqrt(np.diag(self.overlap))
        return self.overlap / np.outer(d, d)

    def norm_sq(self, c):
        return float(c @ self.overlap @ c)

    def contracted(self, c):
        """J(c)_ij = sum_kl J_ijkl c_k c_l."""
        return np.einsum("ijkl,k,l->ij", self.coulomb, c, c)

    def parts(self, c):
        """(kinetic, repulsion, attraction) for a normalized coefficient vector."""
        kinetic = float(c @ self.kinetic @ c)
        repulsion = float(c @ self.repulsion @ c)
        attraction = float(c @ self.contracted(c) @ c) / SQRT2
        return kinetic, repulsion, attraction

    def energy(self, c, U):
        k, r, w = self.parts(c)
        return k + U * r - w


def pt_energy(ansatz, U):
    """Breakdown of the Pekar-Tomasevich functional for a normalized ansatz.

    Raises:
        DomainError: U < 0.
        ConditioningError: Gram matrix of the symmetrized terms is ill-conditioned.
        NormalizationError: <phi, phi> differs from 1 by more than 1e-10.
    """
    if not U >= 0:
        raise DomainError(f"U must be nonnegative, got {U}")
    ints = ansatz.integrals()
    ints.check_conditioning()
    c = ansatz.coefficients
    deviation = abs(ints.norm_sq(c) - 1.0)
    if deviation > NORMALIZED_TOL:
        raise NormalizationError(deviation)
    kinetic, repulsion, attraction = ints.parts(c)
    return PTBreakdown.from_terms(kinetic, repulsion, attraction, U)


def product_baseline(psi, U):
    """E_bp^U(psi (x) psi) = 2 T1 + (U - 2 sqrt(2)) D from radial quadratures."""
    _check_normalized(psi)
    t1 = kinetic_energy(psi)
    d = density_coulomb(psi.density())
    return 2.0 * t1 + (U - 2.0 * SQRT2) * d


# ---------------------------------------------------------------------------
# Coefficient optimization at fixed exponents
# ---------------------------------------------------------------------------

def _normalize_c(ints, c):
    return c / math.sqrt(ints.norm_sq(c))


def optimize_coefficients(ints, U, start=None, max_iter=300, tol=1e-14):
    """Minimize the quadratic-plus-quartic energy on the unit overlap sphere.

    Starts from the best generalized eigenvector of the quadratic part (and `start` if given),
    then takes damped steps toward the lowest eigenvector of the linearized operator
    H - sqrt(2) J(c), falling back to projected gradient steps; every accepted step lowers E.
    """
    H = ints.kinetic + U * ints.repulsion
    _, vecs = eigh(H, ints.overlap)
    candidates = [vecs[:, k] for k in range(ints.size)]
    if start is not None and ints.norm_sq(start) > 0:
        candidates.append(_normalize_c(ints, np.asarray(start, dtype=float)))
    energies = [ints.energy(c, U) for c in candidates]
    best = int(np.argmin(energies))
    c, e = candidates[best], energies[best]

    for _ in range(max_iter):
        F = H - SQRT2 * ints.contracted(c)
        _, vecs = eigh(F, ints.overlap)
        target = vecs[:, 0]
        if target @ ints.overlap @ c < 0:
            target = -target
        accepted = False
        for eta in (1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125):
            trial = c + eta * (target - c)
            if ints.norm_sq(trial) <= 0:
                continue
            trial = _normalize_c(ints, trial)
            e_trial = ints.energy(trial, U)
            if e_trial < e:
                accepted = True
                break
        if not accepted:
            grad = 2.0 * F @ c
            direction = -np.linalg.solve(ints.overlap, grad)
            direction -= (c @ ints.overlap @ direction) * c
            for eta in (1.0, 0.1, 0.01, 1e-3, 1e-4):
                trial = _normalize_c(ints, c + eta * direction)
                e_trial = ints.energy(trial, U)
                if e_trial < e:
                    accepted = True
                    break
        if not accepted:
            break
        improvement = e - e_trial
        c, e = trial, e_trial
        if improvement < tol * max(1.0, abs(e)):
            break
    return c, e


# ---------------------------------------------------------------------------
# Nonlinear parameters
# ---------------------------------------------------------------------------

@dataclass
class _Layout:
    tie_a2: bool = False
    freeze_b: bool = False
    freeze_s: bool = False

    @property
    def width(self):
        return 1 + (not self.tie_a2) + (not self.freeze_b) + (not self.freeze_s)

    def encode(self, terms):
        out = []
        for t in terms:
            out.append(math.log(t.a))
            if not self.tie_a2:
                out.append(math.log(t.a2))
            if not self.freeze_b:
                out.append(math.log(max(t.b, 1e-12)))
            if not self.freeze_s:
                out.append(abs(t.s))
        return np.array(out)

    def decode(self, theta):
        terms = []
        for chunk in np.asarray(theta).reshape(-1, self.width):
            it = iter(chunk)
            a = math.exp(next(it))
            a2 = a if self.tie_a2 else math.exp(next(it))
            b = 0.0 if self.freeze_b else math.exp(next(it))
            s = 0.0 if self.freeze_s else abs(next(it))
            terms.append(CorrelatedGaussianTerm(a=a, b=b, s=s, a2=a2))
        return terms


def _cfg(config, name, default):
    return getattr(config, name, default) if config is not None else default


class _Objective:
    def __init__(self, U, layout):
        self.U = U
        self.layout = layout
        self.start = None
        self.best = (math.inf, None, None)
        self.evaluations = 0

    def evaluate_terms(self, terms, start=None):
        try:
            ints = AnsatzIntegrals(terms)
            if not (np.all(np.isfinite(ints.overlap)) and np.all(np.isfinite(ints.kinetic))
                    and np.all(np.isfinite(ints.repulsion)) and np.all(np.isfinite(ints.coulomb))):
                return math.inf, None, None
            ints.check_conditioning()
            c, e = optimize_coefficients(ints, self.U, start=start if start is not None else self.start)
        except (ConditioningError, DomainError, FloatingPointError, OverflowError, np.linalg.LinAlgError):
            return math.inf, None, None
        if not math.isfinite(e):
            return math.inf, None, None
        return e, c, ints

    def __call__(self, theta):
        self.evaluations += 1
        try:
            terms = self.layout.decode(theta)
        except (DomainError, OverflowError):
            return PENALTY
        e, c, _ = self.evaluate_terms(terms)
        if not math.isfinite(e):
            return PENALTY
        if e < self.best[0]:
            self.best = (e, terms, c)
            self.start = c
        return e


def _random_term(rng, layout, config, index, count):
    """Tempered geometric initialization of one term."""
    a_min = _cfg(config, "a_min", 0.01)
    a_max = _cfg(config, "a_max", 2.0)
    temperature = _cfg(config, "temperature", 0.5)
    frac = (index + 0.5) / max(count, 1)
    a = a_min * (a_max / a_min) ** frac * math.exp(temperature * rng.standard_normal())
    a2 = a if layout.tie_a2 else a * math.exp(temperature * rng.standard_normal())
    b = 0.0 if layout.freeze_b else a * abs(rng.standard_normal())
    s = 0.0
    if not layout.freeze_s and rng.random() < _cfg(config, "dissociated_fraction", 0.3):
        s = rng.uniform(0.0, _cfg(config, "s_max", 6.0))
    return CorrelatedGaussianTerm(a=a, b=b, s=s, a2=a2)


def _prune(terms, c):
    """Drop terms nearly identical to an earlier one (normalized overlap above PRUNE_OVERLAP)."""
    ints = AnsatzIntegrals(terms)
    Sn = ints.normalized_overlap()
    keep = []
    for i in range(len(terms)):
        if all(abs(Sn[i, j]) <= PRUNE_OVERLAP for j in keep):
            keep.append(i)
    return [terms[i] for i in keep], (c[keep] if c is not None else None), len(terms) - len(keep)


def rescale(ansatz, U):
    """Exact dilation sweep: E(lam) = lam^2 K + lam (U C - W) is minimized at lam = (W - U C)/(2K)."""
    br = pt_energy(ansatz, U)
    linear = br.attraction - U * br.repulsion
    if linear <= 0:
        return ansatz, br, 1.0
    lam = linear / (2.0 * br.kinetic)
    scaled = ansatz.dilated(lam).normalize()
    return scaled, pt_energy(scaled, U), lam


def _nelder_mead(objective, theta, maxfev):
    if maxfev <= 0 or theta.size == 0:
        return
    minimize(objective, theta, method="Nelder-Mead",
             options={"maxfev": int(maxfev), "xatol": 1e-7, "fatol": 1e-13, "adaptive": theta.size > 6})


def _grow(objective, rng, config, layout, terms, c, size):
    candidates = _cfg(config, "candidates", 12)
    maxfev_term = _cfg(config, "maxfev_term", 150)
    while len(terms) < size:
        index = len(terms)
        base = objective.evaluate_terms(terms, start=c)[0] if terms else math.inf
        best = (base, None, None)
        for _ in range(candidates):
            cand = _random_term(rng, layout, config, index, size)
            start = np.append(c, 0.0) if c is not None else None
            e, cc, _ = objective.evaluate_terms(terms + [cand], start=start)
            if e < best[0]:
                best = (e, cand, cc)
        if best[1] is None:
            # no candidate improved on the embedded point; keep the geometric guess anyway
            cand = _random_term(rng, layout, config, index, size)
            e, cc, _ = objective.evaluate_terms(terms + [cand], start=np.append(c, 0.0) if c is not None else None)
            if not math.isfinite(e):
                break
            best = (e, cand, cc)
        terms = terms + [best[1]]
        c = best[2]
        # polish only the newest term
        fixed = layout.encode(terms[:-1])
        objective.start = c

        def local(theta_new, fixed=fixed):
            return objective(np.concatenate((fixed, theta_new)))

        _nelder_mead(local, layout.encode(terms[-1:]), maxfev_term)
        if objective.best[1] is not None and len(objective.best[1]) == len(terms):
            terms, c = list(objective.best[1]), objective.best[2]
        print_debug2(f"basis size {len(terms)}: E = {objective.best[0]:.10f}")
    return terms, c


def _finish(terms, c, U, pruned):
    terms, c, extra = _prune(terms, c)
    pruned += extra
    ints = AnsatzIntegrals(terms)
    c, _ = optimize_coefficients(ints, U, start=c)
    ansatz = Ansatz(terms, c).normalize(ints)
    ansatz, breakdown, lam = rescale(ansatz, U)
    status = "ok" if pruned == 0 else f"ok; pruned {pruned} term(s)"
    return ansatz, breakdown, status


def optimize_ansatz(U, config=None, warm_start=None, rng=None):
    """Upper bound on c_bp(U) from an optimized correlated-Gaussian ansatz.

    Args:
        U: Coulomb strength, U >= 0.
        config: OptimizerConfig-like object.
        warm_start: optional Ansatz to refine instead of starting from random terms.
        rng: optional numpy Generator (defaults to one seeded from config.seed).

    Returns:
        (Ansatz, PTBreakdown, status). The breakdown is recomputed from the returned ansatz.

    Raises:
        ConfigError: basis_size < 1 or restarts < 1.
        OptimizerError: every restart failed to produce a finite energy.
    """
    if not U >= 0:
        raise DomainError(f"U must be nonnegative, got {U}")
    basis_size = _cfg(config, "basis_size", DEFAULT_BASIS_SIZE)
    restarts = _cfg(config, "restarts", DEFAULT_RESTARTS)
    if basis_size < 1 or restarts < 1:
        raise ConfigError(f"basis_size and restarts must be >= 1, got {basis_size}, {restarts}")
    if rng is None:
        rng = np.random.default_rng(_cfg(config, "seed", DEFAULT_SEED))
    layout = _Layout(tie_a2=_cfg(config, "tie_a2", False), freeze_b=_cfg(config, "freeze_b", False),
                     freeze_s=_cfg(config, "freeze_s", False))
    maxfev = _cfg(config, "maxfev", 1500)

    best = (math.inf, None, None)
    pruned = 0
    runs = 1 if warm_start is not None else restarts
    for run in range(runs):
        objective = _Objective(U, layout)
        if warm_start is not None:
            terms = [replace(t) if layout.tie_a2 is False else replace(t, a2=t.a) for t in warm_start.terms]
            terms = [t if not layout.freeze_b else replace(t, b=0.0) for t in terms]
            terms = [t if not layout.freeze_s else replace(t, s=0.0) for t in terms]
            terms = [CorrelatedGaussianTerm(a=t.a, b=t.b, s=abs(t.s), a2=t.a2) for t in terms][:basis_size]
            terms, c0, extra = _prune(terms, None)
            pruned += extra
            e0, c, _ = objective.evaluate_terms(terms)
            if math.isfinite(e0):
                objective.best = (e0, terms, c)
                objective.start = c
            else:
                terms, c = [], None
            terms, c = _grow(objective, rng, config, layout, terms, c, basis_size)
            fev = _cfg(config, "maxfev_refine", 300)
        else:
            terms, c = _grow(objective, rng, config, layout, [], None, basis_size)
            fev = maxfev
        if not terms:
            continue
        objective.start = c
        _nelder_mead(objective, layout.encode(terms), fev)
        e, t_best, c_best = objective.best
        if t_best is None:
            e, t_best, c_best = objective.evaluate_terms(terms, start=c)[0], terms, c
        print_debug(f"U={U:.6f} run {run + 1}/{runs}: E={e:.10f} after {objective.evaluations} evaluations")
        if math.isfinite(e) and e < best[0]:
            best = (e, list(t_best), c_best)

    if best[1] is None:
        raise OptimizerError(f"all {runs} optimizer run(s) failed at U={U}", best_value=best[0])
    ansatz, breakdown, status = _finish(best[1], best[2], U, pruned)
    return ansatz, breakdown, status


def evaluate_at(ansatz, U):
    """Re-optimize coefficients of a fixed term set at U, then rescale."""
    ints = AnsatzIntegrals(ansatz.terms)
    ints.check_conditioning()
    c, _ = optimize_coefficients(ints, U, start=ansatz.coefficients)
    moved = Ansatz(ansatz.terms, c).normalize(ints)
    scaled, breakdown, _ = rescale(moved, U)
    return scaled, breakdown


# ---------------------------------------------------------------------------
# Binding curve and threshold
# ---------------------------------------------------------------------------

def _polish(ansatz, U, config, rng):
    try:
        return optimize_ansatz(U, config, warm_start=ansatz, rng=rng)
    except (OptimizerError, ConditioningError, np.linalg.LinAlgError) as e:
        warn(f"polish at U={U} failed: {e}")
        scaled, br = evaluate_at(ansatz, U)
        return scaled, br, "ok; polish failed"


def dissociated_seed(separation=DISSOCIATED_SEPARATION, a=0.5):
    """Two unit Gaussians a distance 2 separation apart: the far end of the dissociated family.

    After rescale its energy is 2 x (single-Gaussian Pekar value) up to (sqrt(2) - U) / (2 separation)
    corrections from cross attraction and Coulomb repulsion.
    """
    return Ansatz([CorrelatedGaussianTerm(a=a, s=separation)], [1.0]).normalize()


def _seed_dissociated(U_values, results, config, rng):
    """Offer the dissociated family at every U and a fresh search at the largest one.

    Warm starts only move locally, so without this the sweep can stay on the bound-pair branch
    past the point where two separate polarons are cheaper.
    """
    seed = dissociated_seed()
    for i, U in enumerate(U_values):
        try:
            ansatz, br = evaluate_at(seed, U)
        except (ConditioningError, np.linalg.LinAlgError) as e:
            warn(f"dissociated seed failed at U={U}: {e}")
            continue
        if results[i][1] is None or br.total < results[i][1].total:
            print_debug2(f"U={U:.6f}: dissociated seed {br.total:.10f} replaces the warm start")
            results[i] = (ansatz, br, "ok; dissociated seed")
    if len(U_values) > 1 and not _cfg(config, "fresh_each_point", False):
        U = U_values[-1]
        try:
            anchor = optimize_ansatz(U, config, rng=rng)
        except (OptimizerError, ConditioningError, np.linalg.LinAlgError) as e:
            warn(f"anchor search at U={U} failed: {e}")
            return
        if results[-1][1] is None or anchor[1].total < results[-1][1].total:
            results[-1] = (anchor[0], anchor[1], anchor[2] + "; anchor")


def binding_curve(U_values, c_p, config=None):
    """Upper bounds on c_bp(U) along increasing U with warm starts in both sweep directions.

    Between the sweeps every point is offered the dissociated seed and the largest U gets a
    fresh search, so the two-polaron plateau is carried leftward by the backward sweep.
    The reported c_bp_upper sequence is made nondecreasing by re-evaluating the right
    neighbour's ansatz at each U (each replacement is flagged as enveloped).
    """
    U_values = [float(u) for u in U_values]
    if not U_values:
        raise ConfigError("U_values must be nonempty")
    if any(u < 0 for u in U_values):
        raise ConfigError(f"U_values must be nonnegative, got {U_values}")
    if any(b <= a for a, b in zip(U_values, U_values[1:])):
        raise ConfigError(f"U_values must be strictly increasing, got {U_values}")
    rng = np.random.default_rng(_cfg(config, "seed", DEFAULT_SEED))
    basis_size = _cfg(config, "basis_size", DEFAULT_BASIS_SIZE)

    results = [None] * len(U_values)
    previous = None
    for i, U in enumerate(U_values):
        try:
            if previous is None:
                ansatz, br, status = optimize_ansatz(U, config, rng=rng)
            else:
                ansatz, br, status = _polish(previous, U, config, rng)
                fresh = optimize_ansatz(U, config, rng=rng) if _cfg(config, "fresh_each_point", False) else None
                if fresh is not None and fresh[1].total < br.total:
                    ansatz, br, status = fresh
            results[i] = (ansatz, br, status)
            previous = ansatz
        except (OptimizerError, ConditioningError, np.linalg.LinAlgError) as e:
            warn(f"optimizer failed at U={U}: {e}")
            results[i] = (None, None, f"failed: {e}")

    _seed_dissociated(U_values, results, config, rng)

    # backward sweep
    for i in range(len(U_values) - 2, -1, -1):
        right = results[i + 1][0]
        if right is None:
            continue
        try:
            ansatz, br, status = _polish(right, U_values[i], config, rng)
        except (OptimizerError, ConditioningError, np.linalg.LinAlgError):
            continue
        if results[i][1] is None or br.total < results[i][1].total:
            results[i] = (ansatz, br, status + "; from right neighbour")

    points = []
    for U, (ansatz, br, status) in zip(U_values, results):
        value = br.total if br is not None else float("nan")
        points.append(BindingPoint(U=U, c_bp_upper=value, binding=2.0 * c_p - value,
                                   basis_size=len(ansatz) if ansatz is not None else basis_size,
                                   status=status, raw_c_bp_upper=value, ansatz=ansatz))
    _monotone_envelope(points, c_p)
    print_debug(f"binding curve over {len(points)} points, c_p={c_p:.10f}")
    return BindingCurve(points=points, c_p_used=c_p)


def _monotone_envelope(points, c_p):
    for i in range(len(points) - 2, -1, -1):
        right = points[i + 1]
        if right.ansatz is None:
            continue
        if math.isfinite(points[i].c_bp_upper) and points[i].c_bp_upper <= right.c_bp_upper:
            continue
        try:
            ansatz, br = evaluate_at(right.ansatz, points[i].U)
        except (ConditioningError, np.linalg.LinAlgError) as e:
            warn(f"envelope at U={points[i].U} skipped: {e}")
            continue
        if not math.isfinite(points[i].c_bp_upper) or br.total < points[i].c_bp_upper:
            p = points[i]
            p.ansatz, p.c_bp_upper, p.binding = ansatz, br.total, 2.0 * c_p - br.total
            p.basis_size = len(ansatz)
            p.enveloped = True
            p.status = p.status + "; enveloped" if not p.status.startswith("failed") else "ok; enveloped"


def estimate_uc(curve, config=None, tol=UC_BISECTION_TOL):
    """Locate the zero of the computed binding by bisection between the bracketing grid points.

    Because every c_bp value is an upper bound, the computed binding underestimates the true
    one and the returned u_c is a lower estimate of the true threshold.
    """
    U = curve.U
    b = curve.binding
    finite = np.isfinite(b)
    U, b = U[finite], b[finite]
    points = [p for p in curve.points if math.isfinite(p.binding)]
    if len(U) == 0:
        return UcEstimate(float("nan"), (0.0, math.inf), False)
    crossing = next((i for i in range(len(b) - 1) if b[i] > 0 and b[i + 1] <= 0), None)
    if crossing is None:
        if np.all(b > 0):
            warn(f"binding positive on the whole grid; U_c >= {U[-1]}")
            return UcEstimate(float("nan"), (float(U[-1]), math.inf), False)
        warn(f"binding nonpositive on the whole grid; U_c <= {U[0]}")
        return UcEstimate(float("nan"), (0.0, float(U[0])), False)

    rng = np.random.default_rng(_cfg(config, "seed", DEFAULT_SEED) + 1)
    c_p = curve.c_p_used
    lo, hi = points[crossing], points[crossing + 1]
    lo_U, lo_b, lo_anz = lo.U, lo.binding, lo.ansatz
    hi_U, hi_b, hi_anz = hi.U, hi.binding, hi.ansatz
    while hi_U - lo_U > tol:
        mid = 0.5 * (lo_U + hi_U)
        best = None
        for seed_anz in (lo_anz, hi_anz):
            if seed_anz is None:
                continue
            try:
                anz, br, _ = _polish(seed_anz, mid, config, rng)
            except (ConditioningError, np.linalg.LinAlgError) as e:
                warn(f"bisection at U={mid:.6f} could not use a seed: {e}")
                continue
            if best is None or br.total < best[1].total:
                best = (anz, br)
        if best is None:
            warn(f"bisection stopped at [{lo_U:.6f}, {hi_U:.6f}]: no seed could be evaluated")
            break
        binding = 2.0 * c_p - best[1].total
        print_debug2(f"bisection U={mid:.6f}: binding {binding:.3e}")
        if binding > 0:
            lo_U, lo_b, lo_anz = mid, binding, best[0]
        else:
            hi_U, hi_b, hi_anz = mid, binding, best[0]
    u_c = lo_U + (hi_U - lo_U) * lo_b / (lo_b - hi_b) if lo_b != hi_b else 0.5 * (lo_U + hi_U)
    print_debug(f"U_c lower estimate {u_c:.6f} in [{lo_U:.6f}, {hi_U:.6f}] (U_c/sqrt2 = {u_c / SQRT2:.4f})")
    return UcEstimate(float(u_c), (float(lo_U), float(hi_U)), True)


def binding_asymptotic(alpha, U0, curve):
    """(2 c_p - c_bp(U0)) alpha^2 with c_bp interpolated linearly along the curve."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    U = curve.U
    b = curve.binding
    if not U[0] - 1e-12 <= U0 <= U[-1] + 1e-12:
        raise ExtrapolationError(f"U0={U0} outside the curve range [{U[0]}, {U[-1]}]")
    return float(np.interp(U0, U, b)) * alpha**2


def curve_diagnostics(curve, tol=1e-8):
    """Empirical checks of the exact curve's properties: binding >= 0, decreasing, convex in U."""
    U, b = curve.U, curve.binding
    report = {"negative": [], "increasing": [], "nonconvex": []}
    for i, (u, v) in enumerate(zip(U, b)):
        if v < -tol:
            report["negative"].append(float(u))
    for i in range(len(U) - 1):
        if b[i + 1] > b[i] + tol:
            report["increasing"].append((float(U[i]), float(U[i + 1])))
    for i in range(1, len(U) - 1):
        left = (b[i] - b[i - 1]) / (U[i] - U[i - 1])
        right = (b[i + 1] - b[i]) / (U[i + 1] - U[i])
        if right < left - tol:
            report["nonconvex"].append(float(U[i]))
    return report


def existence_alpha_estimate(beta):
    """alpha above which beta alpha^2 >= 1, i.e. the ground state exists for every |P| < 2."""
    if beta <= 0:
        return math.inf
    return 1.0 / math.sqrt(beta)
