"""Single-polaron Pekar problem on a radial grid.

The Pekar functional E(phi) = 1/2 int |grad phi|^2 - 1/sqrt(2) int int |phi(x)|^2 |phi(y)|^2 / |x-y|
is minimized over spherically symmetric, L2-normalized phi. Everything is written in terms of
u = r*phi on a uniform grid that excludes the origin, with u = 0 at r = 0 and at the box edge.

The kinetic operator is the Numerov (compact fourth-order) discretization of -1/2 d^2/dr^2,
K = -1/2 B^-1 A with A = tridiag(1, -2, 1)/h^2 and B = tridiag(1, 10, 1)/12. A and B commute,
so K is symmetric, and every solve against it is a tridiagonal solve.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from functools import partial

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import make_interp_spline
from scipy.linalg import eigh_tridiagonal, solve_banded

from .constants import (DEFAULT_BOX, DEFAULT_MIXING, DEFAULT_SCF_MAX_ITER, DEFAULT_SCF_TOL,
                        DEFAULT_SPACING, LADDER_BOX, NORMALIZATION_TOL, SPACING_LADDER, SQRT2,
                        BOX_SENSITIVITY_TOL)
from .debug_logger import print_debug, print_debug2, warn
from .exceptions import (ConfigError, ConsistencyError, ConvergenceError, DomainError, GridError,
                         NormalizationError)
from .models import CpEstimate, PekarBreakdown, PekarSolution, RadialFunction, RadialGrid


# ---------------------------------------------------------------------------
# Grid helpers
# ---------------------------------------------------------------------------

def make_grid(spacing=DEFAULT_SPACING, box=DEFAULT_BOX):
    return RadialGrid.from_box(spacing, box)


def gaussian_trial(grid, width=1.0):
    """Normalized phi(r) = (pi w^2)^(-3/4) exp(-r^2 / (2 w^2)), sampled on the grid."""
    values = (math.pi * width**2) ** -0.75 * np.exp(-grid.nodes**2 / (2.0 * width**2))
    return RadialFunction(grid, values).normalize()


def exponential_trial(grid, decay=1.0):
    return RadialFunction(grid, np.exp(-decay * grid.nodes)).normalize()


def dilate(phi, lam):
    """phi_lam(r) = lam^(3/2) phi(lam r), interpolated on the same grid (zero beyond the box).

    u = r phi is odd in r, so the quintic spline runs over the reflected samples and keeps its
    accuracy down to the origin.
    """
    if not lam > 0:
        raise DomainError(f"dilation factor must be positive, got {lam}")
    r = phi.grid.nodes
    u = r * phi.values
    spline = make_interp_spline(np.concatenate((-r[::-1], [0.0], r)), np.concatenate((-u[::-1], [0.0], u)), k=5)
    target = lam * r
    inside = target <= phi.grid.box_radius
    u_lam = np.zeros_like(r)
    u_lam[inside] = spline(target[inside])
    # u_lam(r) = r phi_lam(r) = lam^(1/2) u(lam r)
    values = math.sqrt(lam) * u_lam / r
    return RadialFunction(phi.grid, values, normalized=phi.normalized)


def _check_grid(grid):
    if not grid.spacing > 0:
        raise GridError(f"negative or zero spacing: {grid.spacing}")


def _check_normalized(phi, tol=NORMALIZATION_TOL):
    deviation = abs(phi.norm_sq() - 1.0)
    if not deviation <= tol:
        raise NormalizationError(deviation)


# ---------------------------------------------------------------------------
# Newton potential
# ---------------------------------------------------------------------------

def newton_potential(density):
    """V(r) = 4 pi [ (1/r) int_0^r n(s) s^2 ds + int_r^R n(s) s ds ].

    Both cumulative integrals use the composite trapezoid rule; its leading Euler-Maclaurin
    error combines into the local term 4 pi h^2 n(r) / 12, which is subtracted. The result is
    linear and monotone in n, and exact (Newton's theorem) outside the support of n.
    """
    grid = density.grid
    _check_grid(grid)
    r = grid.nodes
    h = grid.spacing
    n = density.values
    r0 = np.concatenate(([0.0], r))
    inner = cumulative_trapezoid(np.concatenate(([0.0], n * r**2)), r0)
    shell = cumulative_trapezoid(np.concatenate(([0.0], n * r)), r0)
    outer = shell[-1] - shell
    values = 4.0 * math.pi * (inner / r + outer) - math.pi * h**2 / 3.0 * n
    return RadialFunction(grid, values)


# ---------------------------------------------------------------------------
# Numerov kinetic operator
# ---------------------------------------------------------------------------

def _b_solve(h, rhs):
    """Solve B x = rhs with B = tridiag(1, 10, 1)/12."""
    m = rhs.shape[0]
    ab = np.zeros((3, m))
    ab[0, 1:] = 1.0 / 12.0
    ab[1, :] = 10.0 / 12.0
    ab[2, :-1] = 1.0 / 12.0
    return solve_banded((1, 1), ab, rhs)


def _second_difference(u, h):
    """A u with A = tridiag(1, -2, 1)/h^2 and zero Dirichlet values outside."""
    out = -2.0 * u
    out[1:] += u[:-1]
    out[:-1] += u[1:]
    return out / h**2


def _kinetic_apply(u, h):
    """K u = -1/2 B^-1 A u."""
    return -0.5 * _b_solve(h, _second_difference(u, h))


def _interior(values):
    # the last node carries the Dirichlet value u(R) = 0
    return values[:-1]


def kinetic_energy(phi):
    """T = 1/2 int |grad phi|^2 = 4 pi * h * <u, K u> over the interior nodes."""
    h = phi.grid.spacing
    u = _interior(phi.grid.nodes * phi.values)
    return 4.0 * math.pi * h * float(u @ _kinetic_apply(u, h))


def pekar_energy(phi):
    """Kinetic, attraction and total of the Pekar functional for a normalized radial phi."""
    _check_normalized(phi)
    kinetic = kinetic_energy(phi)
    density = phi.density()
    potential = newton_potential(density)
    attraction = density_coulomb(density, potential) / SQRT2
    return PekarBreakdown.from_terms(kinetic, attraction)


def density_coulomb(density, potential=None):
    """D = int int n(x) n(y) / |x - y| for a radial density."""
    if potential is None:
        potential = newton_potential(density)
    density.grid.check_same(potential.grid)
    return RadialFunction(density.grid, density.values * potential.values).integral()


def optimal_rescale(kinetic, linear_term):
    """Minimize E(lam) = lam^2 T - lam W: lam* = W/(2T), E* = -W^2/(4T)."""
    if not kinetic > 0:
        raise DomainError(f"kinetic term must be positive, got {kinetic}")
    if linear_term <= 0:
        return 0.0, 0.0
    return linear_term / (2.0 * kinetic), -linear_term**2 / (4.0 * kinetic)


# ---------------------------------------------------------------------------
# Lowest eigenpair of K + v
# ---------------------------------------------------------------------------

def _rayleigh(u, v, h):
    hu = _kinetic_apply(u, h) + v * u
    mu = float(u @ hu) / float(u @ u)
    return mu, hu


def _shifted_solve(v, h, sigma, rhs):
    """Solve (K + v - sigma) x = rhs via the banded form (-A/2 + B diag(v - sigma)) x = B rhs."""
    m = v.shape[0]
    d = v - sigma
    ab = np.zeros((3, m))
    ab[1, :] = 1.0 / h**2 + (10.0 / 12.0) * d
    ab[0, 1:] = -0.5 / h**2 + d[1:] / 12.0
    ab[2, :-1] = -0.5 / h**2 + d[:-1] / 12.0
    b_rhs = (10.0 * rhs) / 12.0
    b_rhs[1:] += rhs[:-1] / 12.0
    b_rhs[:-1] += rhs[1:] / 12.0
    return solve_banded((1, 1), ab, b_rhs)


def _bisection_start(v, h):
    """Ground eigenpair of the second-order operator -u''/2 + v u (tridiagonal bisection)."""
    m = v.shape[0]
    diag = 1.0 / h**2 + v
    off = np.full(m - 1, -0.5 / h**2)
    w, vec = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    return float(w[0]), vec[:, 0]


def _is_nodeless(u):
    scale = np.max(np.abs(u))
    significant = np.abs(u) > 1e-9 * scale
    signs = np.sign(u[significant])
    return bool(np.all(signs == signs[0]))


def lowest_eigenpair(v, h, start=None, tol=1e-13, max_iter=60):
    """Rayleigh-quotient iteration on K + v, started from `start` or from bisection."""
    if start is None:
        _, u = _bisection_start(v, h)
    else:
        u = np.array(start, dtype=float)
    u = u / np.linalg.norm(u)
    mu, hu = _rayleigh(u, v, h)
    for attempt in range(2):
        for it in range(max_iter):
            try:
                x = _shifted_solve(v, h, mu, u)
            except (np.linalg.LinAlgError, ValueError):
                break
            if not np.all(np.isfinite(x)):
                break
            u = x / np.linalg.norm(x)
            mu_new, hu = _rayleigh(u, v, h)
            residual = np.linalg.norm(hu - mu_new * u)
            done = abs(mu_new - mu) <= tol * max(1.0, abs(mu_new)) or residual < tol * max(1.0, abs(mu_new))
            mu = mu_new
            if done:
                break
        if _is_nodeless(u):
            break
        # converged onto an excited state; restart from the bisection ground vector
        print_debug2("Rayleigh iteration landed on a nodal state, restarting from bisection")
        mu, u = _bisection_start(v, h)
        u = u / np.linalg.norm(u)
        mu, hu = _rayleigh(u, v, h)
    else:
        raise ConsistencyError(f"Ground eigenvector has nodes after restart (mu={mu:.6g})")
    if np.sum(u) < 0:
        u = -u
    return mu, u


# ---------------------------------------------------------------------------
# Self-consistent solver
# ---------------------------------------------------------------------------

def _cfg(config, name, default):
    return getattr(config, name, default) if config is not None else default


def solve_choquard(config=None, grid=None, initial=None):
    """Self-consistent minimization of the Pekar functional with linear density mixing.

    Args:
        config: SCFConfig-like object (spacing, box, mixing, tol, density_tol, max_iter, initial).
        grid: optional RadialGrid overriding config spacing/box.
        initial: optional RadialFunction starting guess.

    Returns:
        PekarSolution for the final (mixed) iterate.

    Raises:
        ConfigError: mixing outside (0, 1], max_iter < 1 or tol <= 0.
        ConvergenceError: no convergence within max_iter (carries the last iterate and trace).
        ConsistencyError: the lowest eigenvector of the linearized operator has nodes.
    """
    mixing = _cfg(config, "mixing", DEFAULT_MIXING)
    tol = _cfg(config, "tol", DEFAULT_SCF_TOL)
    density_tol = _cfg(config, "density_tol", 1e-9)
    max_iter = _cfg(config, "max_iter", DEFAULT_SCF_MAX_ITER)
    if not 0 < mixing <= 1:
        raise ConfigError(f"mixing must lie in (0, 1], got {mixing}")
    if max_iter < 1:
        raise ConfigError(f"max_iter must be >= 1, got {max_iter}")
    if not tol > 0:
        raise ConfigError(f"energy tolerance must be positive, got {tol}")

    if grid is None:
        grid = make_grid(_cfg(config, "spacing", DEFAULT_SPACING), _cfg(config, "box", DEFAULT_BOX))
    h = grid.spacing
    r = grid.nodes
    if initial is None:
        kind = _cfg(config, "initial", "exponential")
        initial = gaussian_trial(grid) if kind == "gaussian" else exponential_trial(grid)
    grid.check_same(initial.grid)
    density = initial.normalize().density()

    trace = []
    energy_prev = None
    u_prev = None
    mu = float("nan")
    for iteration in range(1, max_iter + 1):
        potential = newton_potential(density)
        v = -SQRT2 * _interior(potential.values)
        mu, u = lowest_eigenpair(v, h, start=u_prev)
        u_prev = u
        phi_out = RadialFunction(grid, np.concatenate((u, [0.0])) / r).normalize()
        out_density = phi_out.values**2
        residual = math.sqrt(RadialFunction(grid, (out_density - density.values) ** 2).integral())
        mixed = (1.0 - mixing) * density.values + mixing * out_density
        density = RadialFunction(grid, mixed)
        phi = RadialFunction(grid, np.sqrt(mixed)).normalize()
        breakdown = pekar_energy(phi)
        trace.append(breakdown.total)
        print_debug2(f"iter {iteration}: E={breakdown.total:.14f} mu={mu:.10f} residual={residual:.3e}")
        if energy_prev is not None and abs(breakdown.total - energy_prev) < tol and residual < density_tol:
            virial = abs(2.0 * breakdown.kinetic - breakdown.attraction) / abs(breakdown.attraction)
            print_debug(f"SCF converged in {iteration} iterations on {grid}: E={breakdown.total:.12f}, "
                        f"virial defect {virial:.2e}")
            return PekarSolution(phi=phi, energy=breakdown.total, multiplier=mu, iterations=iteration,
                                 virial_defect=virial, breakdown=breakdown, trace=trace)
        energy_prev = breakdown.total

    raise ConvergenceError(f"SCF did not converge in {max_iter} iterations on {grid} "
                           f"(last energy {trace[-1]:.12f})", last_iterate=phi, trace=trace)


def trace_violations(trace, skip=3, tol=1e-10):
    """Steps (index, increase) where the recorded SCF energy went up by more than tol."""
    return [(i, trace[i] - trace[i - 1]) for i in range(skip + 1, len(trace))
            if trace[i] - trace[i - 1] > tol]


# ---------------------------------------------------------------------------
# Refinement ladder and extrapolation
# ---------------------------------------------------------------------------

def richardson(coarse, fine, ratio, order):
    """Remove the leading h^order error term from two levels whose spacings differ by `ratio`.

    compute_cp uses order 4: the Numerov kinetic operator and the Euler-Maclaurin corrected
    Newton potential both have O(h^4) leading error, so a second-order extrapolation would leave
    the h^4 term in place and amplify it.
    """
    factor = ratio**order
    return (factor * fine - coarse) / (factor - 1.0)


def _solve_level(args):
    spacing, box, config = args
    return spacing, box, solve_choquard(config, grid=make_grid(spacing, box))


def compute_cp(accuracy=None, scf_config=None):
    """Estimate c_p from a ladder of spacings with Richardson extrapolation.

    Args:
        accuracy: ExtrapolationConfig-like object (spacings, box, order, box_check, jobs).
        scf_config: SCFConfig-like object used for every level.

    Returns:
        CpEstimate (iterates as (c_p, error_estimate)).
    """
    spacings = sorted(_cfg(accuracy, "spacings", SPACING_LADDER), reverse=True)
    box = _cfg(accuracy, "box", LADDER_BOX)
    order = _cfg(accuracy, "order", 4)
    box_check = _cfg(accuracy, "box_check", True)
    box_tol = _cfg(accuracy, "box_tol", BOX_SENSITIVITY_TOL)
    jobs = _cfg(accuracy, "jobs", 1)
    flags = []

    tasks = [(h, box, scf_config) for h in spacings]
    if box_check:
        tasks.append((spacings[0], box / 2.0, scf_config))
    # levels are independent; with jobs > 1 they run on a thread pool, otherwise serially
    pool = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    if pool is not None:
        calls = {(t[0], t[1]): pool.submit(_solve_level, t).result for t in tasks}
    else:
        calls = {(t[0], t[1]): partial(_solve_level, t) for t in tasks}
    solved = {}
    try:
        for key, call in calls.items():
            try:
                _, _, solution = call()
            except ConvergenceError as e:
                raise ConvergenceError(f"level spacing={key[0]} box={key[1]} failed: {e}",
                                       last_iterate=e.last_iterate, trace=e.trace, level=key) from e
            solved[key] = solution
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)

    rows = [{"spacing": h, "box": box, "energy": solved[(h, box)].energy,
             "virial_defect": solved[(h, box)].virial_defect,
             "iterations": solved[(h, box)].iterations} for h in spacings]
    levels = pd.DataFrame(rows)

    box_sensitivity = float("nan")
    if box_check:
        small = solved[(spacings[0], box / 2.0)].energy
        big = solved[(spacings[0], box)].energy
        box_sensitivity = abs(big - small)
        if big > small + 1e-9:
            flags.append("box ladder not monotone")
        if box_sensitivity > box_tol:
            flags.append(f"box-sensitive: |E(R) - E(R/2)| = {box_sensitivity:.2e}")
            warn(f"c_p estimate is box-sensitive (|dE|={box_sensitivity:.2e}); enlarge --box")

    energies = levels["energy"].to_numpy()
    if len(spacings) < 2:
        flags.append("single level: extrapolation skipped, no error estimate")
        return CpEstimate(c_p=float(energies[0]), error_estimate=float("nan"), levels=levels,
                          extrapolated=False, box_sensitivity=box_sensitivity, flags=flags,
                          minimizer=solved[(spacings[0], box)].phi)

    extrapolated = [richardson(energies[i], energies[i + 1], spacings[i] / spacings[i + 1], order)
                    for i in range(len(spacings) - 1)]
    levels["extrapolated"] = [float("nan")] + extrapolated
    c_p = extrapolated[-1]
    if len(extrapolated) >= 2:
        error = abs(extrapolated[-1] - extrapolated[-2])
    else:
        error = abs(extrapolated[-1] - energies[-1])
    if box_check and math.isfinite(box_sensitivity):
        error += box_sensitivity
    print_debug(f"c_p = {c_p:.10f} +- {error:.2e} from spacings {spacings} at box {box}")
    return CpEstimate(c_p=float(c_p), error_estimate=float(error), levels=levels, extrapolated=True,
                      box_sensitivity=box_sensitivity, flags=flags, minimizer=solved[(spacings[-1], box)].phi)


def lower_bound_statement():
    """The matching lower bound is known only as a statement; its alpha^(9/5) rate is not checked here."""
    return "E_p(alpha) >= c_p alpha^2 + O(alpha^(9/5)) as alpha -> infinity"


if __name__ == "__main__":
    solution = solve_choquard()
    print_debug(f"E = {solution.energy:.10f}, virial defect {solution.virial_defect:.2e}")
