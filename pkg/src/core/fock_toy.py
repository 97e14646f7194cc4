"""Truncated Fock-space toy of the bipolaron fiber Hamiltonian at total momentum P.

The relative coordinate lives on an offset cubic lattice with Dirichlet walls, the phonon
field on a finite symmetric set of modes with the total occupation capped at n_max:

    H(P) = -Laplacian + alpha U0 / |x| + 1/4 |P - sum_j n_j k_j|^2 + sum_j n_j
           + 2 sqrt(alpha) lambda_0 sum_j sqrt(w_j) (2 pi)^(-3/2) |k_j|^-1 cos(k_j . x / 2) (a_j + a_j^+)

The operator is a real symmetric scipy.sparse matrix ordered (occupation, lattice node).
"""
import math
from dataclasses import dataclass, field, replace
from itertools import combinations_with_replacement

import numpy as np
import pandas as pd
import scipy.sparse as sp
from scipy.linalg import eigh
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .constants import (DEFAULT_DIMENSION_CAP, DEFAULT_KAPPA, DEFAULT_LATTICE_NODES, DEFAULT_LATTICE_SPACING,
                        DEFAULT_N_MAX, DEFAULT_PER_SHELL, DEFAULT_SHELLS, DISPERSION_COLUMNS, FOURIER_NORM,
                        LAMBDA0, LANCZOS_SEED, LANCZOS_TOL)
from .debug_logger import print_debug, print_debug2, warn
from .exceptions import (BipolaronError, ConfigError, ConsistencyError, DomainError, IterationError, SizeError,
                         SymmetryError)
from .models import GroundStateResult

DENSE_LIMIT = 64
SYMMETRY_TOL = 1e-10


# ---------------------------------------------------------------------------
# Modes
# ---------------------------------------------------------------------------

@dataclass
class ModeSet:
    vectors: np.ndarray
    weights: np.ndarray
    kappa: float

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float).reshape(-1, 3)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (len(self.vectors),):
            raise ConfigError(f"{len(self.vectors)} modes but {self.weights.size} weights")
        norms = np.linalg.norm(self.vectors, axis=1)
        if np.any(norms == 0):
            raise DomainError("mode set contains the zero vector")
        if np.any(norms > self.kappa * (1 + 1e-12)):
            raise DomainError(f"mode outside |k| <= {self.kappa}")
        if np.any(self.weights <= 0):
            raise DomainError("mode weights must be positive")
        self.check_symmetric()

    def __len__(self):
        return len(self.vectors)

    @property
    def norms(self):
        return np.linalg.norm(self.vectors, axis=1)

    def partner(self):
        """Index of -k_j for every mode j."""
        out = np.empty(len(self), dtype=int)
        for j, k in enumerate(self.vectors):
            match = np.flatnonzero(np.all(np.abs(self.vectors + k) <= 1e-12 * self.kappa, axis=1))
            if match.size == 0 or abs(self.weights[match[0]] - self.weights[j]) > 1e-14 * self.weights[j]:
                raise SymmetryError(f"mode {k} has no antipodal partner with equal weight")
            out[j] = match[0]
        return out

    def check_symmetric(self):
        self.partner()

    def same_as(self, other):
        return (self.kappa == other.kappa and self.vectors.shape == other.vectors.shape
                and np.array_equal(self.vectors, other.vectors) and np.array_equal(self.weights, other.weights))

    def to_dict(self):
        return {"kappa": self.kappa, "vectors": self.vectors.tolist(), "weights": self.weights.tolist()}


def _directions(half):
    axes = np.eye(3)
    if half <= 3:
        return axes[:half]
    golden = math.pi * (3.0 - math.sqrt(5.0))
    i = np.arange(half)
    z = (i + 0.5) / half
    rho = np.sqrt(1.0 - z**2)
    return np.column_stack((rho * np.cos(golden * i), rho * np.sin(golden * i), z))


def build_modes(kappa=DEFAULT_KAPPA, shells=DEFAULT_SHELLS, per_shell=DEFAULT_PER_SHELL):
    """Radial shells of |k| <= kappa, each carrying per_shell/2 antipodal direction pairs.

    A shell's modes sit at its mean radius and share the shell volume equally.
    """
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    if shells < 1 or per_shell < 1:
        raise ConfigError(f"shells and per_shell must be >= 1, got {shells}, {per_shell}")
    if per_shell % 2:
        raise SymmetryError(f"per_shell must be even for antipodal pairing, got {per_shell}")
    dirs = _directions(per_shell // 2)
    vectors, weights = [], []
    for i in range(shells):
        a, b = kappa * i / shells, kappa * (i + 1) / shells
        radius = 0.75 * (b**4 - a**4) / (b**3 - a**3)
        weight = 4.0 * math.pi / 3.0 * (b**3 - a**3) / per_shell
        for d in dirs:
            vectors.extend([radius * d, -radius * d])
            weights.extend([weight, weight])
    return ModeSet(np.array(vectors), np.array(weights), kappa)


# ---------------------------------------------------------------------------
# Lattice and occupations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lattice:
    nodes: int = DEFAULT_LATTICE_NODES
    spacing: float = DEFAULT_LATTICE_SPACING

    def __post_init__(self):
        if self.nodes < 2 or self.nodes % 2:
            raise ConfigError(f"lattice needs an even node count >= 2 to be symmetric without the origin, "
                              f"got {self.nodes}")
        if not self.spacing > 0:
            raise ConfigError(f"lattice spacing must be positive, got {self.spacing}")

    @property
    def axis(self):
        return (np.arange(self.nodes) - 0.5 * (self.nodes - 1)) * self.spacing

    @property
    def size(self):
        return self.nodes**3

    def points(self):
        g = np.meshgrid(self.axis, self.axis, self.axis, indexing="ij")
        return np.column_stack([c.ravel() for c in g])

    def laplacian(self):
        """Dirichlet 7-point Laplacian (negative semidefinite)."""
        n, h = self.nodes, self.spacing
        d1 = sp.diags([np.ones(n - 1), -2.0 * np.ones(n), np.ones(n - 1)], [-1, 0, 1]) / h**2
        eye = sp.identity(n, format="csr")
        return (sp.kron(sp.kron(d1, eye), eye) + sp.kron(sp.kron(eye, d1), eye)
                + sp.kron(sp.kron(eye, eye), d1)).tocsr()

    def lowest_kinetic(self):
        """Smallest eigenvalue of -Laplacian: 3 (2/h^2)(1 - cos(pi/(n+1)))."""
        return 3.0 * 2.0 / self.spacing**2 * (1.0 - math.cos(math.pi / (self.nodes + 1)))

    def to_dict(self):
        return {"nodes": self.nodes, "spacing": self.spacing}


def occupations(mode_count, n_max):
    """All occupation vectors with total <= n_max, ordered by total."""
    if n_max < 0:
        raise ConfigError(f"n_max must be >= 0, got {n_max}")
    states = []
    for total in range(n_max + 1):
        for combo in combinations_with_replacement(range(mode_count), total):
            n = np.zeros(mode_count, dtype=int)
            np.add.at(n, list(combo), 1)
            states.append(n)
    return np.array(states, dtype=int).reshape(-1, mode_count)


def ladder_sums(states, n_max):
    """a_j + a_j^+ on the truncated occupation space, one sparse matrix per mode."""
    index = {tuple(s): i for i, s in enumerate(states)}
    mats = []
    for j in range(states.shape[1]):
        rows, cols, vals = [], [], []
        for i, s in enumerate(states):
            if s.sum() >= n_max:
                continue
            up = s.copy()
            up[j] += 1
            k = index[tuple(up)]
            amp = math.sqrt(up[j])
            rows += [k, i]
            cols += [i, k]
            vals += [amp, amp]
        n = len(states)
        mats.append(sp.csr_matrix((vals, (rows, cols)), shape=(n, n)))
    return mats


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------

@dataclass
class TruncatedFockModel:
    lattice: Lattice
    modes: ModeSet
    n_max: int = DEFAULT_N_MAX
    alpha: float = 1.0
    U0: float = 0.0
    P: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float).reshape(3)
        if self.alpha < 0 or self.U0 < 0:
            raise DomainError(f"alpha and U0 must be nonnegative, got {self.alpha}, {self.U0}")
        if self.n_max < 0:
            raise ConfigError(f"n_max must be >= 0, got {self.n_max}")

    @property
    def occupation_count(self):
        return math.comb(len(self.modes) + self.n_max, self.n_max)

    @property
    def dimension(self):
        return self.lattice.size * self.occupation_count

    def at(self, P):
        return replace(self, P=np.asarray(P, dtype=float))

    def couplings(self):
        """2 sqrt(alpha) lambda_0 sqrt(w_j) (2 pi)^(-3/2) / |k_j|."""
        return 2.0 * math.sqrt(self.alpha) * LAMBDA0 * FOURIER_NORM * np.sqrt(self.modes.weights) / self.modes.norms

    def occupation_energies(self, states):
        momentum = states @ self.modes.vectors
        return 0.25 * np.sum((self.P - momentum) ** 2, axis=1) + states.sum(axis=1)

    def to_dict(self):
        return {"lattice": self.lattice.to_dict(), "modes": self.modes.to_dict(), "n_max": self.n_max,
                "alpha": self.alpha, "U0": self.U0, "P": self.P.tolist(), "dimension": self.dimension}


def default_model(alpha=1.0, U0=0.0, P=(0.0, 0.0, 0.0), config=None):
    get = lambda name, default: getattr(config, name, default) if config is not None else default
    lattice = Lattice(get("lattice_nodes", DEFAULT_LATTICE_NODES), get("lattice_spacing", DEFAULT_LATTICE_SPACING))
    modes = build_modes(get("kappa", DEFAULT_KAPPA), get("shells", DEFAULT_SHELLS),
                        get("per_shell", DEFAULT_PER_SHELL))
    return TruncatedFockModel(lattice, modes, get("n_max", DEFAULT_N_MAX), alpha, U0, np.asarray(P, dtype=float))


def assemble(model, dimension_cap=DEFAULT_DIMENSION_CAP):
    """Real symmetric sparse H(P), ordered (occupation, lattice node).

    Raises:
        SizeError: the dimension exceeds dimension_cap.
    """
    if model.dimension > dimension_cap:
        raise SizeError(f"dimension {model.dimension} exceeds the cap {dimension_cap}", dimension=model.dimension)
    states = occupations(len(model.modes), model.n_max)
    lattice = model.lattice
    x = lattice.points()
    electronic = -lattice.laplacian()
    if model.alpha * model.U0 > 0:
        electronic = electronic + sp.diags(model.alpha * model.U0 / np.linalg.norm(x, axis=1))
    occ_eye = sp.identity(len(states), format="csr")
    x_eye = sp.identity(lattice.size, format="csr")
    H = sp.kron(occ_eye, electronic) + sp.kron(sp.diags(model.occupation_energies(states)), x_eye)
    if model.alpha > 0 and model.n_max > 0:
        for g, k, ladder in zip(model.couplings(), model.modes.vectors, ladder_sums(states, model.n_max)):
            H = H + g * sp.kron(ladder, sp.diags(np.cos(0.5 * x @ k)))
    H = H.tocsr()
    asym = abs(H - H.T)
    if asym.nnz and asym.max() != 0:
        raise ConsistencyError(f"assembled operator is not symmetric (max {asym.max():.3e})")
    print_debug2(f"assembled H(P={model.P.tolist()}) with dimension {H.shape[0]}, nnz {H.nnz}")
    return H


def ground_energy(op, tol=LANCZOS_TOL, seed=LANCZOS_SEED, max_iter=None):
    """Lowest eigenvalue by implicitly restarted Lanczos (ARPACK) from a seeded start vector.

    Raises:
        IterationError: no convergence, or the final residual ||Hv - Ev|| exceeds tol.
    """
    if not tol > 0:
        raise ConfigError(f"tol must be positive, got {tol}")
    n = op.shape[0]
    if n <= DENSE_LIMIT:
        dense = op.toarray() if sp.issparse(op) else np.asarray(op)
        w, v = eigh(dense)
        vec = v[:, 0]
        residual = float(np.linalg.norm(dense @ vec - w[0] * vec))
        return GroundStateResult(float(w[0]), residual, 1, n, vector=vec)

    count = [0]

    def matvec(v):
        count[0] += 1
        return op @ v

    linear = LinearOperator(op.shape, matvec=matvec, dtype=float)
    v0 = np.random.default_rng(seed).standard_normal(n)
    try:
        w, v = eigsh(linear, k=1, which="SA", v0=v0, tol=0.0, ncv=min(n - 1, 64), maxiter=max_iter or 10 * n)
    except ArpackNoConvergence as e:
        ritz = float(e.eigenvalues[0]) if len(e.eigenvalues) else float("nan")
        residual = (float(np.linalg.norm(op @ e.eigenvectors[:, 0] - ritz * e.eigenvectors[:, 0]))
                    if len(e.eigenvalues) else float("nan"))
        raise IterationError(f"Lanczos did not converge after {count[0]} products", ritz, residual) from e
    vec = v[:, 0]
    energy = float(w[0])
    residual = float(np.linalg.norm(op @ vec - energy * vec))
    if residual > tol:
        raise IterationError(f"Lanczos residual {residual:.3e} exceeds tol {tol:.1e}", energy, residual)
    return GroundStateResult(energy, residual, count[0], n, vector=vec)


def lower_bound(model):
    """Rigorous floor: lowest free energy minus sum_j g_j ||a_j + a_j^+|| <= 2 sqrt(n_max) per mode."""
    coupling = float(np.sum(model.couplings())) * 2.0 * math.sqrt(model.n_max) if model.n_max > 0 else 0.0
    return free_energy(model) - coupling


def solve(model, tol=LANCZOS_TOL, seed=LANCZOS_SEED, dimension_cap=DEFAULT_DIMENSION_CAP):
    result = ground_energy(assemble(model, dimension_cap), tol=tol, seed=seed)
    result.lower_bound = lower_bound(model)
    if result.energy < result.lower_bound - tol:
        raise ConsistencyError(f"energy {result.energy} below the rigorous floor {result.lower_bound}")
    print_debug(f"E(P={model.P.tolist()}) = {result.energy:.12f} (dim {result.dimension}, "
                f"{result.iterations} products, residual {result.residual:.1e})")
    return result


def free_energy(model):
    """alpha = 0 closed form: lowest lattice kinetic energy plus the best occupation sector."""
    states = occupations(len(model.modes), model.n_max)
    return model.lattice.lowest_kinetic() + float(np.min(model.occupation_energies(states)))


# ---------------------------------------------------------------------------
# Dispersion, polaron reduction, binding
# ---------------------------------------------------------------------------

def _closed_under_negation(Ps):
    for p in Ps:
        if not any(np.allclose(q, -p, rtol=0, atol=1e-12) for q in Ps):
            return False
    return True


def dispersion_scan(model, P_values, tol=LANCZOS_TOL, seed=LANCZOS_SEED, symmetry_tol=SYMMETRY_TOL,
                    dimension_cap=DEFAULT_DIMENSION_CAP):
    """E(P) over P_values with a report on E(0) <= E(P) <= E(0) + P^2/4 and E(-P) = E(P).

    Returns:
        (DataFrame, report). Rows whose solve failed carry the error in `status` and NaN energy.
    """
    Ps = [np.asarray(p, dtype=float).reshape(3) for p in P_values]
    if not any(np.all(p == 0) for p in Ps):
        raise ConfigError("P_values must include 0")
    if not _closed_under_negation(Ps):
        raise ConfigError("P_values must be closed under negation")
    rows = []
    for p in Ps:
        try:
            r = solve(model.at(p), tol=tol, seed=seed, dimension_cap=dimension_cap)
            rows.append([*p, float(np.linalg.norm(p)), r.energy, r.residual, "ok"])
        except BipolaronError as e:
            warn(f"dispersion point P={p.tolist()} failed: {e}")
            rows.append([*p, float(np.linalg.norm(p)), float("nan"), float("nan"), f"failed: {e}"])
    frame = pd.DataFrame(rows, columns=DISPERSION_COLUMNS)

    energies = {tuple(p): e for p, e in zip(Ps, frame["energy"])}
    e0 = energies[(0.0, 0.0, 0.0)]
    check_tol = 10.0 * tol
    report = {"lower": [], "upper": [], "symmetry": []}
    for p in Ps:
        e = energies[tuple(p)]
        if not math.isfinite(e):
            continue
        if e < e0 - check_tol:
            report["lower"].append(p.tolist())
        if e > e0 + 0.25 * float(p @ p) + check_tol:
            report["upper"].append(p.tolist())
        e_neg = energies[tuple(-p + 0.0)]
        if math.isfinite(e_neg) and abs(e - e_neg) > symmetry_tol:
            report["symmetry"].append(p.tolist())
    report["passed"] = not any(report[k] for k in ("lower", "upper", "symmetry"))
    frame["checks_passed"] = report["passed"]
    return frame, report


def polaron_operator(alpha, modes, n_max, P=(0.0, 0.0, 0.0)):
    """Phonon-only fixed-momentum polaron: 1/2 |P - P_f|^2 + N_f + sqrt(alpha) lambda_0 sum_j h_j (a_j + a_j^+)."""
    states = occupations(len(modes), n_max)
    P = np.asarray(P, dtype=float)
    diag = 0.5 * np.sum((P - states @ modes.vectors) ** 2, axis=1) + states.sum(axis=1)
    H = sp.diags(diag).tocsr()
    if alpha > 0 and n_max > 0:
        h = math.sqrt(alpha) * LAMBDA0 * FOURIER_NORM * np.sqrt(modes.weights) / modes.norms
        for hj, ladder in zip(h, ladder_sums(states, n_max)):
            H = H + hj * ladder
    return H.tocsr()


def polaron_toy_energy(alpha, modes, n_max=DEFAULT_N_MAX, tol=LANCZOS_TOL, seed=LANCZOS_SEED):
    if alpha < 0:
        raise DomainError(f"alpha must be nonnegative, got {alpha}")
    return ground_energy(polaron_operator(alpha, modes, n_max), tol=tol, seed=seed).energy


def toy_binding(model, polaron_modes=None, polaron_n_max=None, tol=LANCZOS_TOL, seed=LANCZOS_SEED,
                dimension_cap=DEFAULT_DIMENSION_CAP):
    """2 E_p^toy - E_bp^toy(P = 0) on one shared mode set and occupation cap."""
    modes = polaron_modes if polaron_modes is not None else model.modes
    n_max = polaron_n_max if polaron_n_max is not None else model.n_max
    if not modes.same_as(model.modes) or n_max != model.n_max:
        raise ConfigError("polaron and bipolaron must share the mode set and n_max")
    e_p = polaron_toy_energy(model.alpha, modes, n_max, tol=tol, seed=seed)
    e_bp = solve(model.at(np.zeros(3)), tol=tol, seed=seed, dimension_cap=dimension_cap).energy
    binding = 2.0 * e_p - e_bp
    print_debug(f"toy binding alpha={model.alpha} U0={model.U0}: 2*{e_p:.10f} - ({e_bp:.10f}) = {binding:.10f}")
    return binding


def existence_criterion(E_bin, P):
    """(|P| < 2 min{1, sqrt(E_bin)} with E_bin > 0, min{1, E_bin} - P^2/4)."""
    p_sq = float(np.sum(np.asarray(P, dtype=float) ** 2))
    gap_bound = min(1.0, E_bin) - p_sq / 4.0
    if not E_bin > 0:
        return False, gap_bound
    return math.sqrt(p_sq) < 2.0 * min(1.0, math.sqrt(E_bin)), gap_bound


def ionization_note():
    return ("The ionization energy at P = 0 equals twice the cutoff polaron energy; the toy model "
            "only uses this through the binding energy 2 E_p - E_bp and does not estimate it directly.")
