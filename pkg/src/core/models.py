"""Data models shared by the core modules."""
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .exceptions import GridError, GridMismatchError


class RadialGrid:
    def __init__(self, node_count, spacing):
        """Uniform radial grid r_i = (i+1)*spacing, origin excluded, last node on the box edge."""
        if not isinstance(node_count, (int, np.integer)) or node_count < 3:
            raise GridError(f"node_count must be an integer >= 3, got {node_count!r}")
        if not spacing > 0 or not math.isfinite(spacing):
            raise GridError(f"spacing must be a positive finite real, got {spacing!r}")
        self.node_count = int(node_count)
        self.spacing = float(spacing)
        self.nodes = self.spacing * np.arange(1, self.node_count + 1, dtype=float)
        self.box_radius = self.node_count * self.spacing

    @classmethod
    def from_box(cls, spacing, box_radius):
        if not spacing > 0:
            raise GridError(f"spacing must be positive, got {spacing!r}")
        count = int(round(box_radius / spacing))
        if abs(count * spacing - box_radius) > 1e-9 * max(1.0, box_radius):
            raise GridError(f"box_radius={box_radius} is not a multiple of spacing={spacing}")
        return cls(count, spacing)

    @property
    def weights(self):
        """Composite trapezoid weights on [0, R]; the origin term vanishes for every integrand used here."""
        w = np.full(self.node_count, self.spacing)
        w[-1] *= 0.5
        return w

    def same_as(self, other):
        return self.node_count == other.node_count and self.spacing == other.spacing

    def check_same(self, other):
        if not self.same_as(other):
            raise GridMismatchError(f"Grid mismatch: {self} vs {other}")

    def __repr__(self):
        return f"RadialGrid(node_count={self.node_count}, spacing={self.spacing}, box={self.box_radius})"

    def to_dict(self):
        return {"node_count": self.node_count, "spacing": self.spacing, "box_radius": self.box_radius}


class RadialFunction:
    def __init__(self, grid, values, normalized=False):
        """Samples of a spherically symmetric function (wavefunction or density) on a RadialGrid."""
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.node_count,):
            raise GridMismatchError(f"Expected {grid.node_count} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("RadialFunction values must be finite")
        self.grid = grid
        self.values = values
        self.normalized = normalized

    @property
    def r(self):
        return self.grid.nodes

    def integral(self):
        """4*pi * int f(r) r^2 dr."""
        return 4.0 * np.pi * float(np.sum(self.grid.weights * self.values * self.r**2))

    def norm_sq(self):
        return 4.0 * np.pi * float(np.sum(self.grid.weights * self.values**2 * self.r**2))

    def density(self):
        return RadialFunction(self.grid, self.values**2)

    def normalize(self):
        n = self.norm_sq()
        if not n > 0:
            raise ValueError("Cannot normalize a function with zero norm")
        return RadialFunction(self.grid, self.values / math.sqrt(n), normalized=True)

    def to_frame(self):
        return pd.DataFrame({"r": self.r, "value": self.values})

    def __repr__(self):
        return f"RadialFunction({self.grid!r}, normalized={self.normalized})"


@dataclass(frozen=True)
class PekarBreakdown:
    kinetic: float
    attraction: float
    total: float

    @classmethod
    def from_terms(cls, kinetic, attraction):
        return cls(kinetic=kinetic, attraction=attraction, total=kinetic - attraction)

    def to_dict(self):
        return {"kinetic": self.kinetic, "attraction": self.attraction, "total": self.total}


@dataclass
class PekarSolution:
    phi: RadialFunction
    energy: float
    multiplier: float
    iterations: int
    virial_defect: float
    breakdown: PekarBreakdown
    trace: list = field(default_factory=list)

    def to_dict(self):
        return {
            "energy": self.energy,
            "multiplier": self.multiplier,
            "iterations": self.iterations,
            "virial_defect": self.virial_defect,
            "kinetic": self.breakdown.kinetic,
            "attraction": self.breakdown.attraction,
            "grid": self.phi.grid.to_dict(),
        }


@dataclass
class CpEstimate:
    c_p: float
    error_estimate: float
    levels: pd.DataFrame
    extrapolated: bool
    box_sensitivity: float
    flags: list = field(default_factory=list)
    minimizer: RadialFunction = None

    def __iter__(self):
        yield self.c_p
        yield self.error_estimate

    def to_dict(self):
        return {
            "c_p": self.c_p,
            "error_estimate": self.error_estimate,
            "extrapolated": self.extrapolated,
            "box_sensitivity": self.box_sensitivity,
            "flags": list(self.flags),
            "levels": self.levels.to_dict(orient="records"),
        }


@dataclass(frozen=True)
class PTBreakdown:
    kinetic: float
    repulsion: float
    attraction: float
    U: float
    total: float

    @classmethod
    def from_terms(cls, kinetic, repulsion, attraction, U):
        return cls(kinetic, repulsion, attraction, U, kinetic + U * repulsion - attraction)

    def at(self, U):
        """Same state, different Coulomb strength (the functional is affine in U)."""
        return PTBreakdown.from_terms(self.kinetic, self.repulsion, self.attraction, U)

    def to_dict(self):
        return {"kinetic": self.kinetic, "repulsion": self.repulsion, "attraction": self.attraction,
                "U": self.U, "total": self.total}


@dataclass
class BindingPoint:
    U: float
    c_bp_upper: float
    binding: float
    basis_size: int
    status: str
    raw_c_bp_upper: float = float("nan")
    enveloped: bool = False
    ansatz: object = None

    def to_dict(self):
        return {"U": self.U, "c_bp_upper": self.c_bp_upper, "binding": self.binding,
                "basis_size": self.basis_size, "status": self.status,
                "raw_c_bp_upper": self.raw_c_bp_upper, "enveloped": self.enveloped,
                "ansatz": self.ansatz.to_dict() if self.ansatz is not None else None}


@dataclass
class BindingCurve:
    points: list
    c_p_used: float

    def __post_init__(self):
        us = [p.U for p in self.points]
        if any(b <= a for a, b in zip(us, us[1:])):
            raise ValueError(f"BindingCurve U values must be strictly increasing, got {us}")

    @property
    def U(self):
        return np.array([p.U for p in self.points])

    @property
    def binding(self):
        return np.array([p.binding for p in self.points])

    def to_frame(self):
        return pd.DataFrame([{k: p.to_dict()[k] for k in ("U", "c_bp_upper", "binding", "basis_size", "status")}
                             for p in self.points])

    def to_dict(self):
        return {"c_p_used": self.c_p_used, "points": [p.to_dict() for p in self.points]}


@dataclass(frozen=True)
class UcEstimate:
    u_c: float
    bracket: tuple
    has_crossing: bool

    def __iter__(self):
        yield self.u_c
        yield self.bracket

    def to_dict(self):
        return {"u_c": self.u_c, "bracket": list(self.bracket), "has_crossing": self.has_crossing,
                "semantics": "lower estimate of the true U_c"}


@dataclass
class FormFactor:
    k_nodes: np.ndarray
    values: np.ndarray
    source_mass: float

    def to_frame(self):
        return pd.DataFrame({"k": self.k_nodes, "rho": self.values})


@dataclass(frozen=True)
class CutoffBound:
    alpha: float
    kappa: float
    kinetic_like: float
    field_gain: float
    coulomb_term: float
    total: float
    scale: float = 1.0

    @classmethod
    def from_terms(cls, alpha, kappa, kinetic_like, field_gain, coulomb_term=0.0, scale=1.0):
        return cls(alpha, kappa, kinetic_like, field_gain, coulomb_term,
                   kinetic_like + coulomb_term - field_gain, scale)

    def to_dict(self):
        return {"alpha": self.alpha, "kappa": self.kappa, "kinetic_like": self.kinetic_like,
                "field_gain": self.field_gain, "coulomb_term": self.coulomb_term, "total": self.total,
                "total_over_alpha_sq": self.total / self.alpha**2}


@dataclass(frozen=True)
class GrossConstants:
    alpha: float
    K: float
    kappa: float
    C_K: float
    C2_K: float
    C3_K: float
    E_cut: float
    admissible: bool
    empty_domain: bool = False

    def to_dict(self):
        return {"alpha": self.alpha, "K": self.K, "kappa": self.kappa, "C_K": self.C_K,
                "C2_K": self.C2_K, "C3_K": self.C3_K, "E_cut": self.E_cut,
                "admissible": self.admissible}


@dataclass
class GroundStateResult:
    energy: float
    residual: float
    iterations: int
    dimension: int
    lower_bound: float = float("-inf")
    vector: np.ndarray = None

    def to_dict(self):
        return {"energy": self.energy, "residual": self.residual, "iterations": self.iterations,
                "dimension": self.dimension, "lower_bound": self.lower_bound}
