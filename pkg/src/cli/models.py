"""Pydantic configuration models for every command, plus the run manifest."""
import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.constants import (ARTIFACT_VERSION, BOX_SENSITIVITY_TOL, DEFAULT_BASIS_SIZE, DEFAULT_BOX,
                                DEFAULT_DIMENSION_CAP, DEFAULT_KAPPA, DEFAULT_LATTICE_NODES,
                                DEFAULT_LATTICE_SPACING, DEFAULT_MIXING,
                                DEFAULT_N_MAX, DEFAULT_PER_SHELL, DEFAULT_RESTARTS, DEFAULT_SCF_MAX_ITER,
                                DEFAULT_SCF_TOL, DEFAULT_SEED, DEFAULT_SHELLS, DEFAULT_SPACING, DEFAULT_U_GRID,
                                LADDER_BOX, LANCZOS_TOL, SPACING_LADDER, SQRT2, UC_BISECTION_TOL)


class _Config(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class SCFConfig(_Config):
    """Self-consistent field knobs for the radial Pekar solver."""
    spacing: float = Field(DEFAULT_SPACING, gt=0)
    box: float = Field(DEFAULT_BOX, gt=0)
    mixing: float = Field(DEFAULT_MIXING, gt=0, le=1)
    tol: float = Field(DEFAULT_SCF_TOL, gt=0)
    density_tol: float = Field(1e-9, gt=0)
    max_iter: int = Field(DEFAULT_SCF_MAX_ITER, ge=1)
    initial: Literal["exponential", "gaussian"] = "exponential"


class ExtrapolationConfig(_Config):
    spacings: tuple[float, ...] = SPACING_LADDER
    box: float = Field(LADDER_BOX, gt=0)
    order: int = Field(4, ge=1)
    box_check: bool = True
    box_tol: float = Field(BOX_SENSITIVITY_TOL, gt=0)
    jobs: int = Field(1, ge=1)

    @field_validator("spacings")
    @classmethod
    def positive_spacings(cls, v):
        if not v or any(h <= 0 for h in v):
            raise ValueError(f"spacing ladder must be nonempty and positive, got {v}")
        return tuple(sorted(v, reverse=True))


class OptimizerConfig(_Config):
    """Correlated-Gaussian optimizer settings."""
    basis_size: int = Field(DEFAULT_BASIS_SIZE, ge=1)
    restarts: int = Field(DEFAULT_RESTARTS, ge=1)
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2**64)
    candidates: int = Field(12, ge=1)
    maxfev: int = Field(1500, ge=0)
    maxfev_refine: int = Field(300, ge=0)
    maxfev_term: int = Field(150, ge=0)
    tie_a2: bool = False
    freeze_b: bool = False
    freeze_s: bool = False
    fresh_each_point: bool = False
    dissociated_fraction: float = Field(0.3, ge=0, le=1)
    temperature: float = Field(0.5, ge=0)
    a_min: float = Field(0.01, gt=0)
    a_max: float = Field(2.0, gt=0)
    s_max: float = Field(6.0, ge=0)


class PhaseConfig(_Config):
    u_grid: tuple[float, ...] = DEFAULT_U_GRID
    uc_tol: float = Field(UC_BISECTION_TOL, gt=0)
    c_p: float | None = None
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)

    @field_validator("u_grid")
    @classmethod
    def increasing(cls, v):
        if not v or any(u < 0 for u in v) or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"u_grid must be nonempty, nonnegative and strictly increasing, got {v}")
        return v


class CoherentConfig(_Config):
    alpha: tuple[float, ...] = (1.0,)
    kappa: tuple[float, ...] = (math.inf,)
    U0: float | None = Field(None, ge=0)
    trial: Literal["gaussian", "pekar"] = "gaussian"
    spacing: float = Field(DEFAULT_SPACING, gt=0)
    box: float = Field(DEFAULT_BOX, gt=0)

    @field_validator("alpha")
    @classmethod
    def positive_alpha(cls, v):
        if not v or any(a <= 0 for a in v):
            raise ValueError(f"alpha values must be positive, got {v}")
        return v

    @field_validator("kappa")
    @classmethod
    def nonnegative_kappa(cls, v):
        if not v or any(k < 0 for k in v):
            raise ValueError(f"kappa values must be nonnegative or inf, got {v}")
        return v


class GrossConfig(_Config):
    alpha: tuple[float, ...] = (1.0,)
    K: tuple[float, ...] = (10.0,)
    kappa: tuple[float, ...] = (math.inf,)
    threshold: bool = True

    @field_validator("alpha")
    @classmethod
    def positive_alpha(cls, v):
        if not v or any(not a > 0 for a in v):
            raise ValueError(f"alpha values must be positive, got {v}")
        return v

    @field_validator("K")
    @classmethod
    def nonnegative_split(cls, v):
        if not v or any(not K >= 0 or math.isinf(K) for K in v):
            raise ValueError(f"K values must be finite and nonnegative, got {v}")
        return v

    @field_validator("kappa")
    @classmethod
    def positive_kappa(cls, v):
        if not v or any(not k > 0 for k in v):
            raise ValueError(f"kappa values must be positive or inf, got {v}")
        return v


class FockConfig(_Config):
    """Truncated Fock toy: lattice, modes, occupation cap and the (E_bin, P) criterion query."""
    alpha: float = Field(1.0, ge=0)
    U0: float = Field(0.0, ge=0)
    P: tuple[float, float, float] = (0.0, 0.0, 0.0)
    lattice_nodes: int = Field(DEFAULT_LATTICE_NODES, ge=2)
    lattice_spacing: float = Field(DEFAULT_LATTICE_SPACING, gt=0)
    kappa: float = Field(DEFAULT_KAPPA, gt=0)
    shells: int = Field(DEFAULT_SHELLS, ge=1)
    per_shell: int = Field(DEFAULT_PER_SHELL, ge=2)
    n_max: int = Field(DEFAULT_N_MAX, ge=0)
    dimension_cap: int = Field(DEFAULT_DIMENSION_CAP, ge=1)
    tol: float = Field(LANCZOS_TOL, gt=0)
    E_bin: float | None = None
    binding: bool = False

    @field_validator("lattice_nodes")
    @classmethod
    def even_nodes(cls, v):
        if v % 2:
            raise ValueError(f"lattice_nodes must be even, got {v}")
        return v

    @field_validator("per_shell")
    @classmethod
    def even_per_shell(cls, v):
        if v % 2:
            raise ValueError(f"per_shell must be even, got {v}")
        return v


class PTConfig(_Config):
    U: float = Field(SQRT2, ge=0)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)


class RunManifest(BaseModel):
    """Everything needed to reproduce one command's scalar outputs."""
    command: str
    config: dict
    seed: int
    version: str = ARTIFACT_VERSION
    inputs: list[str] = Field(default_factory=list)
    outputs: list[str] = Field(default_factory=list)
    wall_time: float = 0.0
    tolerances: dict = Field(default_factory=dict)
    exit_code: int = 0

    @model_validator(mode="after")
    def seed_range(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        return self
