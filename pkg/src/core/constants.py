"""Constants for the bipolaron strong-coupling toolkit."""
import math

# Coupling normalization, lambda_0 = (2 sqrt(2) pi)^(1/2)
LAMBDA0_SQ = 2.0 * math.sqrt(2.0) * math.pi
LAMBDA0 = math.sqrt(LAMBDA0_SQ)

# Unitary Fourier convention (2 pi)^(-3/2)
FOURIER_NORM = (2.0 * math.pi) ** -1.5

SQRT2 = math.sqrt(2.0)

# Closed-form oracles
GAUSSIAN_PEKAR_VALUE = -1.0 / (3.0 * math.pi)
PEKAR_LITERATURE_VALUE = -0.1085
UC_LITERATURE_RATIO = 1.1

# Radial Pekar defaults
DEFAULT_SPACING = 0.02
DEFAULT_BOX = 20.0
DEFAULT_MIXING = 0.3
DEFAULT_SCF_TOL = 1e-10
DEFAULT_SCF_MAX_ITER = 500
NORMALIZATION_TOL = 1e-8
SPACING_LADDER = (0.04, 0.02, 0.01)
LADDER_BOX = 24.0
# |E(R) - E(R/2)| above this flags the c_p estimate as box-sensitive
BOX_SENSITIVITY_TOL = 1e-4

# Correlated Gaussian defaults
DEFAULT_BASIS_SIZE = 6
DEFAULT_RESTARTS = 2
DEFAULT_SEED = 0x5EED
GRAM_CONDITION_TOL = 1e-12
PRUNE_OVERLAP = 1.0 - 1e-10
UC_BISECTION_TOL = 1e-3
# half-distance of the two-polaron seed; Coulomb and cross attraction fall off like 1/(2 s)
DISSOCIATED_SEPARATION = 1000.0
DEFAULT_U_GRID = tuple(SQRT2 * f for f in (0.0, 0.4, 0.8, 1.0, 1.05, 1.1, 1.15, 1.2, 1.5, 2.0))

# Quadrature
TAIL_RTOL = 1e-10
# Simpson nodes per band-limit sampling step of the radial form factor
BAND_OVERSAMPLING = 16

# Truncated Fock defaults
DEFAULT_LATTICE_NODES = 8
DEFAULT_LATTICE_SPACING = 0.5
DEFAULT_SHELLS = 1
DEFAULT_PER_SHELL = 6
DEFAULT_N_MAX = 2
DEFAULT_DIMENSION_CAP = 200_000
DEFAULT_KAPPA = 2.0
LANCZOS_TOL = 1e-9
LANCZOS_SEED = 0x5EED

# Table columns
BINDING_COLUMNS = ['U', 'c_bp_upper', 'binding', 'basis_size', 'status']
BOUND_COLUMNS = ['alpha', 'kappa', 'kinetic_like', 'field_gain', 'coulomb_term', 'total', 'total_over_alpha_sq']
GROSS_COLUMNS = ['alpha', 'K', 'kappa', 'C_K', 'C2_K', 'C3_K', 'E_cut', 'admissible']
DISPERSION_COLUMNS = ['P_x', 'P_y', 'P_z', 'P_abs', 'energy', 'residual', 'status']

ARTIFACT_VERSION = "1.0.0"
TSV_SCHEMA_VERSION = 1
