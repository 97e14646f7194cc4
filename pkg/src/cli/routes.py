"""Subcommand table: flags, config model and handler for each command."""
from dataclasses import dataclass
from typing import Callable

from src.cli import handlers
from src.cli.models import (CoherentConfig, ExtrapolationConfig, FockConfig, GrossConfig, OptimizerConfig,
                            PhaseConfig, PTConfig, SCFConfig)


@dataclass(frozen=True)
class Route:
    name: str
    help: str
    models: tuple
    handler: Callable
    flags: tuple


def _flag(name, dest, type_="float", help_=""):
    return (name, dest, type_, help_)


OPTIMIZER_FLAGS = (
    _flag("--basis-size", "basis_size", "int", "correlated Gaussian terms per ansatz"),
    _flag("--restarts", "restarts", "int", "random restarts of the full optimization"),
    _flag("--maxfev", "maxfev", "int", "Nelder-Mead evaluation cap"),
)

ROUTES = {
    "cp": Route("cp", "single-polaron constant c_p by extrapolated SCF", (SCFConfig, ExtrapolationConfig),
                handlers.cmd_cp, (
                    _flag("--spacing-ladder", "spacings", "floats", "comma separated spacings"),
                    _flag("--box", "box", "float", "box radius for every level"),
                    _flag("--order", "order", "int", "Richardson order"),
                    _flag("--mixing", "mixing", "float", "density mixing in (0, 1]"),
                    _flag("--tol", "tol", "float", "SCF energy tolerance"),
                    _flag("--no-box-check", "box_check", "false", "skip the half-box comparison"),
                    _flag("--box-tol", "box_tol", "float", "|E(R) - E(R/2)| that flags box sensitivity"),
                )),
    "pt": Route("pt", "upper bound on c_bp(U) from one optimized ansatz", (PTConfig,), handlers.cmd_pt,
                (_flag("--U", "U", "float", "Coulomb strength"),) + OPTIMIZER_FLAGS),
    "phase": Route("phase", "binding curve and U_c estimate", (PhaseConfig,), handlers.cmd_phase, (
        _flag("--u-grid", "u_grid", "floats", "comma separated increasing U values"),
        _flag("--c-p", "c_p", "float", "use this c_p instead of computing it"),
        _flag("--uc-tol", "uc_tol", "float", "bisection tolerance on U_c"),
    ) + OPTIMIZER_FLAGS),
    "coherent": Route("coherent", "coherent-state cutoff bounds", (CoherentConfig,), handlers.cmd_coherent, (
        _flag("--alpha", "alpha", "floats", "comma separated couplings"),
        _flag("--kappa", "kappa", "floats", "comma separated cutoffs (inf allowed)"),
        _flag("--U0", "U0", "float", "also emit product bipolaron bounds at this U0"),
        _flag("--trial", "trial", "str", "gaussian or pekar"),
    )),
    "gross": Route("gross", "Gross transformation constants", (GrossConfig,), handlers.cmd_gross, (
        _flag("--alpha", "alpha", "floats", "comma separated couplings"),
        _flag("--K", "K", "floats", "comma separated infrared splits"),
        _flag("--kappa", "kappa", "floats", "comma separated cutoffs (inf allowed)"),
        _flag("--no-threshold", "threshold", "false", "skip the admissible K* search"),
    )),
    "fock": Route("fock", "truncated Fock toy: dispersion, binding, existence criterion", (FockConfig,),
                  handlers.cmd_fock, (
                      _flag("--alpha", "alpha", "float", "coupling"),
                      _flag("--U0", "U0", "float", "Coulomb strength"),
                      _flag("--P", "P", "floats", "total momentum as x,y,z"),
                      _flag("--lattice-nodes", "lattice_nodes", "int", "even node count per axis"),
                      _flag("--lattice-spacing", "lattice_spacing", "float", "lattice spacing"),
                      _flag("--kappa", "kappa", "float", "mode cutoff"),
                      _flag("--shells", "shells", "int", "radial mode shells"),
                      _flag("--per-shell", "per_shell", "int", "modes per shell (even)"),
                      _flag("--n-max", "n_max", "int", "total phonon occupation cap"),
                      _flag("--E-bin", "E_bin", "float", "binding energy for the existence criterion"),
                      _flag("--binding", "binding", "true", "compute the toy binding energy"),
                  )),
}

NESTED = {"optimizer": OptimizerConfig}
