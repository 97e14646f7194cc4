"""Command handlers: run one computation and write its result files.

Every handler takes the resolved pydantic config and the output directory and returns
(written paths, one-line summary, tolerances).
"""
import math
from pathlib import Path

import numpy as np
import pandas as pd

from src.core import coherent_bounds, ecg_pt, fock_toy, gross, radial_pekar
from src.core.constants import SQRT2
from src.core.debug_logger import print_debug, warn
from src.core.exceptions import OptimizerError
from src.io import write_curve_svg, write_json, write_radial_function, write_tsv

FORM_FACTOR_K_MAX = 30.0


def _emit(fmt, frame, document, out, stem, meta=None):
    paths = []
    if fmt in ("tsv", "both") and frame is not None:
        paths.append(write_tsv(frame, Path(out) / f"{stem}.tsv", meta))
    if fmt in ("json", "both") and document is not None:
        paths.append(write_json(document, Path(out) / f"{stem}.json"))
    return paths


def cmd_cp(config, out, fmt, jobs=1):
    scf, accuracy = config
    accuracy = accuracy.model_copy(update={"jobs": jobs})
    estimate = radial_pekar.compute_cp(accuracy, scf)
    meta = {"c_p": f"{estimate.c_p:.12f}", "error": f"{estimate.error_estimate:.3e}"}
    paths = _emit(fmt, estimate.levels, estimate.to_dict(), out, "cp", meta)
    if estimate.minimizer is not None:
        paths.append(write_radial_function(estimate.minimizer, Path(out) / "minimizer.tsv"))
    summary = f"c_p = {estimate.c_p:.10f} +- {estimate.error_estimate:.2e}"
    if estimate.flags:
        summary += " [" + "; ".join(estimate.flags) + "]"
    return paths, summary, {"scf_tol": scf.tol, "density_tol": scf.density_tol}


def cmd_pt(config, out, fmt, jobs=1):
    ansatz, breakdown, status = ecg_pt.optimize_ansatz(config.U, config.optimizer)
    document = {"U": config.U, "breakdown": breakdown.to_dict(), "status": status, "ansatz": ansatz.to_dict()}
    frame = pd.DataFrame([breakdown.to_dict()])
    paths = _emit(fmt, frame, document, out, "pt", {"status": status})
    text = Path(out) / "ansatz.txt"
    text.parent.mkdir(parents=True, exist_ok=True)
    text.write_text(ansatz.to_text(), encoding="utf-8")
    paths.append(text)
    return paths, f"c_bp({config.U:.6f}) <= {breakdown.total:.10f} ({status})", {"normalization": 1e-10}


def cmd_phase(config, out, fmt, jobs=1):
    c_p = config.c_p
    if c_p is None:
        c_p = radial_pekar.compute_cp(None, None).c_p
        print_debug(f"using computed c_p = {c_p:.10f}")
    curve = ecg_pt.binding_curve(config.u_grid, c_p, config.optimizer)
    if all(p.status.startswith("failed") for p in curve.points):
        raise OptimizerError("every point of the binding curve failed")
    uc = ecg_pt.estimate_uc(curve, config.optimizer, tol=config.uc_tol)
    diagnostics = ecg_pt.curve_diagnostics(curve)
    frame = curve.to_frame()
    paths = _emit(fmt, frame, curve.to_dict(), out, "binding_curve", {"c_p": f"{c_p:.12f}"})
    paths.append(write_tsv(frame[["U", "binding"]], Path(out) / "binding_plot.tsv"))
    finite = np.isfinite(frame["binding"].to_numpy())
    paths.append(write_curve_svg(frame["U"][finite], frame["binding"][finite], Path(out) / "binding_curve.svg"))
    paths.append(write_json({"u_c": uc.to_dict(), "diagnostics": diagnostics, "c_p": c_p}, Path(out) / "uc.json"))
    if uc.has_crossing:
        summary = (f"U_c >= {uc.u_c:.6f} (U_c/sqrt2 = {uc.u_c / SQRT2:.4f}), "
                   f"bracket [{uc.bracket[0]:.6f}, {uc.bracket[1]:.6f}]")
    else:
        summary = f"no sign change on the grid; U_c in [{uc.bracket[0]}, {uc.bracket[1]}]"
    return paths, summary, {"uc_tol": config.uc_tol}


def _trial(config):
    if config.trial == "gaussian":
        return radial_pekar.gaussian_trial(radial_pekar.make_grid(config.spacing, config.box))
    from src.cli.models import SCFConfig
    return radial_pekar.solve_choquard(SCFConfig(spacing=config.spacing, box=config.box)).phi


def cmd_coherent(config, out, fmt, jobs=1):
    phi = _trial(config)
    frame = coherent_bounds.bound_table(config.alpha, config.kappa, phi)
    paths = _emit(fmt, frame, {"trial": config.trial, "rows": frame}, out, "coherent_bounds")
    k_max = min(math.pi / phi.grid.spacing, FORM_FACTOR_K_MAX)
    ff = coherent_bounds.form_factor(phi.density(), np.linspace(0.0, k_max, 401))
    paths.append(write_tsv(ff.to_frame(), Path(out) / "form_factor.tsv", {"source_mass": f"{ff.source_mass:.12f}"}))
    if config.U0 is not None:
        binding = coherent_bounds.binding_bound_table(config.alpha, config.kappa, phi, config.U0)
        paths += _emit(fmt, binding, {"U0": config.U0, "rows": binding}, out, "coherent_binding")
    ratios = frame["total_over_alpha_sq"]
    return paths, f"{len(frame)} bounds, total/alpha^2 in [{ratios.min():.10f}, {ratios.max():.10f}]", {}


def cmd_gross(config, out, fmt, jobs=1):
    frame = gross.constants_table(config.alpha, config.K, config.kappa)
    document = {"rows": frame}
    if config.threshold:
        document["K_star"] = {str(a): gross.admissible_threshold(a) for a in config.alpha}
    paths = _emit(fmt, frame, document, out, "gross_constants")
    return paths, f"{len(frame)} rows, admissible: {int(frame['admissible'].sum())}/{len(frame)}", {"quad_rtol": 1e-10}


def cmd_fock(config, out, fmt, jobs=1):
    model = fock_toy.default_model(config.alpha, config.U0, config.P, config)
    P = np.asarray(config.P, dtype=float)
    P_values = [np.zeros(3)] if not np.any(P) else [np.zeros(3), P, -P]
    frame, report = fock_toy.dispersion_scan(model, P_values, tol=config.tol,
                                            dimension_cap=config.dimension_cap)
    document = {"model": model.to_dict(), "report": report, "rows": frame}
    lines = [f"dispersion checks passed: {report['passed']}"]
    if config.alpha == 0:
        closed = fock_toy.free_energy(model.at(P))
        e = float(frame.loc[np.all(frame[["P_x", "P_y", "P_z"]].to_numpy() == P, axis=1), "energy"].iloc[0])
        lines.append(f"free case: E = {e:.12f}, closed form {closed:.12f}, |diff| = {abs(e - closed):.1e}")
        document["free_case"] = {"energy": e, "closed_form": closed}
    E_bin = config.E_bin
    if config.binding:
        E_bin = fock_toy.toy_binding(model, tol=config.tol, dimension_cap=config.dimension_cap)
        document["toy_binding"] = E_bin
        lines.append(f"toy binding = {E_bin:.10f}")
    if E_bin is not None:
        holds, gap = fock_toy.existence_criterion(E_bin, P)
        document["criterion"] = {"E_bin": E_bin, "P": P.tolist(), "holds": holds, "gap_bound": gap}
        lines.append(f"ground state criterion at |P|={np.linalg.norm(P):.4f}: holds={holds}, gap bound {gap:.6f}")
    document["ionization_note"] = fock_toy.ionization_note()
    paths = _emit(fmt, frame, document, out, "dispersion")
    if not report["passed"]:
        warn(f"dispersion inequality violations: {report}")
    return paths, " | ".join(lines), {"lanczos_tol": config.tol}
