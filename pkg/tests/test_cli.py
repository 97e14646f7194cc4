import json
import math

import pandas as pd
import pytest

from src.cli import main
from src.core import radial_pekar
from src.io import read_radial_function, write_radial_function


def _read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_gross_writes_tables_and_manifest(tmp_path):
    code = main(["gross", "--out", str(tmp_path), "--alpha", "1,2", "--K", "1,5,10", "--no-threshold"])
    assert code == 0
    frame = pd.read_csv(tmp_path / "gross_constants.tsv", sep="\t", comment="#")
    assert len(frame) == 6
    assert (tmp_path / "gross_constants.tsv").read_text().startswith("# schema=1")
    manifest = _read_json(tmp_path / "manifest.json")
    assert manifest["command"] == "gross"
    assert manifest["exit_code"] == 0
    assert manifest["config"]["alpha"] == [1.0, 2.0]


def test_configuration_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("BIPOLARON_GROSS_ALPHA", "3")
    main(["gross", "--out", str(tmp_path / "env"), "--no-threshold", "--format", "json"])
    assert _read_json(tmp_path / "env" / "manifest.json")["config"]["alpha"] == [3.0]

    config = tmp_path / "run.cfg"
    config.write_text("[gross]\nalpha = 1.5\nK = 2\n", encoding="utf-8")
    main(["gross", "--out", str(tmp_path / "file"), "--config", str(config), "--no-threshold", "--format", "json"])
    from_file = _read_json(tmp_path / "file" / "manifest.json")["config"]
    assert from_file["alpha"] == [1.5]
    assert from_file["K"] == [2.0]

    main(["gross", "--out", str(tmp_path / "flag"), "--config", str(config), "--alpha", "0.5",
          "--no-threshold", "--format", "json"])
    assert _read_json(tmp_path / "flag" / "manifest.json")["config"]["alpha"] == [0.5]


def test_free_fock_model_reports_the_closed_form(tmp_path, capsys):
    code = main(["fock", "--out", str(tmp_path), "--alpha", "0", "--lattice-nodes", "4", "--per-shell", "2",
                 "--n-max", "1", "--P", "0.2,0,0", "--E-bin", "0.5", "--format", "json"])
    assert code == 0
    document = _read_json(tmp_path / "dispersion.json")
    free = document["free_case"]
    assert abs(free["energy"] - free["closed_form"]) < 1e-10
    assert document["report"]["passed"] is True
    assert document["criterion"]["holds"] is True
    assert "free case" in capsys.readouterr().out


def test_coherent_table_with_infinite_cutoff(tmp_path):
    code = main(["coherent", "--out", str(tmp_path), "--alpha", "1,4", "--kappa", "4,inf", "--format", "both"])
    assert code == 0
    frame = pd.read_csv(tmp_path / "coherent_bounds.tsv", sep="\t", comment="#")
    assert len(frame) == 4
    uncut = frame[frame["kappa"] == math.inf]["total_over_alpha_sq"].to_numpy()
    assert uncut[0] == pytest.approx(uncut[1], rel=1e-10)


def test_single_level_cp(tmp_path, capsys):
    code = main(["cp", "--out", str(tmp_path), "--spacing-ladder", "0.05", "--box", "10", "--no-box-check"])
    assert code == 0
    assert "single level" in capsys.readouterr().out


def test_unknown_flag_is_a_usage_error(tmp_path):
    assert main(["gross", "--out", str(tmp_path), "--bogus"]) == 1


def test_invalid_value_is_a_usage_error(tmp_path):
    assert main(["fock", "--out", str(tmp_path), "--lattice-nodes", "5"]) == 1


def test_numerical_failure_exits_with_two(tmp_path, monkeypatch):
    monkeypatch.setenv("BIPOLARON_CP_MAX_ITER", "1")
    code = main(["cp", "--out", str(tmp_path), "--spacing-ladder", "0.05", "--box", "10", "--no-box-check"])
    assert code == 2
    assert _read_json(tmp_path / "manifest.json")["exit_code"] == 2


@pytest.mark.slow
def test_phase_without_binding_reports_an_open_bracket(tmp_path):
    code = main(["phase", "--out", str(tmp_path), "--u-grid", "2.0,3.0", "--c-p", "-0.10851",
                 "--basis-size", "1", "--restarts", "1", "--maxfev", "40"])
    assert code == 0
    uc = _read_json(tmp_path / "uc.json")["u_c"]
    assert uc["has_crossing"] is False
    assert uc["bracket"] == [0.0, 2.0]
    assert (tmp_path / "binding_curve.svg").is_file()


def test_cp_saves_the_minimizer_with_its_grid(tmp_path):
    code = main(["cp", "--out", str(tmp_path), "--spacing-ladder", "0.05", "--box", "10", "--no-box-check"])
    assert code == 0
    path = tmp_path / "minimizer.tsv"
    assert path.read_text(encoding="utf-8").startswith("# spacing=0.05 box=")
    phi = read_radial_function(path)
    assert phi.grid.node_count == 200
    assert phi.normalized
    assert radial_pekar.pekar_energy(phi).total < -0.106
    assert str(path) in _read_json(tmp_path / "manifest.json")["outputs"]


def test_radial_function_file_reads_back_exactly(tmp_path, gaussian_phi):
    path = write_radial_function(gaussian_phi, tmp_path / "phi.tsv")
    restored = read_radial_function(path)
    assert restored.grid.same_as(gaussian_phi.grid)
    assert (restored.values == gaussian_phi.values).all()
    assert restored.normalized


def test_coherent_writes_the_form_factor(tmp_path):
    assert main(["coherent", "--out", str(tmp_path), "--alpha", "1", "--kappa", "inf"]) == 0
    frame = pd.read_csv(tmp_path / "form_factor.tsv", sep="\t", comment="#")
    assert list(frame.columns) == ["k", "rho"]
    assert frame["rho"].iloc[0] == pytest.approx((2.0 * math.pi) ** -1.5, rel=1e-8)


@pytest.mark.parametrize("flags", [["--alpha=-1"], ["--alpha", "0"], ["--K=-2"], ["--kappa", "0"]])
def test_nonpositive_gross_inputs_are_usage_errors(tmp_path, flags):
    assert main(["gross", "--out", str(tmp_path), "--no-threshold"] + flags) == 1
