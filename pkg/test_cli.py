#!/usr/bin/env python3
"""
Command-line tests

Runs main() in-process: exit codes, JSON documents on stdout, status lines
on stderr, and byte-determinism of the generate -> extract ->
principal-axes -> cross-validate pipeline.
"""

import json

import numpy as np
import pytest

from config import SPEED_OF_LIGHT, SPEED_OF_LIGHT_ENV, tolerance
from main import main, parse_tolerances
from src.errors import ValidationError
from src.gtensor_core import ZeemanTriple, build_zeeman
from src.matrix_io import from_g, from_zeeman, load_matrix_file, write_matrix_file
from src.modelgen import FixtureSpec, random_g
from src.spin_algebra import SpinQuantum, spin_matrices


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_g(tmp_path, g, name="g.json", two_s=1):
    path = tmp_path / name
    write_matrix_file(from_g(np.asarray(g, dtype=float), two_s), str(path))
    return str(path)


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "spinham 1.0.0" in capsys.readouterr().out


def test_spin_matrices_spin_half(capsys):
    code, out, err = run(capsys, "spin-matrices", "--two-s", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "spin"
    assert doc["data"][2] == [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-0.5, 0.0]]]
    assert doc["data"][0][0][1] == [0.5, 0.0]
    assert "commutator residual" in err


def test_spin_matrices_table(capsys):
    code, out, _ = run(capsys, "spin-matrices", "--two-s", "3", "--table")
    assert code == 0
    assert "SPIN MATRICES" in out


def test_spin_matrices_dimension_cap(capsys):
    code, out, err = run(capsys, "spin-matrices", "--two-s", "99")
    assert code == 2
    assert "dimension cap" in err
    assert out == ""


def test_json_error_document(capsys):
    code, out, _ = run(capsys, "spin-matrices", "--two-s", "99", "--json")
    assert code == 2
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert doc["error"]["kind"] == "dimension"
    assert doc["error"]["exit_code"] == 2


def test_principal_axes_free_electron(capsys, tmp_path):
    code, out, _ = run(capsys, "principal-axes", "--input", write_g(tmp_path, 2 * np.eye(3)), "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert doc["command"] == "principal-axes"
    assert doc["result"]["g_values"] == pytest.approx([2.0, 2.0, 2.0])
    assert doc["result"]["det_sign"] == 1


def test_principal_axes_negative_determinant(capsys, tmp_path):
    g = [[0.0, 2.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 2.0]]
    code, out, _ = run(capsys, "principal-axes", "--input", write_g(tmp_path, g), "--json")
    assert code == 0
    result = json.loads(out)["result"]
    assert result["det_sign"] == -1
    assert sum(1 for x in result["g_values"] if x < 0) == 1


def test_principal_axes_singular(capsys, tmp_path):
    g = random_g(FixtureSpec(3, SpinQuantum(1), singular_rows=1)).g
    code, out, _ = run(capsys, "principal-axes", "--input", write_g(tmp_path, g), "--json")
    assert code == 0
    result = json.loads(out)["result"]
    assert result["singular"] is True
    assert result["g_values"][2] == 0.0


def test_principal_axes_table(capsys, tmp_path):
    code, out, _ = run(capsys, "principal-axes", "--input", write_g(tmp_path, 2 * np.eye(3)))
    assert code == 0
    assert "PRINCIPAL AXES" in out


def test_malformed_input(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"kind": "g_tensor", "two_s": 1, "data": [[1, 2], [0, 1, 0], [0, 0, 1]]}')
    code, _, err = run(capsys, "principal-axes", "--input", str(path))
    assert code == 2
    assert "data[0]" in err

    code, _, _ = run(capsys, "principal-axes", "--input", str(tmp_path / "missing.json"))
    assert code == 2


def test_wrong_kind(capsys, tmp_path):
    code, _, _ = run(capsys, "extract", "--input", write_g(tmp_path, 2 * np.eye(3)))
    assert code == 2


def test_extract_recovers_fixture(capsys, tmp_path):
    spec = FixtureSpec(21, SpinQuantum(2), det_sign=-1)
    zeeman = tmp_path / "zeeman.json"
    code, _, _ = run(capsys, "generate", "--seed", "21", "--two-s", "2", "--det-sign", "-1",
                     "--output", str(zeeman))
    assert code == 0
    code, out, err = run(capsys, "extract", "--input", str(zeeman))
    assert code == 0
    assert "span" in err
    doc = json.loads(out)
    assert doc["kind"] == "g_tensor"
    assert doc["c"] == SPEED_OF_LIGHT
    extracted = np.array(doc["data"])
    truth = random_g(spec).g
    assert np.allclose(np.linalg.svd(extracted, compute_uv=False),
                       np.linalg.svd(truth, compute_uv=False), atol=1e-10)
    assert np.linalg.det(extracted) < 0


def test_extract_doublet(capsys, tmp_path):
    zeeman = tmp_path / "zeeman.json"
    run(capsys, "generate", "--seed", "4", "--two-s", "1", "--output", str(zeeman))
    _, general, _ = run(capsys, "extract", "--input", str(zeeman))
    code, doublet, _ = run(capsys, "extract", "--input", str(zeeman), "--doublet")
    assert code == 0
    assert np.allclose(json.loads(general)["data"], json.loads(doublet)["data"], atol=1e-12)


def test_extract_model_violation(capsys, tmp_path):
    sm = spin_matrices(SpinQuantum(3))
    zt = build_zeeman(2 * np.eye(3), sm, SPEED_OF_LIGHT)
    cubic = ZeemanTriple(sm.s, zt.hx, zt.hy, zt.hz + 1e-3 * np.linalg.matrix_power(sm.sz, 3))
    path = tmp_path / "cubic.json"
    write_matrix_file(from_zeeman(cubic, SPEED_OF_LIGHT), str(path))
    code, out, err = run(capsys, "extract", "--input", str(path))
    assert code == 4
    assert out == ""
    code, _, _ = run(capsys, "alt-diag", "--input", str(path))
    assert code == 4


def test_splittings_free_electron(capsys, tmp_path):
    code, out, _ = run(capsys, "splittings", "--input", write_g(tmp_path, 2 * np.eye(3)),
                       "--field", "0", "0", "1", "--json")
    assert code == 0
    result = json.loads(out)["result"]
    expected = 1 / (2 * SPEED_OF_LIGHT)
    assert result["levels"] == pytest.approx([-expected, expected], abs=1e-15)
    assert result["m_values"] == [-0.5, 0.5]
    assert result["g_eff"] == pytest.approx(2.0)
    assert result["numeric_residual"] <= 1e-12


def test_splittings_zero_field_table(capsys, tmp_path):
    code, out, _ = run(capsys, "splittings", "--input", write_g(tmp_path, 2 * np.eye(3), two_s=2),
                       "--field", "0", "0", "0")
    assert code == 0
    assert "Zeeman levels" in out


def test_alt_diag_needs_principal_frame(capsys, tmp_path):
    zeeman = tmp_path / "zeeman.json"
    run(capsys, "generate", "--seed", "8", "--two-s", "3", "--output", str(zeeman))
    code, _, err = run(capsys, "alt-diag", "--input", str(zeeman))
    assert code == 2
    assert "not diagonal" in err

    code, out, _ = run(capsys, "alt-diag", "--input", str(zeeman), "--principal-frame", "--json")
    assert code == 0
    result = json.loads(out)["result"]
    truth = random_g(FixtureSpec(8, SpinQuantum(3))).g
    expected = np.sqrt(np.linalg.eigvalsh(truth @ truth.T)[::-1])
    assert np.allclose(np.abs(result["g_values"]), expected, atol=1e-9)
    assert result["residual"] <= 1e-9
    assert len(result["u"]) == 4


def test_alt_diag_table(capsys, tmp_path):
    path = tmp_path / "diag.json"
    sm = spin_matrices(SpinQuantum(1))
    write_matrix_file(from_zeeman(build_zeeman(np.diag([2.1, 1.9, 2.0]), sm, SPEED_OF_LIGHT)), str(path))
    code, out, _ = run(capsys, "alt-diag", "--input", str(path))
    assert code == 0
    assert "ALTERNATIVE DIAGONALIZATION" in out


def test_cross_validate_random_trials(capsys):
    code, out, _ = run(capsys, "cross-validate", "--trials", "5", "--seed", "7", "--two-s", "2", "--json")
    assert code == 0
    result = json.loads(out)["result"]
    assert result["trials"] == 5
    assert result["max_deviation"] <= 1e-9
    assert len(result["results"]) == 5


def test_cross_validate_input_file(capsys, tmp_path):
    g = np.diag([2.0023, 2.1, 1.9])
    code, out, _ = run(capsys, "cross-validate", "--input", write_g(tmp_path, g), "--json")
    assert code == 0
    row = json.loads(out)["result"]["results"][0]
    assert row["seed"] is None
    assert row["principal"] == pytest.approx([2.1, 2.0023, 1.9])


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--two-s", "1", "--trials", "100", "--seed", "3", "--json")
    assert code == 0
    result = json.loads(out)["result"]
    assert result["passed"] is True
    assert all(v <= 1e-10 for v in result["residuals"].values())

    code, _, _ = run(capsys, "verify", "--two-s", "2", "--trials", "20", "--seed", "3", "--random-rep")
    assert code == 0


def test_verify_contract_violation(capsys):
    code, _, _ = run(capsys, "verify", "--two-s", "3", "--trials", "100", "--seed", "1",
                     "--tol", "theorem=1e-300")
    assert code == 3
    assert tolerance("theorem") == 1e-10


def test_generate_is_byte_identical(capsys):
    _, first, _ = run(capsys, "generate", "--seed", "42", "--two-s", "3")
    _, second, _ = run(capsys, "generate", "--seed", "42", "--two-s", "3")
    assert first == second
    assert json.loads(first)["kind"] == "zeeman_triple"
    _, other, _ = run(capsys, "generate", "--seed", "43", "--two-s", "3")
    assert other != first


def test_generate_g_tensor_kind(capsys, tmp_path):
    path = tmp_path / "g.json"
    code, _, _ = run(capsys, "generate", "--seed", "5", "--two-s", "1", "--kind", "g_tensor",
                       "--singular-rows", "2", "--output", str(path))
    assert code == 0
    mf = load_matrix_file(str(path))
    assert np.linalg.matrix_rank(mf.to_g().g, tol=1e-10) == 1


def test_generate_rejects_det_sign_with_singular_rows(capsys):
    code, _, _ = run(capsys, "generate", "--seed", "5", "--two-s", "1", "--det-sign", "-1",
                     "--singular-rows", "1")
    assert code == 2


def test_speed_of_light_precedence(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(SPEED_OF_LIGHT_ENV, "100")
    _, out, _ = run(capsys, "generate", "--seed", "1", "--two-s", "1", "--kind", "g_tensor")
    assert json.loads(out)["c"] == 100.0
    _, out, _ = run(capsys, "generate", "--seed", "1", "--two-s", "1", "--kind", "g_tensor", "--c", "50")
    assert json.loads(out)["c"] == 50.0

    # the file's own c sits between the flag and the environment
    path = tmp_path / "g.json"
    write_matrix_file(from_g(2 * np.eye(3), 1, 10.0), str(path))
    _, out, _ = run(capsys, "splittings", "--input", str(path), "--field", "0", "0", "1", "--json")
    assert json.loads(out)["result"]["levels"][1] == pytest.approx(0.5 / 10.0)

    monkeypatch.setenv(SPEED_OF_LIGHT_ENV, "abc")
    code, _, _ = run(capsys, "generate", "--seed", "1", "--two-s", "1")
    assert code == 2


def test_tolerance_overrides():
    assert parse_tolerances(["span=1e-6", "irrep=1e-7"]) == {"span": 1e-6, "irrep": 1e-7}
    with pytest.raises(ValidationError):
        parse_tolerances(["nonsense=1e-3"])
    with pytest.raises(ValidationError):
        parse_tolerances(["span"])
    with pytest.raises(ValidationError):
        parse_tolerances(["span=-1"])


def test_unknown_tolerance_exit_code(capsys, tmp_path):
    code, _, _ = run(capsys, "principal-axes", "--input", write_g(tmp_path, 2 * np.eye(3)),
                     "--tol", "nonsense=1")
    assert code == 2


def test_pipeline_is_byte_deterministic(capsys, tmp_path):
    def pipeline(folder):
        folder.mkdir()
        zeeman, g = folder / "zeeman.json", folder / "g.json"
        outputs = []
        for argv in (
            ["generate", "--seed", "2024", "--two-s", "3", "--det-sign", "-1", "--output", str(zeeman)],
            ["extract", "--input", str(zeeman), "--output", str(g)],
            ["principal-axes", "--input", str(g), "--json"],
            ["cross-validate", "--input", str(g), "--json"],
        ):
            code, out, _ = run(capsys, *argv)
            assert code == 0
            outputs.append(out)
        # the first two steps only print status lines naming their output paths
        return outputs[2:], zeeman.read_bytes(), g.read_bytes()

    first = pipeline(tmp_path / "a")
    second = pipeline(tmp_path / "b")
    assert first == second
    principal = json.loads(first[0][0])["result"]
    assert principal["det_sign"] == -1


@pytest.mark.parametrize("argv", [
    ["cross-validate", "--trials", "0"],
    ["cross-validate", "--seed", "-1", "--trials", "3"],
    ["verify", "--two-s", "1", "--trials", "0"],
    ["verify", "--two-s", "1", "--seed", "-1"],
])
def test_trial_options_are_input_errors(capsys, argv):
    code, out, err = run(capsys, *argv, "--json")
    assert code == 2
    assert json.loads(out)["error"]["exit_code"] == 2
    assert "--trials" in err or "--seed" in err


def test_splittings_eigvecs_are_complex_pairs(capsys, tmp_path):
    code, out, _ = run(capsys, "splittings", "--input", write_g(tmp_path, 2 * np.eye(3)),
                       "--field", "1", "0", "0", "--json")
    assert code == 0
    vecs = json.loads(out)["result"]["eigvecs"]
    assert len(vecs) == 2 and all(len(z) == 2 for row in vecs for z in row)
