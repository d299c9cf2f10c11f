"""Command line: outputs, exit codes and machine format."""

import re
import subprocess
import sys

import pytest

from fedosov_lab.cli import FIXTURES, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", "--config", "flat-2d")
    assert code == 0
    assert out.splitlines()[0] == "config: flat-2d; dim 2; bounds (J=10, D=8, K=3)"
    assert "omega antisymmetric: PASS" in out
    assert out.endswith("status: PASS\n")


def test_flat_gamma(capsys):
    code, out, _ = run(capsys, "gamma", "--config", "flat-2d")
    assert code == 0
    assert out.splitlines()[0] == "γ = 0; δ⁻¹γ = 0: PASS; min filtration degree: ∞"


def test_curved_gamma(capsys):
    code, out, _ = run(capsys, "gamma", "--config", "curved-2d")
    assert code == 0
    assert "min filtration degree: 3" in out


def test_star(capsys):
    code, out, _ = run(capsys, "star", "--config", "flat-2d", "x1", "x2")
    assert code == 0
    assert out == "x1*x2 - (1/2)i ħ\nthrough ħ^3, bounds (J=10, D=8, K=3)\n"


def test_table(capsys):
    code, out, _ = run(capsys, "table", "--config", "flat-2d", "--probe", "1")
    assert code == 0
    assert "k=1 a=(1,0) b=(0,1) c=-1/2 i" in out
    assert "equals the Moyal-Weyl table: PASS" in out


def test_assoc(capsys):
    code, out, _ = run(capsys, "assoc", "--config", "curved-2d", "--order", "2")
    assert code == 0
    assert "residual ≡ 0 through ħ^2: PASS" in out
    code, out, _ = run(capsys, "assoc", "--config", "curved-2d", "--order", "2", "--random", "2", "--seed", "7")
    assert code == 0 and out.count("residual ≡ 0 through ħ^2: PASS") == 2


def test_assoc_explicit_triple(capsys):
    code, out, _ = run(capsys, "assoc", "--config", "flat-2d", "x1^2", "x2", "x1*x2")
    assert code == 0


def test_vey(capsys):
    code, out, _ = run(capsys, "vey", "--config", "curved-2d", "--probe", "3")
    assert code == 0
    assert "Q_2 - P^2 order <= 1: PASS" in out


def test_derivation(capsys):
    code, out, _ = run(capsys, "derivation", "--config", "flat-2d", "dx1", "--with", "dx2")
    assert code == 0
    assert "K = -y1\n" in out
    assert "bracket derivation is inner (D K = 0): PASS" in out


def test_momentum(capsys):
    code, out, _ = run(capsys, "momentum", "--config", "sp2-momentum")
    assert code == 0
    assert "lambda: 0 (momentum map candidate consistent)" in out


def test_lagrangian_reports_failure(capsys):
    code, out, _ = run(capsys, "lagrangian", "--config", "lagrangian-x2")
    assert code == 1
    assert "f∗g vanishes on L through ħ^3: FAIL" in out
    assert "  witness: f=x^(1,1) g=x^(1,1) a=(0,0) b=(0,0) m=2 J=() c=1/4" in out
    assert "γ ∈ (W⊗Λ¹)_L: PASS" in out


def test_extract_connection(capsys):
    code, out, _ = run(capsys, "extract-connection", "--config", "shear-2d")
    assert code == 0
    assert "T i=2 j=2 k=2 c=1/3" in out
    code, out, _ = run(capsys, "extract-connection", "--config", "curved-2d", "--probe", "self")
    assert code == 0


def test_input_errors_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[problem]\ndim = 2\n[omega]\n1 2 = 1\n2 1 = 1\n")
    code, _, err = run(capsys, "gamma", "--config", str(bad))
    assert code == 2
    assert err.startswith("error[omega-antisymmetry] omega[2,1] (line 5)")
    code, _, err = run(capsys, "gamma", "--config", str(tmp_path / "missing.cfg"))
    assert code == 2 and err.startswith("error[")
    code, _, err = run(capsys, "gamma", "--config", "flat-2d", "--bounds", "x")
    assert code == 2 and err.startswith("error[usage]")
    code, _, err = run(capsys, "star", "--config", "flat-2d", "x1", "y9")
    assert code == 2 and err.startswith("error[")


def test_validate_failure_lists_checks(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[problem]\ndim = 2\n[omega]\n1 2 = 1\n2 1 = 1\n")
    code, out, _ = run(capsys, "validate", "--config", str(bad))
    assert code == 2
    assert "omega antisymmetric: FAIL" in out


def test_usage_error_from_argparse(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gamma"])
    assert exc.value.code == 2


_RECORD = re.compile(r"^[a-z]+( [A-Za-z_0-9]+=\S.*)*$")


@pytest.mark.parametrize("cmd", [["gamma"], ["table", "--probe", "2"], ["validate"], ["vey", "--probe", "3"]])
def test_machine_output_is_deterministic_and_parseable(capsys, cmd):
    argv = [cmd[0], "--config", "curved-2d", "--format", "machine", *cmd[1:]]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    lines = first.splitlines()
    assert lines[0] == f"report command={cmd[0]}"
    assert lines[-1] == "status value=PASS"
    for line in lines:
        assert _RECORD.match(line), line
    series_terms = {}
    for line in lines:
        if line.startswith("series "):
            fields = dict(f.split("=", 1) for f in line.split()[1:])
            series_terms[fields["name"]] = int(fields["terms"])
    for name, n in series_terms.items():
        assert sum(1 for line in lines if line.startswith(f"term name={name} ")) == n


@pytest.mark.parametrize("name", FIXTURES)
def test_every_fixture_validates(capsys, name):
    code, _, _ = run(capsys, "validate", "--config", name)
    assert code == 0


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "fedosov_lab.cli", "star", "--config", "flat-2d", "x1", "x1"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "x1^2"
