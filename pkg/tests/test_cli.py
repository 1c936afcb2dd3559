import json
import math
import subprocess
import sys

import numpy as np
import pytest

from latsec import catalog
from latsec.bounds import info_bound_mod_lambda
from latsec.cli import main, parse_grid
from latsec.errors import DomainError
from latsec.lattice import Lattice, lattice_to_json, save_lattice
from latsec.theta import flatness


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_grid():
    assert np.allclose(parse_grid("-20:20:5"), [-20, -10, 0, 10, 20])
    assert np.allclose(parse_grid("1,2,4"), [1, 2, 4])
    for bad in ("3:1:3", "1,1", "a:b:c", "1:2:0"):
        with pytest.raises(DomainError):
            parse_grid(bad)


def test_flatness_bitwise(capsys):
    code, out, _ = run(capsys, "flatness", "--name", "Z1", "--sigma", "1")
    assert code == 0
    assert float(out) == flatness(Lattice([[1.0]]), 1.0).value


def test_flatness_from_file(capsys, tmp_path):
    p = tmp_path / "bcc.json"
    save_lattice(catalog.make("BCC"), p)
    code, out, _ = run(capsys, "flatness", "--lattice", str(p), "--snr-grid=-6:6:3", "--path", "dual")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "snr_db,flatness,tail_estimate,path" and len(lines) == 4
    assert all(line.endswith(",dual") for line in lines[1:])


def test_info_trivial_point(capsys):
    code, out, _ = run(capsys, "info", "--E", "0.5", "--M", "256")
    assert code == 0 and float(out) == pytest.approx(8.0)
    assert float(out) == info_bound_mod_lambda(0.5, 256)


def test_info_domain_error(capsys):
    code, _, err = run(capsys, "info", "--bound", "h", "--E", "0.9", "--M", "16")
    assert code == 2 and "epsilon" in err


def test_ecdp_fading_matches_library(capsys):
    from latsec.bounds import CosetCode, RayleighFast, ecdp_fading

    code, out, _ = run(capsys, "ecdp", "--name", "Z4", "--model", "ff", "--sigma", "1")
    want = ecdp_fading(CosetCode.from_eve(Lattice(np.eye(4))), RayleighFast(1.0), 1.0).value
    assert code == 0 and float(out) == want


def test_ecdp_block_shape_error(capsys):
    code, _, _ = run(capsys, "ecdp", "--name", "Z3", "--model", "bf", "--block", "2", "--sigma", "1")
    assert code == 2


def test_mc_same_seed_identical_files(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        code, _, _ = run(capsys, "mc", "--name", "Z4", "--sigma", "1", "--samples", "300", "--seed", "7", "--out", str(p))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("mean,std_error,samples,seed\n")


def test_malformed_json_exit_4(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, err = run(capsys, "flatness", "--lattice", str(p), "--sigma", "1")
    assert code == 4 and "malformed" in err
    p.write_text(json.dumps({"ambient_dim": 3, "rank": 2, "basis_columns": [[1, 0]]}))
    code, _, _ = run(capsys, "flatness", "--lattice", str(p), "--sigma", "1")
    assert code == 4


def test_dependent_basis_is_domain_error(capsys, tmp_path):
    p = tmp_path / "dep.json"
    p.write_text(json.dumps({"label": "", "ambient_dim": 2, "rank": 2, "basis_columns": [[1, 2], [2, 4]]}))
    code, _, _ = run(capsys, "flatness", "--lattice", str(p), "--sigma", "1")
    assert code == 2


def test_budget_exit_3(capsys, monkeypatch):
    monkeypatch.setenv("LATSEC_POINT_BUDGET", "10")
    code, _, err = run(capsys, "theta", "--name", "E8", "--radius-sq", "4")
    assert code == 3 and "budget" in err


def test_theta_csv(capsys):
    code, out, _ = run(capsys, "theta", "--name", "E8", "--radius-sq", "4")
    assert code == 0 and out == "norm_sq,count\n0,1\n2,240\n4,2160\n"


def test_export_roundtrip(capsys):
    code, out, _ = run(capsys, "export", "--name", "D4")
    assert code == 0
    assert json.loads(out) == json.loads(json.dumps(lattice_to_json(catalog.make("D4"))))


def test_fig1_small_grid(capsys):
    code, out, _ = run(capsys, "fig1", "--snr-grid=-20:20:3")
    assert code == 0
    lines = out.split("\n")
    assert lines[0] == "snr_db,ecdp_Z8,ecdp_L,ecdp_E8,ecdp_A8star"
    assert "\r" not in out and out.endswith("\n")
    vals = [float(x) for x in lines[1].split(",")[1:]]
    assert all(math.isclose(v, 2**-8, rel_tol=0.01) for v in vals)


def test_console_script_entry_point(tmp_path):
    out = tmp_path / "i.txt"
    r = subprocess.run(
        [sys.executable, "-m", "latsec.cli", "info", "--E", "0.2", "--M", "64", "--bound", "gaussian", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 0
    assert float(out.read_text()) == pytest.approx(6.0)
