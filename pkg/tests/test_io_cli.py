import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given

from conftest import seeds
from qspectra import instances as inst
from qspectra.cli import RunConfig, main, parse_config
from qspectra.errors import ParseError
from qspectra.io import dumps, load_matrix, load_spectrum, save, spectrum_csv
from qspectra.qlinalg import QMatrix, s_spectrum
from qspectra.quaternion import UNIT_I, Quaternion

I = UNIT_I.quaternion


@pytest.fixture
def diag_file(tmp_path):
    path = tmp_path / "A.json"
    save(QMatrix.diag([I, Quaternion(3.0)]), path)
    return path


# persistence


@given(seed=seeds)
def test_round_trip_is_byte_stable(tmp_path_factory, seed):
    d = tmp_path_factory.mktemp("rt")
    a = inst.random_matrix(np.random.default_rng(seed), 3)
    save(a, d / "a.json")
    b = load_matrix(d / "a.json")
    assert np.array_equal(a.data, b.data)  # 17 digits are lossless
    save(b, d / "b.json")
    assert (d / "a.json").read_bytes() == (d / "b.json").read_bytes()


def test_valid_file_loads(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"n": 2, "entries": [[[1, 0, 0, 0], [0, 1, 0, 0]], [[0, 0, 1, 0], [0, 0, 0, 1]]]}))
    a = load_matrix(p)
    assert a[0, 1] == I and a[1, 1] == Quaternion(0, 0, 0, 1)


@pytest.mark.parametrize(
    "entries, needle",
    [
        ([[[1, 0, 0], [0, 0, 0, 0]], [[0, 0, 0, 0], [1, 0, 0, 0]]], "entries[0][0]"),
        ([[[1, 0, 0, 0], [0, 0, 0, 0]], [[1, 0, 0, 0]]], "square"),
        ([[[1, 0, "x", 0]]], "entries[0][0]"),
    ],
)
def test_parse_errors_name_the_entry(tmp_path, entries, needle):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"entries": entries}))
    with pytest.raises(ParseError, match=needle.replace("[", r"\[").replace("]", r"\]")):
        load_matrix(p)


def test_parse_error_reports_line(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{\n "entries": [\n')
    with pytest.raises(ParseError, match="line"):
        load_matrix(p)
    with pytest.raises(ParseError):
        load_matrix(tmp_path / "missing.json")


def test_dumps_canonical_form():
    text = dumps({"b": 0.1, "a": [1, 2.5], "c": None, "d": float("inf")})
    assert text == '{\n "a": [1, 2.5],\n "b": 0.10000000000000001,\n "c": null,\n "d": null\n}'


def test_spectrum_file_round_trip(tmp_path, rng):
    sp = s_spectrum(inst.random_matrix(rng, 4))
    save(sp, tmp_path / "s.json")
    assert load_spectrum(tmp_path / "s.json") == sp
    assert spectrum_csv(sp).splitlines()[0] == "re,rho,mult"


# command line


def test_run_config_defaults(monkeypatch):
    monkeypatch.delenv("QSPECTRA_SEED", raising=False)
    cfg = parse_config(["spectrum"])
    assert (cfg.nodes, cfg.tol, cfg.seed, cfg.slice_unit) == (256, 1e-8, 0, None)
    assert RunConfig("verify").nodes == 256


def test_seed_env_fallback(monkeypatch):
    monkeypatch.setenv("QSPECTRA_SEED", "17")
    assert parse_config(["shift"]).seed == 17
    assert parse_config(["shift", "--seed", "3"]).seed == 3


def test_spectrum_command(diag_file, tmp_path):
    out = tmp_path / "out.json"
    assert main(["spectrum", "-i", str(diag_file), "-o", str(out), "--csv"]) == 0
    spheres = [(s["re"], s["rho"], s["mult"]) for s in json.loads(out.read_text())["spheres"]]
    assert spheres == [(0.0, 1.0, 1), (3.0, 0.0, 1)]
    assert out.with_suffix(".csv").read_text() == "re,rho,mult\n0.0,1.0,1\n3.0,0.0,1\n"


def test_riesz_command(diag_file, tmp_path):
    out = tmp_path / "P.json"
    assert main(["riesz", "-i", str(diag_file), "--sphere", "0,1", "-o", str(out), "--slice", "0,1,1"]) == 0
    obj = json.loads(out.read_text())
    p = np.array(obj["P"]["entries"])
    np.testing.assert_allclose(p[..., 0], [[1, 0], [0, 0]], atol=1e-10)
    assert obj["diagnostics"]["rank"] == 1
    assert obj["diagnostics"]["idempotency_residual"] <= 1e-8


def test_riesz_not_isolated(tmp_path, capsys):
    path = tmp_path / "B.json"
    save(QMatrix.diag([I, Quaternion(1e-6, 1)]), path)
    assert main(["riesz", "-i", str(path), "--sphere", "0,1", "--gap", "1e-5"]) == 1
    assert "NotIsolated" in capsys.readouterr().err


@pytest.mark.parametrize(
    "args, code, needle",
    [
        (["riesz", "--sphere", "5,1"], 1, "NotInSpectrum"),
        (["riesz", "--sphere", "0,1", "--slice", "0,0,0"], 1, "InvalidArgument"),
        (["funcalc"], 1, "InvalidArgument"),
        (["power", "--power", "0"], 1, "InvalidArgument"),
    ],
)
def test_domain_errors_exit_one(diag_file, capsys, args, code, needle):
    assert main([*args, "-i", str(diag_file)]) == code
    assert needle in capsys.readouterr().err


def test_io_errors_exit_two(tmp_path, capsys):
    assert main(["spectrum", "-i", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"entries": [[[1, 2, 3]]]}')
    assert main(["spectrum", "-i", str(bad)]) == 2
    assert "entries[0][0]" in capsys.readouterr().err
    assert main(["spectrum"]) == 2
    assert main(["spectrum", "--sphere", "abc"]) == 2
    assert main(["spectrum", "-i", str(bad), "-o", str(tmp_path / "no" / "dir.json")]) == 2


def test_bad_seed_env_exits_two(monkeypatch):
    monkeypatch.setenv("QSPECTRA_SEED", "x")
    assert main(["shift"]) == 2


def test_other_commands(diag_file, tmp_path):
    for args in (
        ["decompose"],
        ["decompose", "--sphere", "3,0"],
        ["funcalc", "--poly", "1,-2,1"],
        ["power", "--power", "3"],
    ):
        out = tmp_path / f"{args[0]}.json"
        assert main([*args, "-i", str(diag_file), "-o", str(out), "--csv"]) == 0
        assert out.with_suffix(".csv").exists()
    fc = json.loads((tmp_path / "funcalc.json").read_text())
    assert fc["residual"] <= 1e-8
    assert json.loads((tmp_path / "power.json").read_text())["hausdorff"] <= 1e-10
    dec = json.loads((tmp_path / "decompose.json").read_text())
    assert dec["multiplicity_match"] and dec["split_error"] <= 1e-6


def test_shift_command(tmp_path):
    out = tmp_path / "shift.json"
    assert main(["shift", "--size", "8", "--rank", "1", "--trials", "3", "--seed", "42", "-o", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert obj["N"] == 8 and obj["seed"] == 42 and len(obj["trials"]) == 3
    assert main(["shift", "--size", "8", "--rank", "8"]) == 1


def test_cli_determinism(diag_file, tmp_path):
    blobs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        main(["riesz", "-i", str(diag_file), "--sphere", "3,0", "-o", str(out), "--csv"])
        blobs.append(out.read_bytes() + out.with_suffix(".csv").read_bytes())
    assert blobs[0] == blobs[1]


def test_verify_command_and_script(tmp_path):
    out = tmp_path / "v.json"
    proc = subprocess.run(
        [sys.executable, "-m", "qspectra.cli", "verify", "--seed", "11", "-o", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "FAIL" not in proc.stdout and "PASS" in proc.stdout
    checks = json.loads(out.read_text())["checks"]
    assert all(c["passed"] for c in checks)


def test_verify_fails_nonzero(monkeypatch, capsys):
    from qspectra import verify

    monkeypatch.setattr(verify, "CHECKS", [lambda rng: verify.CheckRecord("forced", False, 1.0, 0.0)])
    import qspectra.cli as cli

    monkeypatch.setattr(cli, "run_suite", verify.run_suite)
    assert main(["verify"]) == 1
    assert "FAIL" in capsys.readouterr().out
