import json
from fractions import Fraction

import pytest
from jsonschema import Draft7Validator

from ratapprox.cli import Config, main, schema_path, sci_str

GOLDEN = {
    "cf-phi": ["cf", "--alpha", "quad:1,1,5,2", "--depth", "10"],
    "cf-rat": ["cf", "--alpha", "rat:10/7"],
    "convergents": ["convergents", "--alpha", "quad:0,1,2,1", "--n", "4"],
    "ostrowski-int": ["ostrowski-int", "--alpha", "quad:-1,1,5,2", "--s", "11"],
    "ostrowski-real": [
        "ostrowski-real", "--alpha", "quad:-1,1,5,2", "--gamma", "rat:0",
        "--depth", "8", "--allow-orbit",
    ],
    "dist": [
        "dist", "--alpha", "quad:-1,1,5,2", "--gamma", "rat:0", "--s", "5",
        "--allow-orbit",
    ],
    "line": ["line", "--a", "3", "--b", "7", "--d", "1", "--count", "3"],
    "conic-orbit": ["conic-orbit", "--form", "1,-1,-1", "--d", "1", "--count", "4"],
    "laurent": ["laurent", "--form", "1,-1,-1", "--d", "1", "--terms", "4"],
    "build-psi": ["build-psi", "--alpha", "quad:-1,1,5,2", "--psi", "power:2",
                   "--count", "2", "--with-pairs"],
    "build-psi-exp": ["build-psi", "--alpha", "quad:-1,1,5,2", "--psi", "exp:1/2",
                       "--count", "2"],
    "cf-dec": ["cf", "--alpha", "dec:0.6180339887±0.0000000001", "--depth", "8"],
    "dist-direct-only": ["dist", "--alpha", "quad:-1,1,5,2", "--gamma", "rat:0",
                          "--s", "2", "--allow-orbit"],
    "ostrowski-real-dec": ["ostrowski-real", "--alpha", "quad:-1,1,5,2", "--gamma",
                            "dec:0.0901699437±0.0000000001", "--depth", "6"],
    "build-periodic": ["build-periodic", "--alpha", "quad:-1,1,5,2", "--count", "6"],
    "growth": ["growth", "--s", "7,14,21,28"],
}


def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_cf_phi_golden(capsys):
    code, out = run_cli(capsys, GOLDEN["cf-phi"])
    assert code == 0
    doc = json.loads(out)
    assert doc == {"a": [1] * 10, "K": 0, "L": 1}


def test_cf_rational_golden(capsys):
    code, out = run_cli(capsys, GOLDEN["cf-rat"])
    assert json.loads(out) == {"a": [1, 2, 3], "K": None, "L": None}


def test_conic_orbit_golden(capsys):
    code, out = run_cli(capsys, GOLDEN["conic-orbit"])
    doc = json.loads(out)
    assert doc["pairs"] == [["2", "1"], ["5", "3"], ["13", "8"], ["34", "21"]]
    assert doc["form"] == {"a": "1", "b": "-1", "c": "-1", "d": "1"}


def test_line_golden(capsys):
    code, out = run_cli(capsys, GOLDEN["line"])
    doc = json.loads(out)
    assert doc["pairs"] == [["1", "2"], ["4", "9"], ["7", "16"]]
    assert doc["gamma"] == [{"kind": "rat", "value": "1/7"}]


def test_build_psi_golden(capsys):
    code, out = run_cli(capsys, GOLDEN["build-psi"])
    doc = json.loads(out)
    assert doc["indices"] == [4, 12]
    assert doc["s"] == ["5", "238"]
    assert doc["certified"] is True
    assert doc["set"]["pairs"] == [["3", "5"], ["147", "238"]]


def test_every_command_deterministic_and_schema_valid(capsys):
    for name, argv in GOLDEN.items():
        code1, out1 = run_cli(capsys, argv)
        code2, out2 = run_cli(capsys, argv)
        assert code1 == code2 == 0, f"{name} failed: {out1}"
        assert out1 == out2, f"{name} output not byte-identical"
        command = argv[0]
        with open(schema_path(command), encoding="utf-8") as fh:
            schema = json.load(fh)
        Draft7Validator(schema).validate(json.loads(out1))


def test_domain_error_exit_code_and_schema(capsys):
    code, out = run_cli(
        capsys, ["ostrowski-real", "--alpha", "quad:-1,1,5,2", "--gamma", "rat:0",
                  "--depth", "6"]
    )
    assert code == 1
    doc = json.loads(out)
    assert doc["error"] == "GammaOnOrbit"
    with open(schema_path("error"), encoding="utf-8") as fh:
        Draft7Validator(json.load(fh)).validate(doc)


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["cf"])  # missing --alpha
    assert exc.value.code == 2


def test_blowup_is_reported(capsys):
    code, out = run_cli(
        capsys,
        ["--digit-budget", "12", "build-psi", "--alpha", "quad:-1,1,5,2",
         "--psi", "power:3", "--count", "8"],
    )
    assert code == 1
    assert json.loads(out)["error"] == "BlowUp"


def test_pairs_file_roundtrip(tmp_path, capsys):
    code, out = run_cli(capsys, ["line", "--a", "3", "--b", "7", "--d", "1",
                                  "--count", "8"])
    set_file = tmp_path / "line.json"
    set_file.write_text(out)
    code, out = run_cli(capsys, ["detect-line", "--pairs", str(set_file)])
    assert json.loads(out)["line"] == {"a": "3", "b": "7", "d": "1", "exceptions": 0}
    code, out = run_cli(capsys, ["approx-verify", "--set", str(set_file)])
    assert code == 0
    doc = json.loads(out)
    assert doc["report"]["verdict"] == "PASS"
    code, out = run_cli(capsys, ["detect-quad", "--pairs", str(set_file)])
    assert json.loads(out)["form"] is None


def test_detect_quad_cli(tmp_path, capsys):
    code, out = run_cli(capsys, ["conic-orbit", "--form", "1,-1,-1", "--d", "1",
                                  "--count", "6"])
    pair_file = tmp_path / "orbit.json"
    pair_file.write_text(out)
    code, out = run_cli(capsys, ["detect-quad", "--pairs", str(pair_file)])
    assert json.loads(out)["form"] == {"a": "1", "b": "-1", "c": "-1", "d": "1"}


def test_approx_fit_csv(tmp_path, capsys):
    code, out = run_cli(capsys, ["line", "--a", "1", "--b", "2", "--d", "1",
                                  "--count", "6"])
    set_file = tmp_path / "pairs.json"
    set_file.write_text(out)
    code, out = run_cli(
        capsys,
        ["approx-fit", "--alpha", "rat:1/2", "--order", "1", "--pairs",
         str(set_file), "--csv"],
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "s,r,residual,scaled_residual"
    assert all(line.endswith(",0,0") for line in lines[1:])


def test_config_file_and_env(tmp_path, capsys, monkeypatch):
    cfg_file = tmp_path / "ratapprox.cfg"
    cfg_file.write_text("seed_bound = 2\ndecay_tolerance = 1/500\n")
    # d=-11 on the golden form needs seed (1,3); bound 2 fails
    code, out = run_cli(
        capsys,
        ["--config", str(cfg_file), "conic-orbit", "--form", "1,-1,-1", "--d",
         "-11", "--count", "3"],
    )
    assert code == 1 and "seed" in json.loads(out)["message"]
    monkeypatch.setenv("RATAPPROX_CONFIG", str(cfg_file))
    code2, out2 = run_cli(
        capsys, ["conic-orbit", "--form", "1,-1,-1", "--d", "-11", "--count", "3"]
    )
    assert (code2, out2) == (code, out)
    # flag overrides the file
    code3, out3 = run_cli(
        capsys,
        ["--seed-bound", "100", "conic-orbit", "--form", "1,-1,-1", "--d", "-11",
         "--count", "3"],
    )
    assert code3 == 0
    monkeypatch.delenv("RATAPPROX_CONFIG")


def test_config_roundtrip():
    cfg = Config(precision_digits=77, decay_tolerance=Fraction(3, 1234))
    again = Config.from_text(cfg.to_text())
    assert again == cfg
    with pytest.raises(ValueError):
        Config.from_text("bogus_key = 3\n")
    with pytest.raises(ValueError):
        Config.from_text("digit_budget = -5\n")


def test_sci_str_deterministic():
    assert sci_str(Fraction(0)) == "0"
    assert sci_str(Fraction(1, 3), sig=5) == "3.3333e-01"
    assert sci_str(Fraction(-250), sig=3) == "-2.50e+02"
    assert sci_str(Fraction(999999, 1000), sig=3) == "1.00e+03"
    assert sci_str(Fraction(1, 10**50), sig=4) == "1.000e-50"


def test_build_psi_pairs_out_verifies(tmp_path, capsys):
    out_file = tmp_path / "psi_set.json"
    code, _ = run_cli(
        capsys,
        ["build-psi", "--alpha", "quad:-1,1,5,2", "--psi", "power:2", "--count",
         "3", "--pairs-out", str(out_file)],
    )
    assert code == 0
    code, out = run_cli(
        capsys, ["--decay-window", "3", "approx-verify", "--set", str(out_file)]
    )
    assert code == 0
    assert json.loads(out)["report"]["verdict"] == "PASS"
