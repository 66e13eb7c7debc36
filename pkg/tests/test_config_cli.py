import json
import math

import pytest

import wedgeqft as wq
from wedgeqft.cli import main, resolve_config_path
from wedgeqft.config import load_config
from wedgeqft.errors import ConfigError

MINIMAL = """
[model]
name = demo
epsilon = -1
mass = 1.0
zeros = 0.0, {imag}
"""


def write(tmp_path, text, name="model.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_load_catalogue_configs():
    for name in ("free", "ising", "shg-b050", "resonance-pi4"):
        cfg = load_config(resolve_config_path(f"catalogue:{name}"))
        assert cfg.model_name in (name, name.replace(".cfg", ""))
        assert cfg.grid.count >= 7


def test_catalogue_models_match_expectations():
    shg = load_config(resolve_config_path("catalogue:shg-b050")).model
    assert shg.epsilon == -1
    assert abs(shg.zeros[0] - 1j * math.pi / 2) < 1e-12
    res = load_config(resolve_config_path("catalogue:resonance-pi4")).model
    assert res.epsilon == -1                     # fermionic subfamily
    assert abs(wq.kappa(res) - math.pi / 4) < 1e-12


def test_minimal_config(tmp_path):
    p = write(tmp_path, MINIMAL.format(imag=math.pi / 2))
    cfg = load_config(str(p))
    assert cfg.model.epsilon == -1
    assert len(cfg.model.zeros) == 1
    assert cfg.grid.count == 41                  # defaults apply


def test_line_anchored_errors(tmp_path):
    bad = "[model]\nepsilon = -1\nmass = oops\n"
    p = write(tmp_path, bad)
    with pytest.raises(ConfigError) as err:
        load_config(str(p))
    assert err.value.line == 3
    assert str(p) in str(err.value)

    bad = "[model]\nepsilon = -1\n[grid]\ncount = 40\n"
    p = write(tmp_path, bad, "bad2.cfg")
    with pytest.raises(ConfigError) as err:
        load_config(str(p))
    assert err.value.line == 4

    bad = "[model]\nepsilon = -1\nnonsense_key = 3\n"
    p = write(tmp_path, bad, "bad3.cfg")
    with pytest.raises(ConfigError) as err:
        load_config(str(p))
    assert err.value.line == 3

    bad = "[mystery]\nx = 1\n"
    p = write(tmp_path, bad, "bad4.cfg")
    with pytest.raises(ConfigError) as err:
        load_config(str(p))
    assert err.value.line == 1

    bad = "[model]\nepsilon = -1\nzeros = 0.0\n"
    p = write(tmp_path, bad, "bad5.cfg")
    with pytest.raises(ConfigError) as err:
        load_config(str(p))
    assert err.value.line == 3


def test_unmatched_zero_rejected_without_mirroring(tmp_path):
    text = ("[model]\nepsilon = -1\nzeros = 0.4, 0.3\nauto_mirror = false\n")
    p = write(tmp_path, text)
    with pytest.raises(ConfigError):
        load_config(str(p))
    # with auto-mirroring the same config is fine
    text = "[model]\nepsilon = -1\nzeros = 0.4, 0.3\nauto_mirror = true\n"
    p = write(tmp_path, text, "ok.cfg")
    cfg = load_config(str(p))
    assert len(cfg.model.zeros) == 2


def test_overrides(tmp_path):
    p = write(tmp_path, MINIMAL.format(imag=math.pi / 2))
    cfg = load_config(str(p), overrides=["algebra.tol=1e-10", "grid.count=9"])
    assert cfg.algebra.tol == 1e-10
    assert cfg.grid.count == 9
    with pytest.raises(ConfigError):
        load_config(str(p), overrides=["no_dots"])


def test_cli_schema(capsys):
    assert main(["verify-scattering", "--schema"]) == 0
    out = capsys.readouterr().out
    schema = json.loads(out)
    assert "smatrix" in schema


def test_cli_missing_config_exit2(tmp_path, capsys):
    code = main(["verify-scattering", "--config", str(tmp_path / "nope.cfg"),
                 "--out", str(tmp_path / "out")])
    assert code == 2
    err = capsys.readouterr().err
    assert json.loads(err.strip())["error"]["kind"] == "config"


def test_cli_pass_and_artifacts(tmp_path, capsys):
    code = main(["verify-scattering", "--config", "catalogue:ising",
                 "--out", str(tmp_path / "out"), "--format", "csv"])
    assert code == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["all_passed"] is True
    assert report["seed"] == 0xD15EA5E
    assert (tmp_path / "out" / "verify-scattering.csv").exists()
    assert (tmp_path / "out" / "timings.json").exists()
    # runtimes are deliberately outside the canonical report
    assert "runtime" not in json.dumps(report)


def test_cli_corrupt_model_fails_suite(tmp_path, capsys):
    text = ("[model]\nepsilon = 1\nzeros = 0.4, 0.3; -0.4, 0.3\n"
            "auto_mirror = false\n")
    p = write(tmp_path, text)
    code = main(["verify-scattering", "--config", str(p),
                 "--out", str(tmp_path / "out")])
    assert code == 0      # properly mirrored pair passes

    text = ("[model]\nepsilon = 1\nzeros = 0.4, 0.3; 0.5, 0.2\n"
            "auto_mirror = true\n")
    p2 = write(tmp_path, text, "c2.cfg")
    code = main(["verify-scattering", "--config", str(p2),
                 "--out", str(tmp_path / "out2")])
    assert code == 0      # auto-mirroring repairs the list

    # the rejection path: unpaired zero without mirroring is a config error
    text = ("[model]\nepsilon = 1\nzeros = 0.4, 0.3\nauto_mirror = false\n")
    p3 = write(tmp_path, text, "c3.cfg")
    assert main(["verify-scattering", "--config", str(p3),
                 "--out", str(tmp_path / "out3")]) == 2

    # the negative-control path: the escape hatch builds the broken model
    # and the relation suite fails with residuals reported
    text = ("[model]\nepsilon = 1\nzeros = 0.4, 0.3\nallow_unpaired = true\n")
    p4 = write(tmp_path, text, "c4.cfg")
    code = main(["verify-scattering", "--config", str(p4),
                 "--out", str(tmp_path / "out4")])
    assert code == 1
    report = json.loads((tmp_path / "out4" / "report.json").read_text())
    assert report["suites"]["verify-scattering"]["summary"]["unitarity"] > 1e-12
    capsys.readouterr()


def test_cli_nonconvergence_exit3(tmp_path, capsys, monkeypatch):
    from wedgeqft import cli as cli_mod
    from wedgeqft.suites import SuiteResult

    def stub(cfg, rng):
        return SuiteResult("verify-scattering", True, {"note": "stub"},
                           nonconverged=True)

    monkeypatch.setitem(cli_mod.SUITE_FUNCTIONS, "verify-scattering", stub)
    p = write(tmp_path, MINIMAL.format(imag=math.pi / 2))
    code = main(["verify-scattering", "--config", str(p),
                 "--out", str(tmp_path / "out")])
    assert code == 3
    capsys.readouterr()


def test_cli_suite_failure_exit1(tmp_path, capsys, monkeypatch):
    # force a failure by tightening a tolerance far below reachable
    p = write(tmp_path, MINIMAL.format(imag=math.pi / 3))
    code = main(["verify-locality", "--config", str(p),
                 "--out", str(tmp_path / "out"),
                 "--tol-override", "locality.contour_tol=1e-30"])
    assert code == 1
    capsys.readouterr()


def test_cli_determinism(tmp_path, capsys):
    args = ["verify-scattering", "--config", "catalogue:shg-b050"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    ra = (tmp_path / "a" / "report.json").read_bytes()
    rb = (tmp_path / "b" / "report.json").read_bytes()
    assert ra == rb
    capsys.readouterr()


def test_cli_seed_recorded(tmp_path, capsys):
    code = main(["smatrix", "--config", "catalogue:free",
                 "--out", str(tmp_path / "out"), "--seed", "0x1234"])
    assert code == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["seed"] == 0x1234
    capsys.readouterr()
