import json

import pytest

from transcend.cli import RunConfig, cmd_construct, cmd_verify, main, read_config_file


def run(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path)])


def test_construct_default(tmp_path, capsys):
    assert run(tmp_path, "construct") == 0
    doc = json.loads((tmp_path / "construction.json").read_text())
    assert doc["config"]["depth"] == 5
    assert float.fromhex(doc["levels"][0]["logR"]) == pytest.approx(4.1588830833596715, rel=0)
    out = capsys.readouterr().out
    assert out.splitlines()[1].split()[0] == "1"


def test_construct_capped(tmp_path, capsys):
    assert run(tmp_path, "construct", "--npow", "0.5", "--depth", "8") == 0
    doc = json.loads((tmp_path / "construction.json").read_text())
    assert doc["capped"] is True
    assert "capped" in capsys.readouterr().out


def test_construct_power_ledger(tmp_path):
    assert run(tmp_path, "construct", "--npow", "0.5", "--depth", "3") == 0
    doc = json.loads((tmp_path / "construction.json").read_text())
    lv1 = doc["levels"][0]
    assert lv1["n"] == {"mode": "exact", "value": 8}
    assert doc["levels"][1]["n"]["mode"] == "log_only"


def test_invalid_parameters(tmp_path, capsys):
    assert run(tmp_path, "construct", "--N", "3", "--lambda", "1.5") == 2
    err = capsys.readouterr().err
    assert err.count("invalid parameters") >= 2


def test_verify_default(tmp_path):
    assert run(tmp_path, "verify") == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["summary"]["fail"] == 0
    assert doc["config"]["seed"] == 0x5EED_CAFE
    assert doc["config"]["samples"] == 4096


def test_verify_strict_no_skip(tmp_path, capsys):
    assert run(tmp_path, "verify", "--npow", "0.5", "--depth", "3", "--strict-no-skip") == 1
    assert "skipped_log_only" in capsys.readouterr().out


def test_verify_loads_construction(tmp_path):
    assert run(tmp_path, "construct", "--depth", "4") == 0
    path = str(tmp_path / "construction.json")
    assert run(tmp_path, "verify", "--construction", path) == 0


def test_growth(tmp_path):
    assert run(tmp_path, "growth", "--npow", "0.5", "--depth", "3") == 0
    lines = (tmp_path / "growth.csv").read_text().splitlines()
    assert lines[0].startswith("# {")
    rows = [l.split(",") for l in lines if not l.startswith("#")]
    assert rows[0] == ["k", "logR_k", "n_k", "rho_hat", "rho_lower", "liminf_ratio"]
    assert float(rows[2][4]) >= 0.45


def test_growth_shallow(tmp_path):
    assert run(tmp_path, "growth", "--depth", "2") == 2


def test_render_and_dimension(tmp_path, capsys):
    assert run(tmp_path, "dimension", "--depth", "3", "--res", "256") == 0
    for name in ("render.ppm", "render.png", "mask.pbm", "boxcount.csv"):
        assert (tmp_path / name).exists()
    assert "slope" in capsys.readouterr().out


def test_dimension_empty_mask(tmp_path):
    assert run(tmp_path, "dimension", "--depth", "3", "--window", "0,1000,100,100", "--res", "64") == 3


def test_render_out_of_range(tmp_path):
    assert run(tmp_path, "render", "--depth", "2", "--window", "1e60,0,1,1", "--res", "16") == 2


def test_orbit(tmp_path):
    assert run(tmp_path, "orbit", "--z0", "96,0") == 0
    doc = json.loads((tmp_path / "orbit.json").read_text())
    assert doc["final_class"] == "FastEscaping"
    assert doc["steps"][1]["region"] == "B(1)"


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ndepth = 3\nn_kind = power\nn_param = 0.5\n")
    vals = read_config_file(str(cfg))
    assert vals["depth"] == 3
    assert run(tmp_path, "construct", "--config", str(cfg), "--depth", "2") == 0
    doc = json.loads((tmp_path / "construction.json").read_text())
    assert doc["config"]["depth"] == 2 and doc["config"]["n_kind"] == "power"


def test_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        cfg = RunConfig(out=str(d), depth=4)
        assert cmd_construct(cfg) == 0
        assert cmd_verify(cfg) == 0
    for name in ("construction.json", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
