import json

import pytest

from planarperc import cli


@pytest.fixture(autouse=True)
def _cache(tmp_path, monkeypatch):
    monkeypatch.setenv("PLANARPERC_CACHE", str(tmp_path / "cache"))


def _json(capsys, argv):
    assert cli.run(argv) == 0
    return json.loads(capsys.readouterr().out)


def test_solve_crit_quad(capsys):
    doc = _json(capsys, ["solve", "--preset", "crit-quad", "--l-max", "256"])
    s = doc["summary"]
    assert s["Z"] == pytest.approx(2.0, abs=1e-9)
    assert s["p_c"] == pytest.approx(1 / 3, abs=1e-12)
    assert doc["meta"]["version"] == cli.VERSION_TAG and doc["meta"]["command"] == "solve"


def test_exit_codes(capsys, tmp_path):
    assert cli.run(["solve", "--preset", "nope"]) == 2
    assert "ConfigError" in capsys.readouterr().err
    w = tmp_path / "w.json"
    w.write_text(json.dumps({"explicit": [[2, 0.125]]}))
    assert cli.run(["solve", "--weights", str(w)]) == 3
    assert "NotAdmissible" in capsys.readouterr().err
    assert cli.run(["finite"]) == 2  # --p is required
    bad = tmp_path / "c.json"
    bad.write_text(json.dumps({"no_such_option": 1}))
    assert cli.run(["solve", "--config", str(bad)]) == 2


def test_config_defaults_and_flags(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"preset": "subcrit-quad(1/16)", "l_max": 128}))
    doc = _json(capsys, ["solve", "--config", str(cfg)])
    assert doc["summary"]["Z"] == pytest.approx(4 / 3, rel=1e-12)
    doc = _json(capsys, ["solve", "--config", str(cfg), "--preset", "crit-quad"])
    assert doc["summary"]["Z"] == pytest.approx(2.0, abs=1e-9)


def test_halfplane_csv_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"h{i}.csv"
        assert cli.run(["halfplane", "--runs", "200", "--cap", "2000", "--seed", "5",
                        "--l-max", "256", "--format", "csv", "--out", str(out), "--plot"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    head, cols = outs[0].decode().splitlines()[:2]
    assert head.startswith("# planarperc v") and "command=halfplane" in head
    assert cols == "run,tau_star,T_star,exit_zero,hcut_k,survived"
    assert (tmp_path / "h0.gp").read_text().count("plot 'h0.csv'") == 1


def test_config_hash_ignores_output_options(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["solve", "--l-max", "128", "--format", "csv"]
    cli.run(base + ["--out", str(a)])
    cli.run(base + ["--out", str(b), "--threads", "4"])
    ha = a.read_text().splitlines()[0].split("config_hash=")[1]
    assert ha == b.read_text().splitlines()[0].split("config_hash=")[1]
    assert len(ha) == 16 and int(ha, 16) >= 0
    cli.run(base + ["--out", str(b), "--seed", "3"])
    assert b.read_text().splitlines()[0].split("config_hash=")[1] != ha


def test_fit_command(capsys, tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("# comment\nx,y\n" + "".join(f"{2**i},{2.0**(-2 * i)}\n" for i in range(1, 12)))
    doc = _json(capsys, ["fit", "--in", str(data), "--window", "2:2048"])
    assert doc["summary"]["slope"] == pytest.approx(-2.0, abs=1e-12)
    assert cli.run(["fit", "--in", str(data), "--window", "oops"]) == 2


def test_oracle_and_gw(capsys):
    doc = _json(capsys, ["oracle", "--l-max", "512", "--kmax", "64", "--cyclic-kmax", "16"])
    assert doc["summary"]["max_cyclic_rel_gap"] <= 1e-12
    assert doc["summary"]["p"] == pytest.approx(1 / 3, abs=1e-12)
    assert len(doc["rows"]) == 65
    doc = _json(capsys, ["gw", "--runs", "3000", "--node-cap", "100000", "--l-max", "256"])
    assert doc["summary"]["m_mu"] == pytest.approx(1.0, abs=1e-9)
    # too few trees for a fit: reported, not fatal
    assert doc["summary"]["fit"] == {"error": "WindowTooSmall"}


def test_verify_feller(capsys):
    assert cli.run(["verify", "--suite", "feller", "--kmax", "64"]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["summary"]["passed"] is True
    assert "criterion  2 PASS" in captured.err
    assert cli.run(["verify", "--suite", "nope"]) == 2
    assert cli.run(["verify", "--criteria", "99"]) == 2
