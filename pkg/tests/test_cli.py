import json
from pathlib import Path

import pytest

from spikeblocks import cli, config, regimes
from spikeblocks.master import read_manifest

DESK_CFG = """\
regime = master
seed = 2026
stages = 2
b_floor = 1
lambda_schedule = const(1)
b_schedule = const(1)
trials_schedule = const(1)
max_exponents = 100000
"""

BOUNDED_CFG = """\
regime = bounded
stages = 2
epsilon = 1/2
max_trials = 2
"""


def run(args):
    return cli.main(args)


def test_build_master(tmp_path):
    cfg = tmp_path / "desk.cfg"
    cfg.write_text(DESK_CFG)
    out = tmp_path / "m.json"
    assert run(["build", "--config", str(cfg), "--out", str(out)]) == 0
    m = read_manifest(out)
    assert len(m.stages) == 2
    assert m.seed == 2026


def test_build_seed_override(tmp_path):
    cfg = tmp_path / "desk.cfg"
    cfg.write_text(DESK_CFG)
    out = tmp_path / "m.json"
    run(["build", "--config", str(cfg), "--out", str(out), "--seed", "555"])
    assert read_manifest(out).seed == 555


def test_build_bounded(tmp_path):
    cfg = tmp_path / "b.cfg"
    cfg.write_text(BOUNDED_CFG)
    out = tmp_path / "hs.json"
    assert run(["build", "--config", str(cfg), "--out", str(out)]) == 0
    hm = regimes.hitset_from_text(out.read_text())
    assert len(hm.stages) == 2


def test_build_malformed_config_names_field(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("regime = master\nwibble = 3\n")
    out = tmp_path / "m.json"
    assert run(["build", "--config", str(cfg), "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "wibble" in err


def test_endpoint_config_build(tmp_path):
    cfg = tmp_path / "e.cfg"
    cfg.write_text(
        "regime = endpoint\nstages = 2\nb_floor = 1\ngamma = 1\nmax_trials = 1\n"
        "max_exponents = 100000\n")
    out = tmp_path / "m.json"
    assert run(["build", "--config", str(cfg), "--out", str(out)]) == 0
    m = read_manifest(out)
    assert m.regime == "endpoint"


def test_lp_config_build(tmp_path):
    cfg = tmp_path / "lp.cfg"
    cfg.write_text("regime = lp\np = 2\nstages = 2\nb_floor = 1\nmax_trials = 1\n")
    out = tmp_path / "m.json"
    assert run(["build", "--config", str(cfg), "--out", str(out)]) == 0
    assert read_manifest(out).regime == "lp(p=2.0)"


def test_simulate_rejects_zero_samples(tmp_path, capsys):
    cfg = tmp_path / "desk.cfg"
    cfg.write_text(DESK_CFG)
    out = tmp_path / "m.json"
    run(["build", "--config", str(cfg), "--out", str(out)])
    rcode = run(["simulate", "--manifest", str(out), "--samples", "0",
                 "--out", str(tmp_path / "sim")])
    assert rcode == 2


def test_simulate_outputs(tmp_path):
    cfg = tmp_path / "desk.cfg"
    cfg.write_text(DESK_CFG)
    man = tmp_path / "m.json"
    run(["build", "--config", str(cfg), "--out", str(man)])
    sim = tmp_path / "sim"
    assert run(["simulate", "--manifest", str(man), "--samples", "2000",
                "--seed", "4", "--out", str(sim)]) == 0
    good = (sim / "good_events.csv").read_text()
    assert good.startswith("# spikeblocks-goodevents-v1")
    assert (sim / "averages.csv").exists()


def test_fourier_output_and_grid(tmp_path):
    cfg = tmp_path / "desk.cfg"
    cfg.write_text(DESK_CFG)
    man = tmp_path / "m.json"
    run(["build", "--config", str(cfg), "--out", str(man)])
    out = tmp_path / "tails.csv"
    assert run(["fourier", "--manifest", str(man), "--out", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("# spikeblocks-tailprofile-v1")
    out2 = tmp_path / "tails2.csv"
    assert run(["fourier", "--manifest", str(man), "--grid", "1:41:10",
                "--out", str(out2)]) == 0
    assert len(out2.read_text().strip().split("\n")) == 2 + 5


def test_seed_env_var(monkeypatch):
    import argparse

    ns = argparse.Namespace(seed=None)
    monkeypatch.setenv(cli.ENV_SEED, "31415")
    assert cli._seed_from(ns) == 31415
    monkeypatch.setenv(cli.ENV_SEED, "not-a-number")
    with pytest.raises(config.ConfigError):
        cli._seed_from(ns)
    monkeypatch.delenv(cli.ENV_SEED)
    assert cli._seed_from(ns) == cli.DEFAULT_SEED
    assert cli._seed_from(argparse.Namespace(seed=7)) == 7


def test_caps_parsing():
    caps = cli._parse_caps("trials=7,stages=2")
    assert caps.max_trials == 7 and caps.max_stages == 2
    with pytest.raises(config.ConfigError):
        cli._parse_caps("bogus=1")


def test_report_aggregation(tmp_path):
    d = tmp_path / "run"
    d.mkdir()
    (d / "report.csv").write_text(
        "# spikeblocks-report-v1\nclaim,kind,observed,bound,ci_halfwidth,verdict,params\n"
        "bits-mean,mc,0.5,0.5,0.002,pass,\n")
    out = tmp_path / "summary.txt"
    assert run(["report", "--inputs", str(d), "--out", str(out)]) == 0
    assert "failures: 0" in out.read_text()
    (d / "report.csv").write_text(
        "# spikeblocks-report-v1\nclaim,kind,observed,bound,ci_halfwidth,verdict,params\n"
        "bits-mean,mc,0.9,0.5,0.002,FAIL,\n")
    assert run(["report", "--inputs", str(d)]) == 1


def test_parse_schedules():
    s = config.parse_schedule("geometric(1/2, 1/4)", "a")
    assert s(1) == pytest.approx(0.125)
    s2 = config.parse_schedule("sqrtlog(10)", "b")
    assert s2(1) > 10
    with pytest.raises(config.ConfigError):
        config.parse_schedule("mystery(3)", "c")


def test_parse_kv_errors():
    with pytest.raises(config.ConfigError):
        config.parse_kv("this is not a kv line")
    with pytest.raises(config.ConfigError):
        config.parse_kv("a = 1\na = 2\n")
