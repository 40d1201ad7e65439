import csv
import json

import pytest

from qfichain import cli


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def read_rows(path):
    with open(path) as fh:
        header = fh.readline()
        assert header.startswith("#")
        return list(csv.DictReader(fh))


EQUILIBRIUM = {"protocol": "equilibrium", "model": {"h": 0.5}, "betas": [None, 2.0],
               "subsystem": {"left": 0, "sizes": [2, 3]}, "sources": ["simulation", "oracle"],
               "output": "out/eq"}


def test_equilibrium_run_agrees_with_oracle(tmp_path, capsys):
    assert cli.main(["run", str(write(tmp_path, EQUILIBRIUM))]) == 0
    sim = read_rows(tmp_path / "out/eq_simulation.csv")
    ora = read_rows(tmp_path / "out/eq_oracle.csv")
    assert len(sim) == len(ora) == 4
    for a, b in zip(sim, ora):
        assert float(a["I_half"]) == pytest.approx(float(b["I_half"]), abs=1e-10)
        assert float(a["qfi_over4"]) == pytest.approx(float(b["qfi_over4"]), rel=1e-4)
        assert a["config_hash"] == b["config_hash"] and a["version"] == cli.__version__
    assert sim[0]["beta"] == "inf"
    assert (tmp_path / "out/eq.log").exists()


def test_output_is_deterministic(tmp_path):
    path = write(tmp_path, EQUILIBRIUM)
    cli.main(["run", str(path)])
    first = (tmp_path / "out/eq_simulation.csv").read_bytes()
    cli.main(["run", str(path)])
    assert (tmp_path / "out/eq_simulation.csv").read_bytes() == first


@pytest.mark.parametrize("cfg,sources", [
    ({"protocol": "single_kick", "model": {"h": 0.5}, "subsystem": {"half_widths": [4]},
      "times": {"rescaled": [0.0, 0.5]}, "kick": {"kind": "majorana_odd"}},
     {"simulation", "semiclassical"}),
    ({"protocol": "kick_grid", "model": {"h": 0.5}, "subsystem": {"half_widths": [3]},
      "times": {"values": [1.0]}, "kick": {"spacing": 4, "count": 1}},
     {"simulation", "semiclassical"}),
    ({"protocol": "kick_periodic", "model": {"h": 0.5}, "subsystem": {"half_widths": [3]},
      "times": {"rescaled": [1.5]}, "kick": {"sites": [0]}},
     {"simulation", "semiclassical"}),
    ({"protocol": "global_quench", "model": {"h": 0.4}, "quench": {"h0": 0.0},
      "subsystem": {"sizes": [6]}, "times": {"rescaled": [0.5], "scale": "size"}},
     {"simulation", "semiclassical"}),
    ({"protocol": "beyond_sc", "model": {"h": 0.5}, "subsystem": {"half_widths": [20]},
      "times": {"values": [40.0]}}, {"beyond_sc"}),
])
def test_protocols_write_one_csv_per_source(tmp_path, cfg, sources):
    cfg = dict(cfg, output="res/run")
    assert cli.main(["run", str(write(tmp_path, cfg))]) == 0
    written = {p.name[len("run_"):-len(".csv")] for p in (tmp_path / "res").glob("*.csv")}
    assert written == sources
    for s in sources:
        rows = read_rows(tmp_path / f"res/run_{s}.csv")
        assert rows and all(r["source"] == s and r["protocol"] == cfg["protocol"] for r in rows)


def test_sweep_tags_axis(tmp_path):
    cfg = dict(EQUILIBRIUM, sources=["simulation"], betas=[None])
    path = write(tmp_path, cfg)
    assert cli.main(["sweep", str(path), "--axis", "model.h", "--values", "0.3,0.7"]) == 0
    rows = read_rows(tmp_path / "out/eq_sweep_simulation.csv")
    assert [r["axis_value"] for r in rows] == ["0.3", "0.3", "0.7", "0.7"]
    assert {r["h"] for r in rows} == {"0.3", "0.7"}


@pytest.mark.parametrize("argv_tail", [["--values", ""], ["--values", "a,b"]])
def test_sweep_rejects_bad_values(tmp_path, argv_tail, capsys):
    path = write(tmp_path, EQUILIBRIUM)
    assert cli.main(["sweep", str(path), "--axis", "model.h", *argv_tail]) == cli.EXIT_CONFIG


@pytest.mark.parametrize("mutate", [
    lambda c: c.update(bogus=1),
    lambda c: c["model"].update(J=1.0),
    lambda c: c.update(protocol="teleport"),
    lambda c: c.update(betas=[]),
    lambda c: c.update(times={"values": [1.0]}),
    lambda c: c["subsystem"].update(sizes=[20]),
    lambda c: c.update(sources=["telepathy"]),
])
def test_config_errors_exit_two(tmp_path, mutate, capsys):
    cfg = json.loads(json.dumps(EQUILIBRIUM))
    mutate(cfg)
    assert cli.main(["run", str(write(tmp_path, cfg))]) == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_unreadable_config(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["run", str(bad)]) == cli.EXIT_CONFIG


def test_numerical_failure_exit_three(tmp_path, monkeypatch, capsys):
    def boom(cfg):
        raise ArithmeticError("diverged")
    monkeypatch.setattr(cli, "execute", boom)
    assert cli.main(["run", str(write(tmp_path, EQUILIBRIUM))]) == cli.EXIT_NUMERICAL


def test_validate_quick(capsys):
    assert cli.main(["validate", "--quick"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_warnings_go_to_run_log(tmp_path):
    import warnings

    from qfichain.dynamics import LightconeOverflowWarning

    def noisy():
        warnings.warn("cone reached the edge", LightconeOverflowWarning)
        return 7

    assert cli._with_log(tmp_path / "w" / "run", noisy) == 7
    assert "cone reached the edge" in (tmp_path / "w" / "run.log").read_text()
