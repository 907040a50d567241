import json
import os

import numpy as np
import pytest

import hullstop.cli as cli
from hullstop import (
    ExperimentConfig,
    InvariantViolation,
    compare_criteria,
    run_experiment,
    verify_states_file,
)


def cfg_for(tmp_path, **kw):
    base = dict(n=7, dim=2, topology="erdos_renyi", edge_prob=0.4, seed=5,
                engine="ratio", stopping="radius", rho=1e-3,
                out_dir=str(tmp_path / "out"))
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_json_round_trip(tmp_path):
    cfg = cfg_for(tmp_path, norm=float("inf"), dbound=4, rho_relative=True)
    text = cfg.to_json()
    assert json.loads(text)["norm"] == "inf"
    back = ExperimentConfig.from_json(text)
    assert back == cfg


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(n=0).validate()
    with pytest.raises(ValueError):
        ExperimentConfig(dim=0).validate()
    with pytest.raises(ValueError):
        ExperimentConfig(topology="grid").validate()
    with pytest.raises(ValueError):
        ExperimentConfig(engine="gossip").validate()
    with pytest.raises(ValueError):
        ExperimentConfig(stopping="oracle").validate()
    with pytest.raises(ValueError):
        ExperimentConfig(stopping="radius", rho=None).validate()
    with pytest.raises(ValueError):
        ExperimentConfig(norm=3).validate()
    with pytest.raises(ValueError):
        ExperimentConfig(k_max=0).validate()
    assert ExperimentConfig().validate() is not None


def test_run_experiment_radius_outputs(tmp_path):
    cfg = cfg_for(tmp_path)
    res = run_experiment(cfg)
    for name in ("graph.json", "config.json", "states.csv", "termination.csv",
                 "summary.json"):
        assert os.path.exists(res.paths[name])
    s = res.summary
    assert s["halted"] and s["halt_k"] == s["k_steps"]
    assert s["guarantee_2rho_ok"] is True
    assert s["final_spread"] <= 2 * s["rho"]
    assert s["bandwidth_bits"] == 33
    assert s["dbound"] >= 1
    # summary on disk matches the returned one
    on_disk = json.loads(open(res.paths["summary.json"]).read())
    assert on_disk == json.loads(json.dumps(s))


def test_run_experiment_is_byte_deterministic(tmp_path):
    cfg = cfg_for(tmp_path, stopping="box", dim=3)
    res1 = run_experiment(cfg)
    blobs = {n: open(p, "rb").read() for n, p in res1.paths.items()}
    res2 = run_experiment(cfg_for(tmp_path, stopping="box", dim=3))
    for name, path in res2.paths.items():
        assert open(path, "rb").read() == blobs[name], name


def test_run_experiment_none_stopping(tmp_path):
    cfg = cfg_for(tmp_path, stopping="none", rho=None, k_max=25)
    res = run_experiment(cfg)
    assert "termination.csv" not in res.paths
    s = res.summary
    assert not s["halted"] and s["halt_k"] is None and s["k_steps"] == 25
    assert s["bandwidth_bits"] == 0 and s["guarantee_2rho_ok"] is None


def test_run_experiment_relative_rho(tmp_path):
    cfg = cfg_for(tmp_path, rho=0.05, rho_relative=True)
    res = run_experiment(cfg)
    assert res.rho_abs != pytest.approx(0.05)
    assert res.summary["rho"] == res.rho_abs
    assert res.summary["final_spread"] <= 2 * res.rho_abs


def test_verify_states_file_matches_run(tmp_path):
    cfg = cfg_for(tmp_path)
    res = run_experiment(cfg)
    checked = verify_states_file(res.paths["states.csv"], 2.0)
    assert checked["k_steps"] == res.summary["k_steps"]
    assert checked["final_spread"] == res.summary["final_spread"]


def test_row_engine_experiment(tmp_path):
    cfg = cfg_for(tmp_path, engine="row", stopping="radius")
    res = run_experiment(cfg)
    assert res.summary["halted"] and res.summary["engine"] == "row"


def test_compare_criteria_rows(tmp_path):
    cfg = cfg_for(tmp_path, dim=3, rho=1e-3)
    rows = compare_criteria(cfg)
    assert [r["method"] for r in rows] == ["radius", "box", "hull"]
    by = {r["method"]: r for r in rows}
    assert all(r["halted"] for r in rows)
    assert all(r["within_2rho"] for r in rows)
    assert by["radius"]["extra_bits"] == 33
    assert by["box"]["extra_bits"] == 2 * 32 * 3
    assert by["hull"]["extra_bits"] >= 32 * 3
    assert by["box"]["extra_bits"] > by["radius"]["extra_bits"]
    # box and hull decide on exact global quantities, radius is conservative
    assert by["box"]["halt_k"] <= by["radius"]["halt_k"]
    with pytest.raises(ValueError):
        compare_criteria(cfg_for(tmp_path, stopping="none", rho=None))


# --- command line ---


def test_cli_run_and_artifacts(tmp_path, capsys):
    out = str(tmp_path / "r")
    rc = cli.main(["run", "--nodes", "8", "--dim", "2", "--seed", "3",
                   "--rho", "0.001", "--out-dir", out])
    assert rc == 0
    summary = json.loads(open(os.path.join(out, "summary.json")).read())
    assert summary["halted"] is True
    assert capsys.readouterr().out.strip() != ""


def test_cli_exit_code_config_error(tmp_path):
    assert cli.main(["run", "--nodes", "0", "--out-dir", str(tmp_path)]) == 1
    assert cli.main(["frobnicate"]) == 1
    assert cli.main(["run", "--norm", "7"]) == 1


def test_cli_exit_code_non_halt(tmp_path):
    rc = cli.main(["run", "--nodes", "6", "--rho", "1e-15", "--k-max", "15",
                   "--out-dir", str(tmp_path / "nh")])
    assert rc == 2


def test_cli_exit_code_invariant_violation(tmp_path, monkeypatch):
    def boom(cfg):
        raise InvariantViolation("forced")
    monkeypatch.setattr(cli, "run_experiment", boom)
    rc = cli.main(["run", "--nodes", "6", "--out-dir", str(tmp_path / "iv")])
    assert rc == 3


def test_cli_compare(tmp_path, capsys):
    out = str(tmp_path / "c")
    rc = cli.main(["compare", "--nodes", "7", "--dim", "3", "--seed", "2",
                   "--rho", "0.001", "--out-dir", out])
    assert rc == 0
    rows = json.loads(open(os.path.join(out, "compare.json")).read())
    assert [r["method"] for r in rows] == ["radius", "box", "hull"]
    text = capsys.readouterr().out
    assert "radius" in text and "box" in text and "hull" in text


def test_cli_hull(tmp_path):
    out = str(tmp_path / "h")
    rc = cli.main(["hull", "--nodes", "6", "--dim", "2", "--seed", "4",
                   "--points", "3", "--out-dir", out])
    assert rc == 0
    summary = json.loads(open(os.path.join(out, "summary.json")).read())
    assert summary["agreement"] is True
    lines = open(os.path.join(out, "hull_rounds.csv")).read().splitlines()
    assert lines[0] == "round,node,message"
    assert len(lines) > 6


def test_cli_lse(tmp_path):
    out = str(tmp_path / "l")
    rc = cli.main(["lse", "--nodes", "10", "--degree", "2", "--seed", "1",
                   "--out-dir", out])
    assert rc == 0
    summary = json.loads(open(os.path.join(out, "summary.json")).read())
    assert summary["final_max_error"] < 1e-6
    assert os.path.exists(os.path.join(out, "bound.csv"))
    assert os.path.exists(os.path.join(out, "dataset.csv"))


def test_cli_lse_reads_dataset(tmp_path):
    data = tmp_path / "d.csv"
    rng = np.random.default_rng(0)
    xs = rng.uniform(-2, 2, 12)
    ys = 1.0 + 2.0 * xs + rng.normal(0, 0.01, 12)
    data.write_text("x,y\n" + "".join(f"{a},{b}\n" for a, b in zip(xs, ys)))
    out = str(tmp_path / "l2")
    rc = cli.main(["lse", "--degree", "1", "--data", str(data), "--seed", "2",
                   "--out-dir", out])
    assert rc == 0
    summary = json.loads(open(os.path.join(out, "summary.json")).read())
    assert summary["n"] == 12


def test_cli_funccalc(tmp_path):
    out = str(tmp_path / "f")
    rc = cli.main(["funccalc", "--nodes", "5", "--function", "max",
                   "--seed", "6", "--out-dir", out])
    assert rc == 0
    summary = json.loads(open(os.path.join(out, "summary.json")).read())
    assert summary["certificate_ok"] is True
    assert summary["holder_ok_every_step"] is True


def test_cli_byte_identical_reruns(tmp_path):
    out = str(tmp_path / "det")
    args = ["run", "--nodes", "7", "--dim", "3", "--seed", "9",
            "--stopping", "box", "--rho", "0.001", "--out-dir", out]
    assert cli.main(args) == 0
    blobs = {}
    for name in os.listdir(out):
        blobs[name] = open(os.path.join(out, name), "rb").read()
    assert cli.main(args) == 0
    for name, blob in blobs.items():
        assert open(os.path.join(out, name), "rb").read() == blob, name
