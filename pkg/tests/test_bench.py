import dataclasses
import json

import numpy as np
import pytest

from hfdemix import ConfigurationError
from hfdemix.bench import (CSV_COLUMNS, PROFILES, config_from_dict,
                           load_manifest_config, overlay_config, path_split,
                           run_sweep, run_trial, trial_seed)
from hfdemix.cli import main as cli_main

TINY = config_from_dict({
    "system": {"n": 16, "n_rf": 4, "f_c": 30e9, "downsample": 1},
    "channel": {"k": 2},
    "subspace": {"rank": 4, "grid_size": 256},
    "solver": {"max_iters": 150},
    "sweep": {"axis": "snr_db", "values": [5.0, 15.0]},
    "trials": 3,
    "base_seed": 77,
})


def test_path_split():
    assert path_split(4) == (2, 2)
    assert path_split(5) == (3, 2)
    assert path_split(1) == (1, 0)


def test_trial_seed_deterministic():
    s1 = trial_seed(7, "snr_db", 10.0, 3)
    s2 = trial_seed(7, "snr_db", 10.0, 3)
    assert s1 == s2
    assert s1 != trial_seed(7, "snr_db", 10.0, 4)
    assert s1 != trial_seed(7, "k", 10.0, 3)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigurationError):
        config_from_dict({"trials": 3, "bogus": 1})
    with pytest.raises(ConfigurationError):
        config_from_dict({"system": {"n": 16, "oops": 2}})
    with pytest.raises(ConfigurationError):
        overlay_config(PROFILES["desk"], {"nope": {}})


def test_profiles_exist():
    assert PROFILES["desk"].system.n == 64
    assert PROFILES["paper"].system.n == 256
    assert PROFILES["paper"].subspace.rank == 10
    assert PROFILES["paper"].trials == 50


def test_overlay_merges_nested():
    cfg = overlay_config(PROFILES["desk"], {"system": {"downsample": 2},
                                            "trials": 5})
    assert cfg.system.downsample == 2
    assert cfg.system.n == 64
    assert cfg.trials == 5


def test_run_trial_deterministic():
    r1 = run_trial(TINY, 5.0, 1)
    r2 = run_trial(TINY, 5.0, 1)
    assert r1.seed == r2.seed
    assert r1.inputs_hash == r2.inputs_hash
    for m in ("anm", "omp"):
        assert r1.results[m].nmse == r2.results[m].nmse
        assert r1.results[m].angle_rmse_rad == r2.results[m].angle_rmse_rad


def test_method_failure_recorded():
    cfg = dataclasses.replace(TINY, methods=("anm", "bogus"))
    rec = run_trial(cfg, 5.0, 0)
    assert rec.results["bogus"].solver_status == "error:ConfigurationError"
    assert np.isnan(rec.results["bogus"].nmse)
    assert np.isfinite(rec.results["anm"].nmse)


def test_max_iters_status_recorded():
    cfg = dataclasses.replace(TINY, solver=dataclasses.replace(TINY.solver,
                                                               max_iters=5))
    rec = run_trial(cfg, 5.0, 0)
    assert rec.results["anm"].solver_status == "max_iters"
    assert np.isfinite(rec.results["anm"].nmse)


def test_sweep_outputs(tmp_path):
    out = tmp_path / "sweep"
    csv_path = run_sweep(TINY, out)
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + 2 * 3 * 2   # points x trials x methods
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["trials"] == 3
    assert manifest["config_hash"] == TINY.config_hash()
    assert len(manifest["seeds"]["5.0"]) == 3
    params = (out / "params.csv").read_text().strip().splitlines()
    assert params[0].startswith("config_hash,")
    assert len(params) > 1


def test_sweep_rerun_bitwise_except_timing(tmp_path):
    out1 = run_sweep(TINY, tmp_path / "a").read_text().splitlines()
    config2 = load_manifest_config(tmp_path / "a" / "manifest.json")
    out2 = run_sweep(config2, tmp_path / "b").read_text().splitlines()
    # wall_ms (the trailing column) is measured time; everything else is bitwise
    assert [l.rsplit(",", 1)[0] for l in out1] == [l.rsplit(",", 1)[0] for l in out2]


def test_sweep_parallel_matches_serial(tmp_path):
    serial = run_sweep(TINY, tmp_path / "s", jobs=1).read_text().splitlines()
    parallel = run_sweep(TINY, tmp_path / "p", jobs=2).read_text().splitlines()
    assert [l.rsplit(",", 1)[0] for l in serial] == [l.rsplit(",", 1)[0] for l in parallel]


def test_k_sweep_axis(tmp_path):
    cfg = overlay_config(TINY, {"sweep": {"axis": "k", "values": [1, 2]},
                                "snr_db": 10.0, "trials": 1})
    csv_path = run_sweep(cfg, tmp_path / "k")
    lines = csv_path.read_text().strip().splitlines()
    assert len(lines) == 1 + 2 * 1 * 2
    assert ",k," in lines[1]


def test_cli_single(capsys):
    cfg_file = json.dumps(dataclasses.asdict(TINY))
    import tempfile, os
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        fh.write(cfg_file)
        path = fh.name
    try:
        rc = cli_main(["single", "--config", path, "--trial", "0"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["sweep_value"] == 5.0
        assert "anm" in payload["results"]

        rc = cli_main(["single", "--config", path, "--seed", "999"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["seed"] == 999
    finally:
        os.unlink(path)


def test_cli_run(tmp_path, capsys):
    cfg = dataclasses.asdict(dataclasses.replace(TINY, trials=1))
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    rc = cli_main(["run", "--config", str(path), "--out", str(tmp_path / "out"),
                   "--methods", "omp"])
    assert rc == 0
    lines = (tmp_path / "out" / "results.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + 2 * 1 * 1
    assert all(",omp," in line for line in lines[1:])
