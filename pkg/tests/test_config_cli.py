"""Configuration loading and the command line surface."""

import copy
import json

import pytest

from widescale.cli import main
from widescale.config import (DEFAULTS, load_config, params_from_config,
                              psi_list, seeds_from_config, validate_config)


def test_defaults_load_and_are_copied():
    cfg = load_config()
    assert cfg == DEFAULTS
    cfg["sweep"]["n_values"].append(99)
    assert 99 not in DEFAULTS["sweep"]["n_values"]


def test_file_merge(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"exponents": {"psi": 2.0},
                                "sweep": {"seed_count": 3}}))
    cfg = load_config(str(path))
    assert cfg["exponents"]["psi"] == 2.0
    assert cfg["sweep"]["seed_count"] == 3
    assert cfg["constants"]["W0"] == 1.0e6  # untouched default


def test_unknown_keys_fail_loudly(tmp_path):
    cases = ((["x"], "top level"),
             ({"nosuch": {}}, "unknown section"),
             ({"sweep": {"n_vals": [1]}}, "unknown key sweep.n_vals"),
             ({"sweep": [1]}, "must be an object"))
    for payload, fragment in cases:
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match=fragment):
            load_config(str(path))


def test_validation_errors():
    base = load_config()
    bad = copy.deepcopy(base)
    bad["sweep"]["protocols"] = ["ish", "smoke"]
    with pytest.raises(ValueError, match="unknown protocols"):
        validate_config(bad)
    bad = copy.deepcopy(base)
    bad["sweep"]["allocation_mode"] = "fair"
    with pytest.raises(ValueError, match="allocation mode"):
        validate_config(bad)
    bad = copy.deepcopy(base)
    bad["sweep"]["seeds"] = []
    with pytest.raises(ValueError, match="non-empty"):
        validate_config(bad)
    bad = copy.deepcopy(base)
    bad["exponents"]["alpha"] = 2.0
    with pytest.raises(ValueError, match="alpha"):
        validate_config(bad)


def test_psi_handling():
    cfg = load_config()
    assert psi_list(cfg) == [0.25]
    cfg["exponents"]["psi"] = [0.5, 1.0]
    assert psi_list(cfg) == [0.5, 1.0]
    with pytest.raises(ValueError, match="pick one value"):
        params_from_config(cfg)
    assert params_from_config(cfg, 1.0).psi == 1.0


def test_seed_selection():
    cfg = load_config()
    assert seeds_from_config(cfg) == list(range(10))
    assert seeds_from_config(cfg, seed_base=100) == list(range(100, 110))
    cfg["sweep"]["seeds"] = [3, 7]
    assert seeds_from_config(cfg, seed_base=10) == [13, 17]


# -- command line ---------------------------------------------------------


def test_cli_exponents(capsys):
    assert main(["exponents"]) == 0
    out = capsys.readouterr().out
    assert "thresholds" in out and "both_dof_limited" in out


def test_cli_exponents_psi_grid(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"exponents": {"psi": [0.25, 1.5, 2.75]}}))
    assert main(["exponents", "--config", str(path)]) == 0
    out = capsys.readouterr().out
    assert "ish_power_imh_dof" in out and "both_power_limited" in out


def test_cli_regime_map(tmp_path):
    out = tmp_path / "o"
    assert main(["regime-map", "--out", str(out)]) == 0
    assert (out / "regime_map.csv").exists()
    assert (out / "regime_map.svg").exists()


def test_cli_simulate(tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["simulate", "--n", "256", "--seed", "1", "--seed-base", "100",
                 "--out", str(out)])
    assert code == 0
    assert (out / "ish_nodes.csv").exists()
    assert (out / "imh_routes.csv").exists()
    text = capsys.readouterr().out
    assert "seed=101" in text and "feasible_rate" in text


def test_cli_simulate_single_protocol(tmp_path):
    out = tmp_path / "o"
    assert main(["simulate", "--n", "256", "--protocol", "ish",
                 "--out", str(out)]) == 0
    assert (out / "ish_nodes.csv").exists()
    assert not (out / "imh_routes.csv").exists()


def test_cli_simulate_unroutable_grid(tmp_path, capsys):
    # one node per cell: the routing grid cannot build, single-hop still runs
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"exponents": {"beta": 1.0},
                                "constants": {"l0": 1.0}}))
    out = tmp_path / "o"
    code = main(["simulate", "--n", "64", "--config", str(path),
                 "--out", str(out)])
    assert code == 1
    assert (out / "ish_nodes.csv").exists()
    assert not (out / "imh_routes.csv").exists()
    assert "not runnable" in capsys.readouterr().out


SWEEP_CFG = {"sweep": {"n_values": [256, 512, 1024, 2048], "seed_count": 5,
                       "protocols": ["ish"]},
             "output": {"figures": False}}


def test_cli_sweep_verdict_matches_summary(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(SWEEP_CFG))
    out = tmp_path / "o"
    code = main(["sweep", "--config", str(path), "--out", str(out)])
    summary = (out / "summary.csv").read_text().splitlines()
    passed = summary[1].split(",")[-1] == "true"
    assert code == (0 if passed else 2)
    assert not (out / "rates.svg").exists()
    text = capsys.readouterr().out
    assert "ish: slope=" in text and "wrote" in text


def test_cli_sweep_tolerance_flag(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(SWEEP_CFG))
    out = tmp_path / "o"
    # the fitted slope never hits theory to twelve digits, so a zero-width
    # gate must fail and a sloppy one must pass
    assert main(["sweep", "--config", str(path), "--out", str(out),
                 "--tolerance", "1e-12"]) == 2
    assert main(["sweep", "--config", str(path), "--out", str(out),
                 "--tolerance", "10"]) == 0


def test_cli_sweep_psi_grid_subdirs(tmp_path):
    cfg = dict(SWEEP_CFG)
    cfg["exponents"] = {"psi": [0.25, 0.5]}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "o"
    main(["sweep", "--config", str(path), "--out", str(out)])
    assert (out / "psi_0.25" / "rows.csv").exists()
    assert (out / "psi_0.5" / "summary.csv").exists()
