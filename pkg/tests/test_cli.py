import csv
import json

import pytest

from gametree.cli import main

GAME_CALL = {"kind": "game_call", "strike": 100, "maturity": 2, "rate": 0.06, "penalty": 12}
GAME_PUT = {"kind": "game_put", "strike": 100, "maturity": 2, "rate": 0.06, "penalty": 12}


def run(capsys, *argv, config=None):
    args = list(argv)
    if config is not None:
        args += ["--config", json.dumps(config)]
    code = main(args)
    out = capsys.readouterr().out
    return code, (json.loads(out) if code == 0 else None)


def test_price_echoes_config(capsys):
    code, out = run(capsys, "price", config={"payoff": GAME_CALL, "s0": 100, "n": 400})
    assert code == 0
    assert out["value"] == 12.0 and out["n"] == 400
    assert out["h"] == pytest.approx(2 / 400)
    assert out["convention"] == "undiscounted_strike"
    assert out["config"]["payoff"]["penalty"] == 12
    assert out["config"]["tolerance"] == 1e-9


def test_config_file_and_overrides(capsys, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"payoff": GAME_PUT, "s0": 90, "n": 100}))
    code, base = run(capsys, "price", "--config", str(path))
    code2, over = run(capsys, "price", "--config", str(path), "--n", "200")
    assert code == code2 == 0
    assert over["n"] == 200 and over["config"]["n"] == 200
    assert base["value"] != over["value"]


def test_zero_penalty_prices_immediate_exercise(capsys):
    put = dict(GAME_PUT, penalty=0)
    code, out = run(capsys, "price", config={"payoff": put, "s0": 85, "n": 100})
    assert code == 0 and out["value"] == pytest.approx(15.0, abs=1e-12)


def test_dump_lattice_and_surface(capsys, tmp_path):
    lat, surf = tmp_path / "lattice.csv", tmp_path / "surface.csv"
    code, _ = run(capsys, "price", "--dump-lattice", str(lat), "--dump-surface", str(surf),
                  config={"payoff": GAME_CALL, "s0": 95, "n": 10})
    assert code == 0
    rows = list(csv.DictReader(lat.open()))
    assert len(rows) == 21 and rows[10]["i"] == "0" and float(rows[10]["s"]) == 95.0
    for r in rows:
        assert float(r["p_up"]) + float(r["p_mid"]) + float(r["p_down"]) == pytest.approx(1.0, abs=1e-14)
    srows = list(csv.DictReader(surf.open()))
    assert len(srows) == 11 ** 2
    for r in srows:
        assert float(r["f"]) - 1e-12 <= float(r["J"]) <= float(r["g"]) + 1e-12


def test_region_writes_csvs(capsys, tmp_path):
    code, out = run(capsys, "region", "--out", str(tmp_path),
                    config={"payoff": GAME_CALL, "s0": 100, "n": 200})
    assert code == 0
    for side in ("buyer", "seller"):
        lines = (tmp_path / f"{side}_region.csv").read_text().splitlines()
        assert lines[0] == "side,t,s_lo,s_hi"
        assert all(line.startswith(side + ",") for line in lines[1:])
    assert out["seller"]["last_active_t"] is not None


def test_region_american_has_empty_seller(capsys, tmp_path):
    am = {"kind": "american_put", "strike": 100, "maturity": 1, "rate": 0.06}
    code, out = run(capsys, "region", "--out", str(tmp_path), config={"payoff": am, "s0": 100, "n": 100})
    assert code == 0
    assert (tmp_path / "seller_region.csv").read_text().splitlines() == ["side,t,s_lo,s_hi"]
    assert out["seller"]["last_active_t"] is None


def test_converge_writes_csvs(capsys, tmp_path):
    cfg = {"payoff": GAME_PUT, "s0_list": [90, 100], "n_list": [50, 100, 200]}
    code, out = run(capsys, "converge", "--out", str(tmp_path), config=cfg)
    assert code == 0
    sweep_rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
    diff_rows = list(csv.DictReader((tmp_path / "diffs.csv").open()))
    assert len(sweep_rows) == 6 and len(diff_rows) == 4
    assert set(out["empirical_cauchy_rate"]) == {"90.0", "100.0"}


def test_verify_embedding(capsys):
    code, out = run(capsys, "verify-embedding", "--m", "2000",
                    config={"s0": 100, "h": 0.01, "seed": 1})
    assert code == 0
    assert sum(out["counts"]) == out["completed"] == 2000
    assert out["config"]["m"] == 2000


def test_mc_value(capsys):
    code, out = run(capsys, "mc-value", "--m", "2000", "--seed", "3",
                    config={"payoff": GAME_PUT, "s0": 95, "n": 50})
    assert code == 0
    assert abs(out["mean"] - out["lattice_value"]) < 1.0
    assert out["config"]["seed"] == 3


def test_oracle(capsys):
    code, out = run(capsys, "oracle", config={"payoff": GAME_PUT, "s0": 97, "n": 3})
    assert code == 0
    assert out["solver_value"] == pytest.approx(out["oracle_infsup"], abs=1e-12)
    assert out["oracle_infsup"] == pytest.approx(out["oracle_supinf"], abs=1e-12)


@pytest.mark.parametrize("argv", [
    ["price", "--config", json.dumps({"payoff": dict(GAME_CALL, strike=-1), "s0": 100, "n": 10})],
    ["price", "--config", json.dumps({"payoff": GAME_CALL, "s0": 100, "n": 10, "colour": "red"})],
    ["price", "--config", json.dumps({"payoff": GAME_CALL, "n": 10})],
    ["price", "--config", "{not json"],
    ["price", "--config", "/nonexistent/run.json"],
    ["oracle", "--config", json.dumps({"payoff": GAME_CALL, "s0": 100, "n": 4})],
    ["mc-value", "--config", json.dumps({"payoff": GAME_CALL, "s0": 100, "n": 10, "dt": 0.3})],
])
def test_invalid_config_exit_code(capsys, argv):
    assert main(argv) == 2
    assert "config error" in capsys.readouterr().err


def test_numerical_failure_exit_code(capsys):
    cfg = {"payoff": GAME_CALL, "s0": 1e308, "n": 400}
    assert main(["price", "--config", json.dumps(cfg)]) == 3
    assert "numerical error" in capsys.readouterr().err


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if "wall_time" not in k}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


@pytest.mark.parametrize("command,cfg", [
    ("price", {"payoff": GAME_PUT, "s0": 90, "n": 300}),
    ("mc-value", {"payoff": GAME_PUT, "s0": 90, "n": 40, "m": 3000, "seed": 5}),
])
def test_deterministic_output(capsys, command, cfg):
    _, a = run(capsys, command, config=cfg)
    _, b = run(capsys, command, config=cfg)
    assert json.dumps(_strip_timing(a)) == json.dumps(_strip_timing(b))


def test_converge_csv_deterministic(capsys, tmp_path):
    cfg = {"payoff": GAME_CALL, "s0_list": [95], "n_list": [20, 40]}
    run(capsys, "converge", "--out", str(tmp_path / "a"), config=cfg)
    run(capsys, "converge", "--out", str(tmp_path / "b"), "--threads", "2", config=cfg)
    assert (tmp_path / "a" / "diffs.csv").read_bytes() == (tmp_path / "b" / "diffs.csv").read_bytes()
