import csv
import json
import math
import os

import pytest

from clamm.cli import main

H = 3600


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def write_path_file(path, prices, step=H):
    lines = ["timestamp,price"] + [f"{i * step},{p}" for i, p in enumerate(prices)]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def scenario_doc(path_file=None, gbm=None, positions=None, fee_tier=500):
    return {
        "pool": {"fee_tier": fee_tier, "initial_price": 1.0, "token0": "T0", "token1": "T1"},
        "positions": positions
        or [
            {"position_id": "main", "wallet_id": "w1", "lower_price": 0.8,
             "upper_price": 1.2, "liquidity": 100.0, "entry_time": 0, "exit_time": None}
        ],
        "path": {"file": path_file, "gbm": gbm},
        "numeraire": "token1",
    }


# ----- simulate -----------------------------------------------------------------


def test_simulate_zero_volatility_zero_il_and_fees(tmp_path):
    gbm = {"s0": 1.0, "drift": 0.0, "volatility": 0.0, "horizon": 24 * H,
           "step": H, "seed": 3}
    cfg = write_json(tmp_path / "cfg.json", scenario_doc(gbm=gbm))
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out-dir", str(out), "--no-figures"]) == 0
    positions = read_csv(out / "positions_report.csv")
    assert len(positions) == 1
    assert float(positions[0]["actual_il_usd"]) == 0.0
    assert float(positions[0]["fees_usd"]) == 0.0
    assert read_csv(out / "trades.csv") == []


def test_simulate_hard_stop_scenario_pins_paper_loss(tmp_path):
    # range 0.8..1.2 position riding the pool down 20%: the loss equals
    # 0.56% of the virtual (hard-stop pool) notional
    prices = [1.0, 0.95, 0.9, 0.85, 0.8]
    cfg = write_json(
        tmp_path / "cfg.json",
        scenario_doc(path_file=write_path_file(tmp_path / "path.csv", prices)),
    )
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out-dir", str(out), "--no-figures"]) == 0
    row = read_csv(out / "positions_report.csv")[0]
    virtual_notional = 2 * 100.0  # liquidity 100 at entry ratio 1
    loss_share = float(row["actual_il_usd"]) / virtual_notional
    assert loss_share == pytest.approx(math.sqrt(0.8) - 0.9, abs=1e-9)
    assert loss_share == pytest.approx(-0.0056, abs=1e-4)


def test_simulate_seeded_runs_are_byte_identical(tmp_path):
    gbm = {"s0": 1.0, "drift": 0.0, "volatility": 0.04, "horizon": 48 * H,
           "step": H, "seed": 11}
    positions = [
        {"position_id": "a", "wallet_id": "w1", "lower_price": 0.9, "upper_price": 1.1,
         "liquidity": 50.0, "entry_time": 0, "exit_time": 24 * H},
        {"position_id": "b", "wallet_id": "w2", "lower_price": 0.7, "upper_price": 1.4,
         "liquidity": 80.0, "entry_time": 2 * H, "exit_time": None},
    ]
    cfg = write_json(tmp_path / "cfg.json", scenario_doc(gbm=gbm, positions=positions))
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["simulate", "--config", cfg, "--out-dir", str(out1), "--no-figures"]) == 0
    assert main(["simulate", "--config", cfg, "--out-dir", str(out2), "--no-figures"]) == 0
    names = sorted(os.listdir(out1))
    assert names == sorted(os.listdir(out2))
    for name in names:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_simulate_print_config_defaults():
    assert main(["simulate", "--print-config"]) == 0


def test_simulate_requires_config():
    assert main(["simulate", "--out-dir", "/tmp/nowhere"]) == 2


def test_simulate_rejects_ambiguous_path_spec(tmp_path):
    doc = scenario_doc(gbm={"s0": 1.0}, path_file="also_given.csv")
    cfg = write_json(tmp_path / "cfg.json", doc)
    assert main(["simulate", "--config", cfg, "--out-dir", str(tmp_path / "o")]) == 2


def test_simulate_renders_figures(tmp_path):
    gbm = {"s0": 1.0, "drift": 0.0, "volatility": 0.03, "horizon": 12 * H,
           "step": H, "seed": 5}
    cfg = write_json(tmp_path / "cfg.json", scenario_doc(gbm=gbm))
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out-dir", str(out)]) == 0
    for figure in ("fees_vs_il.png", "durations.png", "wallets.png", "price_path.png"):
        assert (out / figure).exists()


# ----- analyze ------------------------------------------------------------------


EVENTS_HEADER = ("pool_id,position_id,wallet_id,kind,block,timestamp,"
                 "amount0,amount1,liquidity_delta,tick_lower,tick_upper")


def write_events_file(path, rows):
    path.write_text(EVENTS_HEADER + "\n" + "\n".join(rows) + ("\n" if rows else ""))
    return str(path)


def write_prices_file(path, rows):
    path.write_text("hour,token_id,usd_price\n" + "\n".join(rows) + "\n")
    return str(path)


def test_analyze_flash_only_fixture(tmp_path):
    pool = "T0-T1-3000"
    rows = [
        f"{pool},p1,w1,mint,5,{H},10,10,100,-6960,6960",
        f"{pool},p1,w1,collect,5,{H},2.5,0,0,-6960,6960",
        f"{pool},p1,w1,burn,5,{H},0,0,-100,-6960,6960",
    ]
    prices = []
    for h in range(0, 4):
        prices.append(f"{h * H},T0,1.0")
        prices.append(f"{h * H},T1,1.0")
    events = write_events_file(tmp_path / "e.csv", rows)
    feed = write_prices_file(tmp_path / "p.csv", prices)
    out = tmp_path / "out"
    assert main(["analyze", "--events", events, "--prices", feed,
                 "--out-dir", str(out), "--no-figures"]) == 0
    durations = {r["bucket"]: r for r in read_csv(out / "duration_report.csv")}
    assert float(durations["flash"]["fees_usd"]) == pytest.approx(2.5)
    assert float(durations["flash"]["actual_il_usd"]) == 0.0
    assert int(durations["flash"]["count"]) == 1
    total_fees = sum(float(r["fees_usd"]) for r in read_csv(out / "duration_report.csv"))
    assert total_fees == pytest.approx(2.5)  # flash bucket holds 100% of fees
    assert durations["flash"]["rorac"] == "inf"


def test_analyze_missing_price_hour_exits_3(tmp_path, capsys):
    pool = "T0-T1-3000"
    rows = [
        f"{pool},p1,w1,mint,1,0,10,10,100,-6960,6960",
        f"{pool},p1,w1,burn,9,{40 * H},0,0,-100,-6960,6960",
    ]
    prices = []
    for h in range(0, 3):  # feed stops long before the burn
        prices.append(f"{h * H},T0,1.0")
        prices.append(f"{h * H},T1,1.0")
    events = write_events_file(tmp_path / "e.csv", rows)
    feed = write_prices_file(tmp_path / "p.csv", prices)
    assert main(["analyze", "--events", events, "--prices", feed,
                 "--out-dir", str(tmp_path / "out"), "--no-figures"]) == 3
    assert "data error" in capsys.readouterr().err


def test_analyze_rejects_malformed_events(tmp_path, capsys):
    events = write_events_file(tmp_path / "e.csv", ["not,enough,fields"])
    feed = write_prices_file(tmp_path / "p.csv", ["0,T0,1.0", "0,T1,1.0"])
    assert main(["analyze", "--events", events, "--prices", feed,
                 "--out-dir", str(tmp_path / "out"), "--no-figures"]) == 3
    assert "row 2" in capsys.readouterr().err


# ----- reconstruct ---------------------------------------------------------------


def test_reconstruct_empty_input_writes_header_only(tmp_path):
    src = tmp_path / "obs.csv"
    src.write_text("L,P_a,P_b,r\n")
    out = tmp_path / "out"
    assert main(["reconstruct", str(src), "--out-dir", str(out)]) == 0
    content = (out / "reconstructed.csv").read_text().strip().splitlines()
    assert len(content) == 1
    assert content[0].startswith("L,P_a,P_b,r,token0_amount")


def test_reconstruct_oracle_rows(tmp_path):
    def forward(L, pl, pu, p):
        sp, sl, su = math.sqrt(p), math.sqrt(pl), math.sqrt(pu)
        return L * (su - sp) / (sp * su), L * (sp - sl)

    cases = [(100.0, 0.5, 2.0, 1.3), (7.0, 0.9, 1.1, 1.0), (5000.0, 10.0, 40.0, 19.0)]
    lines = ["L,P_a,P_b,r"]
    expected = []
    for L, pl, pu, p in cases:
        x, y = forward(L, pl, pu, p)
        lines.append(f"{L},{pl},{pu},{y / (x + y)!r}")
        expected.append((x, y, p))
    src = tmp_path / "obs.csv"
    src.write_text("\n".join(lines) + "\n")
    out = tmp_path / "out"
    assert main(["reconstruct", str(src), "--out-dir", str(out)]) == 0
    rows = read_csv(out / "reconstructed.csv")
    for row, (x, y, p) in zip(rows, expected):
        assert float(row["token0_amount"]) == pytest.approx(x, rel=1e-9)
        assert float(row["token1_amount"]) == pytest.approx(y, rel=1e-9)
        assert float(row["internal_price"]) == pytest.approx(p, rel=1e-9)


def test_reconstruct_malformed_row_exits_3_with_row_number(tmp_path, capsys):
    src = tmp_path / "obs.csv"
    src.write_text("L,P_a,P_b,r\n100,0.5,2.0,0.5\n100,oops,2.0,0.5\n")
    assert main(["reconstruct", str(src), "--out-dir", str(tmp_path / "out")]) == 3
    assert "row 3" in capsys.readouterr().err


# ----- mc -------------------------------------------------------------------------


def test_mc_zero_volatility_all_zero_il(tmp_path):
    cfg = write_json(tmp_path / "mc.json", {
        "volatility": 0.0, "count": 100, "horizons": [1, 2, 4], "step": 1.0, "seed": 1,
    })
    out = tmp_path / "out"
    assert main(["mc", "--config", cfg, "--out-dir", str(out), "--no-figures"]) == 0
    rows = read_csv(out / "mc_scaling.csv")
    assert all(float(r["median_abs_il"]) == 0.0 for r in rows)
    fits = {r["series"]: r for r in read_csv(out / "mc_fit.csv")}
    assert fits["il"]["exponent"] == "nan"
    assert float(fits["fees"]["exponent"]) == pytest.approx(1.0, abs=1e-9)


def test_mc_seed_determinism_and_figure(tmp_path):
    cfg = write_json(tmp_path / "mc.json", {"count": 500, "seed": 9})
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["mc", "--config", cfg, "--out-dir", str(out1)]) == 0
    assert main(["mc", "--config", cfg, "--out-dir", str(out2), "--no-figures"]) == 0
    assert (out1 / "mc_scaling.csv").read_bytes() == (out2 / "mc_scaling.csv").read_bytes()
    assert (out1 / "mc_scaling.png").exists()


def test_mc_print_config():
    assert main(["mc", "--print-config"]) == 0


def test_mc_rejects_bad_horizons(tmp_path):
    cfg = write_json(tmp_path / "mc.json", {"horizons": [1.0, 2.5], "step": 1.0})
    assert main(["mc", "--config", cfg, "--out-dir", str(tmp_path / "o")]) == 2
