import csv
import io
import json
import math
from pathlib import Path

import pytest

from uistop.cli import annualize, fmt, run

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
EX51 = str(SCENARIOS / "example51.toml")
EX52 = str(SCENARIOS / "example52.toml")

GOLDEN_SOLVE_51 = """\
quantity,value
regime,stochastic
r_tilde,0.0104
beta1,30
q_star,3.864208
b_star,404.741
x,346
value,1714.278
gain,1380
stop_now,false
hit_probability,0.9245906
mean_hit_time,inf
r_annual,0.02107617
mu_annual,0.02107617
"""


def call(capsys, *argv):
    code = run(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def pairs(text):
    rows = list(csv.reader(io.StringIO(text)))
    return {k: v for k, v in rows[1:]}


def test_formatting_helpers():
    assert fmt(1714.2775812) == "1714.278"
    assert fmt(math.inf) == "inf" and fmt(-math.inf) == "-inf" and fmt(math.nan) == "nan"
    assert fmt(True) == "true" and fmt(7) == "7"
    assert annualize(0.0004) == pytest.approx(0.02107617, abs=5e-9)


def test_solve_golden(capsys):
    code, out, err = call(capsys, "solve", "--config", EX51)
    assert code == 0 and err == ""
    assert out == GOLDEN_SOLVE_51


def test_solve_example52_json(capsys):
    code, out, _ = call(capsys, "solve", "--config", EX52, "--format", "json")
    doc = json.loads(out)
    assert doc["b_star"] == pytest.approx(352.3705, abs=1e-4)
    assert doc["value"] == pytest.approx(1389.619, abs=1e-3)
    assert doc["mean_hit_time"] == pytest.approx(91.22197, abs=1e-5)


def test_solve_oracle_within_one_step(capsys):
    code, out, _ = call(capsys, "solve", "--config", EX51, "--oracle", "--grid-n", "20000")
    d = pairs(out)
    assert abs(float(d["b_hat_grid"]) - float(d["b_star"])) <= float(d["grid_step"]) + 1e-3


def test_solve_override_and_file_output(capsys, tmp_path):
    target = tmp_path / "solve.csv"
    code, out, _ = call(capsys, "solve", "--config", EX51, "--x", "500", "--out", str(target))
    assert code == 0 and out == ""
    d = pairs(target.read_text())
    assert d["stop_now"] == "true"
    assert float(d["value"]) == pytest.approx(30 * 500 - 9000)


def test_solve_deterministic(capsys, tmp_path):
    cfg = tmp_path / "det.toml"
    cfg.write_text(Path(EX51).read_text().replace("sigma = 0.04", "sigma = 0.0"))
    code, out, _ = call(capsys, "solve", "--config", str(cfg), "--x", "200")
    d = pairs(out)
    assert d["regime"] == "deterministic"
    assert float(d["b_star"]) == pytest.approx(312.0)
    assert float(d["t_star"]) == pytest.approx(math.log(312 / 200) / 0.0004, rel=1e-6)


def test_assumption_violation_exits_2(capsys, tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(Path(EX51).read_text().replace("mu = 0.0004", "mu = 0.05"))
    code, out, err = call(capsys, "solve", "--config", str(cfg))
    assert code == 2 and out == ""
    assert err.startswith("error: ") and "mu < r_tilde" in err
    assert err.count("\n") == 1


def test_unknown_flag_exits_2(capsys):
    code, _, err = call(capsys, "solve", "--config", EX51, "--frobnicate")
    assert code == 2
    code, _, _ = call(capsys, "teleport")
    assert code == 2


def test_simulate_summary(capsys):
    code, out, err = call(capsys, "simulate", "--config", EX52, "--paths", "4000", "--seed", "1",
                          "--b-fraction", "1.0", "--b-fraction", "1.1")
    assert code == 0 and err == ""
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 2
    est, se = float(rows[0]["estimate"]), float(rows[0]["std_error"])
    assert abs(est - 1389.619) < 4 * se


def test_simulate_per_path_and_truncation_warning(capsys):
    code, out, err = call(capsys, "simulate", "--config", EX51, "--paths", "5", "--horizon", "50", "--per-path")
    assert code == 0
    assert len(out.strip().splitlines()) == 6
    code, out, err = call(capsys, "simulate", "--config", EX51, "--paths", "5", "--horizon", "50")
    assert err.startswith("warning: horizon 50 weeks")


def write_wages(path, weeks, wages):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["week", "wage"])
        w.writerows(zip(weeks, wages))


def test_estimate_and_decide(capsys, tmp_path):
    wages = [346.0 * math.exp(0.0004 * k + 0.002 * (-1) ** k) for k in range(30)]
    src = tmp_path / "w.csv"
    write_wages(src, range(30), wages)
    code, out, _ = call(capsys, "estimate", str(src), "--sigma", "0.02")
    doc = json.loads(out)
    assert code == 0 and doc["n"] == 29
    assert doc["test"]["variant"] == "normal" and doc["test"]["reject"] is False
    code, out, _ = call(capsys, "decide", str(src), "--config", EX52)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["action"] for r in rows] == ["keep_waiting"] * 30
    write_wages(src, range(3), [346.0, 400.0, 100.0])
    code, out, _ = call(capsys, "decide", str(src), "--config", EX52)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[-1]["action"] == "buy_now_hit" and rows[-1]["week"] == "1"


def test_estimate_bad_csv(capsys, tmp_path):
    src = tmp_path / "w.csv"
    src.write_text("t,w\n0,1\n")
    code, _, err = call(capsys, "estimate", str(src))
    assert code == 2 and "week,wage" in err


def test_sensitivity_modes(capsys):
    code, out, _ = call(capsys, "sensitivity", "--config", EX51)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[2]["increment"]) == pytest.approx(3.36825, abs=1e-4)
    code, out, _ = call(capsys, "sensitivity", "--config", EX52, "--lambda-star")
    assert float(pairs(out)["lambda_star"]) == pytest.approx(0.01241966, abs=1e-8)
    code, out, _ = call(capsys, "sensitivity", "--config", EX51, "--limits")
    assert len(out.strip().splitlines()) == 13
    code, out, _ = call(capsys, "sensitivity", "--config", EX51, "--isoline", "340", "--n", "60",
                        "--lambda0-range", "0.002,0.05", "--mu-range=-0.001,0.001")
    assert code == 0 and len(out.strip().splitlines()) > 1


def test_utility_json(capsys):
    code, out, _ = call(capsys, "utility", "--config", EX52, "--kappa", "100", "--consumption", "100")
    doc = json.loads(out)
    assert doc["kappa_dag"] == pytest.approx(162.7108, abs=1e-4)
    assert doc["b_dag"] < 352.3705
    assert doc["gamma"] == pytest.approx(100 * 0.01 / (0.0104 * 0.0114), rel=1e-6)
    code, out, _ = call(capsys, "utility", "--config", EX52)
    assert json.loads(out)["p_max"] == "inf"
    code, _, err = call(capsys, "utility", "--config", EX51, "--consumption", "100")
    assert code == 2 and "lambda1" in err


def test_schedule_command(capsys):
    code, out, _ = call(capsys, "schedule", "--preset", "french", "--lambda1", "0.011", "--r", "0.0004")
    d = pairs(out)
    assert float(d["beta_closed_form"]) == pytest.approx(float(d["beta_quadrature"]), rel=1e-6)
    code, out, _ = call(capsys, "schedule", "--config", str(SCENARIOS / "french_schedule.toml"))
    assert code == 0 and float(pairs(out)["lambda1"]) == 0.0253
    code, _, err = call(capsys, "schedule", "--r", "0.0004")
    assert code == 2
