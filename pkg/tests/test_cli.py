import json
import math

import pytest

from fadesched import fading_channel as fc
from fadesched.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_laws(capsys):
    code, out, _ = run(capsys, "laws", "--k-list", "1000000")
    assert code == 0
    header, line = out.strip().split("\n")
    assert header == "k,strategy_I,strategy_II,strategy_III"
    vals = [float(x) for x in line.split(",")[1:]]
    assert vals[2] == pytest.approx(math.log(math.log(1e6)))
    assert vals[0] < vals[1] < vals[2]


def test_laws_small_k_is_bad_input(capsys):
    code, _, err = run(capsys, "laws", "--k-list", "8")
    assert code == 2 and "K >= 16" in err


def test_exponent_theorem1(capsys):
    code, out, _ = run(capsys, "exponent", "--u0", "10", "--alpha", "0.5", "--n", "1",
                       "--rho-grid", "0,1")
    assert code == 0
    rows = [line.split(",") for line in out.strip().split("\n")[1:]]
    assert float(rows[0][1]) == 0.0
    assert float(rows[1][1]) == pytest.approx(math.log(13.5))


def test_exponent_mc_range_grid(capsys):
    code, out, _ = run(capsys, "exponent", "--u0", "3", "--alpha", "0.9", "--n", "4",
                       "--mode", "exact_mc", "--samples", "2000", "--rho-grid", "0:1:3")
    assert code == 0
    rows = out.strip().split("\n")[1:]
    assert len(rows) == 3 and float(rows[1].split(",")[2]) > 0


def test_optimize(capsys):
    code, out, _ = run(capsys, "optimize", "--u0", "100", "--alpha", "0.95")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[1].startswith("relaxed,") and lines[2].startswith("integer,")
    assert float(lines[2].split(",")[2]).is_integer()


def test_optimize_unservable(capsys):
    code, _, err = run(capsys, "optimize", "--u0", "1", "--alpha", "0.9")
    assert code == 1 and "no operating point" in err


def test_simulate_inline_and_config_agree(capsys, tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("k_values = 20, 100\ntrials = 4\nseed = 11\nstrategies = I, II, III\n")
    code_a, out_a, _ = run(capsys, "simulate", "--config", str(cfg))
    code_b, out_b, _ = run(capsys, "simulate", "--k-list", "20,100", "--trials", "4",
                           "--seed", "11", "--strategies", "I,II,III")
    assert code_a == code_b == 0
    assert out_a == out_b
    assert out_a.startswith("k,strategy,mean_throughput,stderr,")


def test_simulate_writes_files(capsys, tmp_path):
    out_csv, out_json = tmp_path / "r.csv", tmp_path / "r.json"
    code, stdout, _ = run(capsys, "simulate", "--k-list", "50", "--trials", "3", "--seed", "1",
                          "--out", str(out_csv), "--json", str(out_json))
    assert code == 0 and stdout == ""
    assert out_csv.read_text().count("\n") == 4
    assert json.loads(out_json.read_text())["seed"] == 1


def test_simulate_parallel_is_bit_identical(capsys, tmp_path):
    args = ["simulate", "--k-list", "30,300", "--trials", "6", "--seed", "8"]
    _, serial, _ = run(capsys, *args, "--workers", "1")
    _, parallel, _ = run(capsys, *args, "--workers", "2")
    assert serial == parallel


@pytest.mark.parametrize("text", ["k_values = 10\nunknown = 3\n", "k_values = 10, 5\n"])
def test_simulate_bad_config_exit_2(capsys, tmp_path, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    code, _, err = run(capsys, "simulate", "--config", str(cfg))
    assert code == 2 and err.startswith("error:")


def test_simulate_needs_some_config(capsys):
    code, _, _ = run(capsys, "simulate")
    assert code == 2


def test_simulate_config_conflicts_with_inline(capsys, tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("k_values = 10\n")
    code, _, _ = run(capsys, "simulate", "--config", str(cfg), "--trials", "3")
    assert code == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["exponent", "--u0", "x"])
    assert exc.value.code == 2


def test_validate_quick(capsys):
    code, out, _ = run(capsys, "validate", "--quick")
    assert code == 0 and "FAIL" not in out


def test_validate_failure_exit_1(capsys, monkeypatch):
    original = fc.i0_scaled
    monkeypatch.setattr(fc, "i0_scaled", lambda z: 1.01 * original(z))
    code, out, _ = run(capsys, "validate", "--quick")
    assert code == 1 and "FAIL" in out
