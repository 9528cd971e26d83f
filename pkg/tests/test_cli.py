import csv
import io

import pytest

from ffpower.cli import main
from ffpower.config import ConfigError, ExperimentConfig, preset


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bounds_row(capsys):
    code, out, _ = run(capsys, "bounds", "--set", "battery_capacity=2", "--set", "p=0.5")
    assert code == 0
    (row,) = rows(out)
    assert list(row) == ["B", "epsilon", "mu", "q", "lower_bound", "renewal_value",
                         "bern_gap_term", "gap_bound"]
    assert float(row["lower_bound"]) == 0.5
    assert float(row["renewal_value"]) == pytest.approx(0.632249890, abs=1e-9)
    assert float(row["gap_bound"]) == 0.5
    assert row["renewal_value"] == "0.63224989"  # 9 significant digits


def test_bounds_tiny_cost_continuity(capsys):
    _, a, _ = run(capsys, "bounds", "--set", "B_values=0.5,2,7")
    _, b, _ = run(capsys, "bounds", "--set", "B_values=0.5,2,7", "--set", "sampling_cost=1e-12")
    for ra, rb in zip(rows(a), rows(b)):
        for key in ("lower_bound", "renewal_value"):
            assert abs(float(ra[key]) - float(rb[key])) <= 1e-9


def test_bounds_certain_arrivals(capsys):
    _, out, _ = run(capsys, "bounds", "--set", "p=1", "--set", "battery_capacity=3")
    (row,) = rows(out)
    assert row["renewal_value"] == row["lower_bound"]
    assert float(row["lower_bound"]) == pytest.approx(0.25)


def test_simulate_is_byte_identical(tmp_path, capsys):
    args = ["simulate", "--set", "horizon=20000", "--set", "trials=6",
            "--set", "policies=ffp,greedy", "--seed", "17"]
    paths = [tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"]
    assert main(args + ["--out", str(paths[0])]) == 0
    assert main(args + ["--out", str(paths[1])]) == 0
    assert main(args + ["--out", str(paths[2]), "--workers", "3"]) == 0
    data = [p.read_bytes() for p in paths]
    assert data[0] == data[1] == data[2]
    assert data[0].decode().splitlines()[0] == "policy,B,epsilon,mean,std_error,ci95"


def test_simulate_consistency(capsys):
    code, out, _ = run(capsys, "simulate", "--set", "horizon=100000", "--set", "trials=20",
                       "--set", "policies=ffp,greedy")
    assert code == 0
    by = {r["policy"]: r for r in rows(out)}
    ffp, greedy = by["ffp"], by["greedy"]
    assert abs(float(ffp["mean"]) - 0.632249890) <= float(ffp["ci95"])
    assert float(greedy["mean"]) >= float(ffp["mean"]) - 3 * float(ffp["std_error"])
    assert float(greedy["mean"]) == pytest.approx(2 / 3, abs=3e-3)


def test_sweep_columns(capsys):
    code, out, _ = run(capsys, "sweep", "--set", "B_values=1,2", "--set", "horizon=5000",
                       "--set", "trials=4")
    assert code == 0
    assert out.splitlines()[0] == "B,lower_bound,ffp_mean,ffp_ci95,gap_ffp_lower"
    code, out, _ = run(capsys, "sweep", "--set", "B_values=1,2", "--set", "horizon=5000",
                       "--set", "trials=4", "--set", "policies=ffp,dp", "--set", "grid_size=200")
    assert out.splitlines()[0] == "B,lower_bound,ffp_mean,ffp_ci95,dp_gain,gap_ffp_lower,gap_ffp_dp"
    for r in rows(out):
        assert float(r["gap_ffp_lower"]) == pytest.approx(float(r["ffp_mean"]) - float(r["lower_bound"]), abs=1e-8)


def test_sweep_needs_batteries(capsys):
    code, _, err = run(capsys, "sweep")
    assert code == 2 and "B_values" in err


def test_sweep_dp_with_continuous_model_rejected(capsys):
    code, _, err = run(capsys, "sweep", "--set", "arrivals=uniform", "--set", "policies=ffp,dp",
                       "--set", "B_values=1,2")
    assert code == 2 and "policies" in err


def test_dp_command(capsys):
    code, out, err = run(capsys, "dp", "--set", "grid_size=101")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "battery_level,theta,power,consumed"
    assert len(lines) == 102
    assert "gain=" in err


def test_verify_default_passes(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    assert all(line.startswith("PASS") for line in out.splitlines())


def test_verify_rejects_zero_channel_noise(capsys):
    code, _, err = run(capsys, "verify", "--set", "sigma_c_sq=0")
    assert code == 2 and "sigma_c_sq" in err


def test_verify_tampered_gap_fails(capsys):
    code, out, _ = run(capsys, "verify", "--set", "gap_tolerance=0.0")
    assert code == 1
    failed = [line for line in out.splitlines() if line.startswith("FAIL")]
    assert len(failed) == 1 and "theorem_sandwich" in failed[0]


@pytest.mark.parametrize(
    "override, field",
    [("horizon=0", "horizon"), ("policies=magic", "policies"), ("bogus=1", "bogus"),
     ("p=abc", "p"), ("B_values=2,1", "B_values"), ("trials=0", "trials")],
)
def test_invalid_input_exit_code(capsys, override, field):
    code, _, err = run(capsys, "bounds", "--set", override)
    assert code == 2
    assert field in err


def test_config_file_and_flag_precedence(tmp_path, capsys):
    path = tmp_path / "exp.cfg"
    path.write_text("# experiment\nsampling_cost = 1.5\nbattery_capacity = 4\nseed = 3\n")
    code, out, _ = run(capsys, "bounds", "--config", str(path), "--set", "battery_capacity=2")
    assert code == 0
    (row,) = rows(out)
    assert float(row["B"]) == 2 and float(row["epsilon"]) == 1.5
    code, out, _ = run(capsys, "bounds", "--config", str(path), "--seed", "9", "--print-config")
    assert "seed = 9" in out


def test_missing_config_file(capsys):
    code, _, err = run(capsys, "bounds", "--config", "/nonexistent/x.cfg")
    assert code == 2 and "config" in err


@pytest.mark.parametrize(
    "cfg",
    [
        ExperimentConfig(),
        preset("fig1"),
        preset("fig2"),
        ExperimentConfig(arrivals="finite", support=(0.0, 0.25, 1.0), probs=(0.2, 0.3, 0.5),
                         B_values=(0.1, 1 / 3, 7.0), policies=("ffp", "greedy", "dp"),
                         record_trace=True, seed=2**64 - 1, span_tol=3e-9),
    ],
)
def test_config_round_trip(cfg):
    text = cfg.to_text()
    again = ExperimentConfig.parse(text)
    assert again == cfg
    assert again.to_text() == text


def test_presets():
    fig1, fig2 = preset("fig1"), preset("fig2")
    assert len(fig1.B_values) == 15
    assert fig1.B_values[0] == pytest.approx(0.25) and fig1.B_values[-1] == pytest.approx(10)
    assert (fig1.horizon, fig1.trials, fig1.p, fig1.sampling_cost) == (100_000, 50, 0.5, 0.0)
    assert fig2.sampling_cost == 1.5
    with pytest.raises(ConfigError):
        preset("fig3")
