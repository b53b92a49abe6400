import json
import math

import pytest
from hypothesis import given, strategies as st

from afcsim.config import Scenario, from_mapping, parse_config
from afcsim.errors import ConfigError, ConfigParseError, OutputError
from afcsim.runner import CSV_COLUMNS, aggregate, companion, emit_csv, read_csv, run, summarize


def cfg(**kw):
    return from_mapping(kw)


def test_minimal_channel_config():
    c = parse_config('scenario = "channel"\nkappa_tau = 0.5\ntrials = 1000\nseed = 42\n')
    assert c.scenario is Scenario.CHANNEL and c.trials == 1000 and c.seed == 42
    assert c.channel().kappa_tau == 0.5


def test_negative_l0_names_field():
    with pytest.raises(ConfigError) as err:
        parse_config('scenario = "plan"\nl = 100.0\nl0 = -10.0\n')
    assert err.value.field == "l0"


def test_inconsistent_parameterizations():
    with pytest.raises(ConfigError) as err:
        parse_config('scenario = "afc"\nkappa = 0.5\ntau = 1.0\nl = 5.0\nl0 = 1.0\n')
    assert "inconsistent" in str(err.value)
    ok = parse_config('scenario = "afc"\nkappa = 0.5\ntau = 1.0\nl = 10.0\nl0 = 10.0\n')
    assert ok.channel().kappa_tau == 0.5


def test_unknown_key_rejected():
    with pytest.raises(ConfigError) as err:
        parse_config('scenario = "afc"\nkappa_tau = 0.5\ntrails = 3\n')
    assert err.value.field == "trails"


def test_parse_error_position():
    with pytest.raises(ConfigParseError) as err:
        parse_config('scenario = "afc"\nkappa_tau = = 1\n')
    assert err.value.line == 2 and err.value.column is not None


@pytest.mark.parametrize(
    "text,field",
    [
        ('scenario = "purify"\nkappa_tau = 0.1\n', "f_target"),
        ('scenario = "chain"\nkappa_tau = 0.1\n', "n_segments"),
        ('scenario = "afc"\n', "kappa_tau"),
        ('scenario = "afc"\nkappa_tau = 0.1\ntrials = 0\n', "trials"),
        ('scenario = "afc"\nkappa_tau = 0.1\ntrials = 2.5\n', "trials"),
        ('scenario = "afc"\nkappa_tau = 0.1\nseed = -4\n', "seed"),
        ('scenario = "warp"\n', "scenario"),
        ('kappa_tau = 0.1\n', "scenario"),
        ('scenario = "afc"\nkappa_tau = 0.1\njitter = "noise"\n', "jitter"),
        ('scenario = "chain"\nkappa_tau = 0.1\nn_segments = 3\n', "n_segments"),
        ('scenario = "afc"\nkappa_tau = 0.1\n[extra]\nx = 1\n', "extra"),
    ],
)
def test_validation_names_field(text, field):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.field == field


def test_stochastic_run_needs_seed():
    with pytest.raises(ConfigError) as err:
        run(cfg(scenario="afc", kappa_tau=0.5, trials=3))
    assert err.value.field == "seed"


def test_afc_mean_attempts():
    rep = run(cfg(scenario="afc", kappa_tau=0.5, trials=20_000, seed=4))
    p = math.exp(-1)
    sigma = math.sqrt((1 - p) / p**2 / 20_000)
    assert abs(rep.aggregates["attempts"]["mean"] - math.e) < 3 * sigma


def test_plan_report_numbers():
    rep = run(cfg(scenario="plan", l=1000.0, l0=10.0))
    assert rep.records == []
    assert rep.plan["simple_cost"] == pytest.approx(math.exp(100), rel=1e-12)
    assert rep.plan["optimal_segments"] == 100
    assert rep.plan["min_cost_rounded"] == 272


def test_plan_with_target_has_schedule():
    rep = run(cfg(scenario="plan", l=1000.0, l0=10.0, f_target=0.9, schedule="sequential"))
    assert rep.plan["plan_segments"] == 100
    assert len(rep.plan["schedule"]) == 100
    assert rep.plan["end_to_end_fidelity"] == pytest.approx(0.9, abs=1e-10)


def test_failed_trials_are_recorded():
    rep = run(cfg(scenario="afc", kappa_tau=1.5, trials=50, seed=2, max_attempts=2))
    assert rep.failures and len(rep.records) == 50
    assert all(r.attempts == 2 and r.outcomes == "EE" for r in rep.failures)


def test_chain_without_loss_of_phase_is_perfect():
    rep = run(cfg(scenario="chain", kappa_tau=2.0, n_segments=4, trials=20, seed=3))
    assert all(r.final_fidelity == pytest.approx(1.0, abs=1e-12) for r in rep.records)


def test_chain_fidelity_is_connected_product():
    omega = 0.8
    rep = run(cfg(scenario="chain", kappa_tau=0.8, n_segments=4, trials=5, seed=3, jitter="drift", omega=omega))
    f = math.cos(omega / 2) ** 2
    for r in rep.records:
        assert r.final_fidelity == pytest.approx(0.5 * (1 + (2 * f - 1) ** 4), abs=1e-12)


@pytest.mark.parametrize("scenario", ["channel", "afc", "purify", "chain"])
def test_workers_do_not_change_records(scenario):
    base = dict(scenario=scenario, kappa_tau=0.2, trials=97, seed=11, jitter="drift", omega=0.9)
    if scenario == "purify":
        base["f_target"] = 0.99
    if scenario == "chain":
        base["n_segments"] = 2
    c = cfg(**base)
    one, many = run(c, workers=1), run(c, workers=5)
    assert [r.row() for r in one.records] == [r.row() for r in many.records]
    assert one.aggregates == many.aggregates


def test_backends_agree():
    from afcsim import kernels

    if "cython" not in kernels.BACKENDS:
        pytest.skip("extension not built")
    c = cfg(scenario="purify", kappa_tau=0.1, trials=40, seed=1, f_target=0.995, jitter="sine",
            jitter_amplitude=0.9, omega=0.4)
    assert [r.row() for r in run(c, backend="python").records] == [r.row() for r in run(c, backend="cython").records]


def test_csv_round_trip(tmp_path):
    c = cfg(scenario="purify", kappa_tau=0.05, trials=60, seed=8, f_target=0.999, jitter="drift", omega=1.0)
    rep = run(c)
    written = emit_csv(rep, tmp_path / "out.csv")
    assert [p.name for p in written] == ["out.csv", "out.trajectory.csv", "out.summary.json"]
    back = read_csv(tmp_path / "out.csv")
    assert [r.row() for r in back] == [r.row() for r in rep.records]
    assert aggregate(back) == rep.aggregates
    summary = json.loads((tmp_path / "out.summary.json").read_text())
    assert summary["aggregates"]["final_fidelity"]["mean"] == rep.aggregates["final_fidelity"]["mean"]
    assert summary["config"] == c.to_dict() and summary["metadata"]["seed"] == 8
    raw = (tmp_path / "out.csv").read_bytes()
    assert b"\r" not in raw and raw.startswith(",".join(CSV_COLUMNS).encode() + b"\n")


def test_trajectory_export(tmp_path):
    c = cfg(scenario="purify", kappa_tau=0.05, trials=3, seed=8, f_target=0.99, jitter="drift", omega=1.0)
    rep = run(c)
    emit_csv(rep, tmp_path / "p.csv")
    lines = (tmp_path / "p.trajectory.csv").read_text().splitlines()
    assert lines[0] == "trial,step,fidelity,reset"
    assert len(lines) - 1 == sum(r.steps + 1 for r in rep.records)
    last = [l for l in lines[1:] if l.startswith("0,")][-1].split(",")
    assert float(last[2]) == rep.records[0].final_fidelity


def test_report_reproducible_from_its_metadata(tmp_path):
    c = cfg(scenario="afc", kappa_tau=0.3, trials=30, seed=5, jitter="drift", omega=0.2)
    emit_csv(run(c), tmp_path / "a.csv")
    echo = json.loads((tmp_path / "a.summary.json").read_text())["config"]
    emit_csv(run(from_mapping(echo)), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_empty_report_header_only(tmp_path):
    rep = run(cfg(scenario="plan", l=20.0, l0=10.0))
    emit_csv(rep, tmp_path / "plan.csv")
    assert (tmp_path / "plan.csv").read_text() == ",".join(CSV_COLUMNS) + "\n"
    assert companion(tmp_path / "plan.csv", "summary.json").exists()


def test_unwritable_path(tmp_path):
    rep = run(cfg(scenario="plan", l=20.0, l0=10.0))
    with pytest.raises(OutputError) as err:
        emit_csv(rep, tmp_path / "missing" / "x.csv")
    assert "missing" in err.value.path


@given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=2, max_size=50))
def test_summary_order_independent(values):
    a, b = summarize(values), summarize(list(reversed(values)))
    assert a["mean"] == b["mean"]
    assert a["ci95"][0] <= a["mean"] <= a["ci95"][1]
