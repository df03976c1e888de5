import csv
import io
import json
import math

import numpy as np
import pytest

from conftest import scenario
from irsmec import cli
from irsmec.allocation import local_rate_bits
from irsmec.baselines import solve_local, solve_no_irs, solve_offload_only
from irsmec.channel import ChannelSet
from irsmec.harness import (CSV_COLUMNS, ExperimentError, ExperimentSpec, check_invariants,
                            load_spec, read_channel_dump, rows_to_csv, run_experiment,
                            spec_from_dict, write_channel_dump)
from irsmec.model import Device, SystemParams, dbm_to_watts
from irsmec.selection import solve_finite_q

SPEC = {
    "system": {"noise_dbm": -80, "n_elements": 8, "q_budget": 3},
    "devices": {"count": 4, "energy_dbm": 10, "cycles_per_bit": 1000},
    "sweep": {"name": "n_elements", "values": [4, 8]},
    "trials": 5,
    "seed": 3,
    "solvers": ["finite_q", "no_irs", "local_only"],
}


@pytest.fixture
def spec_path(tmp_path):
    p = tmp_path / "spec.json"
    p.write_text(json.dumps(SPEC))
    return p


def test_spec_loading_converts_units(spec_path):
    spec = load_spec(spec_path)
    assert math.isclose(spec.params.noise_w, 1e-11, rel_tol=1e-12)
    assert len(spec.devices) == 4
    assert math.isclose(spec.devices[0].energy_j, 0.01, rel_tol=1e-12)
    assert spec.sweep_name == "n_elements" and spec.sweep_values == (4, 8)
    assert spec.solvers == ("finite_q", "no_irs", "local_only")


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(trials=0)
    with pytest.raises(ValueError):
        ExperimentSpec(solvers="magic")
    with pytest.raises(ValueError):
        ExperimentSpec(sweep_name="bogus")
    with pytest.raises(ValueError):
        ExperimentSpec(sweep_values=())


def test_spec_device_list_form():
    spec = spec_from_dict({"devices": [{"energy_j": 0.02}, {"energy_dbm": 0}], "trials": 1})
    assert [d.energy_j for d in spec.devices] == [0.02, pytest.approx(1e-3)]


def test_csv_schema(spec_path):
    rows = run_experiment(load_spec(spec_path))
    text = rows_to_csv(rows)
    parsed = list(csv.reader(io.StringIO(text)))
    assert tuple(parsed[0]) == CSV_COLUMNS
    assert len(parsed) == 1 + 2 * 3
    assert all(r[-1] == "" for r in parsed[1:])
    assert [r[1] for r in parsed[1:]] == ["4"] * 3 + ["8"] * 3


def test_run_is_deterministic(spec_path):
    a = rows_to_csv(run_experiment(load_spec(spec_path)))
    b = rows_to_csv(run_experiment(load_spec(spec_path)))
    assert a == b


def test_parallel_matches_serial(spec_path):
    spec = load_spec(spec_path)
    assert rows_to_csv(run_experiment(spec, n_jobs=2)) == rows_to_csv(run_experiment(spec))


def test_local_only_ignores_n(spec_path):
    spec = load_spec(spec_path)
    rows = [r for r in run_experiment(spec) if r["solver"] == "local_only"]
    assert rows[0]["mean_rate_bits"] == rows[1]["mean_rate_bits"]
    assert rows[0]["std_rate_bits"] == 0.0
    assert math.isclose(rows[0]["mean_rate_bits"],
                        sum(local_rate_bits(d, spec.params) for d in spec.devices), rel_tol=1e-12)


def test_timing_fills_runtime():
    spec = ExperimentSpec(trials=2, devices=[Device()] * 3, params=SystemParams(n_elements=4))
    row = run_experiment(spec, timing=True)[0]
    assert isinstance(row["mean_runtime_ms"], float) and row["mean_runtime_ms"] >= 0


@pytest.mark.parametrize("seed", range(3))
def test_no_irs_equals_finite_q_without_elements(seed):
    p, devs, ch = scenario(seed, k=6, n=8)
    empty = ChannelSet(ch.h_d, np.zeros((6, 0), complex))
    a = solve_no_irs(devs, ch, p).sum_rate_bits
    b = solve_finite_q(devs, empty, p).sum_rate_bits
    assert math.isclose(a, b, rel_tol=1e-12)


def test_local_only_sum():
    p, devs, ch = scenario(0, k=5, cycles=700.0)
    assert math.isclose(solve_local(devs, ch, p).sum_rate_bits,
                        sum(local_rate_bits(d, p) for d in devs), rel_tol=1e-12)


def test_offload_only_zero_energy_device():
    p, devs, ch = scenario(1, k=3, n=8)
    devs = [devs[0].with_(energy_j=0.0)] + devs[1:]
    sol = solve_offload_only(devs, ch, p)
    assert sol.offload_set == {0, 1, 2}
    assert sol.rate_offload_bits[0] == 0.0 and sol.tau_s[0] == 0.0
    assert math.isclose(sum(sol.tau_s.values()), p.frame_s, rel_tol=1e-12)


def test_channel_dump_roundtrip(tmp_path):
    _, _, a = scenario(0, k=3, n=4)
    _, _, b = scenario(0, k=3, n=4, trial=1)
    path = tmp_path / "ch.csv"
    write_channel_dump(path, [(0, a), (1, b)])
    back = read_channel_dump(path)
    for t, ch in ((0, a), (1, b)):
        assert np.array_equal(back[t].h_d, ch.h_d) and np.array_equal(back[t].q, ch.q)
    header = path.read_text().splitlines()[0].split(",")
    assert header[:6] == ["trial", "device", "h_d_re", "h_d_im", "q0_re", "q0_im"]


def test_experiment_error_is_tagged(monkeypatch):
    import irsmec.harness as h

    def boom(devices, channels, params, rng):
        raise RuntimeError("solver exploded")
    monkeypatch.setitem(h.SOLVERS, "finite_q", boom)
    spec = ExperimentSpec(trials=2, sweep_name="q_budget", sweep_values=(2,),
                          devices=[Device()] * 2, params=SystemParams(n_elements=4))
    with pytest.raises(ExperimentError) as info:
        run_experiment(spec)
    assert info.value.sweep_value == 2 and info.value.trial == 0
    assert "solver exploded" in str(info.value)


def test_invariant_report_passes():
    p, devs, ch = scenario(4, k=6, n=16)
    report = check_invariants(devs, ch, p, np.random.default_rng(0), n_random=200)
    assert report and all(ok for _, ok, _ in report), [r for r in report if not r[1]]


# ------------------------------------------------------------------- CLI

def test_cli_solve(spec_path, capsys):
    assert cli.main(["solve", "--spec", str(spec_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert set(out) == {"finite_q", "no_irs", "local_only"}


def test_cli_sweep_writes_csv(spec_path, tmp_path):
    out = tmp_path / "r.csv"
    assert cli.main(["sweep", "--spec", str(spec_path), "--trials", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 7


def test_cli_sweep_dump(spec_path, tmp_path):
    dump = tmp_path / "d.csv"
    assert cli.main(["sweep", "--spec", str(spec_path), "--trials", "2",
                     "--out", str(tmp_path / "r.csv"), "--dump-channels", str(dump)]) == 0
    assert sorted(read_channel_dump(dump)) == [0, 1]


def test_cli_oracle(tmp_path, capsys):
    p = tmp_path / "tiny.json"
    p.write_text(json.dumps({"system": {"n_elements": 3, "q_budget": 2},
                             "devices": {"count": 4}, "seed": 3}))
    assert cli.main(["oracle", "--spec", str(p)]) == 0
    out = capsys.readouterr().out
    assert "gap_infinite" in out and "ratio_finite" in out


def test_cli_validate(spec_path, capsys):
    assert cli.main(["validate", "--spec", str(spec_path), "--seed", "1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out and all(line.startswith("PASS") for line in out)


def test_cli_errors_exit_nonzero(tmp_path, capsys):
    assert cli.main(["sweep", "--spec", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"system": {"bandwidth_hz": -1}}))
    assert cli.main(["solve", "--spec", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err
    assert cli.main(["sweep", "--trials", "0"]) == 2


def test_spec_distance_key_moves_cluster():
    spec = spec_from_dict({"geometry": {"distance_m": 60}, "trials": 1})
    assert spec.geometry.device_cluster_center_m == (60.0, 0.0, 0.0)
    assert spec.geometry.irs_pos_m == (60.0, 0.0, 4.0)
