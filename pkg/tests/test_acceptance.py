"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import json
import math
import time

import numpy as np
import pytest

from irsmec import cli
from irsmec.allocation import offload_allocation
from irsmec.beamforming import (align_phase, effective_gain, random_beam, sca_lower_bound,
                                shared_beam_sca)
from irsmec.channel import ChannelSet, GeometryConfig, realize_trial, trial_rng
from irsmec.harness import ExperimentSpec, run_experiment
from irsmec.model import Device, SystemParams
from irsmec.oracle import grouping_oracle, subset_oracle
from irsmec.selection import solve_finite_q, solve_infinite_q

TRIALS = 200


def _sweep(solvers, name, values, seed=7, **kw):
    spec = ExperimentSpec(devices=[Device(**kw.pop("device", {}))] * 10, sweep_name=name,
                          sweep_values=values, trials=TRIALS, seed=seed, solvers=solvers, **kw)
    rows = run_experiment(spec)
    return {(r["solver"], r["sweep_value"]): r for r in rows}


@pytest.mark.slow
def test_ac1_saturation_counts(report):
    t0 = time.perf_counter()
    targets = {500.0: 3, 1000.0: 5, 1500.0: 7}
    qs = list(range(1, 11))
    counts, flat, spreads = {}, True, {}
    for c, target in targets.items():
        res = _sweep(("infinite_q", "finite_q"), "q_budget", qs, device={"cycles_per_bit": c})
        counts[c] = res[("infinite_q", 1)]["mean_offloaders"]
        beyond = [res[("finite_q", q)]["mean_rate_bits"] for q in qs if q > round(counts[c])]
        spreads[c] = (max(beyond) - min(beyond)) / max(beyond) if beyond else 0.0
        flat &= spreads[c] <= 0.01
    elapsed = time.perf_counter() - t0
    in_band = all(abs(round(counts[c]) - t) <= 1 for c, t in targets.items())
    ok = in_band and flat and elapsed < 60
    detail = (", ".join(f"C={c:g}: {counts[c]:.2f} (flat {spreads[c]:.2%})" for c in targets)
              + f"; {elapsed:.1f}s")
    report("AC1 saturation counts within +-1 of {3,5,7}, flat beyond", ok, detail)
    assert ok, detail


def test_ac2_greedy_exactness_homogeneous(report):
    t0 = time.perf_counter()
    worst = 0.0
    for s in range(100):
        rng = np.random.default_rng(s)
        e, c = float(rng.uniform(0.002, 0.02)), float(rng.uniform(300, 2000))
        p = SystemParams(n_elements=8)
        devs, ch = realize_trial(p, GeometryConfig(), [Device(e, c)] * 6, trial_rng(s, 0))
        a = solve_infinite_q(devs, ch, p).sum_rate_bits
        b = subset_oracle(devs, ch, p).best_rate_bits
        worst = max(worst, abs(a - b) / b)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 10
    detail = f"max rel err {worst:.2e}; {elapsed:.2f}s"
    report("AC2 infinite_q equals subset oracle (homogeneous, K=6, N=8)", ok, detail)
    assert ok, detail


def test_ac3_finite_q_quality(report):
    t0 = time.perf_counter()
    p = SystemParams(n_elements=3, q_budget=2)
    ratios = []
    for s in range(50):
        devs, ch = realize_trial(p, GeometryConfig(), [Device()] * 4, trial_rng(s, 0))
        fin = solve_finite_q(devs, ch, p).sum_rate_bits
        ref = grouping_oracle(devs, ch, p, phase_levels=16).best_rate_bits
        ratios.append(fin / ref)
    elapsed = time.perf_counter() - t0
    worst = min(ratios)
    ok = worst >= 0.98 and elapsed < 300
    detail = f"worst ratio {worst:.4f} (seed {int(np.argmin(ratios))}); {elapsed:.1f}s"
    report("AC3 finite_q >= 98% of grouping oracle (K=4, Q=2, N=3)", ok, detail)
    assert ok, detail


def test_ac4_closed_form_allocation(report):
    rng = np.random.default_rng(2024)
    p = SystemParams()
    B, T, s2 = p.bandwidth_hz, p.frame_s, p.noise_w
    worst_snr = worst_budget = worst_sum = 0.0
    dominated = True
    for _ in range(1000):
        m = int(rng.integers(1, 9))
        eg = 10.0 ** rng.uniform(-14, -8, m)
        a = offload_allocation(dict(enumerate(eg)), p)
        tau = np.array([a.tau_s[k] for k in range(m)])
        snr = eg / (tau * s2)
        worst_snr = max(worst_snr, np.ptp(snr) / snr.max())
        worst_budget = max(worst_budget, abs(tau.sum() - T) / T)
        per_dev = float(np.sum(B * tau * np.log2(1 + snr)))
        worst_sum = max(worst_sum, abs(per_dev - a.sum_rate_bits) / a.sum_rate_bits)
        splits = rng.dirichlet(np.ones(m), size=1000) * T
        rand = np.sum(B * splits * np.log2(1 + eg / (splits * s2)), axis=1)
        dominated &= bool(np.all(rand <= a.sum_rate_bits * (1 + 1e-12)))
    ok = worst_snr <= 1e-9 and worst_budget <= 1e-12 and worst_sum <= 1e-9 and dominated
    detail = (f"snr spread {worst_snr:.1e}, budget {worst_budget:.1e}, "
              f"sum {worst_sum:.1e}, dominates 1e3 splits: {dominated}")
    report("AC4 closed-form allocation invariants and dominance", ok, detail)
    assert ok, detail


def test_ac5_phase_alignment(report):
    rng = np.random.default_rng(5)
    worst, dominated = 0.0, True
    for _ in range(100):
        h = complex(rng.standard_normal() + 1j * rng.standard_normal())
        q = rng.standard_normal(60) + 1j * rng.standard_normal(60)
        best = (abs(h) + np.abs(q).sum()) ** 2
        g = effective_gain(h, q, align_phase(h, q))
        worst = max(worst, abs(g - best) / best)
        V = np.exp(1j * rng.uniform(0, 2 * np.pi, (10_000, 60)))
        dominated &= bool(np.all(np.abs(h + V @ np.conj(q)) ** 2 <= g * (1 + 1e-12)))
    ok = worst <= 1e-10 and dominated
    detail = f"max rel err {worst:.1e}; dominates 1e4 random beams: {dominated}"
    report("AC5 align_phase optimal (N=60)", ok, detail)
    assert ok, detail


def test_ac6_sca_contract(report):
    rng = np.random.default_rng(6)
    mono = unit = True
    worst_tight = 0.0
    for _ in range(100):
        ch = ChannelSet(rng.standard_normal(3) + 1j * rng.standard_normal(3),
                        rng.standard_normal((3, 16)) + 1j * rng.standard_normal((3, 16)))
        w = rng.uniform(0.001, 0.02, 3)
        v, trace, its = shared_beam_sca(w, ch, v_init=random_beam(16, rng), return_iterates=True)
        mono &= bool(np.all(np.diff(trace) >= -1e-12 * trace.max()))
        unit &= all(np.all(np.abs(np.abs(x) - 1) <= 1e-12) for x in its)
        for vh in its:
            for k in range(3):
                g = effective_gain(ch.h_d[k], ch.q[k], vh)
                worst_tight = max(worst_tight,
                                  abs(sca_lower_bound(ch.h_d[k], ch.q[k], vh, vh) - g) / g)
    ok = mono and unit and worst_tight <= 1e-10
    detail = f"nondecreasing {mono}, unit modulus {unit}, tightness {worst_tight:.1e}"
    report("AC6 SCA trace monotone, bound tight, unit modulus", ok, detail)
    assert ok, detail


@pytest.mark.slow
def test_ac7_trends(report):
    ns = [10, 20, 30, 40, 50, 60]
    r = _sweep(("finite_q", "no_irs"), "n_elements", ns)
    fin = [r[("finite_q", n)]["mean_rate_bits"] for n in ns]
    gap = [f - r[("no_irs", n)]["mean_rate_bits"] for f, n in zip(fin, ns)]
    n_ok = bool(np.all(np.diff(fin) > 0) and np.all(np.diff(gap) > 0))

    ds = [30.0, 50.0, 70.0, 90.0]
    r = _sweep(("finite_q", "no_irs"), "distance_m", ds)
    keep = {s: r[(s, 90.0)]["mean_rate_bits"] / r[(s, 30.0)]["mean_rate_bits"]
            for s in ("finite_q", "no_irs")}
    d_ok = keep["no_irs"] < keep["finite_q"]

    names = ("finite_q", "random_beam", "offload_only", "no_irs", "local_only")
    r = _sweep(names, "energy_dbm", [10.0])
    mean = {s: r[(s, 10.0)]["mean_rate_bits"] for s in names}
    dom_ok = all(mean["finite_q"] > mean[s] for s in names[1:])
    margin_ok = 0 <= mean["random_beam"] - mean["no_irs"] < mean["finite_q"] - mean["no_irs"]

    ok = n_ok and d_ok and dom_ok and margin_ok
    detail = (f"N: finite {fin[0] / 1e6:.2f}->{fin[-1] / 1e6:.2f} Mb, gap "
              f"{gap[0] / 1e6:.2f}->{gap[-1] / 1e6:.2f} Mb; 30->90 m retained: finite "
              f"{keep['finite_q']:.2f}, no_irs {keep['no_irs']:.2f}; "
              + ", ".join(f"{s} {mean[s] / 1e6:.2f}" for s in names))
    report("AC7 trends in N, distance and scheme ordering", ok, detail)
    assert n_ok, detail
    assert d_ok, detail
    assert dom_ok, detail
    assert margin_ok, detail


def test_ac8_cli_determinism(report, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({
        "system": {"n_elements": 16, "q_budget": 3},
        "devices": {"count": 6, "energy_dbm": 10},
        "sweep": {"name": "q_budget", "values": [1, 2, 3]},
        "trials": 20, "seed": 99,
        "solvers": ["finite_q", "infinite_q", "random_beam", "no_irs"]}))
    outs = []
    for i, extra in enumerate(([], [], ["--jobs", "2"])):
        out = tmp_path / f"run{i}.csv"
        assert cli.main(["sweep", "--spec", str(spec), "--out", str(out)] + extra) == 0
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1] == outs[2]
    report("AC8 repeated sweeps give byte-identical CSV", ok,
           f"{len(outs[0])} bytes, serial and 2 workers")
    assert ok
