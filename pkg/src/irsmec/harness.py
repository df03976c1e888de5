"""Monte Carlo experiment runner, scenario files and CSV output."""
from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import baselines
from .beamforming import (align_phase, effective_gain, ideal_gains, random_beam,
                          sca_lower_bound, shared_beam_sca)
from .allocation import offload_allocation
from .channel import ChannelSet, GeometryConfig, realize_trial, trial_rng
from .exceptions import IrsMecError
from .model import Device, SystemParams, dbm_to_watts, validate_scenario
from .oracle import grouping_oracle, subset_oracle
from .selection import activation_test, solve_finite_q, solve_infinite_q

log = logging.getLogger(__name__)

CSV_COLUMNS = ("sweep_name", "sweep_value", "solver", "trials", "mean_rate_bits",
               "std_rate_bits", "mean_offloaders", "mean_runtime_ms")

SWEEPABLE = ("none", "q_budget", "n_elements", "cycles_per_bit", "energy_dbm",
             "distance_m", "alpha_ap_dev", "n_devices")


def _oracle_subset(devices, channels, params, rng):
    res = subset_oracle(devices, channels, params)
    return res.best_rate_bits, len(res.best_offload_set)


def _oracle_grouping(devices, channels, params, rng):
    res = grouping_oracle(devices, channels, params)
    return res.best_rate_bits, len(res.best_offload_set)


def _wrap(fn):
    def run(devices, channels, params, rng):
        sol = fn(devices, channels, params)
        return sol.sum_rate_bits, sol.n_offload
    return run


def _random_beam(devices, channels, params, rng):
    sol = baselines.solve_random_beam(devices, channels, params, rng)
    return sol.sum_rate_bits, sol.n_offload


SOLVERS: Dict[str, Callable] = {
    "infinite_q": _wrap(solve_infinite_q),
    "finite_q": _wrap(solve_finite_q),
    "oracle_subset": _oracle_subset,
    "oracle_grouping": _oracle_grouping,
    "random_beam": _random_beam,
    "offload_only": _wrap(baselines.solve_offload_only),
    "local_only": _wrap(baselines.solve_local),
    "no_irs": _wrap(baselines.solve_no_irs),
    "offload_only_no_irs": _wrap(baselines.solve_offload_only_no_irs),
}


class ExperimentError(IrsMecError):
    def __init__(self, sweep_value, trial, cause):
        self.sweep_value, self.trial, self.cause = sweep_value, trial, cause
        super().__init__(f"sweep value {sweep_value!r}, trial {trial}: {cause}")


@dataclass
class ExperimentSpec:
    params: SystemParams = field(default_factory=SystemParams)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    devices: List[Device] = field(default_factory=lambda: [Device() for _ in range(10)])
    sweep_name: str = "none"
    sweep_values: Sequence = (None,)
    trials: int = 200
    seed: int = 0
    solvers: Tuple[str, ...] = ("finite_q",)

    def __post_init__(self):
        if isinstance(self.solvers, str):
            self.solvers = (self.solvers,)
        self.solvers = tuple(self.solvers)
        self.sweep_values = tuple(self.sweep_values)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.sweep_values:
            raise ValueError("sweep values must be nonempty")
        if self.sweep_name not in SWEEPABLE:
            raise ValueError(f"unknown sweep {self.sweep_name!r}; choose from {SWEEPABLE}")
        for s in self.solvers:
            if s not in SOLVERS:
                raise ValueError(f"unknown solver {s!r}; choose from {sorted(SOLVERS)}")

    def scenario(self, value=None):
        """(params, geometry, device templates) with the sweep value applied."""
        params, geo, devices = self.params, self.geometry, list(self.devices)
        name = self.sweep_name
        if name == "none" or value is None:
            pass
        elif name == "q_budget":
            params = params.with_(q_budget=int(value))
        elif name == "n_elements":
            params = params.with_(n_elements=int(value))
        elif name == "cycles_per_bit":
            devices = [d.with_(cycles_per_bit=float(value)) for d in devices]
        elif name == "energy_dbm":
            devices = [d.with_(energy_j=dbm_to_watts(float(value))) for d in devices]
        elif name == "distance_m":
            geo = geo.at_distance(float(value))
        elif name == "alpha_ap_dev":
            geo = geo.with_(alpha_ap_dev=float(value))
        elif name == "n_devices":
            devices = [devices[i % len(devices)] for i in range(int(value))]
        return params, geo, devices


# ---------------------------------------------------------------- spec files

def _vec(x):
    return tuple(float(v) for v in x)


def spec_from_dict(d: dict) -> ExperimentSpec:
    """Build a spec from its JSON form (powers in dBm, gains in dB)."""
    sysd = dict(d.get("system", {}))
    if "noise_dbm" in sysd:
        sysd["noise_w"] = dbm_to_watts(sysd.pop("noise_dbm"))
    params = SystemParams(**sysd)

    geod = dict(d.get("geometry", {}))
    for key in ("ap_pos_m", "irs_pos_m", "device_cluster_center_m"):
        if key in geod:
            geod[key] = _vec(geod[key])
    distance = geod.pop("distance_m", None)
    geometry = GeometryConfig(**geod)
    if distance is not None:
        geometry = geometry.at_distance(float(distance))

    devd = d.get("devices", {"count": 10})
    if isinstance(devd, dict):
        devd = [{k: v for k, v in devd.items() if k != "count"}] * int(devd.get("count", 10))
    devices = [_device_from_dict(x) for x in devd]

    sweep = d.get("sweep", {"name": "none", "values": [None]})
    solvers = d.get("solvers", d.get("solver", "finite_q"))
    return ExperimentSpec(params=params, geometry=geometry, devices=devices,
                          sweep_name=sweep.get("name", "none"),
                          sweep_values=sweep.get("values", [None]),
                          trials=int(d.get("trials", 200)), seed=int(d.get("seed", 0)),
                          solvers=solvers)


def _device_from_dict(x: dict) -> Device:
    kw = {}
    if "energy_dbm" in x:
        kw["energy_j"] = dbm_to_watts(float(x["energy_dbm"]))
    if "energy_j" in x:
        kw["energy_j"] = float(x["energy_j"])
    if "cycles_per_bit" in x:
        kw["cycles_per_bit"] = float(x["cycles_per_bit"])
    if "f_max_hz" in x:
        kw["f_max_hz"] = float(x["f_max_hz"])
    if "position_m" in x:
        kw["position_m"] = _vec(x["position_m"])
    return Device(**kw)


def load_spec(path) -> ExperimentSpec:
    with open(path) as fh:
        return spec_from_dict(json.load(fh))


# ---------------------------------------------------------------- running

def _run_trial(args):
    spec, value, trial = args
    params, geo, templates = spec.scenario(value)
    rng = trial_rng(spec.seed, trial)
    devices, channels = realize_trial(params, geo, templates, rng)
    out = []
    for name in spec.solvers:
        t0 = time.perf_counter()
        rate, n_off = SOLVERS[name](devices, channels, params, trial_rng(spec.seed, trial, 1))
        out.append((name, rate, n_off, (time.perf_counter() - t0) * 1e3))
    return out


def run_experiment(spec: ExperimentSpec, n_jobs: int = 1, timing: bool = False) -> List[dict]:
    """Mean/std of the sum rate per (sweep value, solver) over ``spec.trials``.

    Trial t of every sweep value reuses the generator stream (seed, t), so
    sweep points are compared on common random numbers. Rows come out in
    (sweep value, solver) order whatever ``n_jobs`` is.
    """
    rows = []
    for value in spec.sweep_values:
        params, _, templates = spec.scenario(value)
        validate_scenario(params, templates)
        jobs = [(spec, value, t) for t in range(spec.trials)]
        try:
            if n_jobs > 1:
                with ProcessPoolExecutor(max_workers=n_jobs) as ex:
                    results = list(ex.map(_run_trial, jobs, chunksize=8))
            else:
                results = []
                for job in jobs:
                    try:
                        results.append(_run_trial(job))
                    except Exception as e:
                        raise ExperimentError(value, job[2], e) from e
        except ExperimentError:
            raise
        except Exception as e:
            raise ExperimentError(value, None, e) from e
        for j, name in enumerate(spec.solvers):
            rates = np.array([r[j][1] for r in results])
            n_off = np.array([r[j][2] for r in results])
            ms = np.array([r[j][3] for r in results])
            rows.append({
                "sweep_name": spec.sweep_name,
                "sweep_value": "" if value is None else value,
                "solver": name,
                "trials": spec.trials,
                "mean_rate_bits": float(rates.mean()),
                "std_rate_bits": float(rates.std(ddof=1)) if rates.size > 1 else 0.0,
                "mean_offloaders": float(n_off.mean()),
                "mean_runtime_ms": float(ms.mean()) if timing else "",
            })
        log.info("sweep %s=%s done", spec.sweep_name, value)
    return rows


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_csv(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))


# ---------------------------------------------------------------- fixtures

def channel_dump_rows(trial: int, channels: ChannelSet):
    for k in range(channels.n_devices):
        row = [trial, k, channels.h_d[k].real, channels.h_d[k].imag]
        for z in channels.q[k]:
            row += [z.real, z.imag]
        yield row


def write_channel_dump(path, trials: Sequence[Tuple[int, ChannelSet]]) -> None:
    """CSV: trial, device, h_d_re, h_d_im, q0_re, q0_im, ... (repr precision)."""
    n = trials[0][1].n_elements if trials else 0
    header = ["trial", "device", "h_d_re", "h_d_im"]
    for i in range(n):
        header += [f"q{i}_re", f"q{i}_im"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t, ch in trials:
            for row in channel_dump_rows(t, ch):
                w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x
                            for x in row])


def read_channel_dump(path) -> Dict[int, ChannelSet]:
    per_trial: Dict[int, list] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            t, k = int(row[0]), int(row[1])
            vals = [float(x) for x in row[2:]]
            h = complex(vals[0], vals[1])
            q = np.array(vals[2::2]) + 1j * np.array(vals[3::2])
            per_trial.setdefault(t, []).append((k, h, q))
    out = {}
    for t, items in per_trial.items():
        items.sort(key=lambda x: x[0])
        n = items[0][2].size
        out[t] = ChannelSet(np.array([x[1] for x in items]),
                            np.array([x[2] for x in items]).reshape(len(items), n))
    return out


# ---------------------------------------------------------------- invariants

def check_invariants(devices, channels: ChannelSet, params: SystemParams,
                     rng: np.random.Generator, n_random: int = 1000) -> List[Tuple[str, bool, str]]:
    """Spot-check the solver contracts on one realization."""
    report = []

    def record(name, ok, detail=""):
        report.append((name, bool(ok), detail))

    gains = ideal_gains(channels)
    worst = 0.0
    for k in range(channels.n_devices):
        v = align_phase(channels.h_d[k], channels.q[k])
        g = effective_gain(channels.h_d[k], channels.q[k], v)
        worst = max(worst, abs(g - gains[k]) / gains[k] if gains[k] else abs(g))
        rnd = max(effective_gain(channels.h_d[k], channels.q[k], random_beam(channels.n_elements, rng))
                  for _ in range(max(1, n_random // max(1, channels.n_devices))))
        if rnd > g * (1 + 1e-12):
            record("align_phase dominates random beams", False, f"device {k}")
    record("align_phase closed-form gain", worst <= 1e-10, f"max rel err {worst:.2e}")

    energy = np.array([d.energy_j for d in devices])
    v, trace, iters = shared_beam_sca(energy, channels, return_iterates=True)
    mono = bool(np.all(np.diff(trace) >= -1e-12 * np.abs(trace[:-1])))
    record("SCA trace nondecreasing", mono, f"{len(trace) - 1} iterations")
    tight = max(abs(sca_lower_bound(channels.h_d[k], channels.q[k], vh, vh)
                    - effective_gain(channels.h_d[k], channels.q[k], vh))
                / max(effective_gain(channels.h_d[k], channels.q[k], vh), 1e-300)
                for vh in iters for k in range(channels.n_devices))
    record("SCA lower bound tight", tight <= 1e-10, f"max rel err {tight:.2e}")
    record("SCA unit modulus", all(np.all(np.abs(np.abs(x) - 1) <= 1e-12) for x in iters))

    eg = {k: float(energy[k] * gains[k]) for k in range(len(devices))}
    alloc = offload_allocation(eg, params)
    tau_sum = sum(alloc.tau_s.values())
    record("allocation fills frame", abs(tau_sum - params.frame_s) <= 1e-12 * params.frame_s,
           f"sum tau = {tau_sum!r}")
    per_dev = sum(params.bandwidth_hz * t * np.log2(1 + eg[k] / (t * params.noise_w))
                  for k, t in alloc.tau_s.items() if t > 0)
    record("allocation closed form", abs(per_dev - alloc.sum_rate_bits) <= 1e-9 * alloc.sum_rate_bits)

    inf = solve_infinite_q(devices, channels, params)
    fin = solve_finite_q(devices, channels, params)
    for name, sol in (("infinite_q", inf), ("finite_q", fin)):
        try:
            sol.check(params)
            record(f"{name} solution invariants", True)
        except AssertionError as e:
            record(f"{name} solution invariants", False, str(e))
        m = sol.n_offload
        record(f"{name} prefix of trading order", set(sol.order[:m]) == set(sol.offload_set))
    m = inf.n_offload
    if m < len(devices):
        nxt = inf.order[m]
        cur = {k: energy[k] * gains[k] for k in inf.offload_set}
        ok = not (energy[nxt] * gains[nxt] > 0 and
                  activation_test(cur, devices[nxt], energy[nxt] * gains[nxt], params))
        record("infinite_q stops at first rejection", ok)
    if len(devices) <= 16:
        orc = subset_oracle(devices, channels, params)
        record("subset oracle >= infinite_q",
               orc.best_rate_bits >= inf.sum_rate_bits * (1 - 1e-12),
               f"gap {orc.best_rate_bits - inf.sum_rate_bits:.3g} bits")
    return report
