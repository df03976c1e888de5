"""Computation mode selection by successive refinement.

Devices are ranked by their trading computation rate (offloading rate with a
dedicated aligned beam minus the local rate) and admitted one by one while the
activation test holds; the first rejection ends the scan.
"""
from __future__ import annotations

import math
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from .allocation import local_rate_bits, offload_allocation, offload_rate
from .beamforming import align_phase, effective_gains, ideal_gains, shared_beam_sca
from .channel import ChannelSet
from .exceptions import DimensionMismatch, InvalidBudget
from .model import Device, Solution, SystemParams


class TradingRate(NamedTuple):
    lam: np.ndarray
    order: tuple


def trading_rate(dev: Device, ideal_gain: float, params: SystemParams) -> float:
    return offload_rate(dev.energy_j * ideal_gain, params) - local_rate_bits(dev, params)


def trading_order(lam) -> tuple:
    """Indices sorted by decreasing trading rate, ties by ascending index."""
    lam = np.asarray(lam, dtype=float)
    return tuple(sorted(range(lam.size), key=lambda k: (-lam[k], k)))


def trading_rates(devices: Sequence[Device], gains, params: SystemParams) -> TradingRate:
    lam = np.array([trading_rate(d, g, params) for d, g in zip(devices, gains)])
    return TradingRate(lam, trading_order(lam))


def activation_gain(current_total: float, candidate_eg: float, params: SystemParams) -> float:
    """Offloading-rate increase from adding a device with product ``candidate_eg``."""
    base = params.frame_s * params.noise_w + current_total
    return params.bandwidth_hz * params.frame_s * math.log1p(candidate_eg / base) / math.log(2.0)


def activation_test(current, candidate: Device, candidate_eg: float,
                    params: SystemParams) -> bool:
    """True iff offloading the candidate adds at least its local computing rate."""
    if isinstance(current, dict):
        total = float(sum(current.values()))
    else:
        total = float(np.sum(current)) if current is not None else 0.0
    return activation_gain(total, candidate_eg, params) >= local_rate_bits(candidate, params)


def _admits(total: float, candidate: Device, candidate_eg: float, params: SystemParams) -> bool:
    # a zero product only ever ties (0 >= 0); such devices are left local
    return candidate_eg > 0 and activation_test(total, candidate, candidate_eg, params)


def build_solution(devices: Sequence[Device], params: SystemParams, eg: Dict[int, float],
                   assignment: Dict[int, int], beams: List[np.ndarray],
                   order=(), meta=None) -> Solution:
    """Allocate time among offloaders ``eg`` and run everybody else locally."""
    rate_off = {k: 0.0 for k in range(len(devices))}
    rate_loc = {k: 0.0 for k in range(len(devices))}
    tau: Dict[int, float] = {}
    total = 0.0
    if eg:
        alloc = offload_allocation(eg, params)
        tau = alloc.tau_s
        rate_off.update(alloc.rate_bits)
        total += alloc.sum_rate_bits
    for k, dev in enumerate(devices):
        if k not in eg:
            rate_loc[k] = local_rate_bits(dev, params)
            total += rate_loc[k]
    return Solution(
        offload_set=frozenset(eg),
        beam_assignment=dict(assignment),
        beams=list(beams),
        tau_s=tau,
        rate_offload_bits=rate_off,
        rate_local_bits=rate_loc,
        sum_rate_bits=float(total),
        order=tuple(order),
        meta=dict(meta or {}),
    )


def _check_sizes(devices, channels: ChannelSet):
    if len(devices) != channels.n_devices:
        raise DimensionMismatch(
            f"{len(devices)} devices but channels for {channels.n_devices}")


def solve_infinite_q(devices: Sequence[Device], channels: ChannelSet,
                     params: SystemParams) -> Solution:
    """Mode selection when every offloading device can have its own beam."""
    _check_sizes(devices, channels)
    gains = ideal_gains(channels)
    tr = trading_rates(devices, gains, params)
    eg: Dict[int, float] = {}
    total = 0.0
    for k in tr.order:
        cand = devices[k].energy_j * gains[k]
        if not _admits(total, devices[k], cand, params):
            break
        eg[k] = cand
        total += cand
    beams = [align_phase(channels.h_d[k], channels.q[k]) for k in eg]
    assignment = {k: i for i, k in enumerate(eg)}
    return build_solution(devices, params, eg, assignment, beams, tr.order,
                          meta={"lambda": tr.lam.tolist()})


def solve_finite_q(devices: Sequence[Device], channels: ChannelSet, params: SystemParams,
                   q_budget: Optional[int] = None, force_all: bool = False,
                   sca_eps: float = 1e-6, sca_max_iter: int = 200) -> Solution:
    """Mode selection with at most ``q_budget`` distinct IRS beams.

    The first Q-1 devices in trading-rate order get dedicated aligned beams;
    later devices share beam Q, re-optimized by SCA each time a candidate is
    considered. Once the scan stops, each offloader is moved to the configured
    beam giving it the largest gain. With ``force_all`` every device offloads
    and the activation test is skipped.
    """
    _check_sizes(devices, channels)
    Q = params.q_budget if q_budget is None else q_budget
    if Q < 1:
        raise InvalidBudget(f"q_budget must be >= 1, got {Q}")
    gains = ideal_gains(channels)
    tr = trading_rates(devices, gains, params)
    energy = np.array([d.energy_j for d in devices], dtype=float)

    dedicated: Dict[int, float] = {}
    dedicated_beams: List[np.ndarray] = []
    shared: Dict[int, float] = {}
    v_shared = None
    sca_iters = 0
    for pos, k in enumerate(tr.order):
        if pos < Q - 1:
            v = align_phase(channels.h_d[k], channels.q[k])
            cand = energy[k] * gains[k]
            trial_shared, trial_v = shared, v_shared
        else:
            members = list(shared) + [k]
            sub = channels.subset(members)
            trial_v, trace = shared_beam_sca(energy[members], sub, eps=sca_eps,
                                             max_iter=sca_max_iter)
            sca_iters += len(trace) - 1
            g_sub = effective_gains(sub, trial_v)
            trial_shared = {m: energy[m] * g for m, g in zip(members[:-1], g_sub[:-1])}
            cand = energy[k] * g_sub[-1]
        total = sum(dedicated.values()) + sum(trial_shared.values())
        if not force_all and not _admits(total, devices[k], cand, params):
            break
        if pos < Q - 1:
            dedicated[k] = cand
            dedicated_beams.append(v)
        else:
            shared = dict(trial_shared)
            shared[k] = cand
            v_shared = trial_v

    eg = {**dedicated, **shared}
    assignment = {k: i for i, k in enumerate(dedicated)}
    beams = list(dedicated_beams)
    if shared:
        for k in shared:
            assignment[k] = len(beams)
        beams.append(v_shared)
    if len(beams) > 1:
        eg, assignment = _best_beam_association(channels, energy, eg, assignment, beams)
    return build_solution(devices, params, eg, assignment, beams, tr.order,
                          meta={"lambda": tr.lam.tolist(), "sca_iterations": sca_iters})


def _best_beam_association(channels, energy, eg, assignment, beams):
    """Let every offloader transmit under whichever configured beam suits it best."""
    members = list(eg)
    table = np.stack([effective_gains(channels.subset(members), v) for v in beams])
    eg, assignment = dict(eg), dict(assignment)
    for j, k in enumerate(members):
        best = int(np.argmax(table[:, j]))
        if table[best, j] > table[assignment[k], j] * (1 + 1e-12):
            assignment[k] = best
            eg[k] = energy[k] * table[best, j]
    return eg, assignment


def solve_with_gains(devices: Sequence[Device], gains, params: SystemParams,
                     assignment_hint=None, beams=None) -> Solution:
    """Successive refinement with externally fixed per-device gains."""
    gains = np.asarray(gains, dtype=float)
    tr = trading_rates(devices, gains, params)
    eg: Dict[int, float] = {}
    total = 0.0
    for k in tr.order:
        cand = devices[k].energy_j * gains[k]
        if not _admits(total, devices[k], cand, params):
            break
        eg[k] = cand
        total += cand
    assignment = {k: (assignment_hint[k] if assignment_hint is not None else 0) for k in eg}
    return build_solution(devices, params, eg, assignment, beams or [], tr.order)


def solve_local_only(devices: Sequence[Device], params: SystemParams) -> Solution:
    return build_solution(devices, params, {}, {}, [], ())
