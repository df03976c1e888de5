"""Brute-force reference solvers for small instances."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Sequence

import numpy as np

from .allocation import local_rate_bits, offload_rate
from .beamforming import ideal_gains
from .channel import ChannelSet
from .exceptions import TooLarge
from .model import Device, SystemParams

MAX_SUBSET_DEVICES = 16
_TIE_RTOL = 1e-12


@dataclass
class OracleResult:
    best_rate_bits: float
    best_offload_set: FrozenSet[int]
    enumerated_count: int
    best_grouping: Dict[int, int] = field(default_factory=dict)
    best_beams: list = field(default_factory=list)


def _subset_masks(k: int) -> np.ndarray:
    ids = np.arange(2 ** k)
    return ((ids[:, None] >> np.arange(k)) & 1).astype(bool)


def _lexmin(masks: np.ndarray, candidates: np.ndarray) -> int:
    return min(candidates, key=lambda i: tuple(np.flatnonzero(masks[i])))


def _best_subset(rates: np.ndarray, masks: np.ndarray) -> int:
    best = rates.max()
    tied = np.flatnonzero(rates >= best - _TIE_RTOL * abs(best))
    return int(_lexmin(masks, tied))


def subset_oracle(devices: Sequence[Device], channels: ChannelSet,
                  params: SystemParams) -> OracleResult:
    """Best offloading set when every offloader gets its own aligned beam."""
    k = len(devices)
    if k > MAX_SUBSET_DEVICES:
        raise TooLarge(f"subset oracle limited to {MAX_SUBSET_DEVICES} devices, got {k}")
    if k == 0:
        return OracleResult(0.0, frozenset(), 1)
    energy = np.array([d.energy_j for d in devices])
    eg = energy * ideal_gains(channels)
    local = np.array([local_rate_bits(d, params) for d in devices])
    masks = _subset_masks(k)
    rates = offload_rate(masks @ eg, params) + (~masks) @ local
    i = _best_subset(rates, masks)
    return OracleResult(float(rates[i]), frozenset(np.flatnonzero(masks[i]).tolist()), 2 ** k)


def quantized_beams(n: int, phase_levels: int) -> np.ndarray:
    """All phase_levels**n unit-modulus vectors with phases 2*pi*m/phase_levels."""
    phases = np.exp(2j * np.pi * np.arange(phase_levels) / phase_levels)
    if n == 0:
        return np.ones((1, 0), dtype=complex)
    grid = np.array(list(itertools.product(range(phase_levels), repeat=n)))
    return phases[grid]


def grouping_oracle(devices: Sequence[Device], channels: ChannelSet, params: SystemParams,
                    phase_levels: int = 16, q_budget=None) -> OracleResult:
    """Exhaustive search over offloading sets, beam groupings and quantized beams."""
    k = len(devices)
    n = channels.n_elements
    Q = params.q_budget if q_budget is None else q_budget
    if k > 6 or Q > 3 or n > 4 or phase_levels > 16:
        raise TooLarge("grouping oracle limited to K<=6, Q<=3, N<=4, phase_levels<=16")
    if k == 0:
        return OracleResult(0.0, frozenset(), 1)

    energy = np.array([d.energy_j for d in devices])
    local = np.array([local_rate_bits(d, params) for d in devices])
    cand = quantized_beams(n, phase_levels)                      # (L^N, N)
    gain = np.abs(channels.h_d[:, None] + channels.q.conj() @ cand.T) ** 2  # (K, L^N)
    weighted = energy[:, None] * gain

    # best quantized beam for every possible group of devices
    masks = _subset_masks(k)
    group_val = masks.astype(float) @ weighted                   # (2^K, L^N)
    group_arg = np.argmax(group_val, axis=1)
    group_best = group_val[np.arange(masks.shape[0]), group_arg]

    best_rate, best_set, best_grouping, best_beams = -np.inf, frozenset(), {}, []
    count = 0
    for sm in range(2 ** k):
        members = np.flatnonzero(masks[sm]).tolist()
        loc = float(local[~masks[sm]].sum())
        if not members:
            count += 1
            rate, grouping = loc, ()
        else:
            rate, grouping = -np.inf, None
            for assign in itertools.product(range(Q), repeat=len(members)):
                count += 1
                total = 0.0
                for q in range(Q):
                    gm = sum(1 << m for m, a in zip(members, assign) if a == q)
                    total += group_best[gm] if gm else 0.0
                r = offload_rate(total, params) + loc
                if r > rate:
                    rate, grouping = r, assign
        if rate > best_rate:
            best_rate, best_set = rate, frozenset(members)
            best_grouping = dict(zip(members, grouping))
            best_beams = []
            for q in range(Q):
                gm = sum(1 << m for m, a in best_grouping.items() if a == q)
                best_beams.append(cand[group_arg[gm]] if gm else None)
    return OracleResult(float(best_rate), best_set, count, best_grouping, best_beams)
