"""Benchmark schemes the proposed solvers are compared against."""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .beamforming import effective_gains, random_beam
from .channel import ChannelSet
from .model import Device, Solution, SystemParams
from .selection import solve_finite_q, solve_local_only, solve_with_gains


def solve_random_beam(devices: Sequence[Device], channels: ChannelSet, params: SystemParams,
                      rng: np.random.Generator, q_budget: Optional[int] = None) -> Solution:
    """Q beams with i.i.d. uniform phases; each device uses its best one."""
    Q = params.q_budget if q_budget is None else q_budget
    beams = [random_beam(channels.n_elements, rng) for _ in range(Q)]
    table = np.stack([effective_gains(channels, v) for v in beams])
    best = np.argmax(table, axis=0)
    gains = table[best, np.arange(channels.n_devices)]
    return solve_with_gains(devices, gains, params, assignment_hint=best.tolist(), beams=beams)


def solve_offload_only(devices: Sequence[Device], channels: ChannelSet,
                       params: SystemParams) -> Solution:
    return solve_finite_q(devices, channels, params, force_all=True)


def solve_no_irs(devices: Sequence[Device], channels: ChannelSet,
                 params: SystemParams) -> Solution:
    return solve_finite_q(devices, channels.without_irs(), params)


def solve_offload_only_no_irs(devices: Sequence[Device], channels: ChannelSet,
                              params: SystemParams) -> Solution:
    return solve_finite_q(devices, channels.without_irs(), params, force_all=True)


def solve_local(devices: Sequence[Device], channels: ChannelSet,
                params: SystemParams) -> Solution:
    return solve_local_only(devices, params)
