"""Closed-form local computing rate and TDMA offloading-time allocation."""
from __future__ import annotations

from typing import Dict, Mapping, NamedTuple

import numpy as np

from .exceptions import EmptyProfile
from .model import Device, SystemParams


def local_rate(dev: Device, params: SystemParams):
    """Best local computing rate (bits per frame) and the CPU frequency achieving it.

    The device runs the whole frame at the frequency that exactly spends its
    energy budget, capped at ``f_max_hz``.
    """
    T = params.frame_s
    f_star = min((dev.energy_j / (T * params.gamma_c)) ** (1.0 / 3.0), dev.f_max_hz)
    return T * f_star / dev.cycles_per_bit, f_star


def local_rate_bits(dev: Device, params: SystemParams) -> float:
    T = params.frame_s
    return min(T * dev.f_max_hz / dev.cycles_per_bit,
               T ** (2.0 / 3.0) / dev.cycles_per_bit * (dev.energy_j / params.gamma_c) ** (1.0 / 3.0))


class OffloadAllocation(NamedTuple):
    tau_s: Dict[int, float]
    gamma_star: float
    sum_rate_bits: float
    rate_bits: Dict[int, float]


def offload_rate(total_eg: float, params: SystemParams) -> float:
    """B T log2(1 + total_eg / (T sigma^2)), the optimal TDMA sum rate."""
    T = params.frame_s
    return params.bandwidth_hz * T * np.log2(1.0 + total_eg / (T * params.noise_w))


def offload_allocation(profile: Mapping[int, float], params: SystemParams) -> OffloadAllocation:
    """Optimal time split for offloading devices with energy-gain products ``profile``.

    At the optimum all devices see the same SNR
    ``gamma* = sum(E_k g_k) / (T sigma^2)`` and device k gets
    ``tau_k = E_k g_k / (gamma* sigma^2)``, so the slots fill the frame.
    """
    if len(profile) == 0:
        raise EmptyProfile("offloading profile is empty")
    keys = list(profile)
    eg = np.array([profile[k] for k in keys], dtype=float)
    if np.any(eg < 0):
        raise ValueError("energy-gain products must be nonnegative")
    T, s2 = params.frame_s, params.noise_w
    total = float(eg.sum())
    gamma_star = total / (T * s2)
    if gamma_star > 0:
        tau = eg / total * T
    else:
        tau = np.full(eg.size, T / eg.size)
    per_bit = params.bandwidth_hz * np.log2(1.0 + gamma_star)
    rates = tau * per_bit
    return OffloadAllocation(
        tau_s={k: float(t) for k, t in zip(keys, tau)},
        gamma_star=gamma_star,
        sum_rate_bits=float(params.bandwidth_hz * T * np.log2(1.0 + gamma_star)),
        rate_bits={k: float(r) for k, r in zip(keys, rates)},
    )


def offload_rate_if_added(current, candidate_eg: float, params: SystemParams) -> float:
    if candidate_eg < 0:
        raise ValueError("candidate_eg must be nonnegative")
    return offload_rate(candidate_eg + _total(current), params)


def _total(current) -> float:
    if isinstance(current, Mapping):
        return float(sum(current.values()))
    return float(np.sum(current)) if current is not None else 0.0
