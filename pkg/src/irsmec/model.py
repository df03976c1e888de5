"""Domain types shared by the solvers.

Everything is kept in SI units (W, J, Hz, s, bits). Rates are bits per
frame of length ``frame_s``; divide by ``frame_s`` for bits/s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Sequence, Tuple

import numpy as np

from .exceptions import EmptyDeviceList, NonPositiveParameter

RTOL = 1e-9

# CPU cap. With E_k = 10 dBm and gamma_c = 1e-28 the energy-limited frequency
# is 4.64e8 Hz, so this cap binds by default (see README, "Default parameters").
DEFAULT_F_MAX_HZ = 2.3e8


def dbm_to_watts(p_dbm):
    """Convert dBm to watts (also used for dBm-valued energies in joules)."""
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_w):
    return 10.0 * math.log10(p_w) + 30.0


def db_to_linear(x_db):
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class SystemParams:
    bandwidth_hz: float = 1e6
    frame_s: float = 1.0
    noise_w: float = 1e-11
    n_elements: int = 60
    q_budget: int = 5
    gamma_c: float = 1e-28

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class Device:
    energy_j: float = 0.01
    cycles_per_bit: float = 1000.0
    f_max_hz: float = DEFAULT_F_MAX_HZ
    position_m: Tuple[float, float, float] = (30.0, 0.0, 0.0)

    def with_(self, **changes) -> "Device":
        return replace(self, **changes)


@dataclass
class Solution:
    """Resource allocation returned by every solver.

    ``rate_offload_bits`` and ``rate_local_bits`` are keyed by every device
    index; the entry for the mode a device did not select is 0.
    ``beams`` holds unit-modulus vectors indexed by ``beam_assignment``.
    """

    offload_set: FrozenSet[int]
    beam_assignment: Dict[int, int]
    beams: List[np.ndarray]
    tau_s: Dict[int, float]
    rate_offload_bits: Dict[int, float]
    rate_local_bits: Dict[int, float]
    sum_rate_bits: float
    order: Tuple[int, ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def n_offload(self) -> int:
        return len(self.offload_set)

    def check(self, params: SystemParams, rtol: float = RTOL) -> None:
        """Raise AssertionError if a structural invariant is violated."""
        total_tau = sum(self.tau_s.values())
        assert total_tau <= params.frame_s * (1 + rtol) + 1e-15, total_tau
        assert set(self.tau_s) == set(self.offload_set)
        parts = sum(self.rate_offload_bits.values()) + sum(self.rate_local_bits.values())
        assert math.isclose(parts, self.sum_rate_bits, rel_tol=rtol, abs_tol=1e-9), (
            parts, self.sum_rate_bits)
        for k, r in self.rate_offload_bits.items():
            if k not in self.offload_set:
                assert r == 0.0, (k, r)
        for k in self.offload_set:
            assert self.rate_local_bits.get(k, 0.0) == 0.0
            assert 0 <= self.beam_assignment[k] < len(self.beams)
        for v in self.beams:
            assert np.all(np.abs(np.abs(v) - 1.0) <= 1e-12)

    def summary(self) -> dict:
        return {
            "sum_rate_bits": self.sum_rate_bits,
            "offload_set": sorted(self.offload_set),
            "beam_assignment": {str(k): v for k, v in sorted(self.beam_assignment.items())},
            "n_beams": len(self.beams),
            "tau_s": {str(k): v for k, v in sorted(self.tau_s.items())},
            "rate_offload_bits": {str(k): v for k, v in sorted(self.rate_offload_bits.items())},
            "rate_local_bits": {str(k): v for k, v in sorted(self.rate_local_bits.items())},
            "order": list(self.order),
        }


_POSITIVE_PARAMS = ("bandwidth_hz", "frame_s", "noise_w", "gamma_c")
_POSITIVE_INT_PARAMS = ("n_elements", "q_budget")


def validate_scenario(params: SystemParams, devices: Sequence[Device]) -> None:
    """Raise on the first violated invariant; return None when valid."""
    for name in _POSITIVE_PARAMS:
        value = getattr(params, name)
        if not (np.isfinite(value) and value > 0):
            raise NonPositiveParameter(name, value)
    for name in _POSITIVE_INT_PARAMS:
        value = getattr(params, name)
        if int(value) != value or value < 1:
            raise NonPositiveParameter(name, value)
    if len(devices) == 0:
        raise EmptyDeviceList("scenario has no devices")
    for i, dev in enumerate(devices):
        if not (np.isfinite(dev.energy_j) and dev.energy_j >= 0):
            raise NonPositiveParameter(f"devices[{i}].energy_j", dev.energy_j)
        if not (np.isfinite(dev.cycles_per_bit) and dev.cycles_per_bit > 0):
            raise NonPositiveParameter(f"devices[{i}].cycles_per_bit", dev.cycles_per_bit)
        if not (dev.f_max_hz > 0):
            raise NonPositiveParameter(f"devices[{i}].f_max_hz", dev.f_max_hz)
        if len(dev.position_m) != 3 or not np.all(np.isfinite(dev.position_m)):
            raise NonPositiveParameter(f"devices[{i}].position_m", dev.position_m)
