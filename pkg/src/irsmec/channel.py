"""Channel realizations: path loss, Rician fading, cascaded IRS channels."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np

from .exceptions import DimensionMismatch, NonPositiveDistance
from .model import Device, SystemParams, db_to_linear

Vec3 = Tuple[float, float, float]


@dataclass(frozen=True)
class GeometryConfig:
    ap_pos_m: Vec3 = (0.0, 0.0, 0.0)
    irs_pos_m: Vec3 = (30.0, 0.0, 4.0)
    device_cluster_center_m: Vec3 = (30.0, 0.0, 0.0)
    cluster_radius_m: float = 4.0
    pathloss_ref_db: float = -30.0
    ref_distance_m: float = 1.0
    alpha_ap_irs: float = 2.2
    alpha_irs_dev: float = 2.2
    alpha_ap_dev: float = 3.4
    rician_k_db: float = 3.0

    def __post_init__(self):
        if self.cluster_radius_m < 0:
            raise ValueError("cluster_radius_m must be >= 0")
        if self.ref_distance_m <= 0:
            raise ValueError("ref_distance_m must be > 0")

    def with_(self, **changes) -> "GeometryConfig":
        return replace(self, **changes)

    def at_distance(self, distance_m: float) -> "GeometryConfig":
        """Move the device cluster along x to ``distance_m``, IRS follows."""
        cx, cy, cz = self.device_cluster_center_m
        ix, iy, iz = self.irs_pos_m
        offset = np.subtract((ix, iy, iz), (cx, cy, cz))
        center = (float(distance_m), cy, cz)
        irs = tuple(float(c) for c in np.add(center, offset))
        return replace(self, device_cluster_center_m=center, irs_pos_m=irs)


@dataclass
class ChannelSet:
    """Per-device direct channel ``h_d`` (K,) and cascaded channel ``q`` (K, N).

    ``q[k]`` is defined so that ``h_d[k] + q[k].conj() @ v`` is the effective
    channel of device k under reflection vector ``v``.
    """

    h_d: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        self.h_d = np.asarray(self.h_d, dtype=complex).reshape(-1)
        self.q = np.asarray(self.q, dtype=complex)
        if self.q.ndim == 1 and self.h_d.size == 1:
            self.q = self.q.reshape(1, -1)
        if self.q.ndim != 2 or self.q.shape[0] != self.h_d.size:
            raise DimensionMismatch(
                f"q has shape {self.q.shape}, expected ({self.h_d.size}, N)")
        if not (np.all(np.isfinite(self.h_d)) and np.all(np.isfinite(self.q))):
            raise ValueError("channel entries must be finite")

    @property
    def n_devices(self) -> int:
        return self.h_d.size

    @property
    def n_elements(self) -> int:
        return self.q.shape[1]

    def subset(self, idx) -> "ChannelSet":
        idx = np.asarray(idx, dtype=int)
        return ChannelSet(self.h_d[idx], self.q[idx])

    def without_irs(self) -> "ChannelSet":
        return ChannelSet(self.h_d.copy(), np.zeros_like(self.q))


def path_loss(d_m, alpha, cfg: GeometryConfig = GeometryConfig()):
    d_m = np.asarray(d_m, dtype=float)
    if np.any(d_m <= 0):
        raise NonPositiveDistance(f"link distance must be positive, got {d_m}")
    out = db_to_linear(cfg.pathloss_ref_db) * (d_m / cfg.ref_distance_m) ** (-alpha)
    return float(out) if out.ndim == 0 else out


def steering_vector(dim: int, phi: float) -> np.ndarray:
    return np.exp(1j * np.pi * np.arange(dim) * np.sin(phi))


def rician_vector(dim: int, k_factor_db: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-average-power Rician vector with a ULA line-of-sight component."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    kappa = db_to_linear(k_factor_db)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    los = steering_vector(dim, phi)
    nlos = (rng.standard_normal(dim) + 1j * rng.standard_normal(dim)) / np.sqrt(2.0)
    if np.isinf(kappa):
        return los
    return np.sqrt(kappa / (1.0 + kappa)) * los + np.sqrt(1.0 / (1.0 + kappa)) * nlos


def place_devices(devices: Sequence[Device], cfg: GeometryConfig,
                  rng: np.random.Generator) -> List[Device]:
    """Drop devices uniformly on the cluster disk (z of the cluster center)."""
    k = len(devices)
    r = cfg.cluster_radius_m * np.sqrt(rng.uniform(size=k))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=k)
    cx, cy, cz = cfg.device_cluster_center_m
    return [
        dev.with_(position_m=(float(cx + r[i] * np.cos(theta[i])),
                              float(cy + r[i] * np.sin(theta[i])), float(cz)))
        for i, dev in enumerate(devices)
    ]


def _distance(a, b) -> float:
    return float(np.linalg.norm(np.subtract(a, b)))


def realize_channels(params: SystemParams, cfg: GeometryConfig, devices: Sequence[Device],
                     rng: np.random.Generator, check: bool = True) -> ChannelSet:
    n = params.n_elements
    k_db = cfg.rician_k_db
    g = np.sqrt(path_loss(_distance(cfg.ap_pos_m, cfg.irs_pos_m), cfg.alpha_ap_irs, cfg)) \
        * rician_vector(n, k_db, rng)
    h_d = np.empty(len(devices), dtype=complex)
    q = np.empty((len(devices), n), dtype=complex)
    probe = np.exp(1j * np.arange(n))
    for i, dev in enumerate(devices):
        d_ap = _distance(cfg.ap_pos_m, dev.position_m)
        d_irs = _distance(cfg.irs_pos_m, dev.position_m)
        h_d[i] = np.sqrt(path_loss(d_ap, cfg.alpha_ap_dev, cfg)) * rician_vector(1, k_db, rng)[0]
        h_r = np.sqrt(path_loss(d_irs, cfg.alpha_irs_dev, cfg)) * rician_vector(n, k_db, rng)
        q[i] = np.conj(g) * h_r
        if check:
            lhs = np.vdot(q[i], probe)
            rhs = np.vdot(h_r, g * probe)
            scale = np.sum(np.abs(q[i])) + np.finfo(float).tiny
            if abs(lhs - rhs) > 1e-12 * scale:
                raise AssertionError("cascaded channel inconsistent with its factors")
    return ChannelSet(h_d, q)


def realize_trial(params: SystemParams, cfg: GeometryConfig, devices: Sequence[Device],
                  rng: np.random.Generator) -> Tuple[List[Device], ChannelSet]:
    """Place devices on the cluster disk, then draw their channels."""
    placed = place_devices(devices, cfg, rng)
    return placed, realize_channels(params, cfg, placed, rng)


def trial_rng(seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for (seed, trial, stream)."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(trial), int(stream))))
