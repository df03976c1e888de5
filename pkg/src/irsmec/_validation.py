"""Input checks for the estimator front end."""
from __future__ import annotations

import numpy as np

from .channel import ChannelSet
from .exceptions import DimensionMismatch
from .model import Device


def check_channel_matrix(X) -> ChannelSet:
    """Accept a ChannelSet or a complex (K, 1+N) array [h_d | q]."""
    if isinstance(X, ChannelSet):
        return X
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] < 1:
        raise DimensionMismatch(f"expected a (n_devices, 1 + n_elements) array, got {X.shape}")
    if X.shape[0] == 0:
        raise ValueError("at least one device (row) is required")
    if not np.issubdtype(X.dtype, np.number):
        raise TypeError(f"channel array must be numeric, got {X.dtype}")
    X = X.astype(complex, copy=False)
    if not np.all(np.isfinite(X)):
        raise ValueError("channel array contains NaN or inf")
    return ChannelSet(X[:, 0], X[:, 1:])


def channel_matrix(channels: ChannelSet) -> np.ndarray:
    return np.column_stack([channels.h_d, channels.q])


def _per_device(value, n, name):
    arr = np.broadcast_to(np.asarray(value, dtype=float), (n,)) if np.ndim(value) == 0 \
        else np.asarray(value, dtype=float)
    if arr.shape != (n,):
        raise DimensionMismatch(f"{name} must be scalar or length {n}, got shape {arr.shape}")
    return arr


def device_list(n, energy_j, cycles_per_bit, f_max_hz):
    e = _per_device(energy_j, n, "energy_j")
    c = _per_device(cycles_per_bit, n, "cycles_per_bit")
    f = _per_device(f_max_hz, n, "f_max_hz")
    return [Device(float(e[i]), float(c[i]), float(f[i])) for i in range(n)]
