"""IRS reflection design: closed-form phase alignment and the shared-beam SCA."""
from __future__ import annotations

import numpy as np

from .exceptions import DimensionMismatch, EmptySubset

SCA_EPS = 1e-6
SCA_MAX_ITER = 200


def unit_phase(x) -> np.ndarray:
    """exp(j*arg(x)) elementwise, with arg(0) taken as 0."""
    x = np.asarray(x, dtype=complex)
    v = np.exp(1j * np.angle(x))
    v[x == 0] = 1.0
    return v


def align_phase(h_d, q) -> np.ndarray:
    """Reflection vector that co-phases every reflected path with ``h_d``.

    Gives ``|h_d + q^H v| = |h_d| + sum(|q|)``, the maximum over unit-modulus v.
    """
    q = np.asarray(q, dtype=complex).reshape(-1)
    theta = -(np.angle(np.conj(q)) - np.angle(h_d))
    v = np.exp(1j * theta)
    v[q == 0] = 1.0
    return v


def effective_gain(h_d, q, v) -> float:
    q = np.asarray(q, dtype=complex).reshape(-1)
    v = np.asarray(v, dtype=complex).reshape(-1)
    if q.shape != v.shape:
        raise DimensionMismatch(f"q has {q.size} entries, v has {v.size}")
    return float(abs(h_d + np.vdot(q, v)) ** 2)


def effective_gains(channels, v) -> np.ndarray:
    """|h_d[k] + q[k]^H v|^2 for every device of a ChannelSet."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if channels.q.shape[1] != v.size:
        raise DimensionMismatch(f"q has {channels.q.shape[1]} columns, v has {v.size}")
    return np.abs(channels.h_d + channels.q.conj() @ v) ** 2


def ideal_gains(channels) -> np.ndarray:
    """Gain of each device under its own aligned beam, (|h_d| + sum|q|)^2."""
    return (np.abs(channels.h_d) + np.abs(channels.q).sum(axis=1)) ** 2


def random_beam(n: int, rng: np.random.Generator) -> np.ndarray:
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=n))


def sca_lower_bound(h_d, q, v_hat, v) -> float:
    """First-order minorant of |h_d + q^H v|^2 expanded at ``v_hat``."""
    q = np.asarray(q, dtype=complex).reshape(-1)
    z_hat = h_d + np.vdot(q, v_hat)
    z = h_d + np.vdot(q, v)
    return float(-abs(z_hat) ** 2 + 2.0 * np.real(np.conj(z_hat) * z))


def weighted_objective(weights, channels, v) -> float:
    return float(np.dot(weights, effective_gains(channels, v)))


def shared_beam_sca(weights, channels, v_init=None, eps: float = SCA_EPS,
                    max_iter: int = SCA_MAX_ITER, return_iterates: bool = False):
    """Maximize sum_k w_k |h_d,k + q_k^H v|^2 over unit-modulus v by SCA.

    Each step maximizes the linearized objective, which has the closed form
    v = exp(j arg(sum_k w_k q_k (h_d,k + q_k^H v_hat))). Returns the final
    beam and the objective trace (trace[0] is the value at ``v_init``).
    """
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if weights.size == 0 or channels.n_devices == 0:
        raise EmptySubset("shared beam needs at least one device")
    if weights.size != channels.n_devices:
        raise DimensionMismatch("one weight per device required")
    if eps <= 0:
        raise ValueError("eps must be positive")

    if v_init is None:
        strongest = int(np.argmax(weights * ideal_gains(channels)))
        v = align_phase(channels.h_d[strongest], channels.q[strongest])
    else:
        v = np.asarray(v_init, dtype=complex).reshape(-1).copy()
        if v.size != channels.n_elements:
            raise DimensionMismatch("v_init length differs from N")

    qc = channels.q
    obj = weighted_objective(weights, channels, v)
    trace = [obj]
    iterates = [v]
    for _ in range(max_iter):
        z = channels.h_d + qc.conj() @ v
        v_new = unit_phase(qc.T @ (weights * z))
        obj_new = weighted_objective(weights, channels, v_new)
        trace.append(obj_new)
        iterates.append(v_new)
        gain = obj_new - obj
        v, obj = v_new, obj_new
        if gain <= eps * abs(trace[-2]):
            break
    if return_iterates:
        return v, np.array(trace), iterates
    return v, np.array(trace)
