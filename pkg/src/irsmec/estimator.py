"""scikit-learn style front end.

``X`` is a complex array with one row per device: column 0 is the direct
channel ``h_d`` and the remaining N columns are the cascaded IRS channel
``q``. ``fit`` solves the allocation for those devices; ``predict`` returns
the computing mode (1 = offload, 0 = local) for each row.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import baselines
from ._validation import check_channel_matrix, device_list
from .model import DEFAULT_F_MAX_HZ, SystemParams, validate_scenario
from .selection import solve_finite_q, solve_infinite_q

_SOLVERS = ("finite_q", "infinite_q", "random_beam", "offload_only", "local_only", "no_irs")


class OffloadingAllocator(BaseEstimator):
    def __init__(self, solver="finite_q", q_budget=5, bandwidth_hz=1e6, frame_s=1.0,
                 noise_w=1e-11, gamma_c=1e-28, energy_j=0.01, cycles_per_bit=1000.0,
                 f_max_hz=DEFAULT_F_MAX_HZ, random_state=None):
        self.solver = solver
        self.q_budget = q_budget
        self.bandwidth_hz = bandwidth_hz
        self.frame_s = frame_s
        self.noise_w = noise_w
        self.gamma_c = gamma_c
        self.energy_j = energy_j
        self.cycles_per_bit = cycles_per_bit
        self.f_max_hz = f_max_hz
        self.random_state = random_state

    def _params(self, n_elements):
        return SystemParams(bandwidth_hz=self.bandwidth_hz, frame_s=self.frame_s,
                            noise_w=self.noise_w, n_elements=max(1, n_elements),
                            q_budget=self.q_budget, gamma_c=self.gamma_c)

    def _solve(self, X):
        if self.solver not in _SOLVERS:
            raise ValueError(f"solver must be one of {_SOLVERS}, got {self.solver!r}")
        channels = check_channel_matrix(X)
        devices = device_list(channels.n_devices, self.energy_j, self.cycles_per_bit,
                              self.f_max_hz)
        params = self._params(channels.n_elements)
        validate_scenario(params, devices)
        if self.solver == "finite_q":
            sol = solve_finite_q(devices, channels, params)
        elif self.solver == "infinite_q":
            sol = solve_infinite_q(devices, channels, params)
        elif self.solver == "random_beam":
            sol = baselines.solve_random_beam(devices, channels, params,
                                              np.random.default_rng(self.random_state))
        elif self.solver == "offload_only":
            sol = baselines.solve_offload_only(devices, channels, params)
        elif self.solver == "no_irs":
            sol = baselines.solve_no_irs(devices, channels, params)
        else:
            sol = baselines.solve_local(devices, channels, params)
        return channels, sol

    def fit(self, X, y=None):
        channels, sol = self._solve(X)
        k = channels.n_devices
        self.n_devices_ = k
        self.n_elements_ = channels.n_elements
        self.solution_ = sol
        self.offload_mask_ = np.array([i in sol.offload_set for i in range(k)])
        self.beam_assignment_ = np.array([sol.beam_assignment.get(i, -1) for i in range(k)])
        self.beams_ = (np.array(sol.beams) if sol.beams
                       else np.empty((0, channels.n_elements), dtype=complex))
        self.tau_ = np.array([sol.tau_s.get(i, 0.0) for i in range(k)])
        self.rates_ = np.array([sol.rate_offload_bits[i] + sol.rate_local_bits[i]
                                for i in range(k)])
        self.sum_rate_ = sol.sum_rate_bits
        return self

    def predict(self, X):
        """Computing mode per device: 1 offload, 0 local."""
        check_is_fitted(self, "solution_")
        _, sol = self._solve(X)
        return np.array([int(i in sol.offload_set) for i in range(len(sol.rate_local_bits))])

    def fit_predict(self, X, y=None):
        return self.fit(X).offload_mask_.astype(int)

    def score(self, X, y=None):
        """Sum computation rate (bits per frame) achieved on ``X``."""
        _, sol = self._solve(X)
        return sol.sum_rate_bits
