"""Design-space formulas from the slow-variation model: step-size stability
bounds, fusion weights optimizing steady-state MSD or convergence speed, and
the underlying weighted-square minimizer on the probability simplex.

Bounds are suprema of open intervals: the recursion is stable for any step
strictly below the returned value and unstable strictly above it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DesignInput",
    "dlms_stability_bound",
    "dnlms_stability_bound",
    "min_weighted_square",
    "optimal_weights_snr",
    "optimal_weights_speed",
    "small_step_steady_state",
]


@dataclass(frozen=True)
class DesignInput:
    """Network summary used by the design formulas.

    kurtoses: per-node input fourth moments (unit-variance inputs).
    snrs: per-node input power over noise power; needed for the SNR-optimal
    weights only. weights: fusion weights; uniform when omitted.
    """

    n_nodes: int
    filter_length: int
    kurtoses: tuple
    snrs: tuple | None = None
    weights: tuple | None = None
    sigma_q2: float = 0.0

    def __post_init__(self):
        if self.n_nodes < 1 or self.filter_length < 1:
            raise ValueError("n_nodes and filter_length must be >= 1")
        k = tuple(float(v) for v in self.kurtoses)
        if len(k) != self.n_nodes:
            raise ValueError("need one kurtosis per node")
        if any(v < 1.0 for v in k):
            raise ValueError("kurtosis of a unit-variance input is >= 1")
        object.__setattr__(self, "kurtoses", k)
        if self.snrs is not None:
            s = tuple(float(v) for v in self.snrs)
            if len(s) != self.n_nodes or any(v <= 0.0 for v in s):
                raise ValueError("snrs must be positive, one per node")
            object.__setattr__(self, "snrs", s)
        if self.weights is not None:
            w = tuple(float(v) for v in self.weights)
            if len(w) != self.n_nodes or any(v <= 0.0 for v in w):
                raise ValueError("weights must be positive, one per node")
            if abs(sum(w) - 1.0) > 1e-12:
                raise ValueError("weights must sum to 1")
            object.__setattr__(self, "weights", w)
        if self.sigma_q2 < 0.0:
            raise ValueError("sigma_q2 must be >= 0")

    def weight_array(self):
        if self.weights is None:
            return np.full(self.n_nodes, 1.0 / self.n_nodes)
        return np.asarray(self.weights)


def _quadratic_load(d):
    c = d.weight_array()
    return float((c ** 2) @ (np.asarray(d.kurtoses) + d.filter_length - 2.0))


def dlms_stability_bound(d):
    """Supremum of stable normalized steps (step times input power) for the
    unnormalized algorithm: 2 / (1 + sum_j c_j^2 (psi_j + N - 2))."""
    return 2.0 / (1.0 + _quadratic_load(d))


def dnlms_stability_bound(d):
    """Supremum of stable normalized steps for the normalized algorithm;
    exactly N times the unnormalized bound."""
    return 2.0 * d.filter_length / (1.0 + _quadratic_load(d))


def min_weighted_square(eta):
    """Minimize sum_j c_j^2 / eta_j over the simplex sum c_j = 1, c_j > 0.

    Returns (c, fmin) with c_j = eta_j / sum(eta) and fmin = 1 / sum(eta).
    """
    eta = np.asarray(eta, dtype=float)
    if eta.ndim != 1 or eta.size < 1 or np.any(eta <= 0.0):
        raise ValueError("eta must be a 1-D array of positive values")
    total = eta.sum()
    return eta / total, float(1.0 / total)


def small_step_steady_state(d, step, algorithm="dlms", weights=None):
    """Small-step steady-state MSD under white-stationary inputs with equal
    normalized steps.

    DLMS: (N step / 2) sum_j c_j^2 / rho_j + N sigma_q^2 / (2 step).
    DNLMS: (step / 2) sum_j c_j^2 / rho_j + N^2 sigma_q^2 / (2 step).
    """
    if d.snrs is None:
        raise ValueError("snrs required")
    if step <= 0.0:
        raise ValueError("step must be positive")
    c = np.asarray(weights) if weights is not None else d.weight_array()
    load = float((c ** 2) @ (1.0 / np.asarray(d.snrs)))
    n = d.filter_length
    if algorithm == "dlms":
        return 0.5 * (n * step * load + n * d.sigma_q2 / step)
    if algorithm == "dnlms":
        return 0.5 * (step * load + n * n * d.sigma_q2 / step)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def optimal_weights_snr(d, step, algorithm="dlms"):
    """Fusion weights minimizing the small-step steady-state MSD: each node
    weighted by its input SNR. Returns (weights, minimum MSD at ``step``)."""
    if d.snrs is None:
        raise ValueError("snrs required")
    c, _ = min_weighted_square(d.snrs)
    msd = small_step_steady_state(d, step, algorithm=algorithm, weights=c)
    return c, msd


def optimal_weights_speed(d):
    """Fusion weights minimizing the quadratic step-size load
    sum_j c_j^2 (psi_j + N - 2), which maximizes both stability bounds.

    Returns (weights, minimized load); feed the weights back into
    dlms_stability_bound / dnlms_stability_bound for the widened bound.
    """
    eta = 1.0 / (np.asarray(d.kurtoses) + d.filter_length - 2.0)
    c, fmin = min_weighted_square(eta)
    return c, fmin
