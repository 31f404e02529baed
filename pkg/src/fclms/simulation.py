"""Fusion-center diffusion adaptation, simulated.

Every node runs an LMS (or normalized LMS) update against its own noisy
observation of a common random-walk plant; a fusion center owns the convex
combination of the node estimates. Two orderings are implemented as written:

* combine-then-adapt: nodes adapt from the fused estimate of the previous
  combination,
* adapt-then-combine: nodes adapt from the current network estimate and the
  fusion center combines the adapted intermediates.

With matched random streams the two orderings produce the same fusion-center
deviation sequence; both are kept as genuinely separate recursions so that
equality is a checkable property, not a tautology.

Step functions accept states with an optional leading batch axis, so the
same code path serves single-run unit checks and the vectorized Monte Carlo
driver.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .signals import (
    ROLE_INPUT,
    ROLE_NOISE,
    ROLE_PLANT,
    PlantModel,
    RngStreamSpec,
    kurtosis_of,
    power_at,
    sample,
)

__all__ = [
    "NodeConfig",
    "NetworkConfig",
    "McRunState",
    "StepInputs",
    "McResult",
    "init_run_state",
    "cta_dlms_step",
    "atc_dlms_step",
    "cta_dnlms_step",
    "atc_dnlms_step",
    "step_function",
    "fusion_deviation",
    "run_monte_carlo",
    "DIVERGENCE_FACTOR",
]

DIVERGENCE_FACTOR = 1e12  # run is declared diverged once msd exceeds this times msd(0)
_BATCH = 32   # fixed run batch size; must not depend on worker count
_CHUNK = 2048  # samples of pre-drawn randomness per batch


@dataclass(frozen=True)
class NodeConfig:
    """One adaptive node: fusion weight, step size (mu for DLMS, xi for
    DNLMS), measurement-noise power, input power profile and distribution."""

    weight: float
    step: float
    noise_power: float
    profile: object
    dist: object

    def __post_init__(self):
        if self.weight <= 0.0:
            raise ValueError("fusion weight must be positive")
        if self.step < 0.0:
            raise ValueError("step size must be >= 0")
        if self.noise_power < 0.0:
            raise ValueError("noise power must be >= 0")


@dataclass(frozen=True)
class NetworkConfig:
    nodes: tuple
    filter_length: int
    plant: PlantModel
    algorithm: str = "dlms"
    strategy: str = "cta"
    nlms_epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if len(self.nodes) < 1:
            raise ValueError("need at least one node")
        if self.filter_length < 1:
            raise ValueError("filter_length must be >= 1")
        if self.filter_length != self.plant.n_taps:
            raise ValueError("filter_length must match the plant tap count")
        if self.algorithm not in ("dlms", "dnlms"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.strategy not in ("cta", "atc"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.nlms_epsilon < 0.0:
            raise ValueError("nlms_epsilon must be >= 0")
        csum = math.fsum(n.weight for n in self.nodes)
        if abs(csum - 1.0) > 1e-12:
            raise ValueError(f"fusion weights sum to {csum!r}, expected 1")

    @property
    def n_nodes(self):
        return len(self.nodes)

    def weights(self):
        return np.array([n.weight for n in self.nodes])

    def steps(self):
        return np.array([n.step for n in self.nodes])

    def noise_powers(self):
        return np.array([n.noise_power for n in self.nodes])

    def kurtoses(self):
        return np.array([kurtosis_of(n.dist) for n in self.nodes])


@dataclass
class McRunState:
    """Mutable per-run state. ``weights`` is (..., M, N) under CTA (one
    estimate per node) and (..., N) under ATC (the network estimate).
    ``regressors`` holds [x(n), ..., x(n-N+1)] per node once step n ran."""

    weights: np.ndarray
    regressors: np.ndarray
    plant: np.ndarray
    n: int = 0
    skipped_updates: int = 0


@dataclass
class StepInputs:
    """Randomness consumed by one step: new input sample per node, one noise
    sample per node, one plant increment vector."""

    x: np.ndarray      # (..., M)
    noise: np.ndarray  # (..., M)
    q: np.ndarray      # (..., N)


def init_run_state(cfg, warmup=None, batch=None):
    """Zero-weight state at n=0.

    warmup : (..., M, N-1) inputs [x(-1), ..., x(-N+1)], newest first; zeros
    when omitted. The oldest regressor slot is a placeholder that the first
    step discards.
    """
    m, n_taps = cfg.n_nodes, cfg.filter_length
    lead = () if batch is None else (batch,)
    if cfg.strategy == "cta":
        w = np.zeros(lead + (m, n_taps))
    else:
        w = np.zeros(lead + (n_taps,))
    x = np.zeros(lead + (m, n_taps))
    if warmup is not None and n_taps > 1:
        x[..., :, : n_taps - 1] = warmup
    h = np.broadcast_to(cfg.plant.h0_array, lead + (n_taps,)).copy()
    return McRunState(weights=w, regressors=x, plant=h)


def _shift_in(state, x_new):
    x = state.regressors
    x[..., 1:] = x[..., :-1]
    x[..., 0] = x_new


def _desired(state, inputs):
    return np.einsum("...jn,...n->...j", state.regressors, state.plant) + inputs.noise


def _finish(state, inputs):
    state.plant += inputs.q
    state.n += 1


def _nlms_gain(state, cfg, err):
    x = state.regressors
    den = np.einsum("...jn,...jn->...j", x, x) + cfg.nlms_epsilon
    ok = den > 0.0
    state.skipped_updates += int(np.size(ok) - np.count_nonzero(ok))
    gain = np.where(ok, cfg.steps() * err / np.where(ok, den, 1.0), 0.0)
    return gain


def cta_dlms_step(state, cfg, inputs):
    """Combine node estimates, then each node takes one LMS step from the
    fused estimate. Mutates and returns ``state``."""
    _shift_in(state, inputs.x)
    d = _desired(state, inputs)
    theta = np.einsum("j,...jn->...n", cfg.weights(), state.weights)
    err = d - np.einsum("...jn,...n->...j", state.regressors, theta)
    gain = cfg.steps() * err
    state.weights = theta[..., None, :] + gain[..., None] * state.regressors
    _finish(state, inputs)
    return state


def atc_dlms_step(state, cfg, inputs):
    """Each node takes one LMS step from the network estimate, then the
    fusion center combines the intermediates. Mutates and returns ``state``."""
    _shift_in(state, inputs.x)
    d = _desired(state, inputs)
    err = d - np.einsum("...jn,...n->...j", state.regressors, state.weights)
    gain = cfg.steps() * err
    intermediate = state.weights[..., None, :] + gain[..., None] * state.regressors
    state.weights = np.einsum("j,...jn->...n", cfg.weights(), intermediate)
    _finish(state, inputs)
    return state


def cta_dnlms_step(state, cfg, inputs):
    """Combine-then-adapt with the step normalized by the instantaneous
    regressor energy plus ``nlms_epsilon``; a zero denominator skips that
    node's update for the sample and bumps ``skipped_updates``."""
    _shift_in(state, inputs.x)
    d = _desired(state, inputs)
    theta = np.einsum("j,...jn->...n", cfg.weights(), state.weights)
    err = d - np.einsum("...jn,...n->...j", state.regressors, theta)
    gain = _nlms_gain(state, cfg, err)
    state.weights = theta[..., None, :] + gain[..., None] * state.regressors
    _finish(state, inputs)
    return state


def atc_dnlms_step(state, cfg, inputs):
    _shift_in(state, inputs.x)
    d = _desired(state, inputs)
    err = d - np.einsum("...jn,...n->...j", state.regressors, state.weights)
    gain = _nlms_gain(state, cfg, err)
    intermediate = state.weights[..., None, :] + gain[..., None] * state.regressors
    state.weights = np.einsum("j,...jn->...n", cfg.weights(), intermediate)
    _finish(state, inputs)
    return state


def step_function(cfg):
    return {
        ("dlms", "cta"): cta_dlms_step,
        ("dlms", "atc"): atc_dlms_step,
        ("dnlms", "cta"): cta_dnlms_step,
        ("dnlms", "atc"): atc_dnlms_step,
    }[(cfg.algorithm, cfg.strategy)]


def fusion_deviation(state, cfg):
    """Fusion-center estimation error: combined estimate minus true plant."""
    if cfg.strategy == "cta":
        comb = np.einsum("j,...jn->...n", cfg.weights(), state.weights)
    else:
        comb = state.weights
    return comb - state.plant


@dataclass
class McResult:
    """Monte Carlo ensemble summary. ``msd`` is the run-averaged squared
    fusion deviation; ``mean_deviation`` the run-averaged deviation vector."""

    msd: np.ndarray              # (horizon+1,)
    mean_deviation: np.ndarray   # (horizon+1, N)
    runs: int
    horizon: int
    diverged: np.ndarray         # (runs,) bool
    skipped_updates: int
    msd_per_run: np.ndarray      # (runs, horizon+1)
    deviations: np.ndarray | None = None  # (runs, horizon+1, N) on request

    @property
    def any_diverged(self):
        return bool(self.diverged.any())


def _sigma_grid(cfg, horizon):
    """Input standard deviations for samples n = -(N-1) .. horizon-1,
    chronological, shape (M, N-1+horizon)."""
    n_taps = cfg.filter_length
    idx = np.arange(-(n_taps - 1), horizon)
    out = np.empty((cfg.n_nodes, idx.size))
    for j, node in enumerate(cfg.nodes):
        out[j] = np.sqrt(power_at(node.profile, idx))
    return out


def _batch_rngs(cfg, run_ids, master_seed):
    in_rngs = [[RngStreamSpec(master_seed, r, j, ROLE_INPUT).generator()
                for j in range(cfg.n_nodes)] for r in run_ids]
    noise_rngs = [[RngStreamSpec(master_seed, r, j, ROLE_NOISE).generator()
                   for j in range(cfg.n_nodes)] for r in run_ids]
    plant_rngs = [RngStreamSpec(master_seed, r, 0, ROLE_PLANT).generator()
                  for r in run_ids]
    return in_rngs, noise_rngs, plant_rngs


def _draw_inputs(cfg, in_rngs, count):
    out = np.empty((len(in_rngs), cfg.n_nodes, count))
    for r, row in enumerate(in_rngs):
        for j, rng in enumerate(row):
            out[r, j] = sample(cfg.nodes[j].dist, rng, count)
    return out


def _simulate_batch(cfg, run_ids, horizon, master_seed, record_deviations):
    """Lockstep simulation of one batch of runs; returns per-run msd rows,
    the batch sum of deviation vectors, per-run divergence flags and the
    skipped-update count."""
    nr = len(run_ids)
    m, n_taps = cfg.n_nodes, cfg.filter_length
    step = step_function(cfg)
    in_rngs, noise_rngs, plant_rngs = _batch_rngs(cfg, run_ids, master_seed)
    sigma = _sigma_grid(cfg, horizon)
    sigma_n = np.sqrt(cfg.noise_powers())
    sq = math.sqrt(cfg.plant.sigma_q2)

    warm = _draw_inputs(cfg, in_rngs, n_taps - 1) * sigma[None, :, : n_taps - 1]
    state = init_run_state(cfg, warmup=warm[..., ::-1], batch=nr)

    msd = np.empty((nr, horizon + 1))
    dev_sum = np.zeros((horizon + 1, n_taps))
    devs = np.empty((nr, horizon + 1, n_taps)) if record_deviations else None
    frozen = np.zeros(nr, dtype=bool)
    frozen_msd = np.zeros(nr)
    frozen_dev = np.zeros((nr, n_taps))

    p = fusion_deviation(state, cfg)
    msd[:, 0] = np.einsum("rn,rn->r", p, p)
    limit = DIVERGENCE_FACTOR * msd[:, 0]
    dev_sum[0] = p.sum(axis=0)
    if record_deviations:
        devs[:, 0] = p

    for lo in range(0, horizon, _CHUNK):
        cw = min(_CHUNK, horizon - lo)
        x_c = _draw_inputs(cfg, in_rngs, cw) * sigma[None, :, n_taps - 1 + lo: n_taps - 1 + lo + cw]
        noise_c = np.empty((nr, m, cw))
        for r, row in enumerate(noise_rngs):
            for j, rng in enumerate(row):
                noise_c[r, j] = rng.standard_normal(cw)
        noise_c *= sigma_n[None, :, None]
        q_c = np.stack([rng.standard_normal((cw, n_taps)) for rng in plant_rngs]) * sq

        for t in range(cw):
            n = lo + t + 1
            step(state, cfg, StepInputs(x=x_c[:, :, t], noise=noise_c[:, :, t], q=q_c[:, t]))
            p = fusion_deviation(state, cfg)
            cur = np.einsum("rn,rn->r", p, p)
            bad = cur > limit
            new = bad & ~frozen
            if new.any():
                frozen |= new
                frozen_msd[new] = cur[new]
                frozen_dev[new] = p[new]
            if bad.any():
                # damp the blown runs so they cannot overflow; their
                # recorded trajectory stays at the crossing value
                state.weights[bad] = 0.0
                state.plant[bad] = 0.0
            p_rec = np.where(frozen[:, None], frozen_dev, p)
            msd[:, n] = np.where(frozen, frozen_msd, cur)
            dev_sum[n] = p_rec.sum(axis=0)
            if record_deviations:
                devs[:, n] = p_rec

    return msd, dev_sum, frozen, state.skipped_updates, devs


def _batch_worker(args):
    return _simulate_batch(*args)


def run_monte_carlo(cfg, runs, horizon, master_seed, workers=1,
                    record_deviations=False):
    """Ensemble of independent runs.

    Runs are split into fixed-size batches keyed by absolute run index, so
    the result (including CSV bytes downstream) is identical for any
    ``workers`` value.

    Parameters
    ----------
    cfg : NetworkConfig
    runs, horizon, master_seed : int
    workers : int
        Process count; 1 executes inline.
    record_deviations : bool
        Keep per-run deviation vectors (memory scales with runs*horizon*N).

    Returns
    -------
    McResult
    """
    if runs < 1 or horizon < 1:
        raise ValueError("runs and horizon must be >= 1")
    batches = [list(range(lo, min(lo + _BATCH, runs)))
               for lo in range(0, runs, _BATCH)]
    jobs = [(cfg, ids, horizon, master_seed, record_deviations) for ids in batches]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_batch_worker, jobs))
    else:
        parts = [_simulate_batch(*j) for j in jobs]

    msd_rows = np.vstack([p[0] for p in parts])
    dev_sum = np.zeros((horizon + 1, cfg.filter_length))
    for p in parts:
        dev_sum += p[1]
    diverged = np.concatenate([p[2] for p in parts])
    skipped = sum(p[3] for p in parts)
    devs = np.concatenate([p[4] for p in parts]) if record_deviations else None
    return McResult(
        msd=msd_rows.mean(axis=0),
        mean_deviation=dev_sum / runs,
        runs=runs,
        horizon=horizon,
        diverged=diverged,
        skipped_updates=skipped,
        msd_per_run=msd_rows,
        deviations=devs,
    )
