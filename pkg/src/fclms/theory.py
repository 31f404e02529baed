"""Analytical learning-curve models for the fusion-center network.

The models propagate moments of the fusion-center deviation P(n) under the
independence assumptions standard for LMS analysis:

* a mean recursion with a per-tap contraction factor built from the
  instantaneous input powers,
* a per-tap second-moment recursion K_ii(n+1) = (1 - alpha_i) K_ii
  + sum_{r != i} beta_ir K_rr + gamma_i whose coefficients depend on fusion
  weights, step sizes, input powers, input kurtoses and noise powers,
* a slow-variation scalar MSD recursion (valid when power profiles change
  slowly against the adaptation time constant) and its steady-state ratio.

The normalized (DNLMS) variants replace each step size by
xi_j / (N * mean input power over the filter window); the window mean keeps
the substitution finite even when an instantaneous power crosses zero. The
slow normalized model divides the noise term by the instantaneous power, so
it is only meaningful while that power is bounded away from zero.

Per-run Monte Carlo counterparts live in fclms.simulation; nothing here
draws randomness.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .signals import ConstantProfile, PulsedProfile, power_at

__all__ = [
    "TheoryState",
    "TheoryCoefficients",
    "ModelAccuracyWarning",
    "NonPositiveDenominatorError",
    "init_theory_state",
    "tap_powers",
    "phase_powers",
    "window_mean_powers",
    "dlms_coefficients",
    "dnlms_coefficients",
    "mean_step_dlms",
    "mean_step_dnlms",
    "msd_step_dlms_general",
    "msd_step_dnlms_general",
    "slow_factors",
    "msd_step_slow",
    "steady_state_msd",
    "slow_fixed_point",
    "theory_trajectory",
]


class ModelAccuracyWarning(UserWarning):
    """The model is being evaluated outside its accuracy regime."""


class NonPositiveDenominatorError(ValueError):
    """Steady-state ratio undefined: operating point is outside the
    stability region of the slow-variation model."""


@dataclass
class TheoryState:
    """Deterministic model state at sample n.

    mean_dev is E{P(n)}; the second moment is carried either per tap
    (k_diag, general model) or as a scalar MSD (slow model).
    """

    n: int
    mean_dev: np.ndarray
    k_diag: np.ndarray | None = None
    msd_scalar: float | None = None

    @property
    def msd(self):
        if self.k_diag is not None:
            return float(self.k_diag.sum())
        return float(self.msd_scalar)


@dataclass(frozen=True)
class TheoryCoefficients:
    """Per-tap recursion coefficients: contraction alpha (N,), cross-tap
    coupling beta (N, N) and forcing gamma (N,)."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray


def init_theory_state(cfg, model="general"):
    """State at n=0 for zero-initialized filters: E{P(0)} = -h0 and
    K(0) = h0 h0^T (only its diagonal is propagated)."""
    h0 = cfg.plant.h0_array
    if model == "general":
        return TheoryState(n=0, mean_dev=-h0.copy(), k_diag=h0 ** 2)
    if model == "slow":
        return TheoryState(n=0, mean_dev=-h0.copy(), msd_scalar=float(h0 @ h0))
    raise ValueError(f"unknown model {model!r}")


# ---------------------------------------------------------------------------
# power bookkeeping


def tap_powers(cfg, n):
    """Input power per node and tap delay: out[j, t] = power_j(n - t),
    shape (M, N). Tap t sees the input drawn t samples ago."""
    t = n - np.arange(cfg.filter_length)
    out = np.empty((cfg.n_nodes, cfg.filter_length))
    for j, node in enumerate(cfg.nodes):
        out[j] = power_at(node.profile, t)
    return out


def phase_powers(cfg, n):
    return np.array([power_at(node.profile, n) for node in cfg.nodes])


def window_mean_powers(cfg, n):
    """Mean input power over the filter window, per node."""
    return tap_powers(cfg, n).mean(axis=1)


def _window_warning(cfg):
    psi_max = float(cfg.kurtoses().max())
    if cfg.filter_length <= 10.0 * psi_max:
        return (f"normalized-model window approximation assumes the filter "
                f"length ({cfg.filter_length}) to be much larger than the "
                f"input kurtosis (max {psi_max:.6g}); expect extra model error")
    return None


# ---------------------------------------------------------------------------
# per-tap coefficients


def dlms_coefficients(cfg, n, p=None):
    """General per-tap recursion coefficients at sample n (DLMS)."""
    if p is None:
        p = tap_powers(cfg, n)
    c = cfg.weights()
    cmu = c * cfg.steps()
    cmu2 = cmu ** 2
    psi = cfg.kurtoses()
    sn2 = cfg.noise_powers()
    sq2 = cfg.plant.sigma_q2

    a = cmu @ p                      # (N,)
    p2 = p * p
    quad = (cmu2 * psi) @ p2
    same = cmu2 @ p2                 # sum_j (c_j mu_j p_jt)^2
    alpha = 2.0 * a - quad - (a * a - same)
    beta = np.einsum("j,jt,js->ts", cmu2, p, p)
    gamma = (cmu2 * sn2) @ p + sq2
    return TheoryCoefficients(alpha=alpha, beta=beta, gamma=gamma)


def dnlms_coefficients(cfg, n, p=None):
    """Per-tap coefficients for the normalized algorithm, written out from
    the substituted recursion (step size xi_j over N times the window-mean
    power). Kept algebraically separate from dlms_coefficients so the
    substitution identity can be checked across two code paths."""
    if p is None:
        p = tap_powers(cfg, n)
    n_taps = cfg.filter_length
    c = cfg.weights()
    xi = cfg.steps()
    psi = cfg.kurtoses()
    sn2 = cfg.noise_powers()
    sq2 = cfg.plant.sigma_q2
    pbar = p.mean(axis=1)
    g = xi / (n_taps * pbar)         # effective per-node step at this n

    v = (c * g)[:, None] * p         # v[j, t] = c_j g_j p_jt
    v2 = ((c * g) ** 2)[:, None] * (p * p)
    lin = v.sum(axis=0)
    cross = np.einsum("jt,kt->t", v, v) - np.einsum("jt,jt->t", v, v)
    quad = (psi[:, None] * v2).sum(axis=0)
    alpha = 2.0 * lin - quad - cross
    beta = np.einsum("j,jt,js->ts", (c * g) ** 2, p, p)
    gamma = ((c * g) ** 2 * sn2) @ p + sq2
    return TheoryCoefficients(alpha=alpha, beta=beta, gamma=gamma)


# ---------------------------------------------------------------------------
# mean recursions


def _mean_factors_dlms(cfg, n, p=None):
    if p is None:
        p = tap_powers(cfg, n)
    return 1.0 - (cfg.weights() * cfg.steps()) @ p


def _mean_factors_dnlms(cfg, n, p=None):
    if p is None:
        p = tap_powers(cfg, n)
    pbar = p.mean(axis=1)
    eff = cfg.weights() * cfg.steps() / (cfg.filter_length * pbar)
    return 1.0 - eff @ p


def mean_step_dlms(state, cfg):
    """Advance E{P(n)} one sample: elementwise contraction by the per-tap
    factors 1 - sum_j c_j mu_j power_j(n - t)."""
    state.mean_dev = _mean_factors_dlms(cfg, state.n) * state.mean_dev
    state.n += 1
    return state


def mean_step_dnlms(state, cfg):
    state.mean_dev = _mean_factors_dnlms(cfg, state.n) * state.mean_dev
    state.n += 1
    return state


# ---------------------------------------------------------------------------
# general per-tap MSD recursions


def _apply_coeffs(k, co):
    coupled = co.beta @ k - np.diag(co.beta) * k
    return k - co.alpha * k + coupled + co.gamma


def msd_step_dlms_general(state, cfg):
    """One step of the per-tap second-moment recursion (DLMS)."""
    state.k_diag = _apply_coeffs(state.k_diag, dlms_coefficients(cfg, state.n))
    state.mean_dev = _mean_factors_dlms(cfg, state.n) * state.mean_dev
    state.n += 1
    return state


def msd_step_dnlms_general(state, cfg):
    """One step of the per-tap second-moment recursion (DNLMS). Warns when
    the filter window is not long relative to the largest input kurtosis."""
    msg = _window_warning(cfg)
    if msg:
        warnings.warn(msg, ModelAccuracyWarning, stacklevel=2)
    return _msd_step_dnlms_core(state, cfg)


def _msd_step_dnlms_core(state, cfg):
    state.k_diag = _apply_coeffs(state.k_diag, dnlms_coefficients(cfg, state.n))
    state.mean_dev = _mean_factors_dnlms(cfg, state.n) * state.mean_dev
    state.n += 1
    return state


# ---------------------------------------------------------------------------
# slow-variation scalar model


def slow_factors(cfg, n):
    """(A, C) of the slow-variation recursion MSD(n+1) = A*MSD(n) + C.

    A is the transient decay factor; C the forcing from measurement noise
    and plant drift. For DNLMS, A is phase-independent and C divides by the
    instantaneous input power.
    """
    n_taps = cfg.filter_length
    c = cfg.weights()
    psi = cfg.kurtoses()
    sn2 = cfg.noise_powers()
    sq2 = cfg.plant.sigma_q2
    s2 = phase_powers(cfg, n)
    if cfg.algorithm == "dlms":
        lam = cfg.steps() * s2
        s1 = c @ lam
        quad = (c ** 2 * lam ** 2) @ (psi + n_taps - 2.0)
        forcing = n_taps * ((c ** 2 * cfg.steps() ** 2 * sn2) @ s2) + n_taps * sq2
    else:
        xin = cfg.steps() / n_taps
        s1 = c @ xin
        quad = (c ** 2 * xin ** 2) @ (psi + n_taps - 2.0)
        with np.errstate(divide="ignore"):
            forcing = (c ** 2 * cfg.steps() ** 2 * sn2) @ (1.0 / (n_taps * s2)) \
                + n_taps * sq2
    a = 1.0 - 2.0 * s1 + quad + s1 * s1
    return float(a), float(forcing)


def msd_step_slow(state, cfg):
    """One step of the scalar slow-variation MSD recursion."""
    a, forcing = slow_factors(cfg, state.n)
    state.msd_scalar = a * state.msd_scalar + forcing
    if cfg.algorithm == "dlms":
        state.mean_dev = _mean_factors_dlms(cfg, state.n) * state.mean_dev
    else:
        state.mean_dev = _mean_factors_dnlms(cfg, state.n) * state.mean_dev
    state.n += 1
    return state


def steady_state_msd(cfg, n=0):
    """Pointwise steady-state MSD of the slow-variation model at phase n:
    the fixed point C(n) / (1 - A(n)).

    Raises NonPositiveDenominatorError when 1 - A <= 0 (operating point at
    or beyond the stability edge).
    """
    a, forcing = slow_factors(cfg, n)
    den = 1.0 - a
    if den <= 0.0:
        raise NonPositiveDenominatorError(
            f"1 - A = {den:.6g} at phase {n}; no finite steady state")
    return forcing / den


def slow_fixed_point(cfg, n=0):
    """Limit of the slow recursion at frozen phase n, taken from the affine
    map extracted from msd_step_slow itself (two probe evaluations). Exists
    only for |A| < 1."""
    st0 = TheoryState(n=n, mean_dev=np.zeros(cfg.filter_length), msd_scalar=0.0)
    c0 = msd_step_slow(st0, cfg).msd_scalar
    st1 = TheoryState(n=n, mean_dev=np.zeros(cfg.filter_length), msd_scalar=1.0)
    a = msd_step_slow(st1, cfg).msd_scalar - c0
    if abs(a) >= 1.0:
        raise NonPositiveDenominatorError(f"|A| = {abs(a):.6g} >= 1 at phase {n}")
    return c0 / (1.0 - a)


# ---------------------------------------------------------------------------
# trajectory driver


def theory_trajectory(cfg, horizon, model="general"):
    """Run the chosen model for ``horizon`` samples.

    Returns
    -------
    dict with keys ``msd`` (horizon+1,), ``mean_dev_norm`` (horizon+1,),
    ``diverged`` (bool) and ``model``. The recursion stops early (values
    held) once MSD exceeds 1e12 times its start, mirroring the simulator's
    divergence guard.
    """
    from .simulation import DIVERGENCE_FACTOR

    state = init_theory_state(cfg, model=model)
    if model == "general" and cfg.algorithm == "dnlms":
        msg = _window_warning(cfg)
        if msg:
            warnings.warn(msg, ModelAccuracyWarning, stacklevel=2)

    if model == "general":
        step = msd_step_dlms_general if cfg.algorithm == "dlms" \
            else _msd_step_dnlms_core
    else:
        step = msd_step_slow
        period = _exact_power_period(cfg)
        if period is not None:
            return _slow_trajectory_cached(cfg, horizon, state, period)

    msd = np.empty(horizon + 1)
    dev_norm = np.empty(horizon + 1)
    msd[0] = state.msd
    dev_norm[0] = float(np.linalg.norm(state.mean_dev))
    limit = DIVERGENCE_FACTOR * msd[0]
    diverged = False
    for n in range(horizon):
        step(state, cfg)
        msd[n + 1] = state.msd
        dev_norm[n + 1] = float(np.linalg.norm(state.mean_dev))
        if not np.isfinite(state.msd) or state.msd > limit:
            # hold the crossing value, like the simulator's guard
            diverged = True
            msd[n + 1:] = msd[n + 1]
            dev_norm[n + 1:] = dev_norm[n + 1]
            break
    return {"msd": msd, "mean_dev_norm": dev_norm, "diverged": diverged,
            "model": model}


def _exact_power_period(cfg):
    """Common power period when every profile repeats exactly in float
    arithmetic (constant or pulsed; sinusoids evaluate the phase from the
    absolute sample index, so they are excluded)."""
    periods = []
    for node in cfg.nodes:
        if isinstance(node.profile, ConstantProfile):
            periods.append(1)
        elif isinstance(node.profile, PulsedProfile):
            periods.append(node.profile.period)
        else:
            return None
    lcm = math.lcm(*periods)
    return lcm if lcm <= 8192 else None


def _slow_trajectory_cached(cfg, horizon, state, period):
    """Slow-model loop with per-phase factors precomputed; identical output
    to the stepwise path, just without recomputing periodic coefficients."""
    from .simulation import DIVERGENCE_FACTOR

    factors = [slow_factors(cfg, p) for p in range(period)]
    mean_fn = _mean_factors_dlms if cfg.algorithm == "dlms" \
        else _mean_factors_dnlms
    mean_factors = [mean_fn(cfg, p) for p in range(period)]

    msd = np.empty(horizon + 1)
    dev_norm = np.empty(horizon + 1)
    cur = float(state.msd_scalar)
    dev = state.mean_dev
    msd[0] = cur
    dev_norm[0] = float(np.linalg.norm(dev))
    limit = DIVERGENCE_FACTOR * msd[0]
    diverged = False
    for n in range(horizon):
        a, forcing = factors[n % period]
        cur = a * cur + forcing
        dev = mean_factors[n % period] * dev
        msd[n + 1] = cur
        dev_norm[n + 1] = float(np.linalg.norm(dev))
        if not np.isfinite(cur) or cur > limit:
            diverged = True
            msd[n + 1:] = msd[n + 1]
            dev_norm[n + 1:] = dev_norm[n + 1]
            break
    return {"msd": msd, "mean_dev_norm": dev_norm, "diverged": diverged,
            "model": "slow"}
