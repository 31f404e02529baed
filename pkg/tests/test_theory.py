"""Model checks: mean and second-moment recursions against independent
scalar re-implementations, model-to-model consistency, steady state."""

import math

import numpy as np
import pytest

from fclms.signals import (
    ConstantProfile,
    Gaussian,
    Laplacian,
    PlantModel,
    SinusoidalProfile,
    ThreePoint,
    Uniform,
    kurtosis_of,
    power_at,
    two_sided_exponential,
)
from fclms.simulation import NetworkConfig, NodeConfig
from fclms.theory import (
    ModelAccuracyWarning,
    NonPositiveDenominatorError,
    dlms_coefficients,
    dnlms_coefficients,
    init_theory_state,
    mean_step_dlms,
    mean_step_dnlms,
    msd_step_dlms_general,
    msd_step_dnlms_general,
    msd_step_slow,
    phase_powers,
    slow_factors,
    slow_fixed_point,
    steady_state_msd,
    tap_powers,
    theory_trajectory,
    window_mean_powers,
)


def _cfg(nodes, n_taps=8, sigma_q2=1e-8, algorithm="dlms"):
    plant = PlantModel(n_taps, sigma_q2, tuple(two_sided_exponential(n_taps)))
    return NetworkConfig(nodes=tuple(nodes), filter_length=n_taps, plant=plant,
                         algorithm=algorithm)


def _node(weight, step, profile, dist, noise=1e-6):
    return NodeConfig(weight=weight, step=step, noise_power=noise,
                      profile=profile, dist=dist)


def _mixed_two_node(algorithm="dlms", steps=(0.04, 0.06)):
    return _cfg([
        _node(0.4, steps[0], SinusoidalProfile(1.0, 2.0 * math.pi / 16.0), Uniform()),
        _node(0.6, steps[1], SinusoidalProfile(0.5, 2.0 * math.pi / 8.0), Laplacian()),
    ], algorithm=algorithm)


# ---------------------------------------------------------------------------
# mean recursions


def test_mean_single_node_constant_power():
    mu, s2 = 0.05, 0.7
    cfg = _cfg([_node(1.0, mu, ConstantProfile(s2), Gaussian())])
    st = init_theory_state(cfg)
    mean_step_dlms(st, cfg)
    expected = -(1.0 - mu * s2) * cfg.plant.h0_array
    assert np.allclose(st.mean_dev, expected, rtol=1e-14)


def test_mean_equal_normalized_steps_scalar_factor():
    # mu_j = lam / power_j makes the contraction a scalar 1 - lam
    lam = 0.2
    powers = (0.5, 1.0, 2.0)
    nodes = [_node(1.0 / 3.0, lam / p, ConstantProfile(p), Gaussian())
             for p in powers]
    cfg = _cfg(nodes)
    st = init_theory_state(cfg)
    for _ in range(5):
        mean_step_dlms(st, cfg)
    expected = -(1.0 - lam) ** 5 * cfg.plant.h0_array
    assert np.allclose(st.mean_dev, expected, rtol=1e-12)


def test_mean_deadbeat_unit_normalized_step():
    nodes = [_node(0.5, 1.0 / 0.5, ConstantProfile(0.5), Gaussian()),
             _node(0.5, 1.0 / 2.0, ConstantProfile(2.0), Gaussian())]
    cfg = _cfg(nodes)
    st = mean_step_dlms(init_theory_state(cfg), cfg)
    assert np.max(np.abs(st.mean_dev)) <= 1e-12


def test_mean_dlms_matches_reference_loop():
    cfg = _mixed_two_node()
    st = init_theory_state(cfg)
    # reference: per-tap scalar product of factors, straight from power_at
    ref = -cfg.plant.h0_array.astype(float)
    horizon = 60
    for n in range(horizon):
        for t in range(cfg.filter_length):
            f = 1.0 - sum(node.weight * node.step * float(power_at(node.profile, n - t))
                          for node in cfg.nodes)
            ref[t] *= f
        mean_step_dlms(st, cfg)
    assert np.allclose(st.mean_dev, ref, rtol=1e-12)


def test_mean_dnlms_matches_reference_loop():
    cfg = _mixed_two_node(algorithm="dnlms", steps=(0.4, 0.6))
    st = init_theory_state(cfg)
    n_taps = cfg.filter_length
    ref = -cfg.plant.h0_array.astype(float)
    for n in range(50):
        for t in range(n_taps):
            f = 1.0
            for node in cfg.nodes:
                pbar = np.mean([float(power_at(node.profile, n - i))
                                for i in range(n_taps)])
                f -= node.weight * node.step \
                    * float(power_at(node.profile, n - t)) / (n_taps * pbar)
            ref[t] *= f
        mean_step_dnlms(st, cfg)
    assert np.allclose(st.mean_dev, ref, rtol=1e-12)


def test_mean_dnlms_equal_xi_slow_factor():
    # constant powers make the window mean exact: factor 1 - xi/N per tap
    xi = 0.8
    nodes = [_node(0.3, xi, ConstantProfile(0.5), Uniform()),
             _node(0.7, xi, ConstantProfile(2.0), Laplacian())]
    cfg = _cfg(nodes, algorithm="dnlms")
    st = mean_step_dnlms(init_theory_state(cfg), cfg)
    expected = -(1.0 - xi / cfg.filter_length) * cfg.plant.h0_array
    assert np.allclose(st.mean_dev, expected, rtol=1e-12)
    # xi = N: one-step deadbeat
    nodes_db = [NodeConfig(n.weight, float(cfg.filter_length), n.noise_power,
                           n.profile, n.dist) for n in nodes]
    cfg_db = _cfg(nodes_db, algorithm="dnlms")
    st_db = mean_step_dnlms(init_theory_state(cfg_db), cfg_db)
    assert np.max(np.abs(st_db.mean_dev)) <= 1e-12


# ---------------------------------------------------------------------------
# coefficients


def test_gamma_floor_is_plant_drift():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m = int(rng.integers(1, 5))
        w = rng.uniform(0.2, 1.0, m)
        w /= w.sum()
        w[-1] = 1.0 - w[:-1].sum()
        nodes = [_node(w[j], float(rng.uniform(0.0, 0.2)),
                       SinusoidalProfile(float(rng.uniform(0.3, 2.0)),
                                         2.0 * math.pi / int(rng.integers(4, 64))),
                       Uniform(), noise=float(rng.uniform(0.0, 1e-3)))
                 for j in range(m)]
        cfg = _cfg(nodes, sigma_q2=float(rng.uniform(1e-9, 1e-6)))
        for n in (0, 3, 17):
            co = dlms_coefficients(cfg, n)
            assert np.all(co.gamma >= cfg.plant.sigma_q2)
            assert co.beta.shape == (8, 8)
            assert np.all(co.beta >= 0.0)


def test_tap_powers_alignment():
    cfg = _mixed_two_node()
    n = 13
    p = tap_powers(cfg, n)
    for j, node in enumerate(cfg.nodes):
        for t in range(cfg.filter_length):
            assert p[j, t] == float(power_at(node.profile, n - t))
    assert np.allclose(window_mean_powers(cfg, n), p.mean(axis=1))
    assert np.allclose(phase_powers(cfg, n), p[:, 0])


def test_substitution_reproduces_dnlms_coefficients():
    cfg = _mixed_two_node(algorithm="dnlms", steps=(0.9, 0.5))
    n_taps = cfg.filter_length
    for n in (0, 5, 23, 64):
        pbar = window_mean_powers(cfg, n)
        eff = np.array([node.step for node in cfg.nodes]) / (n_taps * pbar)
        nodes = [NodeConfig(node.weight, float(eff[j]), node.noise_power,
                            node.profile, node.dist)
                 for j, node in enumerate(cfg.nodes)]
        as_dlms = NetworkConfig(nodes=tuple(nodes), filter_length=n_taps,
                                plant=cfg.plant, algorithm="dlms")
        a = dlms_coefficients(as_dlms, n)
        b = dnlms_coefficients(cfg, n)
        assert np.allclose(a.alpha, b.alpha, rtol=1e-12)
        assert np.allclose(a.beta, b.beta, rtol=1e-12)
        assert np.allclose(a.gamma, b.gamma, rtol=1e-12)


# ---------------------------------------------------------------------------
# general per-tap model


def test_zero_step_msd_grows_at_drift_rate():
    cfg = _cfg([_node(1.0, 0.0, ConstantProfile(1.0), Gaussian())],
               sigma_q2=2e-8)
    st = init_theory_state(cfg)
    m0 = st.msd
    for k in range(1, 50):
        msd_step_dlms_general(st, cfg)
        expected = m0 + k * cfg.filter_length * cfg.plant.sigma_q2
        assert st.msd == pytest.approx(expected, rel=1e-12)


def _eq42_scalar(cfg, msd0, horizon):
    """Independent slow-model iteration, plain Python floats."""
    n_taps = cfg.filter_length
    out = [msd0]
    msd = msd0
    for n in range(horizon):
        s1 = s2q = force = 0.0
        for node in cfg.nodes:
            p = float(power_at(node.profile, n))
            psi = kurtosis_of(node.dist)
            s1 += node.weight * node.step * p
            s2q += (node.weight * node.step * p) ** 2 * (psi + n_taps - 2.0)
            force += node.weight ** 2 * node.step ** 2 * node.noise_power * p
        bracket = 1.0 - 2.0 * s1 + s2q + s1 * s1
        msd = bracket * msd + n_taps * force + n_taps * cfg.plant.sigma_q2
        out.append(msd)
    return np.array(out)


def test_general_single_node_matches_scalar_recursion():
    cfg = _cfg([_node(1.0, 0.08, ConstantProfile(1.0), Gaussian(), noise=1e-4)],
               sigma_q2=1e-8)
    st = init_theory_state(cfg)
    horizon = 800
    got = [st.msd]
    for _ in range(horizon):
        msd_step_dlms_general(st, cfg)
        got.append(st.msd)
    ref = _eq42_scalar(cfg, float(cfg.plant.h0_array @ cfg.plant.h0_array), horizon)
    assert np.allclose(got, ref, rtol=1e-10)


@pytest.mark.filterwarnings("ignore::fclms.theory.ModelAccuracyWarning")
@pytest.mark.parametrize("algorithm", ["dlms", "dnlms"])
def test_slow_equals_general_for_constant_powers(algorithm):
    steps = (0.05, 0.03) if algorithm == "dlms" else (0.6, 0.4)
    nodes = [_node(0.45, steps[0], ConstantProfile(1.0), Uniform(), noise=1e-5),
             _node(0.55, steps[1], ConstantProfile(0.5), Laplacian(), noise=1e-4)]
    cfg = _cfg(nodes, algorithm=algorithm)
    horizon = 2000
    gen = theory_trajectory(cfg, horizon, model="general")
    slow = theory_trajectory(cfg, horizon, model="slow")
    assert np.allclose(gen["msd"], slow["msd"], rtol=1e-10)


def test_dnlms_window_warning():
    nodes = [_node(1.0, 0.5, ConstantProfile(1.0), Laplacian())]
    cfg = _cfg(nodes, n_taps=8, algorithm="dnlms")  # 8 <= 10 * 6
    st = init_theory_state(cfg)
    with pytest.warns(ModelAccuracyWarning):
        msd_step_dnlms_general(st, cfg)
    nodes_u = [_node(1.0, 0.5, ConstantProfile(1.0), Uniform())]
    cfg_u = _cfg(nodes_u, n_taps=32, algorithm="dnlms")  # 32 > 18
    plant32 = PlantModel(32, 1e-8, tuple(two_sided_exponential(32)))
    cfg_u = NetworkConfig(nodes=tuple(nodes_u), filter_length=32, plant=plant32,
                          algorithm="dnlms")
    st_u = init_theory_state(cfg_u)
    import warnings as _w
    with _w.catch_warnings():
        _w.simplefilter("error", ModelAccuracyWarning)
        msd_step_dnlms_general(st_u, cfg_u)


def test_kurtosis_is_sufficient_for_theory():
    # distributions with the same fourth moment give bit-identical curves
    def build(dist):
        return _cfg([_node(1.0, 0.05, SinusoidalProfile(1.0, 2.0 * math.pi / 32.0),
                           dist, noise=1e-5)])
    a = theory_trajectory(build(Gaussian()), 400)
    b = theory_trajectory(build(ThreePoint(3.0)), 400)
    assert np.array_equal(a["msd"], b["msd"])
    assert np.array_equal(a["mean_dev_norm"], b["mean_dev_norm"])


def test_higher_kurtosis_slows_transient():
    base = dict(weight=1.0, step=0.05, noise_power=1e-6,
                profile=ConstantProfile(1.0))
    for psi_lo, psi_hi in [(1.8, 3.0), (3.0, 6.0), (6.0, 50.0)]:
        a, _ = slow_factors(_cfg([NodeConfig(dist=ThreePoint(psi_lo), **base)]), 0)
        b, _ = slow_factors(_cfg([NodeConfig(dist=ThreePoint(psi_hi), **base)]), 0)
        assert b > a


# ---------------------------------------------------------------------------
# slow model and steady state


def test_slow_factor_matches_equal_kurtosis_closed_form():
    # equal-kurtosis network with normalized steps mu_j = lam / power_j
    lam, psi, n_taps = 0.1, 1.8, 8
    powers = (0.5, 1.0, 2.0)
    w = (0.2, 0.3, 0.5)
    nodes = [_node(w[i], lam / powers[i], ConstantProfile(powers[i]), Uniform())
             for i in range(3)]
    cfg = _cfg(nodes, n_taps=n_taps)
    a, _ = slow_factors(cfg, 0)
    sum_c2 = sum(x * x for x in w)
    expected = 1.0 - 2.0 * lam + (n_taps + psi - 2.0) * lam ** 2 * sum_c2 + lam ** 2
    assert a == pytest.approx(expected, rel=1e-14)


def test_dnlms_transient_factor_closed_form():
    xi, n_taps = 0.9, 32
    plant = PlantModel(n_taps, 1e-8, tuple(two_sided_exponential(n_taps)))
    w = (0.25, 0.75)
    nodes = [_node(w[0], xi, ConstantProfile(1.0), Uniform()),
             _node(w[1], xi, ConstantProfile(2.0), Laplacian())]
    cfg = NetworkConfig(nodes=tuple(nodes), filter_length=n_taps, plant=plant,
                        algorithm="dnlms")
    a, _ = slow_factors(cfg, 0)
    sum_c2_psi = sum(w[i] ** 2 * (kurtosis_of(nodes[i].dist) + n_taps - 2.0)
                     for i in range(2))
    expected = 1.0 - 2.0 * xi / n_taps + (xi / n_taps) ** 2 * sum_c2_psi \
        + (xi / n_taps) ** 2
    assert a == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("algorithm,step", [("dlms", 0.08), ("dnlms", 0.9)])
def test_steady_state_is_fixed_point_of_iteration(algorithm, step):
    nodes = [_node(0.5, step, ConstantProfile(1.0), Uniform(), noise=1e-4),
             _node(0.5, step * 0.7, ConstantProfile(1.5), Laplacian(), noise=1e-5)]
    cfg = _cfg(nodes, algorithm=algorithm, sigma_q2=1e-9)
    st = init_theory_state(cfg, model="slow")
    prev = st.msd
    for _ in range(20000):
        msd_step_slow(st, cfg)
        if abs(st.msd - prev) < 1e-14 * max(st.msd, 1e-300):
            break
        prev = st.msd
    assert st.msd == pytest.approx(steady_state_msd(cfg, n=st.n), rel=1e-6)
    assert slow_fixed_point(cfg) == pytest.approx(steady_state_msd(cfg, 0), rel=1e-9)


def test_steady_state_outside_stability_raises():
    cfg = _cfg([_node(1.0, 0.5, ConstantProfile(1.0), Uniform(), noise=1e-4)])
    with pytest.raises(NonPositiveDenominatorError):
        steady_state_msd(cfg, 0)


def test_steady_state_periodic_in_phase():
    period = 64
    cfg = _cfg([_node(1.0, 0.02, SinusoidalProfile(1.0, 2.0 * math.pi / period),
                      Uniform(), noise=1e-5)])
    for n in (3, 17):
        assert steady_state_msd(cfg, n) == pytest.approx(
            steady_state_msd(cfg, n + period), rel=1e-12)


def test_trajectory_divergence_flag():
    cfg = _cfg([_node(1.0, 1.5, ConstantProfile(1.0), Uniform(), noise=1e-4)])
    out = theory_trajectory(cfg, 3000, model="slow")
    assert out["diverged"]
    assert np.all(np.isfinite(out["msd"]))
    stable = _cfg([_node(1.0, 0.05, ConstantProfile(1.0), Uniform(), noise=1e-4)])
    assert not theory_trajectory(stable, 500, model="slow")["diverged"]


def test_trajectory_start_value():
    cfg = _mixed_two_node()
    out = theory_trajectory(cfg, 10)
    h0 = cfg.plant.h0_array
    assert out["msd"][0] == pytest.approx(float(h0 @ h0), rel=1e-15)
    assert out["mean_dev_norm"][0] == pytest.approx(float(np.linalg.norm(h0)),
                                                    rel=1e-15)
