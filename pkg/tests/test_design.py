"""Design-formula checks: bound values, optimal weights vs searched optima,
consistency with the slow-model recursion."""

import numpy as np
import pytest

from fclms.design import (
    DesignInput,
    dlms_stability_bound,
    dnlms_stability_bound,
    min_weighted_square,
    optimal_weights_snr,
    optimal_weights_speed,
    small_step_steady_state,
)
from fclms.signals import ConstantProfile, PlantModel, ThreePoint, two_sided_exponential
from fclms.simulation import NetworkConfig, NodeConfig
from fclms.theory import theory_trajectory


def test_isolated_node_bounds():
    d = DesignInput(1, 32, (1.8,))
    assert dlms_stability_bound(d) == pytest.approx(2.0 / 32.8, rel=1e-12)
    assert dlms_stability_bound(d) == pytest.approx(0.061, abs=5e-4)
    assert dnlms_stability_bound(d) == pytest.approx(64.0 / 32.8, rel=1e-12)
    assert dnlms_stability_bound(d) == pytest.approx(1.9512, abs=5e-5)


def test_uniform_network_bounds():
    m, n, psi = 10, 32, 1.8
    d = DesignInput(m, n, (psi,) * m)
    expected = 2.0 * m / (m + n + psi - 2.0)
    assert dlms_stability_bound(d) == pytest.approx(expected, rel=1e-12)
    assert dlms_stability_bound(d) == pytest.approx(0.4785, abs=5e-5)
    assert dnlms_stability_bound(d) == pytest.approx(n * expected, rel=1e-12)
    assert dnlms_stability_bound(d) == pytest.approx(640.0 / 41.8, rel=1e-12)


def test_bound_ratio_is_filter_length():
    d = DesignInput(3, 16, (1.8, 6.0, 3.0), weights=(0.5, 0.25, 0.25))
    assert dnlms_stability_bound(d) == pytest.approx(
        16.0 * dlms_stability_bound(d), rel=1e-14)


def test_bound_decreases_with_kurtosis():
    prev = np.inf
    for psi in (1.0, 1.8, 3.0, 6.0, 50.0, 733.0):
        b = dlms_stability_bound(DesignInput(2, 32, (psi, psi)))
        assert b < prev
        assert b > 0.0
        prev = b


def test_min_weighted_square_example():
    c, fmin = min_weighted_square((1.0, 3.0))
    assert np.allclose(c, (0.25, 0.75), rtol=0, atol=1e-15)
    assert fmin == pytest.approx(0.25, rel=1e-15)


def test_min_weighted_square_beats_random_search():
    rng = np.random.default_rng(7)
    for _ in range(25):
        m = int(rng.integers(1, 9))
        eta = rng.uniform(0.05, 20.0, m)
        c, fmin = min_weighted_square(eta)
        assert c.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(c > 0.0)
        trial = rng.dirichlet(np.ones(m), size=2000)
        f_trial = ((trial ** 2) / eta).sum(axis=1)
        assert np.all(f_trial >= fmin - 1e-9)


def test_optimal_snr_weights_example():
    m, n = 10, 32
    snrs = (1e6,) * m
    d = DesignInput(m, n, (3.0,) * m, snrs=snrs, sigma_q2=2e-8)
    c, msd = optimal_weights_snr(d, step=0.1, algorithm="dlms")
    assert np.allclose(c, 0.1, rtol=0, atol=1e-15)
    assert msd == pytest.approx(3.36e-6, rel=1e-12)


def test_optimal_snr_weights_proportional_to_snr():
    d = DesignInput(3, 16, (3.0, 3.0, 3.0), snrs=(1e4, 2e4, 7e4), sigma_q2=0.0)
    c, _ = optimal_weights_snr(d, step=0.05)
    assert np.allclose(c, np.array((1.0, 2.0, 7.0)) / 10.0, rtol=1e-14)
    # and they beat uniform weighting
    uniform = small_step_steady_state(d, 0.05, weights=np.full(3, 1.0 / 3.0))
    optimal = small_step_steady_state(d, 0.05, weights=c)
    assert optimal < uniform


def test_dnlms_small_step_form():
    d = DesignInput(2, 8, (3.0, 3.0), snrs=(100.0, 400.0), sigma_q2=1e-6,
                    weights=(0.5, 0.5))
    xi = 0.2
    got = small_step_steady_state(d, xi, algorithm="dnlms")
    load = 0.25 / 100.0 + 0.25 / 400.0
    assert got == pytest.approx(0.5 * (xi * load + 64.0 * 1e-6 / xi), rel=1e-14)


def test_optimal_speed_weights_example():
    d = DesignInput(2, 32, (3.0, 733.0))
    c, load = optimal_weights_speed(d)
    assert c[0] == pytest.approx(0.9585, abs=5e-5)
    assert c[1] == pytest.approx(0.0415, abs=5e-5)
    s = 1.0 / 33.0 + 1.0 / 763.0
    assert load == pytest.approx(1.0 / s, rel=1e-12)
    # widened normalized-step bound, eq-for-eq
    d_opt = DesignInput(2, 32, (3.0, 733.0), weights=tuple(c))
    assert dnlms_stability_bound(d_opt) == pytest.approx(
        2.0 * 32.0 * s / (s + 1.0), rel=1e-12)


def test_speed_weights_maximize_bound():
    rng = np.random.default_rng(11)
    for _ in range(10):
        m = int(rng.integers(2, 7))
        psis = tuple(float(v) for v in rng.uniform(1.0, 40.0, m))
        c_opt, _ = optimal_weights_speed(DesignInput(m, 16, psis))
        b_opt = dlms_stability_bound(DesignInput(m, 16, psis, weights=tuple(c_opt)))
        for _ in range(200):
            w = rng.dirichlet(np.ones(m))
            if np.any(w <= 0.0):
                continue
            w = w / w.sum()
            b = dlms_stability_bound(DesignInput(m, 16, psis, weights=tuple(w)))
            assert b <= b_opt * (1.0 + 1e-9)


def _wss_cfg(m, n_taps, psi, lam, weights):
    nodes = tuple(
        NodeConfig(weight=float(weights[j]), step=lam, noise_power=1e-6,
                   profile=ConstantProfile(1.0), dist=ThreePoint(psi[j]))
        for j in range(m)
    )
    plant = PlantModel(n_taps, 1e-10, tuple(two_sided_exponential(n_taps)))
    return NetworkConfig(nodes=nodes, filter_length=n_taps, plant=plant)


def test_bound_edges_match_recursion():
    rng = np.random.default_rng(23)
    for _ in range(5):
        m = int(rng.integers(1, 5))
        n_taps = int(rng.integers(4, 24))
        psi = rng.uniform(1.0, 8.0, m)
        w = rng.dirichlet(np.ones(m) * 3.0)
        w = w / w.sum()
        d = DesignInput(m, n_taps, tuple(psi), weights=tuple(w))
        bound = dlms_stability_bound(d)
        below = theory_trajectory(_wss_cfg(m, n_taps, psi, 0.99 * bound, w),
                                  40000, model="slow")
        above = theory_trajectory(_wss_cfg(m, n_taps, psi, 1.01 * bound, w),
                                  40000, model="slow")
        assert not below["diverged"]
        assert above["diverged"]


def test_design_input_validation():
    with pytest.raises(ValueError):
        DesignInput(2, 8, (0.5, 3.0))
    with pytest.raises(ValueError):
        DesignInput(2, 8, (3.0,))
    with pytest.raises(ValueError):
        DesignInput(2, 8, (3.0, 3.0), weights=(0.7, 0.7))
    with pytest.raises(ValueError):
        DesignInput(2, 8, (3.0, 3.0), snrs=(-1.0, 2.0))
    with pytest.raises(ValueError):
        small_step_steady_state(DesignInput(1, 8, (3.0,), snrs=(10.0,)), 0.0)
