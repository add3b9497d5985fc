import numpy as np
import pytest

from hfdemix import (ChannelSampling, ConfigurationError, DomainError,
                     PathParams, SystemConfig, assemble_channel,
                     curvature_ramp, element_range, far_steering,
                     near_steering_approx, near_steering_exact, phase_ramp,
                     phi_from_theta, psi_from_theta_range, range_from_psi,
                     sample_hybrid_channel, theta_from_phi)


def test_config_invariants(cfg64):
    assert cfg64.spacing == cfg64.wavelength / 2.0
    assert cfg64.num_measurements == 64
    with pytest.raises(ConfigurationError):
        SystemConfig(n=1, n_rf=1, pilot_len=1, carrier_freq=30e9)
    with pytest.raises(ConfigurationError):
        SystemConfig.full_sampling(64, 3, 30e9)  # 64 not divisible by 3


def test_rayleigh_distance_both_conventions():
    cfg = SystemConfig.full_sampling(256, 4, 30e9)
    # both aperture conventions land within 1% of the nominal 327.68 m
    assert abs(cfg.rayleigh_dist - 327.68) / 327.68 < 0.01
    assert abs(cfg.rayleigh_dist_full_aperture - 327.68) / 327.68 < 0.01
    assert cfg.rayleigh_dist < cfg.rayleigh_dist_full_aperture


# ---------------------------------------------------------------------------
# steering vectors
# ---------------------------------------------------------------------------

def test_far_steering_boresight(cfg64):
    assert np.allclose(far_steering(0.0, cfg64), np.ones(64))


def test_far_steering_quarter_cycle():
    cfg = SystemConfig.full_sampling(4, 1, 30e9)
    got = far_steering(np.pi / 6, cfg)  # phi = sin(pi/6)/2 = 1/4
    assert np.allclose(got, [1, 1j, -1, -1j], atol=1e-12)


def test_ramp_literal_values():
    assert np.allclose(phase_ramp(0.25, 4), [1, 1j, -1, -1j], atol=1e-12)
    assert np.allclose(phase_ramp(0.0, 5), np.ones(5))
    assert np.allclose(curvature_ramp(0.0, 5), np.ones(5))
    psi = -3e-3
    expect = [1.0, np.exp(2j * np.pi * psi), np.exp(8j * np.pi * psi)]
    assert np.allclose(curvature_ramp(psi, 3), expect, atol=1e-12)


def test_far_steering_unit_modulus(cfg64, rng):
    for theta in rng.uniform(-np.pi / 2 + 1e-3, np.pi / 2 - 1e-3, 20):
        assert np.max(np.abs(np.abs(far_steering(theta, cfg64)) - 1.0)) < 1e-12


def test_far_steering_domain(cfg64):
    with pytest.raises(DomainError):
        far_steering(np.pi / 2, cfg64)


def test_element_range_reference_antenna(cfg64):
    assert element_range(0.3, 25.0, 0, cfg64) == 25.0


def test_element_range_pythagoras(cfg64):
    d = cfg64.spacing
    got = element_range(0.0, 10.0, 1, cfg64)
    assert got == pytest.approx(np.sqrt(100.0 + d**2), rel=1e-14)


def test_element_range_coordinate_oracle(cfg64, rng):
    # independent check: distance between explicit cartesian points
    for _ in range(50):
        theta = rng.uniform(-1.2, 1.2)
        r = rng.uniform(1.0, 200.0)
        n = int(rng.integers(0, 64))
        source = np.array([r * np.cos(theta), r * np.sin(theta)])
        antenna = np.array([0.0, n * cfg64.spacing])
        assert element_range(theta, r, n, cfg64) == pytest.approx(
            float(np.hypot(*(source - antenna))), rel=1e-12)
    with pytest.raises(DomainError):
        element_range(0.1, -1.0, 3, cfg64)


def test_near_steering_reference_entry(cfg64, rng):
    for _ in range(10):
        b = near_steering_exact(rng.uniform(-1.0, 1.0), rng.uniform(5, 100), cfg64)
        assert b[0] == 1.0 + 0.0j
        assert np.max(np.abs(np.abs(b) - 1.0)) < 1e-12


def test_near_steering_far_field_limit(cfg64):
    theta = 0.37
    r = 1e6 * cfg64.rayleigh_dist
    b = near_steering_exact(theta, r, cfg64)
    a = far_steering(theta, cfg64)
    assert np.max(np.abs(b - a)) < 1e-3


def test_near_steering_two_antenna_hand_case():
    cfg = SystemConfig(n=2, n_rf=1, pilot_len=1, carrier_freq=29.9792458e9)
    # wavelength is exactly 0.01 m here, spacing 0.005 m
    assert cfg.wavelength == pytest.approx(0.01, rel=1e-12)
    theta, r = np.pi / 4, 1.0
    d2 = np.sqrt(r**2 + 0.005**2 - 2 * r * 0.005 * np.sin(theta))
    expect = np.exp(-2j * np.pi / 0.01 * (d2 - r))
    got = near_steering_exact(theta, r, cfg)
    assert got[1] == pytest.approx(expect, rel=1e-12)


def test_near_approx_boresight_limit(cfg64):
    got = near_steering_approx(0.0, 1e12, cfg64)
    assert np.allclose(got, np.ones(64), atol=1e-9)


def test_near_approx_factorization(cfg64, rng):
    for _ in range(100):
        theta = rng.uniform(-1.2, 1.2)
        r = rng.uniform(5.0, 100.0)
        phi = phi_from_theta(theta, cfg64)
        psi = psi_from_theta_range(theta, r, cfg64)
        lhs = near_steering_approx(theta, r, cfg64)
        rhs = phase_ramp(phi, 64) * curvature_ramp(psi, 64)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_near_approx_within_taylor_remainder(cfg64):
    # The kept expansion is r sqrt(1+x) ~ r + rx/2 - (2 r n d sin)^2/(8 r^3)
    # with x = (y^2 - 2 r y sin)/r^2. Error bound = Lagrange remainder of
    # sqrt(1+x) after the quadratic term plus the dropped pieces of x^2/8.
    theta, r = 0.3, 30.0
    n = np.arange(64)
    y = n * cfg64.spacing
    x = (y**2 - 2 * r * y * np.sin(theta)) / r**2
    lagrange = r * np.abs(x) ** 3 / (16.0 * (1.0 - np.abs(x)) ** 2.5)
    dropped = (r / 8.0) * np.abs(x**2 - (2.0 * y * np.sin(theta) / r) ** 2)
    bound_phase = 2 * np.pi / cfg64.wavelength * np.max(lagrange + dropped)
    exact = near_steering_exact(theta, r, cfg64)
    approx = near_steering_approx(theta, r, cfg64)
    phase_err = np.max(np.abs(np.angle(approx * np.conj(exact))))
    assert phase_err <= bound_phase


def test_approx_error_monotone_in_range(cfg64):
    theta = 0.4
    errs = []
    for r in 5.0 * 2.0 ** np.arange(6):
        exact = near_steering_exact(theta, r, cfg64)
        approx = near_steering_approx(theta, r, cfg64)
        errs.append(np.max(np.abs(np.angle(approx * np.conj(exact)))))
    assert all(a >= b for a, b in zip(errs, errs[1:]))


# ---------------------------------------------------------------------------
# parameter transforms
# ---------------------------------------------------------------------------

def test_transform_round_trip(cfg64, rng):
    for _ in range(100):
        theta = rng.uniform(-np.pi / 2 + 1e-6, np.pi / 2 - 1e-6)
        r = rng.uniform(0.5, 500.0)
        phi = phi_from_theta(theta, cfg64)
        assert -0.5 <= phi < 0.5
        psi = psi_from_theta_range(theta, r, cfg64)
        assert psi <= 0
        theta_back = theta_from_phi(phi, cfg64)
        assert theta_back == pytest.approx(theta, abs=1e-10)
        if psi < 0:
            assert range_from_psi(theta_back, psi, cfg64) == pytest.approx(r, rel=1e-10)
    with pytest.raises(DomainError):
        theta_from_phi(0.6, cfg64)
    with pytest.raises(DomainError):
        psi_from_theta_range(0.1, -2.0, cfg64)


# ---------------------------------------------------------------------------
# channel generation
# ---------------------------------------------------------------------------

def test_assemble_single_far_path(cfg16):
    ch = assemble_channel([PathParams("far", 1.0 + 0.0j, 0.0)], cfg16)
    assert np.allclose(ch.h, np.sqrt(16.0) * np.ones(16))


def test_sample_single_near_path(cfg16, rng):
    ch = sample_hybrid_channel(0, 1, cfg16, rng)
    p = ch.paths[0]
    expect = np.sqrt(16.0) * p.gain * near_steering_exact(p.theta, p.r, cfg16)
    assert np.allclose(ch.h, expect, atol=1e-12)
    assert ch.k_far == 0 and ch.k_near == 1


def test_sampled_separation_enforced(cfg64, rng):
    sampling = ChannelSampling(min_phi_sep=0.02)
    for _ in range(20):
        ch = sample_hybrid_channel(3, 3, cfg64, rng, sampling)
        phis = np.array([p.phi(cfg64) for p in ch.paths])
        diffs = np.abs(phis[:, None] - phis[None, :]) % 1.0
        diffs = np.minimum(diffs, 1.0 - diffs)
        np.fill_diagonal(diffs, 1.0)
        assert diffs.min() >= 0.02


def test_infeasible_separation_rejected(cfg16, rng):
    with pytest.raises(ConfigurationError):
        sample_hybrid_channel(40, 40, cfg16, rng, ChannelSampling(min_phi_sep=0.05))
    with pytest.raises(ConfigurationError):
        sample_hybrid_channel(0, 0, cfg16, rng)


def test_channel_energy_concentrates(cfg16, rng):
    # E||h||^2 = (N/K) * sum_k E|a_k|^2 * ||steering||^2 = N^2 for CN(0,1)
    # gains and unit-modulus steering entries.
    vals = [np.linalg.norm(sample_hybrid_channel(3, 3, cfg16, rng).h) ** 2
            for _ in range(1000)]
    assert np.mean(vals) == pytest.approx(16.0**2, rel=0.10)
