import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nfbeam.channel import (
    CalibrationError,
    Granularity,
    apply_calibration_errors,
    element_positions,
    ff_steering,
    los_channel,
    nf_steering,
    nf_steering_many,
    receive_beam_profile,
)
from nfbeam.codebook import dft_codebook
from nfbeam.geometry import ArrayConfig, PolarPoint

sin_vals = st.floats(-0.95, 0.95)
ranges = st.floats(2.0, 500.0)


def test_ff_boresight_flat(cfg):
    a = ff_steering(cfg, 0.0)
    assert np.allclose(a, 1 / math.sqrt(cfg.n_elements))


def test_ff_phases_four_elements():
    c = ArrayConfig(n_elements=4)
    a = ff_steering(c, math.pi / 6)
    expected = np.exp(-1j * np.array([0, math.pi / 2, math.pi, 3 * math.pi / 2])) / 2
    assert np.allclose(a, expected)


def test_ff_columns(cfg):
    th = np.array([-0.3, 0.0, 0.4])
    A = ff_steering(cfg, th)
    assert A.shape == (cfg.n_elements, 3)
    assert np.allclose(A[:, 2], ff_steering(cfg, 0.4))


@settings(max_examples=30)
@given(sin_vals, ranges)
def test_unit_norm(s, r):
    cfg = ArrayConfig()
    assert np.linalg.norm(ff_steering(cfg, math.asin(s))) == pytest.approx(1, abs=1e-12)
    b = nf_steering(cfg, PolarPoint.from_sin(s, r))
    assert abs(np.vdot(b, b) - 1) < 1e-12


def test_nf_far_limit(cfg):
    th = 0.37
    b = nf_steering(cfg, PolarPoint(th, 1e6 * cfg.rayleigh_distance))
    assert abs(np.vdot(ff_steering(cfg, th), b)) == pytest.approx(1, abs=1e-3)


def test_nf_matches_many(cfg):
    p = PolarPoint(-0.2, 7.0)
    assert np.array_equal(nf_steering(cfg, p), nf_steering_many(cfg, [p.angle], [p.range])[:, 0])


def test_positions_centred(cfg):
    u = element_positions(cfg)
    assert u.sum() == pytest.approx(0, abs=1e-12)
    assert u[0] > u[-1]


def test_ebrd_gain_value(cfg):
    g = abs(np.vdot(ff_steering(cfg, 0.0), nf_steering(cfg, PolarPoint(0.0, 35.0)))) ** 2
    assert g == pytest.approx(0.226, abs=0.005)


def brute_force_gain(cfg, theta_u, r, theta_n, origin):
    """Exact spherical sum with the distance origin at element ``origin``, independent of the module."""
    n = np.arange(cfg.n_elements)
    pos = (origin - n) * cfg.element_spacing
    rn = np.sqrt(r**2 + pos**2 - 2 * r * pos * math.sin(theta_u))
    b = np.exp(-1j * cfg.wavenumber * (rn - r))
    a = np.exp(-1j * cfg.wavenumber * cfg.element_spacing * n * math.sin(theta_n))
    return abs(np.vdot(b, a)) ** 2 / cfg.n_elements**2


@pytest.mark.parametrize("theta_u,r,theta_n", [(0.0, 35.0, 0.0), (0.5, 6.0, 0.49), (-0.8, 3.0, -0.7)])
def test_gain_matches_brute_force_centre_origin(cfg, theta_u, r, theta_n):
    got = abs(np.vdot(nf_steering(cfg, PolarPoint(theta_u, r)), ff_steering(cfg, theta_n))) ** 2
    assert got == pytest.approx(brute_force_gain(cfg, theta_u, r, theta_n, (cfg.n_elements - 1) / 2), abs=1e-12)


def test_planar_index_origin_is_global_phase(cfg):
    # shifting the DFT index origin to the centre changes only a global phase
    b = nf_steering(cfg, PolarPoint(0.3, 5.0))
    a0 = ff_steering(cfg, 0.29)
    n = np.arange(cfg.n_elements) - cfg.n_elements / 2
    a1 = np.exp(-1j * cfg.wavenumber * cfg.element_spacing * n * math.sin(0.29)) / math.sqrt(cfg.n_elements)
    assert abs(np.vdot(b, a0)) == pytest.approx(abs(np.vdot(b, a1)), abs=1e-12)


def test_argmax_sign_convention(cfg, full_dft):
    # a user at positive angle is seen strongest by the positive-angle DFT beam
    b = nf_steering(cfg, PolarPoint.from_sin(0.5, 8.0))
    g = np.abs(b.conj() @ full_dft.matrix) ** 2
    assert np.sin(full_dft.angles[np.argmax(g)]) == pytest.approx(0.5, abs=0.05)


def test_far_field_gain_approaches_one(cfg):
    a = ff_steering(cfg, 0.0)
    rs = np.geomspace(2 * cfg.aperture, 100 * cfg.rayleigh_distance, 400)
    g = np.array([abs(np.vdot(a, nf_steering(cfg, PolarPoint(0.0, r)))) ** 2 for r in rs])
    # Fresnel-zone ripple close in (last local dip near 24 m); monotone from the EBRD outward
    assert np.all(np.diff(g[rs >= 30]) >= -1e-12)
    assert g[0] < 0.05 and g[-1] > 0.999
    assert np.any(np.diff(g[rs < 30]) < 0)


def test_los_channel_norms(cfg):
    p = PolarPoint(0.1, 10.0)
    h = los_channel(cfg, p)
    assert np.linalg.norm(h.vector) == pytest.approx(math.sqrt(cfg.n_elements))
    assert np.allclose(h.vector, h.complex_gain * math.sqrt(cfg.n_elements) * nf_steering(cfg, p))
    near = los_channel(cfg, PolarPoint(0.0, 3.5), include_path_loss=True)
    far = los_channel(cfg, PolarPoint(0.0, 350.0), include_path_loss=True)
    assert np.linalg.norm(near.vector) / np.linalg.norm(far.vector) == pytest.approx(100)
    doubled = los_channel(cfg, PolarPoint(0.0, 7.0), include_path_loss=True)
    assert np.linalg.norm(doubled.vector) == pytest.approx(np.linalg.norm(near.vector) / 2)


def test_calibration_identity_and_zero():
    w = np.exp(1j * np.arange(8)) / math.sqrt(8)
    rng = np.random.default_rng(0)
    assert np.allclose(apply_calibration_errors(w, CalibrationError(0, 1, 1), rng), w)
    assert np.allclose(apply_calibration_errors(w, CalibrationError(0, 0, 0), rng), 0)


def test_phase_only_preserves_modulus():
    w = np.exp(1j * np.arange(16)) / 4
    out = apply_calibration_errors(w, CalibrationError(math.pi / 8, 1, 1), np.random.default_rng(1))
    assert np.allclose(np.abs(out), np.abs(w))
    ph = np.angle(out / w)
    assert np.all((ph >= -1e-12) & (ph <= math.pi / 8 + 1e-12))


def test_subarray_blocks():
    err = CalibrationError(math.pi / 8, 0.5, 1, Granularity.SUBARRAY, 64)
    m = err.draw(256, np.random.default_rng(2))
    blocks = m.reshape(4, 64)
    assert np.all(blocks == blocks[:, :1])
    assert len(np.unique(blocks[:, 0])) == 4


def test_calibration_deterministic():
    err = CalibrationError()
    assert np.array_equal(err.draw(32, np.random.default_rng(5)), err.draw(32, np.random.default_rng(5)))


@pytest.mark.parametrize("kw", [{"phase_bound": -0.1}, {"phase_bound": 4.0}, {"amplitude_low": 0.5, "amplitude_high": 0.2}])
def test_calibration_validation(kw):
    with pytest.raises(ValueError):
        CalibrationError(**kw)


def test_profile_matched_filter(cfg):
    p = PolarPoint(0.2, 6.0)
    h = los_channel(cfg, p)
    prof = receive_beam_profile(h, nf_steering(cfg, p)[:, None], 0.0)
    # normalized measurement: |b^H h|^2 / N = 1
    assert prof.power[0] / cfg.n_elements == pytest.approx(1)


def test_profile_orthogonal_dft(cfg, full_dft):
    grid_angle = full_dft.angles[40]
    h = los_channel(cfg, PolarPoint(grid_angle, 1e9))
    power = receive_beam_profile(h, full_dft, 0.0).power
    assert np.argmax(power) == 40
    assert np.sum(power > 1e-6 * power.max()) == 1


def test_profile_noise_mean(small_cfg):
    book = dft_codebook(small_cfg)
    h = los_channel(small_cfg, PolarPoint(0.1, 4.0))
    clean = receive_beam_profile(h, book, 0.0).power
    rng = np.random.default_rng(11)
    sigma2 = 0.5
    draws = np.array([receive_beam_profile(h, book, sigma2, rng).power for _ in range(10_000)])
    se = draws.std(axis=0, ddof=1) / math.sqrt(len(draws))
    assert np.all(np.abs(draws.mean(axis=0) - (clean + sigma2)) <= 3 * se + 1e-12)


def test_profile_seeded(cfg, full_dft):
    h = los_channel(cfg, PolarPoint(0.1, 4.0))
    a = receive_beam_profile(h, full_dft, 0.1, np.random.default_rng(3))
    b = receive_beam_profile(h, full_dft, 0.1, np.random.default_rng(3))
    assert np.array_equal(a.power, b.power)


def test_profile_per_codeword_weights(small_cfg):
    book = dft_codebook(small_cfg)
    h = los_channel(small_cfg, PolarPoint(0.1, 4.0))
    w = np.ones((small_cfg.n_elements, len(book)))
    w[:, 3] = 0
    prof = receive_beam_profile(h, book, 0.0, weights=w)
    assert prof.power[3] == 0
    assert np.allclose(np.delete(prof.power, 3), np.delete(receive_beam_profile(h, book, 0.0).power, 3))


def test_profile_errors(cfg, small_cfg, full_dft):
    h = los_channel(small_cfg, PolarPoint(0.0, 4.0))
    with pytest.raises(ValueError):
        receive_beam_profile(h, full_dft, 0.0)
    h = los_channel(cfg, PolarPoint(0.0, 4.0))
    with pytest.raises(ValueError):
        receive_beam_profile(h, full_dft, 0.1)
