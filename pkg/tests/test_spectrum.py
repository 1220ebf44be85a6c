"""Noise-spectrum synthesis and rate-conversion tests."""

import math
from dataclasses import replace

import numpy as np
import pytest

from zps.atom import AtomParams
from zps.spectrum import (
    NoiseChainConfig,
    PowerSpectrum,
    RateCalibration,
    incoherent_rate,
    power_at,
    rate_via_sinc_integral,
    sinc_kernel,
    synthesize_noise_spectrum,
)

TWO_PI = 2.0 * math.pi
PARAMS = AtomParams(omega_B=TWO_PI * 910e3, Omega_0=TWO_PI * 120e3)
CAL = RateCalibration(coherent_power_dbm=-36.0, coherent_rabi=TWO_PI * 120e3)


def test_synthesis_rolloff_one_octave_below_highpass():
    spec = synthesize_noise_spectrum(NoiseChainConfig(notch_center_hz=2e6))
    assert power_at(spec, 250e3) == pytest.approx(-63.0 - 60.0)
    assert power_at(spec, -250e3) == pytest.approx(-63.0 - 60.0)


def test_synthesis_flat_midband():
    spec = synthesize_noise_spectrum(NoiseChainConfig(notch_center_hz=0.0))
    assert power_at(spec, 2e6) == pytest.approx(-63.0)
    assert power_at(spec, -2e6) == pytest.approx(-63.0)


def test_synthesis_notch_depth():
    config = NoiseChainConfig(notch_center_hz=910e3, notch_depth_db=40.0)
    spec = synthesize_noise_spectrum(config)
    assert power_at(spec, 910e3) == pytest.approx(-63.0 - 40.0)
    # The notch sits only at the signed center, not mirrored.
    assert power_at(spec, -910e3) == pytest.approx(-63.0)


def test_synthesis_lowpass_octave():
    spec = synthesize_noise_spectrum(
        NoiseChainConfig(source_band_hz=20e6, notch_center_hz=0.0)
    )
    assert power_at(spec, 10e6) == pytest.approx(-63.0 - 60.0)


def test_synthesis_unresolved_notch_rejected():
    with pytest.raises(ValueError):
        synthesize_noise_spectrum(NoiseChainConfig(grid_step_hz=500e3, notch_width_hz=400e3))


def test_synthesis_deterministic():
    config = NoiseChainConfig(notch_center_hz=910e3)
    a = synthesize_noise_spectrum(config)
    b = synthesize_noise_spectrum(config)
    assert np.array_equal(a.offsets, b.offsets)
    assert np.array_equal(a.power_dbm, b.power_dbm)


def test_carrier_shift_translates_spectrum():
    base = synthesize_noise_spectrum(NoiseChainConfig(notch_depth_db=0.0))
    shifted = synthesize_noise_spectrum(
        NoiseChainConfig(notch_depth_db=0.0, carrier_shift_hz=910e3)
    )
    assert np.allclose(shifted.offsets, base.offsets + 910e3)
    assert np.array_equal(shifted.power_dbm, base.power_dbm)


def test_power_at_grid_point_and_midpoint():
    spec = PowerSpectrum(np.array([0.0, 1000.0]), np.array([-60.0, -66.0]))
    assert power_at(spec, 0.0) == -60.0
    assert power_at(spec, 1000.0) == -66.0
    assert power_at(spec, 500.0) == pytest.approx(-63.0)


def test_power_at_out_of_range():
    spec = PowerSpectrum(np.array([0.0, 1000.0]), np.array([-60.0, -66.0]))
    with pytest.raises(ValueError):
        power_at(spec, -1.0)
    with pytest.raises(ValueError):
        power_at(spec, 1001.0)


def test_power_at_neginf_neighbor():
    spec = PowerSpectrum(np.array([0.0, 1000.0, 2000.0]), np.array([-60.0, -math.inf, -60.0]))
    assert power_at(spec, 500.0) == -math.inf
    assert power_at(spec, 1000.0) == -math.inf
    assert power_at(spec, 0.0) == -60.0


def test_power_spectrum_validation():
    with pytest.raises(ValueError):
        PowerSpectrum(np.array([0.0, 0.0]), np.array([-60.0, -60.0]))
    with pytest.raises(ValueError):
        PowerSpectrum(np.array([0.0]), np.array([-60.0]))
    with pytest.raises(ValueError):
        PowerSpectrum(np.array([0.0, 1.0]), np.array([-60.0, math.nan]))
    with pytest.raises(ValueError):
        PowerSpectrum(np.array([0.0, 1.0]), np.array([-60.0, math.inf]))


def test_incoherent_rate_paper_point():
    spec = PowerSpectrum.flat(-63.0, 8e6, 10e3)
    gamma = incoherent_rate(spec, CAL, 0, PARAMS)
    assert gamma == pytest.approx(9.45e4, rel=2e-3)


def test_incoherent_rate_notched_to_zero():
    spec = PowerSpectrum(np.array([-1e6, 0.0, 1e6]), np.array([-63.0, -math.inf, -63.0]))
    assert incoherent_rate(spec, CAL, 0, PARAMS) == 0.0


def test_incoherent_rate_m2_scaling():
    spec = PowerSpectrum.flat(-63.0, 8e6, 10e3)
    g0 = incoherent_rate(spec, CAL, 0, PARAMS)
    g2 = incoherent_rate(spec, CAL, 2, PARAMS)
    assert g2 == pytest.approx(0.75 * g0)
    assert g2 == pytest.approx(7.09e4, rel=2e-3)


def test_rate_linearity_in_db():
    lo = PowerSpectrum.flat(-63.0, 8e6, 10e3)
    hi = PowerSpectrum.flat(-53.0, 8e6, 10e3)
    for m in range(-3, 4):
        assert incoherent_rate(hi, CAL, m, PARAMS) == pytest.approx(
            10.0 * incoherent_rate(lo, CAL, m, PARAMS)
        )


def test_rate_pm_symmetry():
    spec = PowerSpectrum.flat(-63.0, 8e6, 10e3)
    for m in range(4):
        assert incoherent_rate(spec, CAL, m, PARAMS) == pytest.approx(
            incoherent_rate(spec, CAL, -m, PARAMS)
        )


def test_sinc_kernel_normalization():
    x = np.linspace(-2000.0, 2000.0, 2_000_001)
    integral = np.trapezoid(sinc_kernel(x), x)
    assert abs(integral - 1.0) < 1e-3


def test_sinc_rate_matches_closed_form():
    spec = PowerSpectrum.flat(-63.0, 8e6, 10e3)
    closed = incoherent_rate(spec, CAL, 0, PARAMS)
    for t in (5e-6, 10e-6, 20e-6):
        via_sinc = rate_via_sinc_integral(spec, CAL, 0, PARAMS, t)
        assert via_sinc == pytest.approx(closed, rel=0.01)


def test_sinc_rate_zero_spectrum():
    spec = PowerSpectrum(
        np.arange(-100, 101) * 10e3, np.full(201, -math.inf)
    )
    assert rate_via_sinc_integral(spec, CAL, 0, PARAMS, 10e-6) == 0.0


def test_sinc_rate_halved_power():
    spec = PowerSpectrum.flat(-63.0, 8e6, 10e3)
    half = PowerSpectrum.flat(-63.0 - 10.0 * math.log10(2.0), 8e6, 10e3)
    assert rate_via_sinc_integral(half, CAL, 0, PARAMS, 10e-6) == pytest.approx(
        0.5 * rate_via_sinc_integral(spec, CAL, 0, PARAMS, 10e-6)
    )


def test_sinc_rate_underresolved_grid_rejected():
    spec = PowerSpectrum.flat(-63.0, 8e6, 100e3)
    with pytest.raises(ValueError):
        rate_via_sinc_integral(spec, CAL, 0, PARAMS, 10e-5)


def test_noise_chain_validation():
    with pytest.raises(ValueError):
        NoiseChainConfig(highpass_cutoff_hz=6e6)
    with pytest.raises(ValueError):
        NoiseChainConfig(rolloff_db_per_octave=0.0)
    with pytest.raises(ValueError):
        NoiseChainConfig(notch_depth_db=-1.0)
    with pytest.raises(ValueError):
        replace(CAL, coherent_rabi=0.0)
