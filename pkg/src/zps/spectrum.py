"""Tailored noise spectra and their conversion to incoherent Raman rates.

A PowerSpectrum holds RF beat-note power (dBm in a reference bandwidth)
versus offset from the hyperfine splitting.  The noise chain shapes a flat
source with ideal asymptotic high/low-pass slopes plus a rectangular notch;
the notch leaves one Zeeman transition undriven.  Spectral power converts to
a per-transition decay rate either through the flat-spectrum closed form or
by integrating the sinc-squared time-energy kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .atom import AtomParams, rabi_weight

DEFAULT_REF_BANDWIDTH = 3000.0


def dbm_to_linear(dbm):
    """dBm to linear power (mW).  -inf maps to 0."""
    return np.power(10.0, np.asarray(dbm, dtype=float) / 10.0)


@dataclass(frozen=True)
class PowerSpectrum:
    """RF power vs. beat-note offset, quoted in dBm per reference bandwidth."""

    offsets: np.ndarray  # Hz, signed offsets from the hyperfine splitting
    power_dbm: np.ndarray  # dBm in ref_bandwidth; -inf means zero power
    ref_bandwidth: float = DEFAULT_REF_BANDWIDTH

    def __post_init__(self):
        offsets = np.asarray(self.offsets, dtype=float)
        power = np.asarray(self.power_dbm, dtype=float)
        if offsets.ndim != 1 or offsets.shape != power.shape:
            raise ValueError("offsets and power_dbm must be 1-d arrays of equal length")
        if offsets.size < 2:
            raise ValueError("spectrum needs at least two grid points")
        if not np.all(np.diff(offsets) > 0):
            raise ValueError("offsets must be strictly increasing")
        if self.ref_bandwidth <= 0:
            raise ValueError("ref_bandwidth must be > 0")
        if np.any(np.isnan(power)) or np.any(power == np.inf):
            raise ValueError("power_dbm must be finite or -inf")
        offsets.setflags(write=False)
        power.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "power_dbm", power)

    @property
    def grid_step(self) -> float:
        return float(self.offsets[1] - self.offsets[0])

    @classmethod
    def flat(cls, level_dbm, span_hz, grid_step_hz, ref_bandwidth=DEFAULT_REF_BANDWIDTH):
        """Flat spectrum at level_dbm over [-span_hz, +span_hz]."""
        n = int(round(span_hz / grid_step_hz))
        offsets = np.arange(-n, n + 1) * grid_step_hz
        return cls(offsets, np.full(offsets.size, float(level_dbm)), ref_bandwidth)


@dataclass(frozen=True)
class NoiseChainConfig:
    """Parameters of the RF noise shaping chain (filters plus notch)."""

    source_level_dbm: float = -63.0
    source_band_hz: float = 10e6
    highpass_cutoff_hz: float = 500e3
    lowpass_cutoff_hz: float = 5e6
    rolloff_db_per_octave: float = 60.0
    notch_center_hz: float = 0.0
    notch_width_hz: float = 400e3
    notch_depth_db: float = 40.0
    grid_step_hz: float = 10e3
    carrier_shift_hz: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.highpass_cutoff_hz < self.lowpass_cutoff_hz <= self.source_band_hz):
            raise ValueError("require 0 < highpass < lowpass <= source_band")
        if self.rolloff_db_per_octave <= 0:
            raise ValueError("rolloff_db_per_octave must be > 0")
        if self.notch_width_hz <= 0:
            raise ValueError("notch_width_hz must be > 0")
        if self.notch_depth_db < 0:
            raise ValueError("notch_depth_db must be >= 0")
        if self.grid_step_hz <= 0:
            raise ValueError("grid_step_hz must be > 0")


@dataclass(frozen=True)
class RateCalibration:
    """Calibration tying spectral power to Rabi frequency.

    A monochromatic beat spike of integrated power coherent_power_dbm drives
    coherent flops at coherent_rabi; this fixes the proportionality between
    beat-note power and squared Rabi frequency.
    """

    coherent_power_dbm: float = -36.0
    coherent_rabi: float = 2.0 * math.pi * 120e3
    ref_bandwidth: float = DEFAULT_REF_BANDWIDTH

    def __post_init__(self):
        if self.coherent_rabi <= 0:
            raise ValueError("coherent_rabi must be > 0")
        if self.ref_bandwidth <= 0:
            raise ValueError("ref_bandwidth must be > 0")


def synthesize_noise_spectrum(config: NoiseChainConfig) -> PowerSpectrum:
    """Shape a flat source through the filter chain and notch.

    The output grid is symmetric over [-source_band, +source_band] around
    carrier_shift_hz, which retunes the local oscillator and translates the
    whole shaped spectrum relative to the atomic transitions.  High- and
    low-pass filters apply ideal log-linear slopes (rolloff dB per octave past
    each cutoff, evaluated on |offset - carrier_shift|); the notch subtracts
    notch_depth_db uniformly over its width, placed only at the signed
    notch_center_hz in final (atom-frame) coordinates.
    """
    if config.grid_step_hz > config.notch_width_hz:
        raise ValueError("grid_step_hz exceeds notch_width_hz; notch would be unresolved")
    n = int(round(config.source_band_hz / config.grid_step_hz))
    offsets = config.carrier_shift_hz + np.arange(-n, n + 1) * config.grid_step_hz
    absf = np.abs(offsets - config.carrier_shift_hz)
    power = np.full(offsets.size, config.source_level_dbm)

    slope = config.rolloff_db_per_octave
    with np.errstate(divide="ignore"):
        below = absf < config.highpass_cutoff_hz
        power[below] -= slope * np.log2(config.highpass_cutoff_hz / absf[below])
        above = absf > config.lowpass_cutoff_hz
        power[above] -= slope * np.log2(absf[above] / config.lowpass_cutoff_hz)

    half = config.notch_width_hz / 2.0
    in_notch = np.abs(offsets - config.notch_center_hz) <= half
    power[in_notch] -= config.notch_depth_db

    return PowerSpectrum(offsets, power, DEFAULT_REF_BANDWIDTH)


def power_at(spectrum: PowerSpectrum, offset_hz: float) -> float:
    """Spectrum value at offset_hz, linearly interpolated in dB.

    Exact at grid points; querying outside the grid is an error.  A -inf
    neighbor makes the interpolated value -inf except exactly at the finite
    grid point.
    """
    offsets = spectrum.offsets
    if offset_hz < offsets[0] or offset_hz > offsets[-1]:
        raise ValueError(
            f"offset {offset_hz} Hz outside spectrum range "
            f"[{offsets[0]}, {offsets[-1]}] Hz"
        )
    i = int(np.searchsorted(offsets, offset_hz))
    if i < offsets.size and offsets[i] == offset_hz:
        return float(spectrum.power_dbm[i])
    lo, hi = spectrum.power_dbm[i - 1], spectrum.power_dbm[i]
    if np.isneginf(lo) or np.isneginf(hi):
        return float("-inf")
    w = (offset_hz - offsets[i - 1]) / (offsets[i] - offsets[i - 1])
    return float(lo + w * (hi - lo))


def incoherent_rate(
    spectrum: PowerSpectrum, cal: RateCalibration, m: int, params: AtomParams
) -> float:
    """Incoherent transfer rate (s^-1) of the |3,m> <-> |4,m| pair.

    Flat-spectrum closed form: gamma = (1/4)(1 - m^2/16)(Omega_0^2 / B) * P_i/P_c,
    with P_i read at the transition's offset omega_B*m/2pi.  The same rate
    applies in both directions.
    """
    offset_hz = params.omega_B * m / (2.0 * math.pi)
    p_i_dbm = power_at(spectrum, offset_hz)
    ratio = 10.0 ** ((p_i_dbm - cal.coherent_power_dbm) / 10.0)
    return 0.25 * rabi_weight(m) * (cal.coherent_rabi**2 / cal.ref_bandwidth) * ratio


def sinc_kernel(x):
    """Time-energy kernel D(x) = sin^2(x) / (pi x^2); unit integral over the line."""
    return np.sinc(np.asarray(x, dtype=float) / math.pi) ** 2 / math.pi


def rate_via_sinc_integral(
    spectrum: PowerSpectrum,
    cal: RateCalibration,
    m: int,
    params: AtomParams,
    t: float,
) -> float:
    """Rate from the full spectral integral against the sinc-squared kernel.

    gamma = (pi/4) * (Omega_c^2 / P_c) * t * integral S_i(w) D((w - w_A) t / 2) dw
    with S_i the linear power density (P_i / 2 pi B) and w_A = omega_B * m.
    Converges to incoherent_rate for spectra flat over a bandwidth >> 1/t.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    if spectrum.grid_step * t > 0.25:
        raise ValueError(
            f"grid step {spectrum.grid_step} Hz does not resolve 1/t = {1.0 / t} Hz"
        )
    rabi_weight(m)  # validates m
    omega = 2.0 * math.pi * spectrum.offsets
    omega_a = params.omega_B * m
    s_lin = dbm_to_linear(spectrum.power_dbm) / (2.0 * math.pi * spectrum.ref_bandwidth)
    kernel = sinc_kernel((omega - omega_a) * t / 2.0)
    integral = np.trapezoid(s_lin * kernel, omega)
    omega_c_sq = rabi_weight(m) * cal.coherent_rabi**2
    p_c_lin = 10.0 ** (cal.coherent_power_dbm / 10.0)
    return float(math.pi / 4.0 * (omega_c_sq / p_c_lin) * t * integral)
