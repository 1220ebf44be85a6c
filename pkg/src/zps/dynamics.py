"""Population dynamics on the 16-level ground manifold.

Covers coherent per-transition transfer probabilities, the exact pairwise
rate-equation solution for incoherent driving, the repump map back to F=3,
the iterated pump/repump protocol that accumulates population in the dark
state, and a brute-force random-phase comb oracle for the incoherent rate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .atom import (
    AtomParams,
    F3_M_VALUES,
    GROUND_STATES,
    N_STATES,
    ZeemanState,
    effective_detuning,
    effective_rabi,
    f3_index,
    f4_index,
    rabi_weight,
)
from .spectrum import PowerSpectrum, RateCalibration, dbm_to_linear, incoherent_rate

TRACE_TOL = 1e-9

# Repump hardware timing: 7 lattice + 7 side pulses of 300 ns each.
DEFAULT_REPUMP_DURATION = 14 * 300e-9


class NonPerturbativeWarning(UserWarning):
    """Comb oracle left the small-transfer regime; the rate estimate is biased."""


@dataclass(frozen=True)
class PopulationState:
    """Immutable 16-vector of sublevel populations in the canonical ordering."""

    populations: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.populations, dtype=float)
        if p.shape != (N_STATES,):
            raise ValueError(f"populations must have shape ({N_STATES},)")
        if np.any(p < -TRACE_TOL) or np.any(p > 1 + TRACE_TOL):
            raise ValueError("populations must lie in [0, 1]")
        if abs(p.sum() - 1.0) > TRACE_TOL:
            raise ValueError(f"populations must sum to 1, got {p.sum()!r}")
        p.setflags(write=False)
        object.__setattr__(self, "populations", p)

    @classmethod
    def uniform_f3(cls) -> "PopulationState":
        p = np.zeros(N_STATES)
        for m in F3_M_VALUES:
            p[f3_index(m)] = 1.0 / 7.0
        return cls(p)

    @classmethod
    def pure(cls, state: ZeemanState) -> "PopulationState":
        p = np.zeros(N_STATES)
        p[GROUND_STATES.index(state)] = 1.0
        return cls(p)

    @classmethod
    def from_dict(cls, d) -> "PopulationState":
        p = np.zeros(N_STATES)
        for i, s in enumerate(GROUND_STATES):
            p[i] = d.get(s, d.get(f"{s.manifold},{s.m}", 0.0))
        return cls(p)

    def p(self, state: ZeemanState) -> float:
        return float(self.populations[GROUND_STATES.index(state)])

    def p3(self, m: int) -> float:
        return float(self.populations[f3_index(m)])

    def p4(self, m: int) -> float:
        return float(self.populations[f4_index(m)])

    def f3_total(self) -> float:
        return float(self.populations[:7].sum())

    def f4_total(self) -> float:
        return float(self.populations[7:].sum())

    def as_dict(self) -> dict:
        return {f"{s.manifold},{s.m}": float(self.populations[i]) for i, s in enumerate(GROUND_STATES)}


@dataclass(frozen=True)
class RepumpModel:
    """Stochastic map returning F=4 population to the F=3 manifold."""

    mode: str = "ideal_uniform"
    completeness: float = 1.0
    distribution: tuple = field(default_factory=lambda: (1.0 / 7.0,) * 7)

    def __post_init__(self):
        if self.mode not in ("ideal_uniform", "partial"):
            raise ValueError(f"unknown repump mode {self.mode!r}")
        if not 0.0 <= self.completeness <= 1.0:
            raise ValueError("completeness must be in [0, 1]")
        if self.mode == "ideal_uniform" and self.completeness != 1.0:
            raise ValueError("ideal_uniform requires completeness = 1")
        dist = tuple(float(x) for x in self.distribution)
        if len(dist) != 7 or any(x < 0 for x in dist) or abs(sum(dist) - 1.0) > 1e-12:
            raise ValueError("distribution must be 7 nonnegative entries summing to 1")
        object.__setattr__(self, "distribution", dist)


@dataclass(frozen=True)
class PumpProtocol:
    """One pump cycle: incoherent Raman drive, then repump, iterated."""

    target_m: int = 0
    raman_duration: float = 10e-6
    iterations: int = 40
    repump: RepumpModel = field(default_factory=RepumpModel)
    leak_rate: float = 0.0
    repump_duration: float = DEFAULT_REPUMP_DURATION

    def __post_init__(self):
        if abs(self.target_m) > 3:
            raise ValueError("|target_m| <= 3 required")
        if self.raman_duration <= 0:
            raise ValueError("raman_duration must be > 0")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.leak_rate < 0:
            raise ValueError("leak_rate must be >= 0")
        if self.repump_duration < 0:
            raise ValueError("repump_duration must be >= 0")


def coherent_transfer_probability(
    m: int,
    delta_R: float,
    duration: float,
    params: AtomParams,
    decohered: bool = True,
) -> float:
    """Transfer probability of a coherent Raman pulse on the |3,m> transition.

    With decohered=True the Rabi oscillation is averaged out, leaving the
    Lorentzian envelope (1/2) Omega_E^2 / (Omega_E^2 + delta_E^2); otherwise
    the full two-level formula at the given duration.
    """
    if duration <= 0:
        raise ValueError("duration must be > 0")
    omega_e = effective_rabi(m, params)
    delta_e = effective_detuning(delta_R, m, params)
    denom = omega_e**2 + delta_e**2
    if denom == 0.0:
        return 0.0
    contrast = omega_e**2 / denom
    if decohered:
        return 0.5 * contrast
    return contrast * math.sin(math.sqrt(denom) * duration / 2.0) ** 2


def incoherent_pair_evolve(p_g: float, p_e: float, gamma: float, t: float):
    """Exact two-level rate-equation solution with equal rates both ways.

    Each population relaxes toward the pair mean with time constant 1/(2 gamma);
    the pair sum is conserved exactly.
    """
    if p_g < 0 or p_e < 0:
        raise ValueError("populations must be >= 0")
    if gamma < 0 or t < 0:
        raise ValueError("gamma and t must be >= 0")
    mean = 0.5 * (p_g + p_e)
    half_diff = 0.5 * (p_g - p_e) * math.exp(-2.0 * gamma * t)
    return mean + half_diff, mean - half_diff


def pair_rates(
    spectrum: PowerSpectrum, cal: RateCalibration, params: AtomParams
) -> dict[int, float]:
    """Incoherent rate for each of the 7 transition pairs, keyed by m."""
    return {m: incoherent_rate(spectrum, cal, m, params) for m in F3_M_VALUES}


def incoherent_step(
    state: PopulationState,
    spectrum: PowerSpectrum,
    cal: RateCalibration,
    params: AtomParams,
    t: float,
) -> PopulationState:
    """Evolve all 7 pairs under their incoherent rates for time t.

    The F=4 edge states (m = +-4) have no partner and are untouched.
    """
    p = state.populations.copy()
    for m in F3_M_VALUES:
        gamma = incoherent_rate(spectrum, cal, m, params)
        p[f3_index(m)], p[f4_index(m)] = incoherent_pair_evolve(
            p[f3_index(m)], p[f4_index(m)], gamma, t
        )
    return PopulationState(p)


def apply_repump(state: PopulationState, model: RepumpModel) -> PopulationState:
    """Move a fraction `completeness` of all F=4 population onto F=3.

    The moved population lands on the F=3 sublevels per model.distribution;
    the remainder stays where it was.
    """
    p = state.populations.copy()
    moved = model.completeness * p[7:].sum()
    p[7:] *= 1.0 - model.completeness
    p[:7] += moved * np.asarray(model.distribution)
    return PopulationState(p)


def _apply_leak(state: PopulationState, leak_rate: float, wall_time: float) -> PopulationState:
    # Phenomenological depolarization: the F=3 sublevels relax toward the
    # uniform distribution of the current F=3 total at rate leak_rate.
    if leak_rate == 0.0 or wall_time == 0.0:
        return state
    p = state.populations.copy()
    mean = p[:7].sum() / 7.0
    decay = math.exp(-leak_rate * wall_time)
    p[:7] = mean + (p[:7] - mean) * decay
    return PopulationState(p)


def run_pump_protocol(
    initial: PopulationState,
    protocol: PumpProtocol,
    spectrum: PowerSpectrum,
    cal: RateCalibration,
    params: AtomParams,
):
    """Iterate [incoherent drive; repump; leak] and trace the target population.

    Returns (final_state, trace) where trace[i] is p_{3,target} after
    iteration i+1.  The caller is responsible for placing the spectrum's
    notch at the target transition; a mismatched notch is simulated as given.
    """
    state = initial
    wall_time = protocol.raman_duration + protocol.repump_duration
    trace = []
    for _ in range(protocol.iterations):
        state = incoherent_step(state, spectrum, cal, params, protocol.raman_duration)
        state = apply_repump(state, protocol.repump)
        state = _apply_leak(state, protocol.leak_rate, wall_time)
        trace.append(state.p3(protocol.target_m))
    return state, trace


def comb_oracle_rate(
    spectrum: PowerSpectrum,
    cal: RateCalibration,
    m: int,
    params: AtomParams,
    t: float,
    seeds,
) -> float:
    """Brute-force rate estimate from a random-phase comb discretization.

    Each spectrum grid point becomes a classical field with squared Rabi
    frequency alpha * S_i(w_k) * dw (alpha eliminated via the coherent
    calibration) and an independent uniform random phase per seed.  The
    excited-state amplitude equation is integrated numerically with the atom
    held in the ground state, and the seed-averaged |c_e(t)|^2 / t returned.
    Valid only in the perturbative regime; larger transfers are flagged.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    seeds = list(seeds)
    if not seeds:
        raise ValueError("at least one seed required")
    domega = 2.0 * math.pi * spectrum.grid_step
    if domega * t > 2.0 * math.pi:
        raise ValueError("comb spacing does not resolve 1/t; refine the grid")

    p_c_lin = 10.0 ** (cal.coherent_power_dbm / 10.0)
    alpha = cal.coherent_rabi**2 / p_c_lin
    s_lin = dbm_to_linear(spectrum.power_dbm) / (2.0 * math.pi * spectrum.ref_bandwidth)
    # (1 - m^2/16) enters through the calibration: the comb line Rabi
    # frequencies scale with the same transition matrix element as Omega_c.
    omega_sq = rabi_weight(m) * alpha * s_lin * domega
    if not np.any(omega_sq > 0):
        return 0.0
    amp = np.sqrt(omega_sq) / 2.0
    delta = 2.0 * math.pi * spectrum.offsets - params.omega_B * m

    # Trapezoid quadrature of exp(-i delta_k t') per comb line; the step
    # resolves the fastest detuning present.
    max_rate = max(np.max(np.abs(delta)), 1.0 / t)
    n_steps = max(64, int(math.ceil(max_rate * t / 0.3)))
    times = np.linspace(0.0, t, n_steps + 1)
    phase_matrix = np.exp(-1j * np.outer(times, delta))
    line_integrals = np.trapezoid(phase_matrix, times, axis=0)

    rng_phases = np.stack(
        [np.random.default_rng(s).uniform(0.0, 2.0 * math.pi, delta.size) for s in seeds]
    )
    c_e = -1j * (np.exp(-1j * rng_phases) * amp * line_integrals).sum(axis=1)
    transfer = np.abs(c_e) ** 2
    if transfer.mean() > 0.1:
        warnings.warn(
            f"mean transfer {transfer.mean():.3f} exceeds perturbative bound 0.1",
            NonPerturbativeWarning,
        )
    return float(transfer.mean() / t)
