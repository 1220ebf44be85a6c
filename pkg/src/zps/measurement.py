"""Simulated hyperfine readout and Raman spectroscopy scans.

A scan applies a fixed-duration Raman pulse at each detuning, asks a binary
"did the atom reach F=4" readout, and records either the analytic transfer
probability or a seeded binomial draw per point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .atom import AtomParams, F3_M_VALUES
from .dynamics import PopulationState, coherent_transfer_probability

ANALYTIC = "analytic"


@dataclass(frozen=True)
class ReadoutModel:
    """Binary hyperfine readout: symmetric misclassification plus a background floor."""

    accuracy: float = 0.98
    background_p4: float = 0.006

    def __post_init__(self):
        if not 0.5 < self.accuracy <= 1.0:
            raise ValueError("accuracy must be in (0.5, 1]")
        if not 0.0 <= self.background_p4 < 1.0:
            raise ValueError("background_p4 must be in [0, 1)")

    def fold(self, p):
        """Probability the readout reports F=4 given true transfer probability p."""
        return self.accuracy * p + (1.0 - self.accuracy) * (1.0 - p)

    def unfold(self, reported):
        """Invert fold: the true transfer probability behind a reported one.

        Reported values outside the reachable interval (from shot noise) map
        outside [0, 1]; callers decide whether to clip.
        """
        return (np.asarray(reported, dtype=float) - (1.0 - self.accuracy)) / (
            2.0 * self.accuracy - 1.0
        )


@dataclass(frozen=True)
class ScanConfig:
    """Detuning grid and statistics for a Raman spectroscopy scan."""

    detunings_hz: tuple
    pulse_duration: float = 25e-6
    shots_per_point: int | str = 100  # or "analytic"
    rng_seed: int = 0
    coherent: bool = False  # use the time-dependent Rabi formula instead of the envelope

    def __post_init__(self):
        det = tuple(float(d) for d in self.detunings_hz)
        if not det:
            raise ValueError("detunings_hz must be nonempty")
        object.__setattr__(self, "detunings_hz", det)
        if self.pulse_duration <= 0:
            raise ValueError("pulse_duration must be > 0")
        if self.shots_per_point != ANALYTIC and int(self.shots_per_point) < 1:
            raise ValueError("shots_per_point must be >= 1 or 'analytic'")

    @classmethod
    def linspace(cls, start_hz=-3.3e6, stop_hz=3.3e6, points=161, **kwargs):
        det = np.linspace(start_hz, stop_hz, points)
        return cls(detunings_hz=tuple(det), **kwargs)

    @property
    def analytic(self) -> bool:
        return self.shots_per_point == ANALYTIC


@dataclass(frozen=True)
class RamanScan:
    """Simulated Raman spectrum: transfer probability vs. Raman detuning."""

    delta_r_hz: np.ndarray
    p4: np.ndarray
    shots: np.ndarray  # 0 in analytic mode
    successes: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, dtype in (
            ("delta_r_hz", float),
            ("p4", float),
            ("shots", int),
            ("successes", int),
        ):
            arr = np.asarray(getattr(self, name), dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.delta_r_hz.size
        if any(getattr(self, k).size != n for k in ("p4", "shots", "successes")):
            raise ValueError("scan columns must have equal length")
        sampled = self.shots > 0
        if np.any(self.successes[sampled] > self.shots[sampled]):
            raise ValueError("successes cannot exceed shots")

    def __len__(self):
        return self.delta_r_hz.size


def true_transfer_probability(
    state: PopulationState,
    delta_R: float,
    params: AtomParams,
    readout: ReadoutModel,
    pulse_duration: float = 25e-6,
    coherent: bool = False,
) -> float:
    """Probability the readout reports F=4 after a Raman pulse at detuning delta_R.

    Sums the per-transition transfer weighted by the F=3 populations, adds the
    background floor, and folds the result through the readout accuracy.
    """
    p = readout.background_p4
    for m in F3_M_VALUES:
        w = state.p3(m)
        if w == 0.0:
            continue
        p += w * coherent_transfer_probability(
            m, delta_R, pulse_duration, params, decohered=not coherent
        )
    return readout.fold(p)


def acquire_scan(
    state: PopulationState,
    config: ScanConfig,
    params: AtomParams,
    readout: ReadoutModel,
) -> RamanScan:
    """Run the scan over config.detunings_hz.

    Analytic mode records the exact probability; sampling mode draws
    shots_per_point Bernoulli trials per detuning.  Each point uses an RNG
    stream derived from (rng_seed, point index), so results are independent
    of evaluation order and reproducible for a fixed seed.
    """
    det = np.asarray(config.detunings_hz)
    probs = np.array(
        [
            true_transfer_probability(
                state,
                2.0 * math.pi * d,
                params,
                readout,
                pulse_duration=config.pulse_duration,
                coherent=config.coherent,
            )
            for d in det
        ]
    )
    metadata = {
        "omega_b_hz": params.omega_B / (2.0 * math.pi),
        "omega_0_hz": params.Omega_0 / (2.0 * math.pi),
        "pulse_duration_s": config.pulse_duration,
        "shots_per_point": config.shots_per_point,
        "rng_seed": config.rng_seed,
        "readout_accuracy": readout.accuracy,
        "background_p4": readout.background_p4,
    }
    if config.analytic:
        zeros = np.zeros(det.size, dtype=int)
        return RamanScan(det, probs, zeros, zeros, metadata)
    shots = int(config.shots_per_point)
    successes = np.array(
        [
            np.random.default_rng((config.rng_seed, i)).binomial(shots, p)
            for i, p in enumerate(probs)
        ]
    )
    p4 = successes / shots
    return RamanScan(det, p4, np.full(det.size, shots), successes, metadata)
