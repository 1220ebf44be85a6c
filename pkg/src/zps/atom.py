"""Cesium ground-manifold level structure and per-transition Raman coupling laws.

The 6S_1/2 ground state splits into hyperfine manifolds F=3 (7 sublevels) and
F=4 (9 sublevels).  A pair of optical fields drives |3,m> <-> |4,m| Raman
transitions; an axial bias field splits the transitions apart linearly in m.
All frequencies in this package are angular (rad/s) unless a name carries an
explicit ``_hz`` suffix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi

# Differential Zeeman shift of the |3,m> <-> |4,m> transitions: (g4 - g3) mu_B
# with g4 = 1/4, g3 = -1/4 gives 700 kHz per Gauss per unit m.
OMEGA_B_PER_GAUSS = TWO_PI * 700e3

DEFAULT_HYPERFINE_SPLITTING = TWO_PI * 9.2e9

F3_M_VALUES = tuple(range(-3, 4))
F4_M_VALUES = tuple(range(-4, 5))


@dataclass(frozen=True, order=True)
class ZeemanState:
    """A ground-state sublevel |F, m>."""

    manifold: int
    m: int

    def __post_init__(self):
        if self.manifold not in (3, 4):
            raise ValueError(f"manifold must be 3 or 4, got {self.manifold}")
        if abs(self.m) > self.manifold:
            raise ValueError(f"|m| <= F required, got F={self.manifold}, m={self.m}")

    def __str__(self):
        return f"|{self.manifold},{self.m:+d}>"


# Canonical ordering of the 16-level manifold: F=3 sublevels by increasing m,
# then F=4 sublevels by increasing m.  Population vectors index into this.
GROUND_STATES = tuple(
    [ZeemanState(3, m) for m in F3_M_VALUES] + [ZeemanState(4, m) for m in F4_M_VALUES]
)

N_STATES = len(GROUND_STATES)


def f3_index(m: int) -> int:
    """Index of |3,m> in the canonical ordering."""
    if abs(m) > 3:
        raise ValueError(f"|m| <= 3 required for F=3, got m={m}")
    return m + 3


def f4_index(m: int) -> int:
    """Index of |4,m> in the canonical ordering."""
    if abs(m) > 4:
        raise ValueError(f"|m| <= 4 required for F=4, got m={m}")
    return 7 + m + 4


@dataclass(frozen=True)
class AtomParams:
    """Physical constants for the Raman-coupled ground manifold.

    omega_B is the Zeeman splitting per unit m, Omega_0 the bare effective
    Rabi frequency of the m=0 transition.  axial_field (Gauss) is kept for
    provenance when omega_B was derived from it.
    """

    omega_B: float
    Omega_0: float
    hyperfine_splitting: float = DEFAULT_HYPERFINE_SPLITTING
    axial_field: float | None = None

    def __post_init__(self):
        if self.omega_B < 0:
            raise ValueError("omega_B must be >= 0")
        if self.Omega_0 < 0:
            raise ValueError("Omega_0 must be >= 0")
        if self.hyperfine_splitting < 0:
            raise ValueError("hyperfine_splitting must be >= 0")

    @classmethod
    def from_axial_field(
        cls,
        axial_field: float,
        Omega_0: float,
        hyperfine_splitting: float = DEFAULT_HYPERFINE_SPLITTING,
    ) -> "AtomParams":
        """Build params from a bias field in Gauss (700 kHz/G per unit m)."""
        return cls(
            omega_B=OMEGA_B_PER_GAUSS * axial_field,
            Omega_0=Omega_0,
            hyperfine_splitting=hyperfine_splitting,
            axial_field=axial_field,
        )


def _check_transition_m(m: int):
    # Only F=3 <-> F=4 pairs exist, so transition operations take |m| <= 3.
    if abs(m) > 3:
        raise ValueError(f"no |3,m> <-> |4,m> transition for m={m}; |m| <= 3 required")


def zeeman_shift(m: int, params: AtomParams) -> float:
    """Shift of the |3,m> <-> |4,m| transition in the axial bias field: omega_B * m."""
    _check_transition_m(m)
    return params.omega_B * m


def effective_rabi(m: int, params: AtomParams) -> float:
    """Effective Rabi frequency of the |3,m> <-> |4,m| transition.

    The coupling weakens toward the manifold edges as Omega_0 * (1 - m^2/16)^(1/2).
    """
    _check_transition_m(m)
    return params.Omega_0 * math.sqrt(1.0 - m * m / 16.0)


def effective_detuning(delta_R: float, m: int, params: AtomParams) -> float:
    """Effective two-photon detuning of the |3,m> transition: delta_R - omega_B * m."""
    _check_transition_m(m)
    return delta_R - params.omega_B * m


def rabi_weight(m: int) -> float:
    """Dimensionless coupling weight (1 - m^2/16) shared by rates and lineshapes."""
    _check_transition_m(m)
    return 1.0 - m * m / 16.0
