"""Zeeman-state optical pumping simulator.

Synthesizes tailored Raman noise spectra, converts spectral power into
incoherent transition rates, evolves the 16-level Cesium ground manifold
under iterated pump/repump protocols, simulates Raman spectroscopy scans,
and recovers sublevel populations by Lorentzian-sum fitting.
"""

from .atom import (
    AtomParams,
    GROUND_STATES,
    ZeemanState,
    effective_detuning,
    effective_rabi,
    zeeman_shift,
)
from .dynamics import (
    PopulationState,
    PumpProtocol,
    RepumpModel,
    apply_repump,
    coherent_transfer_probability,
    comb_oracle_rate,
    incoherent_pair_evolve,
    incoherent_step,
    run_pump_protocol,
)
from .fit import (
    FitModel,
    FitResult,
    default_initial_guess,
    fit_scan,
    fit_scan_multistart,
    initial_guess_candidates,
    model_p4,
)
from .measurement import RamanScan, ReadoutModel, ScanConfig, acquire_scan, true_transfer_probability
from .spectrum import (
    NoiseChainConfig,
    PowerSpectrum,
    RateCalibration,
    incoherent_rate,
    power_at,
    rate_via_sinc_integral,
    synthesize_noise_spectrum,
)

__version__ = "0.1.0"
