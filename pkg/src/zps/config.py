"""JSON run configuration: parsing, validation, and unit conversion.

External files quote ordinary frequencies in Hz; conversion to the internal
angular convention happens exactly once, here.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .atom import AtomParams, TWO_PI
from .dynamics import PumpProtocol, RepumpModel
from .measurement import ANALYTIC, ReadoutModel, ScanConfig
from .spectrum import NoiseChainConfig, RateCalibration

SEED_ENV_VAR = "ZPS_SEED"


def builtin_config_path(name: str) -> Path:
    """Path of a shipped config: 'ideal' or 'calibrated'."""
    path = Path(__file__).parent / "configs" / f"{name}.json"
    if not path.exists():
        raise ConfigError(f"no builtin config named {name!r}")
    return path


class ConfigError(ValueError):
    """Invalid or missing configuration input."""


@dataclass(frozen=True)
class RunConfig:
    atom: AtomParams
    noise_chain: NoiseChainConfig
    calibration: RateCalibration
    protocol: PumpProtocol
    scan: ScanConfig
    readout: ReadoutModel
    output_dir: Path
    seed: int | None


def _section(data: dict, name: str, required: bool = False) -> dict:
    sec = data.get(name, {})
    if required and name not in data:
        raise ConfigError(f"missing config section {name!r}")
    if not isinstance(sec, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    return sec


def _known_keys(sec: dict, name: str, allowed: set):
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in section {name!r}: {sorted(unknown)}")


def parse_atom(sec: dict) -> AtomParams:
    _known_keys(sec, "atom", {"hyperfine_splitting_hz", "omega_b_hz", "omega_0_hz", "axial_field_gauss"})
    if "omega_0_hz" not in sec:
        raise ConfigError("atom.omega_0_hz is required")
    has_b = "omega_b_hz" in sec
    has_field = "axial_field_gauss" in sec
    if has_b == has_field:
        raise ConfigError("exactly one of atom.omega_b_hz / atom.axial_field_gauss is required")
    hf = TWO_PI * float(sec.get("hyperfine_splitting_hz", 9.2e9))
    omega_0 = TWO_PI * float(sec["omega_0_hz"])
    try:
        if has_field:
            return AtomParams.from_axial_field(
                float(sec["axial_field_gauss"]), omega_0, hyperfine_splitting=hf
            )
        return AtomParams(
            omega_B=TWO_PI * float(sec["omega_b_hz"]), Omega_0=omega_0, hyperfine_splitting=hf
        )
    except ValueError as exc:
        raise ConfigError(f"invalid atom section: {exc}") from exc


def parse_noise_chain(sec: dict, default_notch_center_hz: float) -> NoiseChainConfig:
    _known_keys(
        sec,
        "noise_chain",
        {
            "source_level_dbm",
            "source_band_hz",
            "highpass_cutoff_hz",
            "lowpass_cutoff_hz",
            "rolloff_db_per_octave",
            "notch_center_hz",
            "notch_width_hz",
            "notch_depth_db",
            "grid_step_hz",
            "carrier_shift_hz",
        },
    )
    kwargs = {k: float(v) for k, v in sec.items()}
    kwargs.setdefault("notch_center_hz", default_notch_center_hz)
    kwargs.setdefault("carrier_shift_hz", default_notch_center_hz)
    try:
        return NoiseChainConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid noise_chain section: {exc}") from exc


def parse_calibration(sec: dict) -> RateCalibration:
    _known_keys(sec, "calibration", {"coherent_power_dbm", "coherent_rabi_hz", "ref_bandwidth_hz"})
    try:
        return RateCalibration(
            coherent_power_dbm=float(sec.get("coherent_power_dbm", -36.0)),
            coherent_rabi=TWO_PI * float(sec.get("coherent_rabi_hz", 120e3)),
            ref_bandwidth=float(sec.get("ref_bandwidth_hz", 3000.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid calibration section: {exc}") from exc


def parse_protocol(sec: dict) -> PumpProtocol:
    _known_keys(
        sec,
        "protocol",
        {"target_m", "raman_duration_s", "iterations", "leak_rate_per_s", "repump_duration_s", "repump"},
    )
    rsec = sec.get("repump", {})
    _known_keys(rsec, "protocol.repump", {"mode", "completeness", "distribution"})
    try:
        rkwargs = {}
        if "mode" in rsec:
            rkwargs["mode"] = rsec["mode"]
        if "completeness" in rsec:
            rkwargs["completeness"] = float(rsec["completeness"])
        if "distribution" in rsec:
            rkwargs["distribution"] = tuple(float(x) for x in rsec["distribution"])
        repump = RepumpModel(**rkwargs)
        kwargs = {"repump": repump}
        if "target_m" in sec:
            kwargs["target_m"] = int(sec["target_m"])
        if "raman_duration_s" in sec:
            kwargs["raman_duration"] = float(sec["raman_duration_s"])
        if "iterations" in sec:
            kwargs["iterations"] = int(sec["iterations"])
        if "leak_rate_per_s" in sec:
            kwargs["leak_rate"] = float(sec["leak_rate_per_s"])
        if "repump_duration_s" in sec:
            kwargs["repump_duration"] = float(sec["repump_duration_s"])
        return PumpProtocol(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid protocol section: {exc}") from exc


def parse_scan(sec: dict, fallback_seed: int | None) -> ScanConfig:
    _known_keys(
        sec,
        "scan",
        {"detunings_hz", "start_hz", "stop_hz", "points", "pulse_duration_s", "shots_per_point", "rng_seed", "coherent"},
    )
    if "detunings_hz" in sec:
        detunings = tuple(float(d) for d in sec["detunings_hz"])
    else:
        start = float(sec.get("start_hz", -3.3e6))
        stop = float(sec.get("stop_hz", 3.3e6))
        points = int(sec.get("points", 161))
        if points < 1:
            raise ConfigError("scan.points must be >= 1")
        detunings = tuple(np.linspace(start, stop, points))
    shots = sec.get("shots_per_point", 100)
    if shots != ANALYTIC:
        shots = int(shots)
    seed = sec.get("rng_seed", fallback_seed)
    if shots != ANALYTIC and seed is None:
        raise ConfigError("a seed is required for sampled scans (scan.rng_seed, top-level seed, or ZPS_SEED)")
    try:
        return ScanConfig(
            detunings_hz=detunings,
            pulse_duration=float(sec.get("pulse_duration_s", 25e-6)),
            shots_per_point=shots,
            rng_seed=int(seed) if seed is not None else 0,
            coherent=bool(sec.get("coherent", False)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid scan section: {exc}") from exc


def parse_readout(sec: dict) -> ReadoutModel:
    _known_keys(sec, "readout", {"accuracy", "background_p4"})
    try:
        return ReadoutModel(
            accuracy=float(sec.get("accuracy", 0.98)),
            background_p4=float(sec.get("background_p4", 0.006)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid readout section: {exc}") from exc


def load_config(path, seed_override: int | None = None, target_m_override: int | None = None) -> RunConfig:
    """Load and validate a run configuration from a JSON file."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("top-level config must be a JSON object")
    known = {"atom", "noise_chain", "calibration", "protocol", "scan", "readout", "output_dir", "seed"}
    _known_keys(data, "<top level>", known)

    seed = seed_override
    if seed is None:
        seed = data.get("seed")
    if seed is None and SEED_ENV_VAR in os.environ:
        try:
            seed = int(os.environ[SEED_ENV_VAR])
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer") from exc
    seed = int(seed) if seed is not None else None

    atom = parse_atom(_section(data, "atom", required=True))
    protocol = parse_protocol(_section(data, "protocol"))
    if target_m_override is not None:
        try:
            protocol = replace(protocol, target_m=int(target_m_override))
        except ValueError as exc:
            raise ConfigError(f"invalid target_m override: {exc}") from exc
    default_notch_center = atom.omega_B * protocol.target_m / TWO_PI
    noise_sec = dict(_section(data, "noise_chain"))
    if target_m_override is not None:
        # Explicit placement in the file would defeat the override.
        noise_sec.pop("notch_center_hz", None)
        noise_sec.pop("carrier_shift_hz", None)
    noise = parse_noise_chain(noise_sec, default_notch_center)
    calibration = parse_calibration(_section(data, "calibration"))
    scan = parse_scan(_section(data, "scan"), seed)
    readout = parse_readout(_section(data, "readout"))
    output_dir = Path(data.get("output_dir", "."))
    return RunConfig(
        atom=atom,
        noise_chain=noise,
        calibration=calibration,
        protocol=protocol,
        scan=scan,
        readout=readout,
        output_dir=output_dir,
        seed=seed,
    )
