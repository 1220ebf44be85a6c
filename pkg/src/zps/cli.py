"""Command-line entry points.

Subcommands: synth, rates, pump, scan, fit, oracle.  Every run is driven by
a single JSON config (--config) with targeted overrides (--seed, --target-m,
--out).  Outputs are deterministic CSV/JSON; --plot additionally renders PNG
figures next to them.  Exit codes: 0 success, 1 numerical failure, 2
config/IO error.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import plots
from .atom import F3_M_VALUES, TWO_PI
from .config import ConfigError, RunConfig, builtin_config_path, load_config
from .dynamics import (
    NonPerturbativeWarning,
    PopulationState,
    comb_oracle_rate,
    run_pump_protocol,
)
from .fit import IllPosedFitError, fit_scan_multistart, initial_guess_candidates, model_p4
from .io import (
    read_json,
    read_scan_csv,
    write_json,
    write_scan_csv,
    write_spectrum_csv,
    write_csv,
)
from .measurement import acquire_scan
from .spectrum import PowerSpectrum, incoherent_rate, synthesize_noise_spectrum


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="zps",
        description="Zeeman-state optical pumping simulator and analysis toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument(
            "--config", required=True,
            help="path to the JSON run config, or a builtin name (ideal, calibrated)",
        )
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--target-m", type=int, dest="target_m", help="override protocol target (moves the notch)")
        p.add_argument("--out", help="output directory (default: config output_dir)")
        p.add_argument("--plot", action="store_true", help="also render PNG figures")
        return p

    common(sub.add_parser("synth", help="synthesize the tailored noise spectrum"))
    common(sub.add_parser("rates", help="incoherent rate for each Zeeman transition"))
    common(sub.add_parser("pump", help="run the iterated pump/repump protocol"))
    p = common(sub.add_parser("scan", help="simulate a Raman spectroscopy scan"))
    p.add_argument("--state", help="initial-state JSON (e.g. pump output); default uniform F=3")
    p = common(sub.add_parser("fit", help="fit the Lorentzian-sum model to a scan CSV"))
    p.add_argument("scan_csv", help="scan CSV produced by the scan subcommand")
    p = common(sub.add_parser("oracle", help="compare the comb oracle against the closed-form rate"))
    p.add_argument("--m", type=int, default=0, help="transition index to check (default 0)")
    p.add_argument("--times-us", default="1,3.16,10", help="comma-separated integration times in us")
    p.add_argument("--n-seeds", type=int, default=64, help="number of oracle seeds")
    p.add_argument(
        "--spectrum", choices=("flat", "chain"), default="flat",
        help="flat source spectrum (default) or the synthesized noise chain",
    )
    return parser


def _outdir(args, config: RunConfig) -> Path:
    out = Path(args.out) if args.out else config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def _line_offsets_hz(config: RunConfig):
    return [config.atom.omega_B * m / TWO_PI for m in F3_M_VALUES]


def cmd_synth(args, config: RunConfig) -> int:
    spectrum = synthesize_noise_spectrum(config.noise_chain)
    out = _outdir(args, config)
    write_spectrum_csv(out / "spectrum.csv", spectrum)
    if args.plot:
        plots.plot_spectrum(spectrum, out / "spectrum.png", _line_offsets_hz(config))
    print(f"wrote {out / 'spectrum.csv'}")
    return 0


def cmd_rates(args, config: RunConfig) -> int:
    spectrum = synthesize_noise_spectrum(config.noise_chain)
    rates = {m: incoherent_rate(spectrum, config.calibration, m, config.atom) for m in F3_M_VALUES}
    out = _outdir(args, config)
    write_csv(
        out / "rates.csv",
        ["m", "gamma_per_us"],
        [(m, rates[m] * 1e-6) for m in F3_M_VALUES],
    )
    if args.plot:
        plots.plot_rates(rates, out / "rates.png")
    print(f"wrote {out / 'rates.csv'}")
    return 0


def cmd_pump(args, config: RunConfig) -> int:
    spectrum = synthesize_noise_spectrum(config.noise_chain)
    initial = PopulationState.uniform_f3()
    final, trace = run_pump_protocol(
        initial, config.protocol, spectrum, config.calibration, config.atom
    )
    out = _outdir(args, config)
    write_json(
        out / "pump_state.json",
        {
            "populations": final.as_dict(),
            "target_m": config.protocol.target_m,
            "p3_target": final.p3(config.protocol.target_m),
            "iterations": config.protocol.iterations,
        },
    )
    write_csv(
        out / "pump_trace.csv",
        ["iteration", "p3_target", "total"],
        [(i + 1, p, 1.0) for i, p in enumerate(trace)],
    )
    if args.plot:
        plots.plot_pump_trace(trace, config.protocol.target_m, out / "pump_trace.png")
    print(
        f"wrote {out / 'pump_state.json'}; "
        f"p3[target={config.protocol.target_m}] = {final.p3(config.protocol.target_m):.4f}"
    )
    return 0


def _load_state(path) -> PopulationState:
    data = read_json(path)
    if "populations" not in data:
        raise ConfigError(f"state file {path} has no 'populations' key")
    return PopulationState.from_dict(data["populations"])


def cmd_scan(args, config: RunConfig) -> int:
    state = _load_state(args.state) if args.state else PopulationState.uniform_f3()
    scan = acquire_scan(state, config.scan, config.atom, config.readout)
    out = _outdir(args, config)
    write_scan_csv(out / "scan.csv", scan)
    write_json(out / "scan_meta.json", scan.metadata)
    if args.plot:
        plots.plot_scan(scan, out / "scan.png", line_centers_hz=_line_offsets_hz(config))
    print(f"wrote {out / 'scan.csv'}")
    return 0


def cmd_fit(args, config: RunConfig) -> int:
    try:
        scan = read_scan_csv(args.scan_csv)
    except ValueError as exc:
        raise ConfigError(f"bad scan CSV {args.scan_csv}: {exc}") from exc
    # Recorded probabilities are in reported (folded) space; the fit unfolds
    # them through the known readout, so the background stays the bare one.
    p_b = config.readout.background_p4
    guesses = initial_guess_candidates(
        scan,
        fallback_omega_B=config.atom.omega_B,
        fallback_Omega_0=config.atom.Omega_0,
        p_b=config.readout.fold(p_b),
    )
    result = fit_scan_multistart(scan, guesses, fixed_p_b=p_b, readout=config.readout)
    out = _outdir(args, config)
    model = result.model
    write_json(
        out / "fit.json",
        {
            "populations": {str(m): model.populations[m + 3] for m in F3_M_VALUES},
            "population_errors": {str(m): result.population_errors[m + 3] for m in F3_M_VALUES},
            "omega_0_hz": model.Omega_0 / TWO_PI,
            "omega_0_error_hz": result.Omega_0_error / TWO_PI,
            "omega_b_hz": model.omega_B / TWO_PI,
            "omega_b_error_hz": result.omega_B_error / TWO_PI,
            "population_sum": result.population_sum,
            "population_sum_error": result.population_sum_error,
            "residual_norm": result.residual_norm,
            "converged": result.converged,
            "iterations": result.iterations,
            "fixed_p_b": p_b,
        },
    )
    grid_hz = np.linspace(scan.delta_r_hz[0], scan.delta_r_hz[-1], 801)
    # Fold the fitted model back through the readout so the curve overlays
    # the recorded scan.
    p4_model = config.readout.fold(model_p4(TWO_PI * grid_hz, model))
    write_csv(out / "fit_model.csv", ["delta_r_hz", "p4_model"], zip(grid_hz, p4_model))
    if args.plot:
        centers = [model.omega_B * m / TWO_PI for m in F3_M_VALUES]
        plots.plot_scan(scan, out / "fit.png", model_curve=(grid_hz, p4_model), line_centers_hz=centers)
    print(
        f"wrote {out / 'fit.json'}; population sum = {result.population_sum:.3f}, "
        f"converged = {result.converged}"
    )
    return 0 if result.converged else 1


def cmd_oracle(args, config: RunConfig) -> int:
    if args.spectrum == "chain":
        spectrum = synthesize_noise_spectrum(config.noise_chain)
    else:
        nc = config.noise_chain
        spectrum = PowerSpectrum.flat(
            nc.source_level_dbm, nc.source_band_hz, nc.grid_step_hz,
            ref_bandwidth=config.calibration.ref_bandwidth,
        )
    try:
        times = [float(t) * 1e-6 for t in args.times_us.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --times-us value: {exc}") from exc
    base_seed = config.seed if config.seed is not None else 0
    seeds = [base_seed + i for i in range(args.n_seeds)]
    comparisons = []
    for t in times:
        closed = incoherent_rate(spectrum, config.calibration, args.m, config.atom)
        flagged = False
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NonPerturbativeWarning)
            oracle = comb_oracle_rate(spectrum, config.calibration, args.m, config.atom, t, seeds)
            flagged = any(issubclass(w.category, NonPerturbativeWarning) for w in caught)
        comparisons.append(
            {
                "t_s": t,
                "closed_form_per_s": closed,
                "oracle_per_s": oracle,
                "ratio": oracle / closed if closed > 0 else (1.0 if oracle == 0 else float("inf")),
                "non_perturbative": flagged,
            }
        )
    report = {
        "m": args.m,
        "spectrum": args.spectrum,
        "n_seeds": args.n_seeds,
        "comparisons": comparisons,
    }
    out = _outdir(args, config)
    write_json(out / "oracle.json", report)
    if args.plot:
        plots.plot_oracle(report, out / "oracle.png")
    print(f"wrote {out / 'oracle.json'}")
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "rates": cmd_rates,
    "pump": cmd_pump,
    "scan": cmd_scan,
    "fit": cmd_fit,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg_path = Path(args.config)
        if not cfg_path.exists() and cfg_path.name == args.config:
            cfg_path = builtin_config_path(args.config)
        config = load_config(cfg_path, seed_override=args.seed, target_m_override=args.target_m)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    except (IllPosedFitError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
