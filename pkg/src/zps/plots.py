"""Matplotlib figure rendering for the CLI report path.

Each function writes a PNG next to the delimited output it illustrates.
All figures use the Agg backend so rendering works headless.
"""

from __future__ import annotations


import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_spectrum(spectrum, path, line_offsets_hz=None):
    fig, ax = plt.subplots(figsize=(7, 4))
    power = np.where(np.isneginf(spectrum.power_dbm), np.nan, spectrum.power_dbm)
    ax.plot(spectrum.offsets / 1e6, power, lw=1.0, color="C0")
    if line_offsets_hz is not None:
        for off in line_offsets_hz:
            ax.axvline(off / 1e6, color="green", lw=0.8, alpha=0.6)
    ax.set_xlabel("offset from hyperfine splitting (MHz)")
    ax.set_ylabel(f"power (dBm / {spectrum.ref_bandwidth / 1e3:g} kHz)")
    ax.set_title("synthesized beat-note power spectrum")
    _save(fig, path)


def plot_rates(rates_by_m, path):
    ms = sorted(rates_by_m)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(ms, [rates_by_m[m] * 1e-6 for m in ms], color="C0")
    ax.set_xlabel("m")
    ax.set_ylabel("incoherent rate (1/us)")
    ax.set_title("per-transition incoherent Raman rates")
    _save(fig, path)


def plot_pump_trace(trace, target_m, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(1, len(trace) + 1), trace, "o-", ms=3, color="C0")
    ax.set_xlabel("iteration")
    ax.set_ylabel(f"population in |3,{target_m:+d}>")
    ax.set_ylim(0, 1)
    ax.set_title("dark-state population per pump iteration")
    _save(fig, path)


def plot_scan(scan, path, model_curve=None, line_centers_hz=None):
    fig, ax = plt.subplots(figsize=(7, 4))
    if np.all(scan.shots == 0):
        ax.plot(scan.delta_r_hz / 1e6, scan.p4, ".", ms=4, color="C0", label="analytic scan")
    else:
        err = np.sqrt(np.clip(scan.p4 * (1 - scan.p4), 1e-12, None) / np.maximum(scan.shots, 1))
        ax.errorbar(
            scan.delta_r_hz / 1e6, scan.p4, yerr=err, fmt=".", ms=4, color="C0",
            elinewidth=0.7, label="sampled scan",
        )
    if model_curve is not None:
        grid_hz, p4_model = model_curve
        ax.plot(grid_hz / 1e6, p4_model, "-", color="C3", lw=1.2, label="fit")
    if line_centers_hz is not None:
        for c in line_centers_hz:
            ax.axvline(c / 1e6, color="green", lw=0.8, alpha=0.5)
    ax.set_xlabel("Raman detuning (MHz)")
    ax.set_ylabel("transfer probability p4")
    ax.legend(loc="best", fontsize=8)
    _save(fig, path)


def plot_oracle(report, path):
    entries = report["comparisons"]
    ts = [e["t_s"] * 1e6 for e in entries]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ts, [e["closed_form_per_s"] * 1e-6 for e in entries], "s-", label="closed form")
    ax.plot(ts, [e["oracle_per_s"] * 1e-6 for e in entries], "o--", label="comb oracle")
    ax.set_xscale("log")
    ax.set_xlabel("integration time (us)")
    ax.set_ylabel("rate (1/us)")
    ax.legend()
    ax.set_title("oracle vs. closed-form incoherent rate")
    _save(fig, path)
