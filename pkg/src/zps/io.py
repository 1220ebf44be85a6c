"""Deterministic CSV/JSON serialization for spectra, scans, traces, and fits.

Numeric formatting is fixed: 10 significant digits in CSV, 17 in JSON, so a
rerun with identical inputs produces byte-identical files.  -inf dBm values
round-trip as the literal ``-inf`` in CSV and ``-Infinity`` in JSON.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .measurement import RamanScan
from .spectrum import PowerSpectrum


def fmt_csv(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.10g}"


def _json_fragments(obj, indent, level):
    pad = " " * (indent * level)
    inner = " " * (indent * (level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{inner}{json.dumps(str(k))}: {_json_fragments(v, indent, level + 1)}'
            for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = ",\n".join(f"{inner}{_json_fragments(v, indent, level + 1)}" for v in seq)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool | np.bool_):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        if math.isnan(x):
            return "NaN"
        return f"{x:.17g}"
    return json.dumps(obj)


def dumps_json(obj, indent: int = 2) -> str:
    """JSON text with floats at 17 significant digits."""
    return _json_fragments(obj, indent, 0) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps_json(obj))


def read_json(path):
    return json.loads(Path(path).read_text())


def write_csv(path, header: list[str], rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_csv(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_spectrum_csv(path, spectrum: PowerSpectrum):
    write_csv(path, ["offset_hz", "power_dbm"], zip(spectrum.offsets, spectrum.power_dbm))


def read_spectrum_csv(path, ref_bandwidth: float = 3000.0) -> PowerSpectrum:
    offsets, power = [], []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "offset_hz,power_dbm":
            raise ValueError(f"unexpected spectrum CSV header: {header!r}")
        for line in fh:
            a, b = line.strip().split(",")
            offsets.append(float(a))
            power.append(float(b))  # float('-inf') parses the -inf sentinel
    return PowerSpectrum(np.array(offsets), np.array(power), ref_bandwidth)


def write_scan_csv(path, scan: RamanScan):
    write_csv(
        path,
        ["delta_r_hz", "p4", "shots", "successes"],
        zip(scan.delta_r_hz, scan.p4, scan.shots, scan.successes),
    )


def read_scan_csv(path, metadata: dict | None = None) -> RamanScan:
    cols = {"delta_r_hz": [], "p4": [], "shots": [], "successes": []}
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != list(cols):
            raise ValueError(f"unexpected scan CSV header: {header!r}")
        for line in fh:
            for name, value in zip(header, line.strip().split(",")):
                cols[name].append(float(value))
    return RamanScan(
        np.array(cols["delta_r_hz"]),
        np.array(cols["p4"]),
        np.array(cols["shots"], dtype=int),
        np.array(cols["successes"], dtype=int),
        metadata or {},
    )
