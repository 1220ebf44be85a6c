"""Serialization round-trip and formatting tests."""

import math

import numpy as np
import pytest

from zps.io import (
    dumps_json,
    fmt_csv,
    read_json,
    read_scan_csv,
    read_spectrum_csv,
    write_json,
    write_scan_csv,
    write_spectrum_csv,
)
from zps.measurement import RamanScan
from zps.spectrum import PowerSpectrum


def test_fmt_csv_precision():
    assert fmt_csv(1.0 / 3.0) == "0.3333333333"
    assert fmt_csv(910000.0) == "910000"
    assert fmt_csv(42) == "42"
    assert fmt_csv(float("-inf")) == "-inf"


def test_json_float_precision_and_literals():
    text = dumps_json({"x": 0.1, "inf": math.inf, "ninf": -math.inf, "flag": True})
    assert "0.10000000000000001" in text
    assert "Infinity" in text
    assert "-Infinity" in text
    assert "true" in text


def test_spectrum_csv_roundtrip(tmp_path):
    spec = PowerSpectrum(
        np.array([-10e3, 0.0, 10e3]), np.array([-63.0, -math.inf, -63.0])
    )
    path = tmp_path / "spectrum.csv"
    write_spectrum_csv(path, spec)
    text = path.read_text()
    assert text.splitlines()[0] == "offset_hz,power_dbm"
    assert "-inf" in text
    again = read_spectrum_csv(path)
    assert np.array_equal(again.offsets, spec.offsets)
    assert np.array_equal(again.power_dbm, spec.power_dbm)


def test_scan_csv_roundtrip(tmp_path):
    scan = RamanScan(
        np.array([-1e6, 0.0, 1e6]),
        np.array([0.1, 0.5, 0.1]),
        np.array([100, 100, 100]),
        np.array([10, 50, 10]),
    )
    path = tmp_path / "scan.csv"
    write_scan_csv(path, scan)
    again = read_scan_csv(path)
    assert np.array_equal(again.delta_r_hz, scan.delta_r_hz)
    assert np.array_equal(again.successes, scan.successes)
    assert again.shots.dtype.kind == "i"


def test_scan_csv_header_check(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError):
        read_scan_csv(path)


def test_json_roundtrip(tmp_path):
    path = tmp_path / "x.json"
    write_json(path, {"a": [1.5, 2], "b": {"c": None}})
    assert read_json(path) == {"a": [1.5, 2], "b": {"c": None}}


def test_write_deterministic(tmp_path):
    spec = PowerSpectrum(np.array([0.0, 1.0]), np.array([-63.0, -64.5]))
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_spectrum_csv(p1, spec)
    write_spectrum_csv(p2, spec)
    assert p1.read_bytes() == p2.read_bytes()


def test_scan_validation():
    with pytest.raises(ValueError):
        RamanScan(
            np.array([0.0]), np.array([0.5]), np.array([10]), np.array([11])
        )
    with pytest.raises(ValueError):
        RamanScan(np.array([0.0, 1.0]), np.array([0.5]), np.array([0]), np.array([0]))
