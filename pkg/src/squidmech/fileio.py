"""File formats: trace CSV with JSON sidecar, report JSON, fit-result JSON.

Every file-level frequency is ordinary frequency in Hz (column and key
names carry the unit suffix); angular frequencies stay internal. Trace
CSVs have header ``freq_hz,re_s21,im_s21`` for complex traces or
``freq_hz,power`` for power traces, with a ``<name>.json`` sidecar holding
the metadata (drive_freq_hz, drive_amp, seed, params).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .constants import TWO_PI
from .spectra import SpectrumTrace


def _dump_json(payload, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def trace_metadata(trace: SpectrumTrace, params: dict | None = None) -> dict:
    return {
        "kind": trace.kind,
        "drive_freq_hz": None if trace.drive_freq is None else trace.drive_freq / TWO_PI,
        "drive_amp": trace.drive_amp,
        "seed": trace.seed,
        "params": params,
    }


def write_trace_csv(trace: SpectrumTrace, path: str | Path,
                    params: dict | None = None) -> Path:
    """Write a trace as CSV plus a JSON metadata sidecar; returns the CSV path."""
    path = Path(path)
    lines = []
    if trace.kind == "complex_s21":
        lines.append("freq_hz,re_s21,im_s21")
        for f, v in zip(trace.probe_freqs, trace.values):
            lines.append(f"{float(f) / TWO_PI!r},{float(v.real)!r},{float(v.imag)!r}")
    else:
        lines.append("freq_hz,power")
        for f, v in zip(trace.probe_freqs, trace.values):
            lines.append(f"{float(f) / TWO_PI!r},{float(v)!r}")
    path.write_text("\n".join(lines) + "\n")
    _dump_json(trace_metadata(trace, params), path.with_suffix(".json"))
    return path


def write_trace_json(trace: SpectrumTrace, path: str | Path,
                     params: dict | None = None) -> Path:
    """Single-file JSON alternative to the CSV + sidecar pair."""
    path = Path(path)
    doc = trace_metadata(trace, params)
    doc["freq_hz"] = (trace.probe_freqs / TWO_PI).tolist()
    if trace.kind == "complex_s21":
        doc["re_s21"] = trace.values.real.tolist()
        doc["im_s21"] = trace.values.imag.tolist()
    else:
        doc["power"] = trace.values.tolist()
    _dump_json(doc, path)
    return path


def _read_sidecar(csv_path: Path) -> dict:
    sidecar = csv_path.with_suffix(".json")
    if sidecar.exists():
        try:
            return json.loads(sidecar.read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"{sidecar}: line {exc.lineno}: invalid JSON ({exc.msg})") from exc
    return {}


def read_trace_csv(path: str | Path) -> SpectrumTrace:
    """Read a trace CSV (and its sidecar, when present) back into a SpectrumTrace."""
    path = Path(path)
    lines = [ln.strip() for ln in path.read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty trace file")
    header = [c.strip() for c in lines[0].split(",")]
    if header == ["freq_hz", "re_s21", "im_s21"]:
        kind = "complex_s21"
    elif header == ["freq_hz", "power"]:
        kind = "power"
    else:
        raise ValueError(
            f"{path}: line 1: unrecognized header {lines[0]!r}; expected key "
            "'freq_hz,re_s21,im_s21' or 'freq_hz,power'"
        )
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        cols = ln.split(",")
        if len(cols) != len(header):
            raise ValueError(f"{path}: line {i}: expected {len(header)} columns")
        try:
            rows.append([float(c) for c in cols])
        except ValueError as exc:
            raise ValueError(f"{path}: line {i}: non-numeric value") from exc
    data = np.array(rows)
    meta = _read_sidecar(path)
    drive_hz = meta.get("drive_freq_hz")
    values = data[:, 1] + 1j * data[:, 2] if kind == "complex_s21" else data[:, 1]
    return SpectrumTrace(
        probe_freqs=data[:, 0] * TWO_PI,
        values=values,
        kind=kind,
        drive_freq=None if drive_hz is None else drive_hz * TWO_PI,
        drive_amp=meta.get("drive_amp"),
        seed=meta.get("seed"),
    )


def write_fit_result(result, path: str | Path) -> Path:
    """Serialize a FitResult (already in Hz-domain units) to JSON."""
    path = Path(path)
    _dump_json(result.as_dict(), path)
    return path


def write_report(report_dict: dict, path: str | Path) -> Path:
    """Write a pipeline report; duration is nulled so files are reproducible."""
    path = Path(path)
    doc = dict(report_dict)
    doc["duration_s"] = None
    _dump_json(doc, path)
    return path
