"""Waveform ingestion and result serialization.

CSV dialect (traces and imported oscillograms)::

    time_s,ch1,ch2
    0.0,1.2e-05,3.1e-05
    1e-06,1.3e-05,3.0e-05

The first column is time in seconds, strictly increasing; ``ch1`` .. ``ch4``
are one channel each (device current in amperes for exported traces).
Floats are written with ``repr`` so a file re-ingests bit-equal.
"""
from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass

import numpy as np

from .. import __version__
from ..errors import ParseError
from .config import config_hash

__all__ = [
    "ImportedWaveform",
    "ingest_waveform_csv",
    "export_trace",
    "export_events",
    "export_spectrum",
    "export_phase",
    "export_record_table",
    "export_report",
    "run_metadata",
    "write_json",
    "RATE_JITTER_LIMIT",
]

#: Largest tolerated relative deviation of a time step from the mean step.
RATE_JITTER_LIMIT = 0.01
# below this the grid is taken as uniform and the samples are kept verbatim
_UNIFORM = 1e-9

_TRACE_QUANTITIES = ("current", "v_c", "v_sw", "delta_t")


@dataclass(frozen=True, eq=False)
class ImportedWaveform:
    """Uniformly sampled multichannel waveform.

    ``channels`` has shape ``(n_channels, n_samples)``; ``resampled`` tells
    whether the input grid had to be interpolated onto a uniform one.
    """

    time: np.ndarray
    channels: np.ndarray
    names: tuple
    resampled: bool = False

    @property
    def sample_rate(self) -> float:
        return (self.time.size - 1) / (self.time[-1] - self.time[0])

    def channel(self, name) -> np.ndarray:
        return self.channels[self.names.index(name)]


def _open_text(target, mode):
    if isinstance(target, (str, os.PathLike)):
        return open(target, mode, encoding="utf-8", newline=""), True
    return target, False


def ingest_waveform_csv(source) -> ImportedWaveform:
    """Read a ``time_s,ch1[,ch2,ch3,ch4]`` CSV file or text stream.

    Slightly irregular time steps (worst deviation below 1 % of the mean
    step) are removed by linear interpolation onto a uniform grid with the
    same first sample, sample count and mean step.

    Raises
    ------
    ParseError
        Bad header, non-numeric cell, wrong column count, non-increasing time
        or excessive rate jitter; the message names the line.
    """
    fh, close = _open_text(source, "r")
    path = os.fspath(source) if close else None
    try:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file", 1, path) from None
        n_ch = len(header) - 1
        expected = ["time_s"] + [f"ch{k + 1}" for k in range(n_ch)]
        if not 1 <= n_ch <= 4 or header != expected:
            raise ParseError(f"header must be time_s,ch1[,ch2,ch3,ch4], got {','.join(header)}",
                             1, path)
        rows = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n_ch + 1:
                raise ParseError(f"expected {n_ch + 1} columns, got {len(row)}", line, path)
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ParseError(f"non-numeric cell in {row!r}", line, path) from None
            if not np.all(np.isfinite(rows[-1])):
                raise ParseError("non-finite value", line, path)
            if len(rows) > 1 and not rows[-1][0] > rows[-2][0]:
                raise ParseError("time must be strictly increasing", line, path)
    finally:
        if close:
            fh.close()
    if len(rows) < 2:
        raise ParseError("need at least two samples", None, path)
    data = np.array(rows)
    t, x = data[:, 0], data[:, 1:].T.copy()
    steps = np.diff(t)
    mean = (t[-1] - t[0]) / (t.size - 1)
    dev = np.abs(steps - mean) / mean
    worst = int(np.argmax(dev))
    if dev[worst] >= RATE_JITTER_LIMIT:
        raise ParseError(f"sample-rate jitter {100 * dev[worst]:.3g}% exceeds "
                         f"{100 * RATE_JITTER_LIMIT:g}% of the mean step", worst + 3, path)
    resampled = bool(dev[worst] > _UNIFORM)
    if resampled:
        grid = t[0] + mean * np.arange(t.size)
        x = np.stack([np.interp(grid, t, ch) for ch in x])
        t = grid
    return ImportedWaveform(t, x, tuple(header[1:]), resampled)


def _write_csv(target, header, columns):
    fh, close = _open_text(target, "w")
    try:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(repr(float(v)) if not isinstance(v, (int, np.integer, str))
                              else str(v) for v in row) + "\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {target}: {exc.strerror}") from exc
    finally:
        if close:
            fh.close()


def export_trace(trace, target, quantity="current"):
    """Write one sampled quantity of every oscillator in the ingest dialect.

    ``quantity`` is one of ``'current'`` (A), ``'v_c'``, ``'v_sw'`` (V) or
    ``'delta_t'`` (K).
    """
    if quantity not in _TRACE_QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}")
    data = getattr(trace, quantity)
    if data.shape[1] == 0:
        raise ValueError("trace has no recorded waveforms")
    names = ["time_s"] + [f"ch{k + 1}" for k in range(data.shape[0])]
    _write_csv(target, names, [trace.time, *data])


def export_events(trace, target):
    """Event log as ``time_s,oscillator,kind,v_th_eff_v,energy_j,t_ch_s``.

    ``kind`` is ``on`` or ``off``; energy and duration are filled on ``off``
    rows only (empty cells otherwise).
    """
    fh, close = _open_text(target, "w")
    try:
        fh.write("time_s,oscillator,kind,v_th_eff_v,energy_j,t_ch_s\n")
        for t, i, k, e, tc, v in zip(trace.event_times, trace.event_osc, trace.event_kind,
                                     trace.event_energy, trace.event_t_ch, trace.event_v_th):
            cells = [repr(float(t)), str(int(i)), "on" if k == 0 else "off"]
            cells += ["" if np.isnan(c) else repr(float(c)) for c in (v, e, tc)]
            fh.write(",".join(cells) + "\n")
    finally:
        if close:
            fh.close()


def export_spectrum(spectra, target):
    """Spectra of several channels sharing one frequency grid:
    ``frequency_hz,mag_ch1[,mag_ch2...]``."""
    spectra = list(spectra)
    names = ["frequency_hz"] + [f"mag_ch{k + 1}" for k in range(len(spectra))]
    _write_csv(target, names, [spectra[0].frequencies, *(s.magnitude for s in spectra)])


def export_phase(t, dphi, target):
    """Phase-difference series as ``time_s,dphi_rad``."""
    _write_csv(target, ["time_s", "dphi_rad"], [t, dphi])


RECORD_COLUMNS = (
    "value", "f1_hz", "f2_hz", "shr", "eta", "synchronized", "f_s_hz",
    "fwhm1_hz", "fwhm2_hz", "n_events1", "n_events2", "n_coincidences", "error",
)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def export_record_table(records, target):
    """Sweep summary in :data:`RECORD_COLUMNS` order; absent fields are empty."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_COLUMNS)
    for r in records:
        w.writerow([_cell(getattr(r, c)) for c in RECORD_COLUMNS])
    fh, close = _open_text(target, "w")
    try:
        fh.write(buf.getvalue())
    finally:
        if close:
            fh.close()


def write_json(obj, target):
    """Deterministic JSON (sorted keys, two-space indent)."""
    text = json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"
    fh, close = _open_text(target, "w")
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


def export_report(report, target):
    write_json(report.to_dict(), target)


def run_metadata(cfg, seed, **extra) -> dict:
    """Provenance block: tool version, configuration hash and seed."""
    meta = {"tool": "vo2sync", "version": __version__, "config_sha256": config_hash(cfg),
            "seed": int(seed)}
    meta.update(extra)
    return meta
