"""One-parameter sweeps: simulate and analyze each point, collect a table.

Each point uses the seed ``base.seed ^ index`` so points are independent yet
reproducible, and may run in worker processes. The default worker count is
read from the ``VO2SYNC_WORKERS`` environment variable (1 if unset).
"""
from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .. import analysis
from ..circuit import simulate
from ..errors import VO2SyncError
from . import io
from .config import SweepSpec, export_config, set_parameter

__all__ = ["SweepRecord", "run_sweep", "run_point", "default_workers", "WORKERS_ENV"]

WORKERS_ENV = "VO2SYNC_WORKERS"


@dataclass(frozen=True)
class SweepRecord:
    """Summary of one sweep point.

    Frequencies are mean switching rates from the event log (first cycle
    skipped). Fields of analyses that were not requested stay ``None``;
    ``error`` holds ``"<ExceptionType>: message"`` if the point failed.
    """

    index: int
    value: float
    f1_hz: float | None = None
    f2_hz: float | None = None
    shr: str | None = None
    eta: float | None = None
    synchronized: bool | None = None
    f_s_hz: float | None = None
    fwhm1_hz: float | None = None
    fwhm2_hz: float | None = None
    n_events1: int | None = None
    n_events2: int | None = None
    n_coincidences: int | None = None
    error: str | None = None


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise VO2SyncError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(n, 1)


def _band(spec: SweepSpec, spectrum, f_mean):
    if spec.band is not None:
        return spec.band
    if not math.isfinite(f_mean):
        return None
    return 0.5 * f_mean, min(1.5 * f_mean, spectrum.frequencies[-1])


def run_point(spec: SweepSpec, index: int, out_dir=None) -> SweepRecord:
    """Simulate and analyze sweep point ``index``; never raises for model errors."""
    value = spec.values[index]
    try:
        cfg = set_parameter(spec.base, spec.parameter, value)
        cfg = dataclasses.replace(cfg, seed=spec.base.seed ^ index,
                                  record_waveforms=spec.needs_waveforms)
        trace = simulate(cfg)
        n_osc = trace.n_oscillators
        trains = [analysis.extract_peaks(trace, oscillator=i) for i in range(min(n_osc, 2))]
        freqs = [analysis.mean_frequency(p) for p in trains]
        fields = {"f1_hz": freqs[0], "n_events1": len(trains[0])}
        if n_osc > 1:
            fields.update(f2_hz=freqs[1], n_events2=len(trains[1]))
        stem = None if out_dir is None else Path(out_dir) / "points" / f"{index:04d}"
        if "shr" in spec.analyses:
            rep = analysis.shr_eta(trains[0], trains[1], spec.coincidence_tol, spec.m_cap,
                                   spec.eta_limit)
            fields.update(shr=rep.shr_text or None, eta=rep.eta, synchronized=rep.synchronized,
                          f_s_hz=rep.f_s, n_coincidences=rep.n_coincidences)
            if stem is not None:
                io.export_report(rep, f"{stem}_report.json")
        if "fwhm" in spec.analyses or "spectra" in spec.analyses:
            spectra = []
            for i in range(len(trains)):
                s = analysis.spectrum(trace.v_c[i], trace.sample_rate, spec.window, spec.segments)
                spectra.append(s)
                band = _band(spec, s, freqs[i])
                if "fwhm" in spec.analyses and band is not None:
                    fields[f"fwhm{i + 1}_hz"] = analysis.fundamental(s, band)[1]
            if "spectra" in spec.analyses and stem is not None:
                io.export_spectrum(spectra, f"{stem}_spectrum.csv")
        if "phase" in spec.analyses and stem is not None:
            t, dphi = analysis.phase_difference(trains[0], trains[1])
            io.export_phase(t, dphi, f"{stem}_phase.csv")
        if spec.write_traces and stem is not None:
            io.export_trace(trace, f"{stem}_trace.csv")
        return SweepRecord(index, value, **fields)
    except (VO2SyncError, ValueError, ArithmeticError) as exc:
        return SweepRecord(index, value, error=f"{type(exc).__name__}: {exc}")


def _run_indexed(args):
    spec, index, out_dir = args
    return run_point(spec, index, out_dir)


def run_sweep(spec: SweepSpec, out_dir=None, workers: int | None = None) -> list:
    """Run every point of ``spec``.

    Parameters
    ----------
    out_dir : path, optional
        Where to write ``summary.csv``, ``sweep.toml`` (the resolved spec),
        ``metadata.json`` and the per-point files under ``points/``. Defaults
        to ``spec.output``; nothing is written when both are ``None``.
    workers : int, optional
        Worker processes; defaults to :func:`default_workers`.

    Returns
    -------
    list of SweepRecord
        Ordered by swept value.
    """
    out_dir = out_dir if out_dir is not None else spec.output
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise VO2SyncError("workers must be >= 1")
    if out_dir is not None:
        (Path(out_dir) / "points").mkdir(parents=True, exist_ok=True)
    jobs = [(spec, k, out_dir) for k in range(len(spec.values))]
    if workers == 1 or len(jobs) == 1:
        records = [_run_indexed(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            records = list(pool.map(_run_indexed, jobs))
    records.sort(key=lambda r: r.value)
    if out_dir is not None:
        out = Path(out_dir)
        io.export_record_table(records, out / "summary.csv")
        (out / "sweep.toml").write_text(export_config(spec), encoding="utf-8")
        io.write_json(io.run_metadata(spec, spec.base.seed, parameter=spec.parameter,
                                      n_points=len(records),
                                      n_failed=sum(r.error is not None for r in records)),
                      out / "metadata.json")
    return records
