"""Command-line interface: ``vo2sync simulate|sweep|analyze|radius|band``.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O error.
"""
from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from .. import analysis
from ..circuit import NetworkConfig, discharge_parameters, find_oscillation_band, simulate
from ..errors import DomainError, NumericalError, ValidationError, VO2SyncError
from ..thermal import coupling_radius
from . import io
from .config import SweepSpec, export_config, load_config
from .sweep import run_sweep

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


def _load(path, kind):
    filled = []
    cfg = load_config(path, filled)
    if not isinstance(cfg, kind):
        want = "a sweep file (with a [sweep] table)" if kind is SweepSpec else \
            "a simulation file (without a [sweep] table)"
        raise ValidationError(f"{path} is not {want}")
    return cfg, filled


@click.group()
@click.version_option(package_name="artifact", prog_name="vo2sync")
def cli():
    """Simulate and analyze thermally coupled VO2 oscillators."""


@cli.command("simulate")
@click.option("-c", "--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("-o", "--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--tol", default=1e-5, show_default=True, help="Coincidence tolerance (s).")
@click.option("--eta-limit", default=90.0, show_default=True)
def simulate_cmd(config_path, out_dir, tol, eta_limit):
    """Run one simulation and write its trace, events and report."""
    cfg, filled = _load(config_path, NetworkConfig)
    trace = simulate(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.toml").write_text(export_config(cfg), encoding="utf-8")
    io.export_events(trace, out / "events.csv")
    if cfg.record_waveforms:
        io.export_trace(trace, out / "trace.csv")
    trains = [analysis.extract_peaks(trace, oscillator=i) for i in range(trace.n_oscillators)]
    summary = {"frequency_hz": [analysis.mean_frequency(p) for p in trains],
               "n_turn_on": [len(p) for p in trains],
               "latched": {str(k): v for k, v in trace.latched.items()}}
    if len(trains) >= 2:
        rep = analysis.shr_eta(trains[0], trains[1], tol, eta_limit=eta_limit)
        io.export_report(rep, out / "report.json")
        summary["shr"], summary["eta"] = rep.shr_text, rep.eta
    io.write_json(io.run_metadata(cfg, cfg.seed, defaults_filled=filled,
                                  summary=_jsonable(summary)), out / "metadata.json")
    for i, p in enumerate(trains):
        click.echo(f"oscillator {i}: {len(p)} discharges, F = {summary['frequency_hz'][i]:.6g} Hz")
    for k, t in trace.latched.items():
        click.echo(f"oscillator {k}: switch latched ON at t = {t:.6g} s")
    if "shr" in summary:
        click.echo(f"SHR = {summary['shr'] or '-'}, eta = {summary['eta']:.2f} %")


@cli.command("sweep")
@click.option("-c", "--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("-o", "--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--workers", type=int, default=None,
              help="Worker processes (default: $VO2SYNC_WORKERS or 1).")
def sweep_cmd(config_path, out_dir, workers):
    """Run a parameter sweep and write summary.csv plus per-point files."""
    spec, _ = _load(config_path, SweepSpec)
    records = run_sweep(spec, out_dir, workers)
    failed = [r for r in records if r.error]
    click.echo(f"{len(records)} points written to {Path(out_dir) / 'summary.csv'}"
               f" ({len(failed)} failed)")
    for r in failed:
        click.echo(f"  point {r.index} ({spec.parameter} = {r.value:g}): {r.error}", err=True)


def _channel(path, k):
    wav = io.ingest_waveform_csv(path)
    if k >= len(wav.names):
        raise ValidationError(f"{path} has no column ch{k + 1}")
    return wav, wav.channels[k]


def _peaks(t, x, idx, level, hysteresis):
    lo, hi = float(np.min(x)), float(np.max(x))
    lev = 0.5 * (lo + hi) if level is None else level
    hyst = 0.1 * (hi - lo) if hysteresis is None else hysteresis
    return analysis.extract_peaks((t, x), method="threshold_crossing", oscillator=idx,
                                  level=lev, hysteresis=hyst)


@cli.command("analyze")
@click.option("--ch1", "ch1_path", required=True, type=click.Path(dir_okay=False),
              help="Waveform CSV; its ch1 column is oscillator 1.")
@click.option("--ch2", "ch2_path", default=None, type=click.Path(dir_okay=False),
              help="Waveform CSV for oscillator 2 (default: ch2 of the --ch1 file).")
@click.option("--tol", default=1e-5, show_default=True, help="Coincidence tolerance (s).")
@click.option("--eta-limit", default=90.0, show_default=True)
@click.option("--m-cap", default=8, show_default=True)
@click.option("--level", type=float, default=None,
              help="Peak detection level (default: mid-range of each channel).")
@click.option("--hysteresis", type=float, default=None,
              help="Re-arm margin below the level (default: 10% of the channel range).")
@click.option("-o", "--out", "out_path", default=None, type=click.Path(dir_okay=False),
              help="Write the JSON result here instead of standard output.")
def analyze_cmd(ch1_path, ch2_path, tol, eta_limit, m_cap, level, hysteresis, out_path):
    """Coincidence / SHR / eta analysis of recorded waveforms."""
    wav1, x1 = _channel(ch1_path, 0)
    channels = [(wav1.time, x1)]
    if ch2_path is not None:
        wav2, x2 = _channel(ch2_path, 0)
        channels.append((wav2.time, x2))
    elif len(wav1.names) > 1:
        channels.append((wav1.time, wav1.channels[1]))
    trains = [_peaks(t, x, i, level, hysteresis) for i, (t, x) in enumerate(channels)]
    result = {"n_peaks": [len(p) for p in trains],
              "frequency_hz": [analysis.mean_frequency(p, skip=0) for p in trains]}
    if len(trains) == 2:
        rep = analysis.shr_eta(trains[0], trains[1], tol, m_cap, eta_limit)
        result["report"] = rep.to_dict()
    text = json.dumps(_jsonable(result), sort_keys=True, indent=2)
    if out_path is None:
        click.echo(text)
    else:
        Path(out_path).write_text(text + "\n", encoding="utf-8")


@cli.command("radius")
@click.option("-c", "--config", "config_path", required=True, type=click.Path(dir_okay=False))
def radius_cmd(config_path):
    """Discharge energy, duration and coupling radius of each oscillator."""
    cfg, _ = _load(config_path, NetworkConfig)
    d = cfg.distances()
    click.echo("oscillator,energy_j,t_ch_s,radius_um,coupled_to")
    for i, osc in enumerate(cfg.oscillators):
        e, t_ch = discharge_parameters(osc)
        r = None if not math.isfinite(t_ch) else coupling_radius(e, t_ch, cfg.substrate)
        near = [str(j) for j in range(len(cfg.oscillators))
                if r is not None and j != i and d[i, j] <= r]
        rc = "none" if r is None else f"{r * 1e6:.6g}"
        click.echo(f"{i},{e:.6g},{t_ch:.6g},{rc},{' '.join(near)}")


@cli.command("band")
@click.option("-c", "--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--from", "i_min", required=True, type=float, help="Lowest current (A).")
@click.option("--to", "i_max", required=True, type=float, help="Highest current (A).")
@click.option("--step", required=True, type=float, help="Current step (A).")
@click.option("--oscillator", default=0, show_default=True)
def band_cmd(config_path, i_min, i_max, step, oscillator):
    """Supply-current band with sustained oscillation."""
    cfg, _ = _load(config_path, NetworkConfig)
    if not 0 <= oscillator < len(cfg.oscillators):
        raise ValidationError(f"no oscillator {oscillator}", "--oscillator")
    band = find_oscillation_band(cfg, i_min, i_max, step, oscillator=oscillator)
    click.echo("none" if band is None else f"{band[0]:.6g} {band[1]:.6g}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def main(argv=None) -> int:
    """Entry point; returns the process exit code."""
    try:
        cli.main(args=argv, prog_name="vo2sync", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_INVALID
    except click.ClickException as exc:
        exc.show()
        return EXIT_INVALID
    except (ValidationError, DomainError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INVALID
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return EXIT_NUMERICAL
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        return EXIT_IO
    except VO2SyncError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
