"""Configuration files, sweeps, waveform I/O and the command-line interface."""
from importlib import resources

from .config import (
    ANALYSES,
    SweepSpec,
    config_hash,
    export_config,
    get_parameter,
    load_config,
    parse_config,
    set_parameter,
)
from .io import (
    ImportedWaveform,
    export_events,
    export_phase,
    export_record_table,
    export_report,
    export_spectrum,
    export_trace,
    ingest_waveform_csv,
    run_metadata,
)
from .sweep import SweepRecord, default_workers, run_point, run_sweep

PRESETS = ("weak", "strong")


def preset_text(name: str) -> str:
    """TOML text of a shipped preset (``'weak'`` or ``'strong'``)."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
    return resources.files(__package__).joinpath("presets", f"{name}.preset").read_text("utf-8")


def load_preset(name: str) -> SweepSpec:
    return parse_config(preset_text(name))
