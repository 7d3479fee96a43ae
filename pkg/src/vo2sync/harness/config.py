"""TOML configuration files for simulations and sweeps.

A simulation file has up to three kinds of tables::

    [simulation]            # NetworkConfig integration settings
    duration = 1.0
    seed = 7

    [substrate]             # SubstrateParams (sapphire defaults)

    [[oscillator]]          # one table per oscillator, in id order
    supply_current = 600e-6
    capacitance = 44e-9
    position = [0.0, 0.0]   # micrometres
    [oscillator.switch]     # SwitchParams overrides
    jitter_sigma = 0.01

Adding a ``[sweep]`` table turns the file into a sweep specification (see
:class:`SweepSpec`). Every missing key takes its documented default; unknown
keys are rejected. Units are SI except positions (micrometres).
"""
from __future__ import annotations

import dataclasses
import hashlib
import math
import re
import sys
from dataclasses import dataclass

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..circuit import NetworkConfig, OscillatorConfig
from ..device import SwitchParams
from ..errors import ValidationError
from ..thermal import SubstrateParams

__all__ = [
    "SweepSpec",
    "ANALYSES",
    "parse_config",
    "load_config",
    "export_config",
    "config_hash",
    "get_parameter",
    "set_parameter",
]

ANALYSES = ("spectra", "shr", "fwhm", "phase")

_SIM_KEYS = {
    "duration": float,
    "sample_interval": float,
    "thermal_update_interval": float,
    "seed": int,
    "record_waveforms": bool,
    "coupling": bool,
}
_OSC_KEYS = {
    "supply_current": float,
    "capacitance": float,
    "series_resistance": float,
    "position": "point",
    "initial_voltage": float,
}


@dataclass(frozen=True)
class SweepSpec:
    """A one-parameter sweep over a base network.

    Parameters
    ----------
    base : NetworkConfig
    parameter : str
        Path of the swept numeric field: ``oscillator[i].<field>``,
        ``oscillator[i].switch.<field>``, ``oscillator[i].position.x`` (or
        ``.y``), ``substrate.<field>`` or ``simulation.<field>``.
    values : tuple of float
        Swept values, in sweep order.
    analyses : tuple of str
        Subset of ``('spectra', 'shr', 'fwhm', 'phase')``.
    output : str or None
        Default output directory.
    coincidence_tol, eta_limit, m_cap
        Settings of the SHR / eta analysis.
    window, segments, band
        Spectrum window, number of averaged segments, and the FWHM search
        band in Hz (``None``: half to one and a half times each oscillator's
        mean switching frequency).
    write_traces : bool
        Also write the device-current waveform of every point.
    """

    base: NetworkConfig
    parameter: str
    values: tuple
    analyses: tuple = ("shr",)
    output: str | None = None
    coincidence_tol: float = 1e-5
    eta_limit: float = 90.0
    m_cap: int = 8
    window: str = "hann"
    segments: int = 1
    band: tuple | None = None
    write_traces: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "analyses", tuple(a for a in ANALYSES if a in self.analyses))
        if not self.values:
            raise ValidationError("at least one value is required", "sweep.values")
        if not all(math.isfinite(v) for v in self.values):
            raise ValidationError("values must be finite", "sweep.values")
        get_parameter(self.base, self.parameter)
        if not self.coincidence_tol > 0:
            raise ValidationError("must be > 0", "sweep.coincidence_tol")
        if not 0 <= self.eta_limit <= 100:
            raise ValidationError("must lie in [0, 100]", "sweep.eta_limit")
        if self.m_cap < 1:
            raise ValidationError("must be >= 1", "sweep.m_cap")
        if self.window not in ("rectangular", "hann"):
            raise ValidationError("must be 'rectangular' or 'hann'", "sweep.window")
        if self.segments < 1:
            raise ValidationError("must be >= 1", "sweep.segments")
        if self.band is not None:
            band = tuple(float(b) for b in self.band)
            if len(band) != 2 or not 0 <= band[0] < band[1]:
                raise ValidationError("must be [low, high] with 0 <= low < high", "sweep.band")
            object.__setattr__(self, "band", band)
        if ("shr" in self.analyses or "phase" in self.analyses) and len(self.base.oscillators) < 2:
            raise ValidationError("shr and phase analyses need two oscillators", "sweep.analyses")

    @property
    def needs_waveforms(self) -> bool:
        return self.write_traces or "spectra" in self.analyses or "fwhm" in self.analyses


_SWEEP_KEYS = {
    "parameter": str,
    "values": "values",
    "start": float,
    "stop": float,
    "step": float,
    "analyses": "analyses",
    "output": str,
    "coincidence_tol": float,
    "eta_limit": float,
    "m_cap": int,
    "window": str,
    "segments": int,
    "band": "pair",
    "write_traces": bool,
}


def _check_keys(table, allowed, where):
    if not isinstance(table, dict):
        raise ValidationError("must be a table", where or None)
    for key in table:
        if key not in allowed:
            path = f"{where}.{key}" if where else key
            raise ValidationError("unknown key", path)


def _coerce(value, kind, path):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"must be a number, got {value!r}", path)
        value = float(value)
        if not math.isfinite(value):
            raise ValidationError("must be finite", path)
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"must be an integer, got {value!r}", path)
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ValidationError(f"must be true or false, got {value!r}", path)
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ValidationError(f"must be a string, got {value!r}", path)
        return value
    if kind in ("point", "pair"):
        if not isinstance(value, list) or len(value) != 2:
            raise ValidationError("must be a list of two numbers", path)
        return tuple(_coerce(v, float, f"{path}[{k}]") for k, v in enumerate(value))
    if kind == "values":
        if not isinstance(value, list):
            raise ValidationError("must be a list of numbers", path)
        return tuple(_coerce(v, float, f"{path}[{k}]") for k, v in enumerate(value))
    if kind == "analyses":
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ValidationError("must be a list of strings", path)
        for v in value:
            if v not in ANALYSES:
                raise ValidationError(f"unknown analysis {v!r}; choose from {ANALYSES}", path)
        return tuple(value)
    raise AssertionError(kind)


def _build(cls, table, kinds, where, filled, extra=None):
    kwargs = dict(extra or {})
    for key, kind in kinds.items():
        path = f"{where}.{key}"
        if key in table:
            kwargs[key] = _coerce(table[key], kind, path)
        elif filled is not None:
            filled.append(path)
    try:
        return cls(**kwargs)
    except ValidationError as exc:
        key = exc.key.split(".")[0] if exc.key else None
        raise ValidationError(exc.reason, f"{where}.{key}" if key else where) from None


def _dataclass_kinds(cls):
    return {f.name: float for f in dataclasses.fields(cls)}


def _network(doc, filled):
    sim = doc.get("simulation", {})
    _check_keys(sim, _SIM_KEYS, "simulation")
    sub = doc.get("substrate", {})
    _check_keys(sub, _dataclass_kinds(SubstrateParams), "substrate")
    substrate = _build(SubstrateParams, sub, _dataclass_kinds(SubstrateParams), "substrate",
                       filled)
    oscs = doc.get("oscillator")
    if not isinstance(oscs, list) or not oscs:
        raise ValidationError("at least one [[oscillator]] table is required", "oscillator")
    built = []
    for i, table in enumerate(oscs):
        where = f"oscillator[{i}]"
        _check_keys(table, {**_OSC_KEYS, "switch": None}, where)
        sw_table = table.get("switch", {})
        _check_keys(sw_table, _dataclass_kinds(SwitchParams), f"{where}.switch")
        switch = _build(SwitchParams, sw_table, _dataclass_kinds(SwitchParams),
                        f"{where}.switch", filled)
        osc = _build(OscillatorConfig, table, _OSC_KEYS, where, filled, {"switch": switch})
        for j, other in enumerate(built):
            if other.position == osc.position:
                raise ValidationError(f"duplicates the position of oscillator[{j}]",
                                      f"{where}.position")
        built.append(osc)
    return _build(NetworkConfig, sim, _SIM_KEYS, "simulation", filled,
                  {"oscillators": tuple(built), "substrate": substrate})


def _sweep(doc, base, filled):
    table = doc["sweep"]
    _check_keys(table, _SWEEP_KEYS, "sweep")
    if "parameter" not in table:
        raise ValidationError("is required", "sweep.parameter")
    kw = {}
    for key, kind in _SWEEP_KEYS.items():
        if key in table and key not in ("start", "stop", "step"):
            kw[key] = _coerce(table[key], kind, f"sweep.{key}")
    has_range = any(k in table for k in ("start", "stop", "step"))
    if has_range and "values" in table:
        raise ValidationError("give either values or start/stop/step, not both", "sweep.values")
    if has_range:
        start, stop, step = (_coerce(table.get(k), float, f"sweep.{k}")
                             for k in ("start", "stop", "step"))
        if not step > 0:
            raise ValidationError("must be > 0", "sweep.step")
        if stop < start:
            raise ValidationError("must be >= start", "sweep.stop")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        kw["values"] = tuple(float(f"{start + k * step:.12g}") for k in range(n))
    elif "values" not in table:
        raise ValidationError("give values or start/stop/step", "sweep.values")
    if filled is not None:
        for f in dataclasses.fields(SweepSpec):
            if f.name not in ("base", "parameter", "values") and f.name not in kw:
                filled.append(f"sweep.{f.name}")
    try:
        return SweepSpec(base=base, **kw)
    except ValidationError as exc:
        if exc.key is not None and exc.key.startswith("sweep."):
            raise
        raise ValidationError(exc.reason, "sweep.parameter") from None


def parse_config(text: str, filled: list | None = None):
    """Parse a configuration document.

    Parameters
    ----------
    text : str
        TOML text.
    filled : list, optional
        If given, receives the key paths that took their default value.

    Returns
    -------
    NetworkConfig or SweepSpec
        A sweep specification when the document has a ``[sweep]`` table.

    Raises
    ------
    ValidationError
        With ``key`` set to the offending key path.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"malformed TOML: {exc}") from None
    _check_keys(doc, {"simulation", "substrate", "oscillator", "sweep"}, "")
    base = _network(doc, filled)
    if "sweep" in doc:
        return _sweep(doc, base, filled)
    return base


def load_config(path, filled: list | None = None):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), filled)


def _network_doc(cfg: NetworkConfig) -> dict:
    sim = {k: getattr(cfg, k) for k in _SIM_KEYS}
    sub = dataclasses.asdict(cfg.substrate)
    oscs = []
    for o in cfg.oscillators:
        t = {k: getattr(o, k) for k in _OSC_KEYS}
        t["position"] = list(o.position)
        t["switch"] = dataclasses.asdict(o.switch)
        oscs.append(t)
    return {"simulation": sim, "substrate": sub, "oscillator": oscs}


def export_config(cfg) -> str:
    """TOML text with every value explicit; :func:`parse_config` inverts it."""
    if isinstance(cfg, SweepSpec):
        doc = _network_doc(cfg.base)
        sweep = {"parameter": cfg.parameter, "values": list(cfg.values),
                 "analyses": list(cfg.analyses), "coincidence_tol": cfg.coincidence_tol,
                 "eta_limit": cfg.eta_limit, "m_cap": cfg.m_cap, "window": cfg.window,
                 "segments": cfg.segments, "write_traces": cfg.write_traces}
        if cfg.output is not None:
            sweep["output"] = cfg.output
        if cfg.band is not None:
            sweep["band"] = list(cfg.band)
        doc["sweep"] = sweep
    else:
        doc = _network_doc(cfg)
    return tomli_w.dumps(doc)


def config_hash(cfg) -> str:
    """SHA-256 of the canonical export of ``cfg``."""
    return hashlib.sha256(export_config(cfg).encode()).hexdigest()


_PATH = re.compile(
    r"^(?:oscillator\[(?P<i>\d+)\]\.(?:(?P<sw>switch)\.(?P<sf>\w+)|position\.(?P<ax>[xy])|(?P<of>\w+))"
    r"|substrate\.(?P<sub>\w+)|simulation\.(?P<sim>\w+))$"
)


def _resolve(cfg: NetworkConfig, path: str):
    m = _PATH.match(path)
    if m is None:
        raise ValidationError(f"cannot resolve {path!r}", "sweep.parameter")
    g = m.groupdict()
    if g["i"] is not None:
        i = int(g["i"])
        if i >= len(cfg.oscillators):
            raise ValidationError(f"oscillator index {i} out of range", "sweep.parameter")
        return g, i
    return g, None


def _numeric(obj, name, path):
    names = {f.name for f in dataclasses.fields(obj)}
    if name not in names:
        raise ValidationError(f"{path!r} does not name a field", "sweep.parameter")
    value = getattr(obj, name)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{path!r} is not a numeric field", "sweep.parameter")
    return value


def get_parameter(cfg: NetworkConfig, path: str) -> float:
    """Current value of the numeric field at ``path``."""
    g, i = _resolve(cfg, path)
    if i is None:
        if g["sub"] is not None:
            return _numeric(cfg.substrate, g["sub"], path)
        if g["sim"] == "oscillators":
            raise ValidationError(f"{path!r} is not a numeric field", "sweep.parameter")
        return _numeric(cfg, g["sim"], path)
    osc = cfg.oscillators[i]
    if g["sw"]:
        return _numeric(osc.switch, g["sf"], path)
    if g["ax"]:
        return osc.position["xy".index(g["ax"])]
    if g["of"] in ("switch", "position"):
        raise ValidationError(f"{path!r} is not a numeric field", "sweep.parameter")
    return _numeric(osc, g["of"], path)


def set_parameter(cfg: NetworkConfig, path: str, value: float) -> NetworkConfig:
    """Copy of ``cfg`` with the field at ``path`` set to ``value``."""
    current = get_parameter(cfg, path)
    value = int(value) if isinstance(current, int) else float(value)
    g, i = _resolve(cfg, path)
    if i is None:
        if g["sub"] is not None:
            return dataclasses.replace(cfg, substrate=dataclasses.replace(
                cfg.substrate, **{g["sub"]: value}))
        return dataclasses.replace(cfg, **{g["sim"]: value})
    osc = cfg.oscillators[i]
    if g["sw"]:
        osc = dataclasses.replace(osc, switch=dataclasses.replace(osc.switch, **{g["sf"]: value}))
    elif g["ax"]:
        pos = list(osc.position)
        pos["xy".index(g["ax"])] = value
        osc = dataclasses.replace(osc, position=tuple(pos))
    else:
        osc = dataclasses.replace(osc, **{g["of"]: value})
    oscs = list(cfg.oscillators)
    oscs[i] = osc
    return dataclasses.replace(cfg, oscillators=tuple(oscs))
