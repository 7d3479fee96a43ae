"""Networks of VO2 relaxation oscillators as hybrid dynamical systems.

Each oscillator is a current source ``I_D`` feeding a capacitor ``C`` that is
shunted by a series resistor ``R_i`` and a switch. Within one switch mode the
circuit is linear, so the capacitor voltage is advanced with its exact
exponential solution and the next switching time is found in closed form:

* HRS -> LRS when the device voltage ``V_C R_s / (R_i + R_s)`` reaches the
  (heat-lowered) threshold;
* LRS -> HRS when the capacitor voltage has discharged to the holding voltage.

Oscillators interact only through the substrate temperature, which is
refreshed every ``thermal_update_interval``.
"""
from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .device import SwitchMode, SwitchParams, effective_threshold, hrs_resistance
from .errors import DomainError, ValidationError
from .thermal import TAIL_TOLERANCE, SubstrateParams, switching_energy

__all__ = [
    "OscillatorConfig",
    "NetworkConfig",
    "OscillatorState",
    "EventKind",
    "SwitchEvent",
    "SimTrace",
    "natural_frequency",
    "advance_mode",
    "next_event_time",
    "discharge_parameters",
    "simulate",
    "find_oscillation_band",
]

_UM = 1e-6


@dataclass(frozen=True)
class OscillatorConfig:
    """One oscillator branch.

    ``position`` is in micrometres on the substrate surface. ``initial_voltage``
    is the capacitor voltage at t = 0 (switch starts in HRS).
    """

    supply_current: float = 600e-6
    capacitance: float = 44e-9
    series_resistance: float = 250.0
    switch: SwitchParams = field(default_factory=SwitchParams)
    position: tuple = (0.0, 0.0)
    initial_voltage: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(p) for p in self.position))
        if len(self.position) != 2 or not all(math.isfinite(p) for p in self.position):
            raise ValidationError("must be two finite coordinates", "position")
        if not self.supply_current > 0:
            raise ValidationError("must be > 0", "supply_current")
        if not self.capacitance > 0:
            raise ValidationError("must be > 0", "capacitance")
        if not self.series_resistance >= 0:
            raise ValidationError("must be >= 0", "series_resistance")
        if not self.initial_voltage >= 0:
            raise ValidationError("must be >= 0", "initial_voltage")


@dataclass(frozen=True)
class NetworkConfig:
    """Complete input of :func:`simulate`.

    Setting ``coupling=False`` places every pair of oscillators infinitely far
    apart.
    """

    oscillators: tuple = (OscillatorConfig(),)
    substrate: SubstrateParams = field(default_factory=SubstrateParams)
    duration: float = 0.05
    sample_interval: float = 1e-6
    thermal_update_interval: float = 1e-6
    seed: int = 0
    record_waveforms: bool = True
    coupling: bool = True

    def __post_init__(self):
        object.__setattr__(self, "oscillators", tuple(self.oscillators))
        if not self.oscillators:
            raise ValidationError("at least one oscillator is required", "oscillators")
        if not self.duration > 0:
            raise ValidationError("must be > 0", "duration")
        if not self.sample_interval > 0:
            raise ValidationError("must be > 0", "sample_interval")
        if not self.thermal_update_interval >= self.sample_interval:
            raise ValidationError("must be >= sample_interval", "thermal_update_interval")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise ValidationError("must be an unsigned 64-bit integer", "seed")
        positions = [o.position for o in self.oscillators]
        if len(set(positions)) != len(positions):
            raise ValidationError("oscillator positions must be distinct", "oscillators.position")

    def distances(self) -> np.ndarray:
        """Pairwise source-target distances in metres (inf when uncoupled)."""
        pos = np.array([o.position for o in self.oscillators], dtype=float) * _UM
        d = np.sqrt(((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=-1))
        if not self.coupling:
            d = np.full_like(d, np.inf)
        np.fill_diagonal(d, np.inf)
        return d


@dataclass(frozen=True)
class OscillatorState:
    """Instantaneous state of one oscillator with its frozen thermal input."""

    config: OscillatorConfig
    mode: SwitchMode = SwitchMode.HRS
    v_c: float = 0.0
    delta_t_ext: float = 0.0
    noise: float | None = None

    def switch_resistance(self) -> float:
        if self.mode == SwitchMode.LRS:
            return self.config.switch.r_on
        return hrs_resistance(self.config.switch, self.delta_t_ext)


class EventKind(enum.IntEnum):
    TURN_ON = _kernel.TURN_ON
    TURN_OFF = _kernel.TURN_OFF


@dataclass(frozen=True)
class SwitchEvent:
    """One switching transition.

    ``energy``, ``t_ch`` and ``p_avg`` describe the completed discharge and are
    set on TURN_OFF only. ``v_th_eff`` is the threshold that triggered the
    discharge.
    """

    oscillator_id: int
    time: float
    kind: EventKind
    v_th_eff: float | None = None
    energy: float | None = None
    t_ch: float | None = None

    @property
    def p_avg(self) -> float | None:
        if self.energy is None or not self.t_ch:
            return None
        return self.energy / self.t_ch


@dataclass(frozen=True, eq=False)
class SimTrace:
    """Output of :func:`simulate`.

    Waveform arrays have shape ``(n_oscillators, n_samples)`` and are empty
    when waveforms were not recorded. ``event_times``, ``event_osc`` and
    ``event_kind`` hold the event log as arrays, time-ordered with ties broken
    by oscillator index. ``latched`` maps oscillator id to the time its switch
    latched ON.
    """

    config: NetworkConfig
    time: np.ndarray
    v_c: np.ndarray
    v_sw: np.ndarray
    current: np.ndarray
    delta_t: np.ndarray
    event_times: np.ndarray
    event_osc: np.ndarray
    event_kind: np.ndarray
    event_energy: np.ndarray
    event_t_ch: np.ndarray
    event_v_th: np.ndarray
    latched: dict

    @property
    def n_oscillators(self) -> int:
        return len(self.config.oscillators)

    @property
    def events(self) -> list:
        out = []
        for t, i, k, e, tc, v in zip(self.event_times, self.event_osc, self.event_kind,
                                     self.event_energy, self.event_t_ch, self.event_v_th):
            out.append(SwitchEvent(
                int(i), float(t), EventKind(int(k)),
                v_th_eff=None if math.isnan(v) else float(v),
                energy=None if math.isnan(e) else float(e),
                t_ch=None if math.isnan(tc) else float(tc),
            ))
        return out

    def turn_on_times(self, oscillator: int) -> np.ndarray:
        sel = (self.event_osc == oscillator) & (self.event_kind == _kernel.TURN_ON)
        return self.event_times[sel]

    def discharges(self, oscillator: int) -> dict:
        """Arrays of the completed discharges (TURN_OFF events) of one oscillator."""
        sel = (self.event_osc == oscillator) & (self.event_kind == _kernel.TURN_OFF)
        e, tc = self.event_energy[sel], self.event_t_ch[sel]
        return {"time": self.event_times[sel], "energy": e, "t_ch": tc, "p_avg": e / tc,
                "v_th_eff": self.event_v_th[sel]}

    @property
    def sample_rate(self) -> float:
        return 1.0 / self.config.sample_interval


def natural_frequency(I_D, C, v_th):
    """Charging-limited self-oscillation frequency ``I_D / (C v_th)`` (Hz)."""
    if not (I_D > 0 and C > 0 and v_th > 0):
        raise DomainError("I_D, C and v_th must all be > 0")
    return I_D / (C * v_th)


def advance_mode(state: OscillatorState, dt: float) -> float:
    """Capacitor voltage after ``dt`` seconds with the switch mode held fixed."""
    osc = state.config
    r = osc.series_resistance + state.switch_resistance()
    return _kernel.relax(state.v_c, osc.supply_current * r, osc.capacitance * r, dt)


def next_event_time(state: OscillatorState) -> float | None:
    """Seconds until the switch changes mode, or ``None`` if it never does.

    The threshold (including the state's noise sample) and the OFF resistance
    are frozen at the values implied by ``state.delta_t_ext``.
    """
    osc = state.config
    sw = osc.switch
    if state.mode == SwitchMode.HRS:
        v_th = effective_threshold(sw, state.delta_t_ext, state.noise)
        dt = _kernel.hrs_crossing(state.v_c, osc.supply_current, osc.capacitance,
                                  osc.series_resistance, state.switch_resistance(), v_th)
    else:
        dt = _kernel.lrs_crossing(state.v_c, osc.supply_current, osc.capacitance,
                                  osc.series_resistance, sw.r_on, sw.v_h)
    return None if dt < 0 else float(dt)


def discharge_parameters(osc: OscillatorConfig, v_th_eff: float | None = None):
    """Energy (J) and duration (s) of one discharge of an uncoupled oscillator.

    The discharge starts when the device voltage reaches ``v_th_eff``
    (default: the ambient threshold) and ends at the holding voltage.
    Returns ``(E, t_ch)``; ``t_ch`` is ``inf`` if the switch never turns off.
    """
    sw = osc.switch
    v_th = sw.v_th0 if v_th_eff is None else v_th_eff
    r_off = sw.r_off0
    v_on = v_th * (osc.series_resistance + r_off) / r_off
    t_ch = _kernel.lrs_crossing(v_on, osc.supply_current, osc.capacitance,
                                osc.series_resistance, sw.r_on, sw.v_h)
    energy = switching_energy(osc.capacitance, v_th, sw.v_h, sw.r_on, osc.series_resistance)
    return energy, (math.inf if t_ch < 0 else t_ch)


def _noise_streams(seed, n):
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(n)]


_NOISE_BLOCK = 4096


def simulate(config: NetworkConfig) -> SimTrace:
    """Integrate the oscillator network for ``config.duration`` seconds.

    Deterministic: the same configuration (including ``seed``) gives a
    bit-identical trace. Switches that latch ON (saturated heating, or a load
    line that never returns below the holding voltage) are reported in
    ``SimTrace.latched`` and stay in LRS.
    """
    oscs = config.oscillators
    n = len(oscs)
    P = np.array([
        [o.supply_current, o.capacitance, o.series_resistance, o.switch.v_th0, o.switch.v_h,
         o.switch.r_on, o.switch.r_off0, o.switch.tcr, o.switch.headroom, o.switch.jitter_sigma]
        for o in oscs
    ], dtype=float)
    S = np.zeros((n, 6))
    S[:, _kernel.S_VC] = [o.initial_voltage for o in oscs]
    S[:, _kernel.S_LATCH] = -1.0
    SI = np.zeros((n, 3), dtype=np.int64)
    streams = _noise_streams(config.seed, n)
    noise = np.stack([g.standard_normal(_NOISE_BLOCK) for g in streams])
    for i, o in enumerate(oscs):
        if o.switch.jitter_sigma > 0:
            S[i, _kernel.S_JIT] = _kernel._clip_jitter(o.switch.jitter_sigma * noise[i, 0],
                                                       o.switch.v_th0 - o.switch.v_h)
            SI[i, _kernel.SI_NOISE] = 1

    h_t = config.thermal_update_interval
    h_s = config.sample_interval
    n_intervals = int(math.ceil(config.duration / h_t - 1e-9))
    n_samples = int(math.ceil(config.duration / h_s - 1e-9))
    shape = (4, n, n_samples) if config.record_waveforms else (4, n, 0)
    samples = np.zeros(shape)

    cap = 1024
    src_f = np.zeros((cap, 3))
    src_osc = np.zeros(cap, dtype=np.int64)
    src_hz = np.zeros((cap, n))
    src_hmax = np.zeros(cap)
    ev_f = np.zeros((cap, 4))
    ev_i = np.zeros((cap, 2), dtype=np.int64)
    cnt = np.zeros(3, dtype=np.int64)
    d_t = np.zeros(n)
    dist = config.distances()
    sub = config.substrate

    j = 0
    while True:
        status, j = _kernel.run(j, n_intervals, h_t, config.duration, h_s, n_samples,
                                P, S, SI, cnt, noise, dist, sub.heat_capacity,
                                sub.diffusivity, TAIL_TOLERANCE, src_f, src_osc, src_hz,
                                src_hmax, ev_f, ev_i, samples, d_t)
        if status == _kernel.DONE:
            break
        if status == _kernel.NEED_EVENTS:
            ev_f = np.concatenate([ev_f, np.zeros_like(ev_f)])
            ev_i = np.concatenate([ev_i, np.zeros_like(ev_i)])
        elif status == _kernel.NEED_SOURCES:
            src_f = np.concatenate([src_f, np.zeros_like(src_f)])
            src_osc = np.concatenate([src_osc, np.zeros_like(src_osc)])
            src_hz = np.concatenate([src_hz, np.zeros_like(src_hz)])
            src_hmax = np.concatenate([src_hmax, np.zeros_like(src_hmax)])
        elif status == _kernel.NEED_NOISE:
            noise = np.concatenate(
                [noise, np.stack([g.standard_normal(_NOISE_BLOCK) for g in streams])], axis=1)

    m = cnt[2]
    ev_f, ev_i = ev_f[:m], ev_i[:m]
    order = np.lexsort((ev_i[:, 0], ev_f[:, 0]))
    ev_f, ev_i = ev_f[order], ev_i[order]
    latched = {i: float(S[i, _kernel.S_LATCH]) for i in range(n) if S[i, _kernel.S_LATCH] >= 0}
    return SimTrace(
        config=config,
        time=np.arange(n_samples) * h_s,
        v_c=samples[0], v_sw=samples[1], current=samples[2], delta_t=samples[3],
        event_times=ev_f[:, 0].copy(), event_osc=ev_i[:, 0].copy(),
        event_kind=ev_i[:, 1].copy(), event_energy=ev_f[:, 1].copy(),
        event_t_ch=ev_f[:, 2].copy(), event_v_th=ev_f[:, 3].copy(),
        latched=latched,
    )


def _sustained(times, duration, min_cycles, max_cv):
    if len(times) < min_cycles + 2:
        return False
    periods = np.diff(times[1:])  # the first cycle charges from the initial voltage
    mean = periods.mean()
    if duration - times[-1] > 3 * mean:
        return False
    return periods.std() / mean < max_cv


def find_oscillation_band(template: NetworkConfig, I_min, I_max, step, oscillator=0,
                          min_cycles=20, max_cv=0.2):
    """Largest contiguous supply-current range with sustained periodic switching.

    Sweeps the supply current of ``oscillator`` over ``I_min, I_min + step, ...,
    I_max``. A point counts when the oscillator completes at least
    ``min_cycles`` cycles, keeps switching until the end of the run, and its
    period has a coefficient of variation below ``max_cv``.

    Returns
    -------
    (lower, upper) : tuple of float, or None if no current oscillates.
    """
    if not step > 0:
        raise DomainError("step must be > 0")
    if I_max < I_min:
        raise DomainError("I_max must be >= I_min")
    n = int(math.floor((I_max - I_min) / step + 1e-9)) + 1
    currents = I_min + step * np.arange(n)
    ok = []
    for k, current in enumerate(currents):
        oscs = list(template.oscillators)
        oscs[oscillator] = dataclasses.replace(oscs[oscillator], supply_current=float(current))
        cfg = dataclasses.replace(template, oscillators=tuple(oscs), record_waveforms=False,
                                  seed=template.seed ^ k)
        trace = simulate(cfg)
        ok.append(oscillator not in trace.latched and _sustained(
            trace.turn_on_times(oscillator), cfg.duration, min_cycles, max_cv))
    best, start = None, None
    for k, flag in enumerate(ok + [False]):
        if flag and start is None:
            start = k
        elif not flag and start is not None:
            if best is None or k - start > best[1] - best[0]:
                best = (start, k)
            start = None
    if best is None:
        return None
    return float(currents[best[0]]), float(currents[best[1] - 1])
