"""Heat released by capacitor discharges and its spread through the substrate.

The substrate is a homogeneous half-space with an adiabatic top surface; each
switch is a point source on that surface. A discharge deposits its energy as a
rectangular power pulse of duration ``t_ch``. Temperature rises from all
sources superpose linearly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import integrate

from .errors import DomainError, NumericalError, ValidationError

__all__ = [
    "SubstrateParams",
    "HeatSource",
    "EventHistory",
    "switching_energy",
    "instantaneous_point_response",
    "pulse_response",
    "peak_response",
    "coupling_radius",
    "response_horizon",
    "ambient_delta_t",
    "TAIL_TOLERANCE",
]

#: Per-event temperature (K) below which a decaying tail is dropped.
TAIL_TOLERANCE = 1e-3

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SubstrateParams:
    """Thermal constants of the substrate.

    Defaults are for sapphire: conductivity 35 W/(m K) with handbook density
    3980 kg/m^3 and specific heat 760 J/(kg K).
    """

    conductivity: float = 35.0
    density: float = 3980.0
    specific_heat: float = 760.0
    sensitivity_threshold: float = 0.2

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise ValidationError(f"must be a finite positive number, got {value!r}", name)

    @property
    def heat_capacity(self) -> float:
        """Volumetric heat capacity rho*c (J/(m^3 K))."""
        return self.density * self.specific_heat

    @property
    def diffusivity(self) -> float:
        """Thermal diffusivity chi/(rho*c) (m^2/s)."""
        return self.conductivity / (self.density * self.specific_heat)


def switching_energy(C, v_th_eff, v_h, r_on, r_i):
    """Energy (J) dissipated in the switch by one capacitor discharge.

    The capacitor swings from ``v_th_eff`` down to ``v_h``; the series resistor
    takes its ``r_i / (r_on + r_i)`` share of the released energy.
    """
    if not v_th_eff >= v_h > 0:
        raise DomainError(f"requires v_th_eff >= v_h > 0, got {v_th_eff}, {v_h}")
    if C <= 0 or r_on <= 0 or r_i < 0:
        raise DomainError("requires C > 0, r_on > 0, r_i >= 0")
    return (C * v_th_eff**2 / 2 - C * v_h**2 / 2) * r_on / (r_on + r_i)


def instantaneous_point_response(E, d, t, substrate: SubstrateParams):
    """Temperature rise (K) at surface distance ``d`` a time ``t`` after an
    instantaneous release of ``E`` joules.

    Vectorised over ``t``.
    """
    if np.any(np.asarray(d) <= 0):
        raise DomainError("distance must be > 0 (the point source is singular)")
    alpha = substrate.diffusivity
    t = np.asarray(t, dtype=float)
    tt = np.where(t > 0, t, 1.0)
    val = (2.0 * E / substrate.heat_capacity) * (4 * np.pi * alpha * tt) ** -1.5 * np.exp(
        -(d**2) / (4 * alpha * tt)
    )
    out = np.where(t > 0, val, 0.0)
    return float(out) if out.ndim == 0 else out


@njit(cache=True)
def _pulse_closed(E, t_ch, d, u, rhoc, alpha):
    # Rectangular pulse; uses int_0^u K = erfc(d / 2 sqrt(alpha u)) / (4 pi alpha d).
    if u <= 0.0 or E == 0.0 or d == math.inf:
        return 0.0
    pref = 2.0 * E / (rhoc * t_ch) / (4.0 * math.pi * alpha * d)
    x1 = d / (2.0 * math.sqrt(alpha * u))
    if u <= t_ch:
        return pref * math.erfc(x1)
    x2 = d / (2.0 * math.sqrt(alpha * (u - t_ch)))
    if x1 < 0.5:
        return pref * (math.erf(x2) - math.erf(x1))
    return pref * (math.erfc(x1) - math.erfc(x2))


def _pulse_quad(E, t_ch, d, t, substrate):
    if t <= 0:
        return 0.0
    alpha = substrate.diffusivity
    amp = 2.0 * E / substrate.heat_capacity

    def kernel(u):
        return (4 * math.pi * alpha * u) ** -1.5 * math.exp(-(d * d) / (4 * alpha * u))

    lo = max(t - t_ch, 0.0)
    t_star = d * d / (6 * alpha)
    points = [t_star] if lo < t_star < t else None
    val, err, info = integrate.quad(
        kernel, lo, t, epsrel=1e-10, epsabs=0.0, limit=200, points=points, full_output=1
    )[:3]
    if val > 0 and err > 1e-6 * val:
        raise NumericalError(
            f"pulse quadrature did not converge: value={val:.6g}, error estimate={err:.3g}, "
            f"interval=[{lo:.6g}, {t:.6g}] s, evaluations={info['neval']}"
        )
    return amp * val / t_ch


def pulse_response(E, t_ch, d, t, substrate: SubstrateParams, method="quad"):
    """Temperature rise (K) at distance ``d`` and time ``t`` after the start of
    a discharge that dissipates ``E`` uniformly over ``t_ch`` seconds.

    Parameters
    ----------
    method : {'quad', 'closed'}
        ``'quad'`` integrates the instantaneous kernel over the pulse with
        adaptive quadrature; ``'closed'`` uses the equivalent erfc expression.
        Both agree to better than 1e-6 relative.
    """
    if t_ch <= 0:
        raise DomainError("t_ch must be > 0")
    if d <= 0:
        raise DomainError("distance must be > 0 (the point source is singular)")
    if method == "closed":
        f = lambda tt: _pulse_closed(E, t_ch, d, tt, substrate.heat_capacity, substrate.diffusivity)
    elif method == "quad":
        f = lambda tt: _pulse_quad(E, t_ch, d, tt, substrate)
    else:
        raise ValueError(f"unknown method {method!r}")
    if np.ndim(t) == 0:
        return float(f(float(t)))
    return np.array([f(float(tt)) for tt in np.asarray(t).ravel()]).reshape(np.shape(t))


def peak_response(E, t_ch, d, substrate: SubstrateParams, method="closed"):
    """Maximum of :func:`pulse_response` over time and the delay at which it occurs.

    Golden-section search on ``[d^2/(6 alpha), d^2/(6 alpha) + t_ch + 5 d^2/alpha]``;
    the response is unimodal there.

    Returns
    -------
    (delta_t_peak, delay) : tuple of float
        Kelvin and seconds after the start of the pulse.
    """
    if t_ch <= 0:
        raise DomainError("t_ch must be > 0")
    if d <= 0:
        raise DomainError("distance must be > 0")
    alpha = substrate.diffusivity
    lo = d * d / (6 * alpha)
    hi = lo + t_ch + 5 * d * d / alpha

    def f(t):
        return pulse_response(1.0, t_ch, d, t, substrate, method=method)

    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    e = a + _GOLDEN * (b - a)
    fc, fe = f(c), f(e)
    for _ in range(200):
        if b - a <= 1e-9 * hi:
            break
        if fc > fe:
            b, e, fe = e, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + _GOLDEN * (b - a)
            fe = f(e)
    t_peak = (a + b) / 2
    peak = f(t_peak)
    edge = max(f(lo), f(hi))
    if not peak >= edge:
        raise NumericalError(f"peak search bracket [{lo:.3g}, {hi:.3g}] s does not enclose a maximum")
    # Linear in E: search on the unit response, then scale.
    return E * peak, t_peak


def coupling_radius(E, t_ch, substrate: SubstrateParams, method="closed"):
    """Distance (m) at which the peak temperature rise falls to the substrate's
    sensitivity threshold, or ``None`` when no distance reaches it.

    Bisection on ``d`` to 1e-3 relative.
    """
    threshold = substrate.sensitivity_threshold
    if E <= 0:
        return None

    def excess(d):
        return peak_response(E, t_ch, d, substrate, method=method)[0] - threshold

    lo = 1e-9
    if excess(lo) <= 0:
        return None
    hi = 1e-6
    while excess(hi) > 0:
        lo, hi = hi, hi * 2
        if hi > 1.0:
            raise NumericalError("coupling radius exceeds 1 m; check the inputs")
    while (hi - lo) > 1e-4 * hi:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@njit(cache=True)
def _horizon_closed(E, t_ch, d, rhoc, alpha, tol):
    # Time after pulse start past which the response stays below ``tol``.
    if E == 0.0 or d == math.inf:
        return 0.0
    u_lo = t_ch + d * d / (6.0 * alpha)  # response is decreasing beyond this point
    if _pulse_closed(E, t_ch, d, u_lo, rhoc, alpha) < tol:
        return u_lo
    # bound: response <= 2E/rhoc * (4 pi alpha (u - t_ch))^-1.5 for u > t_ch
    u_hi = t_ch + (2.0 * E / (rhoc * tol)) ** (2.0 / 3.0) / (4.0 * math.pi * alpha)
    if u_hi < u_lo:
        u_hi = 2.0 * u_lo
    while _pulse_closed(E, t_ch, d, u_hi, rhoc, alpha) >= tol:
        u_hi *= 2.0
    for _ in range(60):
        mid = 0.5 * (u_lo + u_hi)
        if _pulse_closed(E, t_ch, d, mid, rhoc, alpha) >= tol:
            u_lo = mid
        else:
            u_hi = mid
        if u_hi - u_lo <= 1e-9 * u_hi:
            break
    return u_hi


def response_horizon(E, t_ch, d, substrate: SubstrateParams, tol=TAIL_TOLERANCE):
    """Time (s) after a pulse starts beyond which its response at ``d`` stays
    below ``tol`` kelvin."""
    return float(_horizon_closed(E, t_ch, d, substrate.heat_capacity, substrate.diffusivity, tol))


@dataclass(frozen=True)
class HeatSource:
    time: float
    energy: float
    t_ch: float
    position: tuple[float, float]


@dataclass
class EventHistory:
    """Heat sources emitted by each oscillator, in time order.

    ``positions`` maps oscillator id to its surface position in metres.
    """

    positions: dict = field(default_factory=dict)
    sources: dict = field(default_factory=dict)

    def add(self, oscillator, time, energy, t_ch):
        if energy < 0 or t_ch <= 0:
            raise DomainError("heat source needs E >= 0 and t_ch > 0")
        seq = self.sources.setdefault(oscillator, [])
        if seq and time < seq[-1].time:
            raise DomainError("heat sources must be added in time order")
        seq.append(HeatSource(time, energy, t_ch, tuple(self.positions[oscillator])))

    def __len__(self):
        return sum(len(v) for v in self.sources.values())


def ambient_delta_t(history: EventHistory, target, t, substrate: SubstrateParams,
                    tol=TAIL_TOLERANCE):
    """Temperature rise (K) at oscillator ``target`` at time ``t`` from the
    discharges of every other oscillator.

    Sources whose decaying tail is already below ``tol`` are skipped.
    """
    tx, ty = history.positions[target]
    rhoc, alpha = substrate.heat_capacity, substrate.diffusivity
    total = 0.0
    for osc, seq in history.sources.items():
        if osc == target:
            continue
        for src in seq:
            u = t - src.time
            if u <= 0:
                continue
            d = math.hypot(src.position[0] - tx, src.position[1] - ty)
            if u > _horizon_closed(src.energy, src.t_ch, d, rhoc, alpha, tol):
                continue
            total += _pulse_closed(src.energy, src.t_ch, d, u, rhoc, alpha)
    return total
