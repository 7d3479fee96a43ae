"""Temperature-sensitive hysteretic model of a single VO2 switch.

The switch is a two-state resistor. In the high-resistance state (HRS) its
resistance falls linearly with the externally induced temperature rise
(TCR law); its switching threshold falls with the square root of the
remaining thermal headroom to the metal-insulator transition. The
low-resistance state (LRS) is metallic and taken as temperature independent.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError, SaturatedHeatingError, ValidationError

__all__ = [
    "SwitchMode",
    "SwitchParams",
    "SwitchState",
    "hrs_resistance",
    "effective_threshold",
]


class SwitchMode(enum.IntEnum):
    HRS = 0
    LRS = 1


@dataclass(frozen=True)
class SwitchParams:
    """Electrical and thermal parameters of one switch.

    Defaults are the measured values of the planar VO2 structures on sapphire:
    5.6 V / 2 V threshold and holding voltages, 200 Ohm / 16 kOhm ON/OFF
    resistances, 2.1 %/K TCR and a 320 K transition temperature.

    Parameters
    ----------
    v_th0 : float
        Threshold voltage at ambient temperature (V).
    v_h : float
        Holding voltage (V).
    r_on, r_off0 : float
        LRS resistance and ambient HRS resistance (Ohm).
    i_th, i_h : float
        Threshold and holding currents (A). Informational; the circuit uses
        the voltage criteria.
    t_transition, t_ambient : float
        Metal-insulator transition and ambient temperatures (K).
    tcr : float
        Temperature coefficient of the HRS resistance (1/K).
    jitter_sigma : float
        Standard deviation of the per-cycle threshold noise (V); 0 disables it.
    """

    v_th0: float = 5.6
    v_h: float = 2.0
    r_on: float = 200.0
    r_off0: float = 16_000.0
    i_th: float = 0.4e-3
    i_h: float = 1.1e-3
    t_transition: float = 320.0
    t_ambient: float = 293.0
    tcr: float = 0.021
    jitter_sigma: float = 0.0

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValidationError(f"must be a finite number, got {value!r}", name)
        if not self.v_th0 > self.v_h > 0:
            raise ValidationError("requires v_th0 > v_h > 0", "v_h")
        if not self.r_off0 > self.r_on > 0:
            raise ValidationError("requires r_off0 > r_on > 0", "r_on")
        if self.r_off0 / self.r_on < 10:
            raise ValidationError("OFF/ON resistance ratio must be at least 10", "r_off0")
        if not self.t_transition > self.t_ambient:
            raise ValidationError("requires t_transition > t_ambient", "t_transition")
        if self.tcr < 0:
            raise ValidationError("must be >= 0", "tcr")
        if self.jitter_sigma < 0:
            raise ValidationError("must be >= 0", "jitter_sigma")
        if self.i_th <= 0 or self.i_h <= 0:
            raise ValidationError("currents must be > 0", "i_th")

    @property
    def headroom(self) -> float:
        """Temperature rise (K) that brings the film to its transition."""
        return self.t_transition - self.t_ambient


@dataclass(frozen=True)
class SwitchState:
    mode: SwitchMode = SwitchMode.HRS
    delta_t_ext: float = 0.0

    def check(self, params: SwitchParams) -> None:
        """Raise if the imposed heating is outside the model's validity range."""
        if self.delta_t_ext < 0:
            raise DomainError("delta_t_ext must be >= 0")
        if self.delta_t_ext >= params.headroom:
            raise SaturatedHeatingError(
                f"delta_t_ext={self.delta_t_ext:g} K reaches the {params.headroom:g} K headroom"
            )


def hrs_resistance(params: SwitchParams, delta_t: float) -> float:
    """OFF-state resistance under an external temperature rise ``delta_t`` (K).

    Linear TCR law clamped from below at the ON resistance.
    """
    if delta_t < 0:
        raise DomainError(f"delta_t must be >= 0, got {delta_t}")
    return max(params.r_on, params.r_off0 * (1.0 - params.tcr * delta_t))


def effective_threshold(params: SwitchParams, delta_t: float, noise: float | None = None) -> float:
    """Switching threshold (V) of a switch pre-heated by ``delta_t`` (K).

    ``v_th0 * sqrt(1 - delta_t / headroom)``: the Joule power needed to reach
    the transition scales with the remaining headroom and with V^2.

    Parameters
    ----------
    params : SwitchParams
    delta_t : float
        External temperature rise, ``0 <= delta_t < headroom``.
    noise : float, optional
        Standard-normal sample for this charging cycle; it is scaled by
        ``params.jitter_sigma``. ``None`` means no jitter.

    Raises
    ------
    SaturatedHeatingError
        If ``delta_t`` reaches the headroom (the switch cannot remain OFF).
    """
    if delta_t < 0:
        raise DomainError(f"delta_t must be >= 0, got {delta_t}")
    headroom = params.headroom
    if delta_t >= headroom:
        raise SaturatedHeatingError(
            f"delta_t={delta_t:g} K reaches the {headroom:g} K transition headroom"
        )
    v = params.v_th0 * math.sqrt(1.0 - delta_t / headroom)
    if noise is not None:
        v += params.jitter_sigma * noise
    return v
