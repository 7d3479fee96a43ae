"""Thermally coupled VO2 relaxation oscillators: simulation and synchronization analysis."""
from .errors import (
    DomainError,
    NumericalError,
    ParseError,
    SaturatedHeatingError,
    ValidationError,
    VO2SyncError,
)
from .device import SwitchMode, SwitchParams, SwitchState, effective_threshold, hrs_resistance
from .thermal import (
    EventHistory,
    SubstrateParams,
    ambient_delta_t,
    coupling_radius,
    instantaneous_point_response,
    peak_response,
    pulse_response,
    switching_energy,
)
from .circuit import (
    EventKind,
    NetworkConfig,
    OscillatorConfig,
    OscillatorState,
    SimTrace,
    SwitchEvent,
    advance_mode,
    discharge_parameters,
    find_oscillation_band,
    natural_frequency,
    next_event_time,
    simulate,
)

__version__ = "0.1.0"
