"""A single VO2 relaxation oscillator.

The capacitor charges through the series resistor and the insulating switch
until the device voltage reaches the threshold; the switch turns metallic,
dumps the charge, and turns back off at the holding voltage. The frequency
grows with the supply current.
"""
import numpy as np

from vo2sync import NetworkConfig, OscillatorConfig, natural_frequency, simulate
from vo2sync.analysis import extract_peaks, mean_frequency

osc = OscillatorConfig(supply_current=600e-6, capacitance=44e-9, series_resistance=250.0)
trace = simulate(NetworkConfig(oscillators=(osc,), duration=0.02))

v = trace.v_c[0]
print(f"V_C swings between {v[trace.time > 2e-3].min():.2f} and {v.max():.2f} V")
print(f"{len(trace.turn_on_times(0))} discharges in {trace.config.duration * 1e3:.0f} ms")

# frequency vs supply current, compared with the ideal charging law
print("\n I_D (uA)   F (Hz)   I_D/(C V_th) (Hz)")
for i_d in np.arange(600e-6, 881e-6, 40e-6):
    cfg = NetworkConfig(oscillators=(OscillatorConfig(supply_current=i_d),), duration=0.05,
                        record_waveforms=False)
    f = mean_frequency(extract_peaks(simulate(cfg)))
    print(f"{i_d * 1e6:8.0f} {f:9.1f} {natural_frequency(i_d, 44e-9, 5.6):12.1f}")

# the ideal law ignores the holding voltage and leakage through the insulating
# state, hence the gap at low current
