"""Heat from one discharge reaching a neighbouring switch.

Each discharge deposits its energy as a short heat pulse in the substrate.
A neighbour a few micrometres away sees a delayed temperature bump; its
threshold drops with temperature, so the bump can make it fire early.
"""
import numpy as np

from vo2sync import OscillatorConfig, SubstrateParams
from vo2sync.circuit import discharge_parameters
from vo2sync.thermal import coupling_radius, peak_response, pulse_response

sub = SubstrateParams()  # sapphire
energy, t_ch = discharge_parameters(OscillatorConfig(capacitance=44e-9))
print(f"one discharge: E = {energy:.3g} J over t_ch = {t_ch * 1e6:.2f} us")

for d_um in (6, 12, 21, 40):
    peak, delay = peak_response(energy, t_ch, d_um * 1e-6, sub)
    print(f"  d = {d_um:2d} um: peak dT = {peak:6.3f} K after {delay * 1e6:5.1f} us")

t = np.array([5, 10, 20, 40, 80, 160]) * 1e-6
dt = pulse_response(energy, t_ch, 12e-6, t, sub, method="closed")
print("\ndT(t) at 12 um:", " ".join(f"{x:.3f}" for x in dt), "K")

# radius at which the bump falls to the 0.2 K sensing threshold
print("\n   C (nF)   R_TC (um)")
for c in (0.5e-9, 4.4e-9, 44e-9, 440e-9):
    e, t = discharge_parameters(OscillatorConfig(capacitance=c))
    print(f"{c * 1e9:9.1f} {coupling_radius(e, t, sub) * 1e6:10.2f}")
