"""Spectral narrowing under phase locking.

With threshold jitter, each oscillator's fundamental has a finite width.
Inside the 1:1 lock band the two oscillators pull each other back into step
and the line narrows. Spectra from short records are noisy, so segments are
averaged within each record.
"""
import dataclasses

from vo2sync import SwitchParams, simulate
from vo2sync.analysis import extract_peaks, fundamental, mean_frequency, spectrum
from vo2sync.harness import load_preset, set_parameter

base = load_preset("strong").base
sw = SwitchParams(jitter_sigma=0.1)
base = dataclasses.replace(base, oscillators=tuple(dataclasses.replace(o, switch=sw)
                                                   for o in base.oscillators),
                           duration=2.0, record_waveforms=True, seed=11)

print(" I1 (uA)   F1 (Hz)  FWHM1 (Hz)   F2 (Hz)  FWHM2 (Hz)")
for i1 in (660e-6, 720e-6, 790e-6):
    trace = simulate(set_parameter(base, "oscillator[0].supply_current", i1))
    row = []
    for i in range(2):
        f = mean_frequency(extract_peaks(trace, oscillator=i))
        s = spectrum(trace.v_c[i], trace.sample_rate, "hann", segments=8)
        row.append(f"{f:9.1f} {fundamental(s, (0.5 * f, 1.5 * f))[1]:10.1f}")
    print(f"{i1 * 1e6:8.0f} " + "  ".join(row))
