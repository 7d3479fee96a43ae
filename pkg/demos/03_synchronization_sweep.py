"""Synchronization plateaus of two thermally coupled oscillators.

Oscillator 2 runs at a fixed 720 uA. Sweeping oscillator 1 reveals
rational locks F1/F2 = SHR, each with synchronization efficiency eta
above 90 %. The full strong-coupling preset takes about a minute; a
coarser grid is used here.
"""
import dataclasses
from fractions import Fraction

from vo2sync.harness import load_preset, run_sweep

spec = load_preset("strong")
spec = dataclasses.replace(spec, values=spec.values[::3])
records = run_sweep(spec)

print(" I1 (uA)   F1 (Hz)   F2 (Hz)   SHR    eta (%)")
for r in records:
    mark = "  locked" if r.synchronized else ""
    print(f"{r.value * 1e6:8.0f} {r.f1_hz:9.1f} {r.f2_hz:9.1f}   {r.shr or '-':5s} "
          f"{r.eta:7.1f}{mark}")

plateaus = sorted({r.shr for r in records if r.synchronized}, key=Fraction)
print("\nplateaus with eta > 90 %:", ", ".join(plateaus))
