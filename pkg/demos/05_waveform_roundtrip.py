"""From a simulated run to a waveform file and back through the CLI.

``vo2sync analyze`` accepts the same CSV dialect the simulator writes, so a
measured oscilloscope capture and a simulated trace go through the same
peak detection and SHR analysis.
"""
import json
import tempfile
from pathlib import Path

from vo2sync import NetworkConfig, OscillatorConfig, simulate
from vo2sync.harness import export_config, export_trace
from vo2sync.harness.cli import main

a = OscillatorConfig(supply_current=700e-6, capacitance=135e-9, position=(0.0, 0.0))
b = OscillatorConfig(supply_current=720e-6, capacitance=135e-9, position=(12.0, 0.0))
cfg = NetworkConfig(oscillators=(a, b), duration=0.1, seed=4)

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    (tmp / "pair.toml").write_text(export_config(cfg))
    export_trace(simulate(cfg), tmp / "current.csv")
    print("coupling radii:")
    main(["radius", "-c", str(tmp / "pair.toml")])
    code = main(["analyze", "--ch1", str(tmp / "current.csv"), "--tol", "1e-4",
                 "-o", str(tmp / "result.json")])
    result = json.loads((tmp / "result.json").read_text())
    print(f"\nanalyze exit code {code}: {result['n_peaks']} peaks, "
          f"SHR {result['report']['shr']}, eta {result['report']['eta']:.1f} %")
