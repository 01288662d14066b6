"""Calibrated post-selected CZ: simulated tomography and its fidelity map.

The full pipeline on the desk grid takes a few minutes; pass --quick for
the calibration alone.
"""
import sys

from mgforge.optics import PPBSParams, calibrate_to_targets, ppbs_process, report_json, synthesize_experiment

print("ideal success probability:", ppbs_process(PPBSParams()).trace_norm)

cal = calibrate_to_targets()
print("calibrated config:", cal.config)
print("model figures:", {k: round(v, 4) for k, v in cal.achieved.items()})

if "--quick" not in sys.argv:
    report, _, _ = synthesize_experiment(cal.config, grid="desk")
    print(report_json(report))
