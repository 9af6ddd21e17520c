"""
Experiment harness: runs scheme comparisons over parameter sweeps and writes
CSV tables, run manifests and raw per-trial dumps.
"""
