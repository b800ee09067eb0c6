#!/usr/bin/env python3
"""Desk-scale Rician-factor sweep over all benchmark schemes.

Writes rates.csv, per-value trajectory/schedule CSVs and manifest.json under
out/beta_sweep; render with `render_figures out/beta_sweep/manifest.json figs`.
"""
import sys

from risuav.cli import main

if __name__ == "__main__":
    extra = sys.argv[1:]
    sys.exit(main([
        "sweep", "--preset", "desk", "--param", "beta_db",
        "--values=-5,0,5,10", "--reps", "500",
        "--out-dir", "out/beta_sweep", *extra,
    ]))
