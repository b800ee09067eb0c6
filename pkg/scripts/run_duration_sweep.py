#!/usr/bin/env python3
"""Desk-scale mission-duration sweep (hybrid vs heuristic and random baselines)."""
import sys

from risuav.cli import main

if __name__ == "__main__":
    extra = sys.argv[1:]
    sys.exit(main([
        "sweep", "--preset", "desk", "--param", "T_seconds",
        "--values=40,70,100", "--reps", "500",
        "--schemes", "hybrid,heuristic_trajectory,random_phase",
        "--out-dir", "out/duration_sweep", *extra,
    ]))
