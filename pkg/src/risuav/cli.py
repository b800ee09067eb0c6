"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 runtime/solver error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import (ConfigError, PRESETS, ScenarioConfig, SolverError,
                     config_to_text, full_scale_scenario, load_config)
from .pipeline import SCHEMES, sweep, write_campaign


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="risuav",
                                description="RIS-aided UAV downlink: offline-online design and benchmarks")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, out_default):
        sp.add_argument("--config", help="scenario config file")
        sp.add_argument("--preset", choices=sorted(PRESETS), default="desk",
                        help="built-in scenario (ignored when --config is given)")
        sp.add_argument("--seed", type=int, help="override the scenario seed")
        sp.add_argument("--out-dir", default=out_default, help="artifact directory")
        sp.add_argument("--reps", type=int, default=200,
                        help="Monte-Carlo evaluation realizations per scheme")

    sp = sub.add_parser("simulate", help="evaluate schemes at the native scenario parameters")
    add_common(sp, "out/simulate")
    sp.add_argument("--schemes", default="hybrid",
                    help="comma-separated scheme list")

    sp = sub.add_parser("benchmark", help="evaluate every benchmark scheme at the native scenario")
    add_common(sp, "out/benchmark")

    sp = sub.add_parser("sweep", help="sweep beta or the mission duration across schemes")
    add_common(sp, "out/sweep")
    sp.add_argument("--param", required=True, choices=["beta_db", "T_seconds"])
    sp.add_argument("--values", required=True,
                    help="comma-separated sweep values, e.g. -5,0,5,10")
    sp.add_argument("--schemes", default=",".join(SCHEMES))

    sp = sub.add_parser("validate", help="parse and validate a config file")
    sp.add_argument("--config", required=True)

    sp = sub.add_parser("export-default-config", help="print the full-scale default parameter set")
    sp.add_argument("--out", help="write to this file instead of stdout")
    return p


def _load_scenario(args) -> ScenarioConfig:
    if args.config:
        return load_config(args.config)
    sc = PRESETS[args.preset]()
    return sc


def _parse_schemes(raw: str):
    schemes = tuple(s.strip() for s in raw.split(",") if s.strip())
    for s in schemes:
        if s not in SCHEMES:
            raise ConfigError(f"unknown scheme: {s}")
    if not schemes:
        raise ConfigError("schemes list is empty")
    return schemes


def _native_sweep_value(scenario: ScenarioConfig) -> float:
    """Native scenarios are reported as a singleton T sweep so every CSV row
    carries a numeric sweep_value."""
    return scenario.N * scenario.delta_t


def _run_and_report(scenario, param, values, schemes, reps, out_dir) -> int:
    result = sweep(param, values, scenario, schemes=schemes, reps=reps)
    rates_path = write_campaign(out_dir, result, scenario)
    print(f"wrote {rates_path} ({len(values)} value(s) x {len(schemes)} scheme(s), "
          f"{reps} realizations each)")
    failed = False
    for scheme in schemes:
        for value in values:
            cell = result.cells[(scheme, value)]
            if cell.error is not None:
                print(f"  {scheme} @ {value}: ERROR {cell.error}")
                failed = True
            else:
                r = cell.result
                print(f"  {scheme} @ {value}: {r.mean_rate:.4f} "
                      f"+/- {r.std_error:.4f} bits/s/Hz")
    return 2 if failed else 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "export-default-config":
            text = config_to_text(full_scale_scenario())
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
            return 0

        if args.command == "validate":
            load_config(args.config)
            print(f"OK: {args.config}")
            return 0

        scenario = _load_scenario(args)
        if args.seed is not None:
            scenario = replace(scenario, seed=args.seed)

        if args.command in ("simulate", "benchmark"):
            schemes = SCHEMES if args.command == "benchmark" else _parse_schemes(args.schemes)
            return _run_and_report(scenario, "T_seconds", [_native_sweep_value(scenario)],
                                   schemes, args.reps, args.out_dir)

        if args.command == "sweep":
            schemes = _parse_schemes(args.schemes)
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError:
                raise ConfigError(f"cannot parse --values: {args.values!r}") from None
            if not values:
                raise ConfigError("--values is empty")
            return _run_and_report(scenario, args.param, values, schemes,
                                   args.reps, args.out_dir)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except SolverError as e:
        print(f"solver error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
