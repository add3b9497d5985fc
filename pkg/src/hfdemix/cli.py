"""Benchmark command line: `bench run` for sweeps, `bench single` for one trial."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .bench import (PROFILES, ExperimentConfig, config_from_dict,
                    load_manifest_config, overlay_config, run_sweep, run_trial)
from .errors import ConfigurationError


def _load_config(args) -> ExperimentConfig:
    if getattr(args, "manifest", None):
        return load_manifest_config(args.manifest)
    base = None
    if args.profile:
        if args.profile not in PROFILES:
            raise ConfigurationError(
                f"unknown profile '{args.profile}'; choose from {sorted(PROFILES)}")
        base = PROFILES[args.profile]
    if args.config:
        patch = json.loads(Path(args.config).read_text())
        config = overlay_config(base, patch) if base else config_from_dict(patch)
    elif base is not None:
        config = base
    else:
        raise ConfigurationError("provide --config, --profile or --manifest")
    if args.methods:
        config = overlay_config(config, {"methods": args.methods.split(",")})
    return config


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Hybrid-field channel estimation benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a Monte-Carlo sweep")
    run_p.add_argument("--config", help="JSON experiment config (full or overlay)")
    run_p.add_argument("--profile", choices=sorted(PROFILES),
                       help="named base configuration")
    run_p.add_argument("--manifest", help="re-run a sweep from its manifest.json")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--methods", help="comma-separated subset, e.g. anm,omp")
    run_p.add_argument("--jobs", type=int, default=1, help="parallel workers")

    single_p = sub.add_parser("single", help="run one trial and print the record")
    single_p.add_argument("--config", help="JSON experiment config")
    single_p.add_argument("--profile", choices=sorted(PROFILES), default="desk")
    single_p.add_argument("--methods", help="comma-separated subset")
    single_p.add_argument("--seed", type=int, help="override the derived trial seed")
    single_p.add_argument("--point", type=float,
                          help="sweep point value (default: first sweep value)")
    single_p.add_argument("--trial", type=int, default=0)

    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
    except (ConfigurationError, OSError, json.JSONDecodeError) as exc:
        parser.error(str(exc))

    if args.command == "run":
        csv_path = run_sweep(config, args.out, jobs=args.jobs)
        print(f"wrote {csv_path}")
        return 0

    point = args.point if args.point is not None else config.sweep.values[0]
    record = run_trial(config, point, args.trial, seed=args.seed)
    payload = dataclasses.asdict(record)
    for res in payload["results"].values():
        res.pop("path_rows", None)
    json.dump(payload, sys.stdout, indent=1, default=str)
    print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
