"""Command-line entry points.

Subcommands:
    run       execute one seeded run and write its record
    batch     run a sweep grid x seed list and write per-run + aggregate CSVs
    shape     like run, but requires virtual attractors in the scenario
    validate  parse and validate a scenario, print the resolved mapping

Exit codes: 0 on success, 2 for configuration or validation errors (nothing
is written), 1 for failures inside an otherwise valid batch.
"""

from __future__ import annotations

import argparse
import sys

import yaml

from .harness import (
    HarnessError,
    aggregate_csv,
    default_workers,
    parse_sweep,
    run_batch,
    run_experiment,
    write_batch,
    write_run,
)
from .scenario import ScenarioError, build_config, config_mapping, load_mapping


def _parse_seeds(text: str) -> list[int]:
    """Seed lists: `0,1,5` or the half-open range `0:20`."""
    text = text.strip()
    if ":" in text:
        lo, _, hi = text.partition(":")
        start, stop = int(lo), int(hi)
        if stop <= start:
            raise ScenarioError(f"empty seed range {text!r}")
        return list(range(start, stop))
    return [int(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grfswarm",
        description="Headless swarm simulator: sampling-based segregation and flocking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--scenario", required=True, help="scenario YAML file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="dotted-path override, e.g. potential.mass=5 (repeatable)")

    p_run = sub.add_parser("run", help="execute one run")
    add_common(p_run)
    p_run.add_argument("--seed", type=int, default=None, help="override rng_seed")
    p_run.add_argument("--controller", choices=("grf", "gd"), default=None)
    p_run.add_argument("--out-dir", required=True, help="directory for record.json + metrics.jsonl")
    p_run.add_argument("--stride", type=int, default=1, help="metric sampling stride in ticks")
    p_run.add_argument("--states", action="store_true",
                       help="also write states.jsonl (positions/velocities per sampled tick)")

    p_shape = sub.add_parser("shape", help="run a scenario that defines virtual attractors")
    add_common(p_shape)
    p_shape.add_argument("--seed", type=int, default=None)
    p_shape.add_argument("--controller", choices=("grf", "gd"), default=None)
    p_shape.add_argument("--out-dir", required=True)
    p_shape.add_argument("--stride", type=int, default=1)
    p_shape.add_argument("--states", action="store_true",
                         help="also write states.jsonl (positions/velocities per sampled tick)")

    p_batch = sub.add_parser("batch", help="run a sweep grid across seeds")
    add_common(p_batch)
    p_batch.add_argument("--seeds", required=True,
                         help="comma list (0,1,2) or half-open range (0:20)")
    p_batch.add_argument("--sweep", action="append", default=[], metavar="KEY=V1,V2,...",
                         help="sweep axis over a dotted-path key (repeatable)")
    p_batch.add_argument("--controller", choices=("grf", "gd"), default=None)
    p_batch.add_argument("--out-dir", required=True)
    p_batch.add_argument("--stride", type=int, default=1)
    p_batch.add_argument("--workers", type=int, default=None,
                         help=f"process pool size (default: ${{{'GRFSWARM_WORKERS'}}} or CPU count)")
    p_batch.add_argument("--no-streams", action="store_true",
                         help="skip per-run metrics.jsonl directories, keep only CSVs")

    p_val = sub.add_parser("validate", help="validate a scenario and print the resolved mapping")
    add_common(p_val)

    return parser


def _resolved_config(args: argparse.Namespace):
    overrides = list(args.overrides)
    if getattr(args, "seed", None) is not None:
        overrides.append(f"rng_seed={args.seed}")
    if getattr(args, "controller", None) is not None:
        overrides.append(f"controller={args.controller}")
    return build_config(load_mapping(args.scenario, overrides))


def _cmd_run(args: argparse.Namespace, require_attractors: bool) -> int:
    config = _resolved_config(args)
    if args.stride < 1:
        raise ScenarioError(f"--stride must be >= 1, got {args.stride}")
    if require_attractors and not config.attractors:
        raise ScenarioError("shape requires a scenario with at least one attractor")
    states: list = []
    record = run_experiment(config, args.stride,
                            state_sink=states.append if args.states else None)
    write_run(record, args.out_dir, states=states if args.states else None)
    print(f"seed {record.seed} controller {record.controller}: "
          f"final clusters {record.final_cluster_count}, "
          f"converged at tick {record.convergence_tick}, "
          f"{record.duration_s:.1f}s -> {args.out_dir}")
    return 0


def _cmd_batch(args: argparse.Namespace) -> int:
    mapping = load_mapping(args.scenario, list(args.overrides))
    if args.controller is not None:
        mapping["controller"] = args.controller
    if args.stride < 1:
        raise ScenarioError(f"--stride must be >= 1, got {args.stride}")
    seeds = _parse_seeds(args.seeds)
    axes = [parse_sweep(text) for text in args.sweep]
    build_config(mapping)  # fail before any run starts if the base is invalid
    workers = default_workers() if args.workers is None else args.workers
    result = run_batch(mapping, axes, seeds, args.stride, workers)
    write_batch(result, args.out_dir, write_streams=not args.no_streams)
    sys.stdout.write(aggregate_csv(result))
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    config = build_config(load_mapping(args.scenario, list(args.overrides)))
    yaml.safe_dump(config_mapping(config), sys.stdout, sort_keys=False)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args, require_attractors=False)
        if args.command == "shape":
            return _cmd_run(args, require_attractors=True)
        if args.command == "batch":
            return _cmd_batch(args)
        if args.command == "validate":
            return _cmd_validate(args)
    except (ScenarioError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HarnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    raise SystemExit(main())
