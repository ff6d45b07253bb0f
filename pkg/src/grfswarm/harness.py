"""Batch experiment runner: seeded runs, sweeps, records, and aggregates.

One run produces a RunRecord: the fully resolved scenario mapping plus the
per-stride metric stream and summary figures, enough to reproduce the run
from the record alone. On disk a run is a directory holding `record.json`
(provenance and summary) and `metrics.jsonl` (one metric sample per line);
a batch additionally writes `runs.csv` (one row per run) and `aggregate.csv`
(per-cell mean and 99% normal-approximation confidence interval). All files
are written atomically (temp file, then rename) so a crashed run never
leaves a partial record behind.

Sweeps are dotted-path override axes; the batch grid is their cartesian
product. The same seed maps to the same initial state in every cell that
shares arena and partition, which is what makes controller comparisons
paired. Runs are independent jobs over a process pool sized by the
GRFSWARM_WORKERS environment variable (default: CPU count); results are
ordered by grid position, never by completion, so output files do not
depend on the worker count.
"""

from __future__ import annotations

import concurrent.futures
import itertools
import json
import math
import os
import tempfile
import time
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

from .metrics import MetricSample, convergence_iteration
from .model import SwarmConfig
from .scenario import ScenarioError, apply_override, build_config, config_mapping
from .sim import SwarmState, run

SCHEMA_VERSION = 1
WORKERS_ENV = "GRFSWARM_WORKERS"
Z_99 = 2.5758293035489004  # two-sided 99% normal quantile

RECORD_FILE = "record.json"
METRICS_FILE = "metrics.jsonl"
STATES_FILE = "states.jsonl"


class HarnessError(RuntimeError):
    """A run inside a batch failed; the message names the cell and seed."""


@dataclass(frozen=True)
class RunRecord:
    """Everything one run produced.

    scenario is the fully resolved mapping (every default made explicit), so
    `build_config(record.scenario)` reproduces the exact configuration.
    """

    scenario: dict
    seed: int
    controller: str
    samples: tuple[MetricSample, ...]
    final_cluster_count: int
    min_cluster_count: int
    convergence_tick: int
    duration_s: float
    schema_version: int = SCHEMA_VERSION


def run_experiment(config: SwarmConfig, metric_stride: int = 1,
                   state_sink: Callable[[SwarmState], None] | None = None) -> RunRecord:
    """Execute one run and collect its record.

    state_sink, when given, receives the swarm state at every sampled tick
    (same stride as the metric stream); records themselves stay state-free.
    """
    t0 = time.perf_counter()
    samples = []
    for state, sample in run(config, metric_stride):
        if state_sink is not None:
            state_sink(state)
        samples.append(sample)
    duration = time.perf_counter() - t0
    counts = [s.cluster_count for s in samples]
    return RunRecord(
        scenario=config_mapping(config),
        seed=config.rng_seed,
        controller=config.controller,
        samples=tuple(samples),
        final_cluster_count=counts[-1],
        min_cluster_count=min(counts),
        convergence_tick=convergence_iteration(samples),
        duration_s=duration,
    )


def sample_to_mapping(sample: MetricSample) -> dict:
    return {
        "tick": sample.tick,
        "cluster_count": sample.cluster_count,
        "mean_intragroup_distance": sample.mean_intragroup_distance,
        "velocity_consensus_error": sample.velocity_consensus_error,
        "mean_speed": sample.mean_speed,
        "attractor_distances": (
            None if sample.attractor_distances is None
            else list(sample.attractor_distances)
        ),
    }


def sample_from_mapping(mapping: dict) -> MetricSample:
    attr = mapping.get("attractor_distances")
    return MetricSample(
        tick=int(mapping["tick"]),
        cluster_count=int(mapping["cluster_count"]),
        mean_intragroup_distance=mapping["mean_intragroup_distance"],
        velocity_consensus_error=float(mapping["velocity_consensus_error"]),
        mean_speed=float(mapping["mean_speed"]),
        attractor_distances=None if attr is None else tuple(attr),
    )


def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def metrics_jsonl(samples: Iterable[MetricSample]) -> str:
    lines = [json.dumps(sample_to_mapping(s), separators=(",", ":")) for s in samples]
    return "".join(line + "\n" for line in lines)


def state_to_mapping(state: SwarmState) -> dict:
    return {
        "tick": state.tick,
        "positions": state.positions.tolist(),
        "velocities": state.velocities.tolist(),
        "types": state.types.tolist(),
    }


def states_jsonl(states: Iterable[SwarmState]) -> str:
    lines = [json.dumps(state_to_mapping(s), separators=(",", ":")) for s in states]
    return "".join(line + "\n" for line in lines)


def write_run(record: RunRecord, out_dir: str | os.PathLike,
              states: Sequence[SwarmState] | None = None) -> str:
    """Write record.json and metrics.jsonl into out_dir; returns out_dir.

    states, when given, additionally lands in states.jsonl (one snapshot of
    positions, velocities, and type labels per sampled tick).
    """
    out_dir = os.fspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    head = {
        "schema_version": record.schema_version,
        "scenario": record.scenario,
        "seed": record.seed,
        "controller": record.controller,
        "final_cluster_count": record.final_cluster_count,
        "min_cluster_count": record.min_cluster_count,
        "convergence_tick": record.convergence_tick,
        "duration_s": record.duration_s,
        "metrics_file": METRICS_FILE,
        "n_samples": len(record.samples),
    }
    _atomic_write(os.path.join(out_dir, RECORD_FILE), json.dumps(head, indent=2) + "\n")
    _atomic_write(os.path.join(out_dir, METRICS_FILE), metrics_jsonl(record.samples))
    if states is not None:
        _atomic_write(os.path.join(out_dir, STATES_FILE), states_jsonl(states))
    return out_dir


def load_run(run_dir: str | os.PathLike) -> RunRecord:
    """Reconstruct a RunRecord from a run directory."""
    run_dir = os.fspath(run_dir)
    with open(os.path.join(run_dir, RECORD_FILE), "r", encoding="utf-8") as fh:
        head = json.load(fh)
    samples = []
    with open(os.path.join(run_dir, head["metrics_file"]), "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                samples.append(sample_from_mapping(json.loads(line)))
    return RunRecord(
        scenario=head["scenario"],
        seed=head["seed"],
        controller=head["controller"],
        samples=tuple(samples),
        final_cluster_count=head["final_cluster_count"],
        min_cluster_count=head["min_cluster_count"],
        convergence_tick=head["convergence_tick"],
        duration_s=head["duration_s"],
        schema_version=head["schema_version"],
    )


@dataclass(frozen=True)
class SweepAxis:
    """One swept dotted-path key and its values, in sweep order."""

    key: str
    values: tuple[Any, ...]


def parse_sweep(text: str) -> SweepAxis:
    """Parse `key=v1,v2,v3` into an axis; values are YAML scalars."""
    import yaml

    if "=" not in text:
        raise ScenarioError(f"sweep must look like key=v1,v2,..., got {text!r}")
    key, _, raw = text.partition("=")
    key = key.strip()
    values = tuple(yaml.safe_load(part) for part in raw.split(","))
    if not key or not values:
        raise ScenarioError(f"sweep must name a key and at least one value, got {text!r}")
    return SweepAxis(key, values)


def _cell_label(cell: Sequence[tuple[str, Any]]) -> str:
    if not cell:
        return "base"
    return "__".join(f"{key}={value}" for key, value in cell).replace("/", "-")


def _grid(axes: Sequence[SweepAxis]) -> list[tuple[tuple[str, Any], ...]]:
    if not axes:
        return [()]
    pools = [[(axis.key, v) for v in axis.values] for axis in axes]
    return [tuple(combo) for combo in itertools.product(*pools)]


def _cell_config(base_mapping: dict, cell: Sequence[tuple[str, Any]], seed: int) -> SwarmConfig:
    mapping = json.loads(json.dumps(base_mapping))  # deep copy, plain types only
    for key, value in cell:
        apply_override(mapping, key.split("."), value)
    apply_override(mapping, ["rng_seed"], int(seed))
    return build_config(mapping)


def _run_job(args: tuple[dict, tuple, int, int]) -> RunRecord:
    base_mapping, cell, seed, stride = args
    return run_experiment(_cell_config(base_mapping, cell, seed), stride)


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is not None:
        workers = int(raw)
        if workers < 1:
            raise ValueError(f"{WORKERS_ENV} must be >= 1, got {raw}")
        return workers
    return os.cpu_count() or 1


@dataclass(frozen=True)
class BatchResult:
    axes: tuple[SweepAxis, ...]
    cells: tuple[tuple[tuple[str, Any], ...], ...]
    seeds: tuple[int, ...]
    records: tuple[tuple[RunRecord, ...], ...]  # records[cell_index][seed_index]


def run_batch(base_mapping: dict, axes: Sequence[SweepAxis], seeds: Sequence[int],
              metric_stride: int = 1, workers: int | None = None) -> BatchResult:
    """Run the sweep grid x seeds; any single failure aborts the whole batch."""
    if not seeds:
        raise ScenarioError("batch needs a nonempty seed list")
    cells = _grid(axes)
    jobs = [(base_mapping, cell, seed, metric_stride) for cell in cells for seed in seeds]
    workers = default_workers() if workers is None else workers
    flat: list[RunRecord] = []
    if workers <= 1 or len(jobs) <= 1:
        for job in jobs:
            flat.append(_run_with_context(job))
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_job, job) for job in jobs]
            for job, fut in zip(jobs, futures):
                try:
                    flat.append(fut.result())
                except Exception as exc:
                    raise HarnessError(_job_context(job, exc)) from exc
    per_cell = [
        tuple(flat[i * len(seeds):(i + 1) * len(seeds)]) for i in range(len(cells))
    ]
    return BatchResult(tuple(axes), tuple(cells), tuple(int(s) for s in seeds),
                       tuple(per_cell))


def _job_context(job: tuple, exc: Exception) -> str:
    _, cell, seed, _ = job
    return f"run failed in cell {_cell_label(cell)!r}, seed {seed}: {exc}"


def _run_with_context(job: tuple) -> RunRecord:
    try:
        return _run_job(job)
    except Exception as exc:
        raise HarnessError(_job_context(job, exc)) from exc


def mean_ci99(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and half-width of the 99% normal-approximation CI."""
    n = len(values)
    if n == 0:
        raise ValueError("mean_ci99 needs at least one value")
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, Z_99 * math.sqrt(var / n)


def _csv_quote(value: Any) -> str:
    text = str(value)
    if any(ch in text for ch in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def _csv_line(fields: Iterable[Any]) -> str:
    return ",".join(_csv_quote(f) for f in fields) + "\n"


def _sweep_columns(result: BatchResult) -> list[str]:
    # a controller sweep is already reported by the dedicated column
    return [axis.key for axis in result.axes if axis.key != "controller"]


def runs_csv(result: BatchResult) -> str:
    """Per-run rows: swept keys, controller, seed, and summary metrics.

    Wall-clock duration stays out of this file (it lives in record.json):
    every column here is a pure function of the configuration and seed, so
    the bytes are identical across reruns and worker counts.
    """
    keys = _sweep_columns(result)
    header = keys + [
        "controller", "seed", "min_cluster_count", "final_cluster_count",
        "convergence_tick", "mean_speed_final",
    ]
    out = [_csv_line(header)]
    for cell, records in zip(result.cells, result.records):
        values = dict(cell)
        for record in records:
            row = [values[k] for k in keys] + [
                record.controller,
                record.seed,
                record.min_cluster_count,
                record.final_cluster_count,
                record.convergence_tick,
                record.samples[-1].mean_speed,
            ]
            out.append(_csv_line(row))
    return "".join(out)


def aggregate_csv(result: BatchResult) -> str:
    """Per-cell aggregates: mean and 99% CI half-width per summary metric."""
    keys = _sweep_columns(result)
    header = keys + [
        "controller", "n_runs",
        "mean_min_clusters", "ci99_min_clusters",
        "mean_final_clusters", "ci99_final_clusters",
        "mean_convergence_tick", "ci99_convergence_tick",
    ]
    out = [_csv_line(header)]
    for cell, records in zip(result.cells, result.records):
        values = dict(cell)
        controllers = sorted({r.controller for r in records})
        for controller in controllers:
            group = [r for r in records if r.controller == controller]
            m_min, ci_min = mean_ci99([r.min_cluster_count for r in group])
            m_fin, ci_fin = mean_ci99([r.final_cluster_count for r in group])
            m_cnv, ci_cnv = mean_ci99([r.convergence_tick for r in group])
            row = [values[k] for k in keys] + [
                controller, len(group),
                m_min, ci_min, m_fin, ci_fin, m_cnv, ci_cnv,
            ]
            out.append(_csv_line(row))
    return "".join(out)


def write_batch(result: BatchResult, out_dir: str | os.PathLike,
                write_streams: bool = True) -> None:
    """Write runs.csv, aggregate.csv, and (optionally) per-run directories."""
    out_dir = os.fspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    _atomic_write(os.path.join(out_dir, "runs.csv"), runs_csv(result))
    _atomic_write(os.path.join(out_dir, "aggregate.csv"), aggregate_csv(result))
    if not write_streams:
        return
    for cell, records in zip(result.cells, result.records):
        for record in records:
            run_dir = os.path.join(out_dir, "runs", _cell_label(cell),
                                   f"seed{record.seed}")
            write_run(record, run_dir)
