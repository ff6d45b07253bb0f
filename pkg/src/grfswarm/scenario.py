"""Scenario files: YAML descriptions of a run, mapped 1:1 onto SwarmConfig.

A scenario is a YAML mapping whose top-level keys mirror SwarmConfig fields.
Nested blocks mirror the corresponding dataclasses. Unknown keys anywhere are
a validation error listing the offending dotted paths, so typos fail loudly
instead of silently running defaults. `config_mapping` is the inverse: a fully
resolved plain mapping, suitable for embedding in run records, from which
`build_config` reconstructs an identical SwarmConfig.

Overrides are dotted-path assignments (`potential.mass=60`) whose values are
parsed as YAML scalars.
"""

from __future__ import annotations

import os
from typing import Any, Iterable

import yaml

from .model import (
    Arena,
    GroupPartition,
    PotentialParams,
    SamplerParams,
    SwarmConfig,
    VirtualAttractor,
)

_TOP_KEYS = {
    "partition", "arena", "attractors", "potential", "sampler",
    "v_max", "sensing_radius", "tick_duration", "noise_fraction",
    "noise_truncation", "rng_seed", "max_ticks", "controller",
    "cluster_distance",
}
_PARTITION_KEYS = {"sizes", "groups", "robots_per_group"}
_ARENA_KEYS = {"width", "height", "point_spacing", "extra_segments"}
_ATTRACTOR_KEYS = {"position", "target_type", "charge"}
_POTENTIAL_KEYS = {
    "epsilon", "r0", "alpha", "charges", "coulomb_coupling", "mass",
    "sign_mode", "relative_kinetic", "d_min", "obstacle_charge",
}
_SAMPLER_KEYS = {
    "iterations", "burn_in", "proposal_covariance", "temperature",
    "proposal_center_mode",
}


class ScenarioError(ValueError):
    """Raised for malformed or invalid scenario content."""


def _require_mapping(obj: Any, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ScenarioError(f"{path or 'scenario'} must be a mapping, got {type(obj).__name__}")
    return obj


def _check_keys(mapping: dict, allowed: set, path: str) -> None:
    unknown = sorted(str(k) for k in mapping if k not in allowed)
    if unknown:
        dotted = ", ".join(f"{path}.{k}" if path else k for k in unknown)
        raise ScenarioError(f"unknown scenario keys: {dotted}")


def _build_partition(block: Any) -> GroupPartition:
    block = _require_mapping(block, "partition")
    _check_keys(block, _PARTITION_KEYS, "partition")
    has_sizes = "sizes" in block
    has_uniform = "groups" in block or "robots_per_group" in block
    if has_sizes and has_uniform:
        raise ScenarioError("partition: give either sizes or groups/robots_per_group, not both")
    if has_sizes:
        return GroupPartition(sizes=tuple(int(s) for s in block["sizes"]))
    if "groups" not in block or "robots_per_group" not in block:
        raise ScenarioError("partition requires sizes, or both groups and robots_per_group")
    return GroupPartition.uniform(int(block["groups"]), int(block["robots_per_group"]))


def _build_arena(block: Any) -> Arena:
    block = _require_mapping(block, "arena")
    _check_keys(block, _ARENA_KEYS, "arena")
    if "width" not in block or "height" not in block:
        raise ScenarioError("arena requires width and height")
    segments = tuple(
        (tuple(float(v) for v in seg[0]), tuple(float(v) for v in seg[1]))
        for seg in block.get("extra_segments", ())
    )
    kwargs: dict[str, Any] = {
        "width": float(block["width"]),
        "height": float(block["height"]),
        "extra_segments": segments,
    }
    if "point_spacing" in block:
        kwargs["point_spacing"] = float(block["point_spacing"])
    return Arena(**kwargs)


def _build_attractor(block: Any, path: str) -> VirtualAttractor:
    block = _require_mapping(block, path)
    _check_keys(block, _ATTRACTOR_KEYS, path)
    if "position" not in block or "target_type" not in block:
        raise ScenarioError(f"{path} requires position and target_type")
    kwargs: dict[str, Any] = {
        "position": tuple(float(v) for v in block["position"]),
        "target_type": int(block["target_type"]),
    }
    if "charge" in block:
        kwargs["charge"] = float(block["charge"])
    return VirtualAttractor(**kwargs)


def _build_potential(block: Any) -> PotentialParams:
    block = _require_mapping(block, "potential")
    _check_keys(block, _POTENTIAL_KEYS, "potential")
    kwargs = dict(block)
    if kwargs.get("charges") is not None:
        kwargs["charges"] = tuple(float(c) for c in kwargs["charges"])
    return PotentialParams(**kwargs)


def _build_sampler(block: Any) -> SamplerParams:
    block = _require_mapping(block, "sampler")
    _check_keys(block, _SAMPLER_KEYS, "sampler")
    kwargs = dict(block)
    if kwargs.get("proposal_covariance") is not None:
        kwargs["proposal_covariance"] = tuple(
            tuple(float(v) for v in row) for row in kwargs["proposal_covariance"]
        )
    return SamplerParams(**kwargs)


def build_config(mapping: Any) -> SwarmConfig:
    """Validate a scenario mapping and construct the SwarmConfig."""
    mapping = _require_mapping(mapping, "")
    _check_keys(mapping, _TOP_KEYS, "")
    if "partition" not in mapping or "arena" not in mapping:
        raise ScenarioError("scenario requires partition and arena blocks")
    kwargs: dict[str, Any] = {
        "partition": _build_partition(mapping["partition"]),
        "arena": _build_arena(mapping["arena"]),
    }
    if "attractors" in mapping:
        attractors = mapping["attractors"] or ()
        if not isinstance(attractors, (list, tuple)):
            raise ScenarioError("attractors must be a list")
        kwargs["attractors"] = tuple(
            _build_attractor(a, f"attractors[{i}]") for i, a in enumerate(attractors)
        )
    if "potential" in mapping:
        kwargs["potential"] = _build_potential(mapping["potential"])
    if "sampler" in mapping:
        kwargs["sampler"] = _build_sampler(mapping["sampler"])
    for key in ("v_max", "sensing_radius", "tick_duration", "noise_fraction",
                "cluster_distance"):
        if key in mapping:
            kwargs[key] = float(mapping[key])
    for key in ("rng_seed", "max_ticks"):
        if key in mapping:
            kwargs[key] = int(mapping[key])
    for key in ("noise_truncation", "controller"):
        if key in mapping:
            kwargs[key] = str(mapping[key])
    try:
        return SwarmConfig(**kwargs)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def parse_override(text: str) -> tuple[list[str], Any]:
    """Split a `dotted.path=value` override; the value is a YAML scalar."""
    if "=" not in text:
        raise ScenarioError(f"override must look like key=value, got {text!r}")
    key, _, raw = text.partition("=")
    key = key.strip()
    if not key:
        raise ScenarioError(f"override has an empty key: {text!r}")
    return key.split("."), yaml.safe_load(raw)


def apply_override(mapping: dict, keys: list[str], value: Any) -> None:
    """Set a dotted-path key in a nested scenario mapping, in place."""
    node = mapping
    for k in keys[:-1]:
        nxt = node.get(k)
        if nxt is None:
            nxt = {}
            node[k] = nxt
        if not isinstance(nxt, dict):
            raise ScenarioError(f"override path {'.'.join(keys)} crosses non-mapping key {k!r}")
        node = nxt
    node[keys[-1]] = value


def load_mapping(path: str | os.PathLike, overrides: Iterable[str] = ()) -> dict:
    """Load a scenario file and apply overrides, without building the config."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            mapping = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ScenarioError(f"cannot parse scenario {path}: {exc}") from exc
    mapping = _require_mapping(mapping, "")
    for text in overrides:
        keys, value = parse_override(text)
        apply_override(mapping, keys, value)
    return mapping


def load_scenario(path: str | os.PathLike, overrides: Iterable[str] = ()) -> SwarmConfig:
    """Load, override, validate: the one-call entry point used by the CLI."""
    return build_config(load_mapping(path, overrides))


def config_mapping(config: SwarmConfig) -> dict:
    """Fully resolved scenario mapping for a config (records, round-trips).

    Every resolved default appears exactly once; build_config on the result
    reconstructs an equal SwarmConfig.
    """
    pot = config.potential
    samp = config.sampler
    mapping: dict[str, Any] = {
        "partition": {"sizes": [int(s) for s in config.partition.sizes]},
        "arena": {
            "width": config.arena.width,
            "height": config.arena.height,
            "point_spacing": config.arena.point_spacing,
            "extra_segments": [
                [[seg[0][0], seg[0][1]], [seg[1][0], seg[1][1]]]
                for seg in config.arena.extra_segments
            ],
        },
        "attractors": [
            {"position": [a.position[0], a.position[1]],
             "target_type": a.target_type, "charge": a.charge}
            for a in config.attractors
        ],
        "potential": {
            "epsilon": pot.epsilon,
            "r0": pot.r0,
            "alpha": pot.alpha,
            "charges": list(pot.charges),
            "coulomb_coupling": pot.coulomb_coupling,
            "mass": pot.mass,
            "sign_mode": pot.sign_mode,
            "relative_kinetic": pot.relative_kinetic,
            "d_min": pot.d_min,
            "obstacle_charge": pot.obstacle_charge,
        },
        "sampler": {
            "iterations": samp.iterations,
            "burn_in": samp.burn_in,
            "proposal_covariance": [list(row) for row in samp.proposal_covariance],
            "temperature": samp.temperature,
            "proposal_center_mode": samp.proposal_center_mode,
        },
        "v_max": config.v_max,
        "sensing_radius": config.sensing_radius,
        "tick_duration": config.tick_duration,
        "noise_fraction": config.noise_fraction,
        "noise_truncation": config.noise_truncation,
        "rng_seed": config.rng_seed,
        "max_ticks": config.max_ticks,
        "controller": config.controller,
        "cluster_distance": config.cluster_distance,
    }
    return mapping
