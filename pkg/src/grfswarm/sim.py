"""Closed-loop swarm simulation.

One tick: every robot senses the tick-t world (range-limited, optionally
noisy), picks its next velocity with the configured controller, and only
then do all positions advance together. Sensing and control read the frozen
tick-t snapshot exclusively, so the update is synchronous: robot order within
a tick cannot change the outcome. All randomness comes from streams addressed
by (seed, robot, tick, purpose), which makes runs reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np
from scipy.spatial import cKDTree

from . import rng as rng_streams
from .baseline_gd import gd_velocity
from .metrics import (MetricSample, attractor_distances, cluster_count,
                      mean_intragroup_distance, mean_speed,
                      velocity_consensus_error)
from .model import ROBOT_RADIUS, Arena, RobotState, SwarmConfig, kinematic_step
from .potential import NeighborObservation
from .sampler import metropolis_update

INITIAL_SEPARATION = 2.0 * ROBOT_RADIUS  # pairwise clearance at t=0


@dataclass(frozen=True)
class SwarmState:
    """Snapshot of the whole swarm at one tick."""

    tick: int
    positions: np.ndarray  # (n, 2)
    velocities: np.ndarray  # (n, 2)
    types: np.ndarray  # (n,) int group labels

    @property
    def n_robots(self) -> int:
        return self.positions.shape[0]

    def robot(self, i: int) -> RobotState:
        return RobotState(
            id=i,
            position=(float(self.positions[i, 0]), float(self.positions[i, 1])),
            velocity=(float(self.velocities[i, 0]), float(self.velocities[i, 1])),
            type_label=int(self.types[i]),
        )


@lru_cache(maxsize=16)
def _obstacle_tree(arena: Arena) -> cKDTree:
    pts = arena.obstacle_points
    if pts.shape[0] == 0:
        return None
    return cKDTree(pts)


def initial_state(config: SwarmConfig) -> SwarmState:
    """Sample the start configuration for a seed.

    Positions are uniform over the arena (inset by one robot radius so nobody
    spawns on a wall), rejection-sampled until all pairs are at least two
    robot radii apart. Velocities start at zero. Depends only on the seed,
    the arena and the robot count, never on the controller, so paired
    controller comparisons share initial states seed by seed.
    """
    n = config.n_robots
    gen = rng_streams.stream(config.rng_seed, rng_streams.INIT)
    margin = ROBOT_RADIUS
    lo = np.array([margin, margin])
    hi = np.array([config.arena.width - margin, config.arena.height - margin])
    if np.any(hi <= lo):
        raise ValueError("arena too small for the robot footprint")
    placed = np.empty((n, 2))
    count = 0
    attempts = 0
    max_attempts = 10000 * max(n, 1)
    while count < n:
        if attempts >= max_attempts:
            raise RuntimeError(
                f"could not place {n} robots {INITIAL_SEPARATION} m apart "
                f"in a {config.arena.width}x{config.arena.height} arena"
            )
        attempts += 1
        cand = lo + gen.random(2) * (hi - lo)
        if count > 0:
            d2 = np.einsum("ij,ij->i", placed[:count] - cand, placed[:count] - cand)
            if d2.min() < INITIAL_SEPARATION ** 2:
                continue
        placed[count] = cand
        count += 1
    return SwarmState(
        tick=0,
        positions=placed,
        velocities=np.zeros((n, 2)),
        types=config.partition.types.copy(),
    )


def _truncated_normal(gen: np.random.Generator, sigma: float, bound: float,
                      shape: tuple[int, ...]) -> np.ndarray:
    """Zero-mean normal with |x| <= bound, by per-component resampling."""
    out = gen.normal(0.0, sigma, size=shape)
    bad = np.abs(out) > bound
    while np.any(bad):
        out[bad] = gen.normal(0.0, sigma, size=int(bad.sum()))
        bad = np.abs(out) > bound
    return out


def sense(robot_id: int, state: SwarmState, config: SwarmConfig,
          gen: np.random.Generator | None = None) -> list[NeighborObservation]:
    """One robot's sensing snapshot: neighbors and obstacle points in range.

    The range test uses true positions and is inclusive (distance exactly
    equal to the sensing radius is observed). Noise is applied afterwards,
    per observation and per component: Gaussian with sigma = noise_fraction
    times the sensing radius for positions and times v_max for velocities,
    truncated at one sigma in "bounded" mode. Robot observations come first
    in id order, then obstacle points in point-cloud order, so the
    observation list is deterministic for a fixed stream.
    """
    if gen is None:
        gen = rng_streams.stream(config.rng_seed, robot_id, state.tick, rng_streams.NOISE)
    lam = config.sensing_radius
    q_i = state.positions[robot_id]
    diff = state.positions - q_i[None, :]
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    dist[robot_id] = np.inf  # a robot does not observe itself
    neighbor_ids = np.flatnonzero(dist <= lam)

    rel_robots = diff[neighbor_ids]
    vel_robots = state.velocities[neighbor_ids]
    tree = _obstacle_tree(config.arena)
    if tree is not None:
        obst_idx = np.asarray(sorted(tree.query_ball_point(q_i, lam)), dtype=int)
        rel_obst = config.arena.obstacle_points[obst_idx] - q_i[None, :]
    else:
        rel_obst = np.empty((0, 2))

    if config.noise_fraction > 0.0:
        pos_sigma = config.noise_fraction * lam
        vel_sigma = config.noise_fraction * config.v_max
        if config.noise_truncation == "bounded":
            rel_robots = rel_robots + _truncated_normal(gen, pos_sigma, pos_sigma, rel_robots.shape)
            vel_robots = vel_robots + _truncated_normal(gen, vel_sigma, vel_sigma, vel_robots.shape)
            rel_obst = rel_obst + _truncated_normal(gen, pos_sigma, pos_sigma, rel_obst.shape)
        else:
            rel_robots = rel_robots + gen.normal(0.0, pos_sigma, size=rel_robots.shape)
            vel_robots = vel_robots + gen.normal(0.0, vel_sigma, size=vel_robots.shape)
            rel_obst = rel_obst + gen.normal(0.0, pos_sigma, size=rel_obst.shape)

    observations = [
        NeighborObservation(
            kind="robot",
            relative_position=(rel_robots[k, 0], rel_robots[k, 1]),
            velocity=(vel_robots[k, 0], vel_robots[k, 1]),
            type_label=int(state.types[j]),
        )
        for k, j in enumerate(neighbor_ids)
    ]
    observations.extend(
        NeighborObservation(kind="obstacle", relative_position=(rel_obst[k, 0], rel_obst[k, 1]))
        for k in range(rel_obst.shape[0])
    )
    return observations


def controller_velocity(robot_id: int, state: SwarmState, config: SwarmConfig) -> np.ndarray:
    """Next velocity command for one robot, from the tick-t snapshot only."""
    observations = sense(robot_id, state, config)
    type_i = int(state.types[robot_id])
    if config.controller == "grf":
        gen = rng_streams.stream(config.rng_seed, robot_id, state.tick, rng_streams.SAMPLER)
        return metropolis_update(
            state.positions[robot_id], state.velocities[robot_id], observations,
            config.attractors, type_i, config.potential, config.sampler,
            config.v_max, config.tick_duration, gen,
        )
    return gd_velocity(
        state.positions[robot_id], state.velocities[robot_id], observations,
        config.attractors, type_i, config.potential,
        config.v_max, config.tick_duration,
    )


def step(state: SwarmState, config: SwarmConfig) -> SwarmState:
    """Advance the swarm one tick.

    All controllers run against the same frozen tick-t state; the new
    velocities are applied simultaneously and positions are clamped to the
    arena. Per-tick displacement is bounded by v_max * tick_duration.
    """
    n = state.n_robots
    new_v = np.empty((n, 2))
    for i in range(n):
        new_v[i] = controller_velocity(i, state, config)
    new_q = config.arena.clamp(kinematic_step(state.positions, new_v, config.tick_duration))
    return SwarmState(tick=state.tick + 1, positions=new_q,
                      velocities=new_v, types=state.types)


def sample_metrics(state: SwarmState, config: SwarmConfig) -> MetricSample:
    """Evaluate all metrics on one snapshot."""
    attr = None
    if config.attractors:
        attr = attractor_distances(state.positions, state.types,
                                   config.attractors, config.partition.group_count)
    return MetricSample(
        tick=state.tick,
        cluster_count=cluster_count(state.positions, state.types, config.cluster_distance),
        mean_intragroup_distance=mean_intragroup_distance(state.positions, state.types),
        velocity_consensus_error=velocity_consensus_error(state.velocities, state.types),
        mean_speed=mean_speed(state.velocities),
        attractor_distances=attr,
    )


def run(config: SwarmConfig, metric_stride: int = 1) -> Iterator[tuple[SwarmState, MetricSample]]:
    """Run a full simulation, yielding (state, metrics) snapshots.

    Snapshots are emitted for tick 0, every tick divisible by the stride,
    and the final tick. With max_ticks = 0 only the initial state is
    emitted. The stream is a pure function of the config (seed included).
    """
    if metric_stride < 1:
        raise ValueError(f"metric_stride must be >= 1, got {metric_stride}")
    state = initial_state(config)
    if _should_emit(0, config.max_ticks, metric_stride):
        yield state, sample_metrics(state, config)
    for _ in range(config.max_ticks):
        state = step(state, config)
        if _should_emit(state.tick, config.max_ticks, metric_stride):
            yield state, sample_metrics(state, config)


def _should_emit(tick: int, max_ticks: int, stride: int) -> bool:
    return tick % stride == 0 or tick == max_ticks
