"""Domain types and kinematics for the swarm simulator.

This module owns the configuration objects (partition, arena, potential and
sampler parameters, top-level config), the per-robot state record, the
single-integrator kinematic model and the obstacle discretization. Everything
here is plain data: no controller logic, no randomness.

All config dataclasses are frozen. Validation happens once, at construction,
so downstream code can assume a well-formed config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

# Geometry constants shared by scenarios and tests.
ROBOT_RADIUS = 0.07  # m, physical footprint; initial spacing is 2x this
DEFAULT_POINT_SPACING = 0.05  # m, obstacle segment discretization step
DISTANCE_FLOOR = 1e-4  # m, substituted when an inter-point distance underflows

Segment = tuple[tuple[float, float], tuple[float, float]]


def kinematic_step(position, velocity, dt: float) -> np.ndarray:
    """Advance a single-integrator robot: q' = q + v * dt.

    Works elementwise on a single (2,) pair or on stacked (n, 2) arrays.
    """
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    q = np.asarray(position, dtype=float)
    v = np.asarray(velocity, dtype=float)
    return q + v * dt


def build_obstacle_points(segments, spacing: float) -> np.ndarray:
    """Discretize line segments into a deduplicated point cloud.

    Each segment is sampled with both endpoints included and consecutive
    points at most `spacing` apart. Points shared by several segments
    (e.g. rectangle corners) appear once. The cloud is sorted
    lexicographically, so it does not depend on segment order.

    Args:
        segments: iterable of ((x1, y1), (x2, y2)) pairs.
        spacing: maximum gap between consecutive samples, > 0.

    Returns:
        (n, 2) float array of obstacle points.
    """
    if spacing <= 0:
        raise ValueError(f"spacing must be > 0, got {spacing}")
    chunks = []
    for seg in segments:
        a = np.asarray(seg[0], dtype=float)
        b = np.asarray(seg[1], dtype=float)
        if a.shape != (2,) or b.shape != (2,):
            raise ValueError(f"segment endpoints must be 2-D, got {seg}")
        length = float(np.linalg.norm(b - a))
        if length == 0.0:
            chunks.append(a[None, :])  # degenerate segment: a single point
            continue
        n_gaps = max(1, math.ceil(length / spacing - 1e-12))
        t = np.linspace(0.0, 1.0, n_gaps + 1)
        chunks.append(a[None, :] + t[:, None] * (b - a)[None, :])
    if not chunks:
        return np.empty((0, 2), dtype=float)
    pts = np.concatenate(chunks, axis=0)
    # Deduplicate on a quantized key so corners produced by different segments
    # collapse even when the arithmetic differs in the last ulp, but keep the
    # exact coordinates (endpoints must be present verbatim).
    keys = np.round(pts / 1e-9).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    uniq = pts[np.sort(first)]
    order = np.lexsort((uniq[:, 1], uniq[:, 0]))
    return uniq[order]


@dataclass(frozen=True)
class GroupPartition:
    """Assignment of robot ids 0..n-1 to contiguous type groups.

    `sizes[k]` robots belong to group k; ids are assigned in order, so the
    groups are disjoint and exhaustive by construction.
    """

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if len(sizes) == 0:
            raise ValueError("partition must contain at least one group")
        if any(s < 0 for s in sizes):
            raise ValueError(f"group sizes must be nonnegative, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def uniform(cls, groups: int, robots_per_group: int) -> "GroupPartition":
        return cls(sizes=(int(robots_per_group),) * int(groups))

    @property
    def group_count(self) -> int:
        return len(self.sizes)

    @property
    def n_robots(self) -> int:
        return sum(self.sizes)

    @cached_property
    def types(self) -> np.ndarray:
        """(n,) int array mapping robot id to group index."""
        return np.repeat(np.arange(self.group_count), self.sizes)

    def group_of(self, robot_id: int) -> int:
        return int(self.types[robot_id])

    def members(self, group: int) -> np.ndarray:
        return np.flatnonzero(self.types == group)


@dataclass(frozen=True)
class Arena:
    """Rectangular workspace with walls (and optional interior segments)
    discretized into obstacle points."""

    width: float
    height: float
    point_spacing: float = DEFAULT_POINT_SPACING
    extra_segments: tuple[Segment, ...] = ()

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(
                f"arena dimensions must be positive, got {self.width}x{self.height}"
            )
        if self.point_spacing <= 0:
            raise ValueError(f"point_spacing must be > 0, got {self.point_spacing}")

    @property
    def wall_segments(self) -> tuple[Segment, ...]:
        """Border walls plus any configured interior segments."""
        w, h = float(self.width), float(self.height)
        border: tuple[Segment, ...] = (
            ((0.0, 0.0), (w, 0.0)),
            ((w, 0.0), (w, h)),
            ((w, h), (0.0, h)),
            ((0.0, h), (0.0, 0.0)),
        )
        return border + tuple(self.extra_segments)

    @cached_property
    def obstacle_points(self) -> np.ndarray:
        return build_obstacle_points(self.wall_segments, self.point_spacing)

    def clamp(self, positions: np.ndarray) -> np.ndarray:
        """Project positions into [0, width] x [0, height]."""
        q = np.asarray(positions, dtype=float)
        lo = np.array([0.0, 0.0])
        hi = np.array([self.width, self.height])
        return np.clip(q, lo, hi)


@dataclass(frozen=True)
class VirtualAttractor:
    """A virtual point that attracts robots of one type and is invisible to
    every other type. Not subject to sensing range or noise."""

    position: tuple[float, float]
    target_type: int
    charge: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))
        if self.charge < 0:
            raise ValueError(f"attractor charge must be >= 0, got {self.charge}")
        if self.target_type < 0:
            raise ValueError(f"target_type must be >= 0, got {self.target_type}")


@dataclass(frozen=True)
class PotentialParams:
    """Parameters of the pair potential and the kinetic terms.

    The defaults are the calibrated reference set: with them the same-type
    pair curve has a single negative-depth minimum near 0.28 m (inside the
    0.3 m cluster threshold) and the cross-type curve is strictly repulsive
    over the whole sensing range. `charges` is one magnitude per group;
    None means 1.0 for every group (resolved by SwarmConfig).

    sign_mode:
        "segregating" (default): charge product is negative (attractive) for
        same-group pairs and positive (repulsive) for cross-group pairs.
        "literal": the opposite sign convention, kept for ablation.
    relative_kinetic:
        True (default): the kinetic term sums same-type neighbor velocities
        relative to the candidate velocity, so it is minimized by consensus.
        False: plain sum of neighbor velocities, kept for ablation.
    """

    epsilon: float = 1.0
    r0: float = 0.3
    alpha: float = 12.0
    charges: tuple[float, ...] | None = None
    coulomb_coupling: float = 1.5
    mass: float = 1.0
    sign_mode: str = "segregating"
    relative_kinetic: bool = True
    d_min: float = DISTANCE_FLOOR
    obstacle_charge: float = 1.0  # unit charge of obstacle points, always repulsive

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.r0 <= 0:
            raise ValueError(f"r0 must be > 0, got {self.r0}")
        if self.alpha <= 6:
            raise ValueError(f"alpha must be > 6, got {self.alpha}")
        if self.coulomb_coupling < 0:
            raise ValueError(f"coulomb_coupling must be >= 0, got {self.coulomb_coupling}")
        if self.mass <= 0:
            raise ValueError(f"mass must be > 0, got {self.mass}")
        if self.sign_mode not in ("segregating", "literal"):
            raise ValueError(f"unknown sign_mode {self.sign_mode!r}")
        if self.d_min <= 0:
            raise ValueError(f"d_min must be > 0, got {self.d_min}")
        if self.obstacle_charge < 0:
            raise ValueError(f"obstacle_charge must be >= 0, got {self.obstacle_charge}")
        if self.charges is not None:
            ch = tuple(float(c) for c in self.charges)
            if any(c < 0 for c in ch):
                raise ValueError(f"charges must be >= 0, got {ch}")
            object.__setattr__(self, "charges", ch)

    def charge_of(self, group: int) -> float:
        if self.charges is None:
            return 1.0
        return self.charges[group]

    @cached_property
    def hard_core_radius(self) -> float:
        """Radius below which the pair energy switches to the repulsive
        hard-core extension.

        The raw exp-6 term diverges to -inf as r -> 0 (its dispersion term
        beats the finite exponential wall), so the formula is only physical
        outside its inner turnover radius r0*x_w, where x_w solves
        alpha*(1-x) + 7*ln(x) = 0 on (0, 7/alpha). The guard starts halfway
        between the turnover and the well, r0*(x_w+1)/2; for alpha <= 7 the
        raw curve has no repulsive wall at all and the guard starts at r0.
        """
        a = self.alpha
        if a <= 7.0:
            return self.r0
        g = lambda x: a * (1.0 - x) + 7.0 * math.log(x)
        lo, hi = math.exp(-a / 7.0), 7.0 / a  # g(lo) < 0 < g(hi) for alpha > 7
        if lo == 0.0:  # underflow for huge alpha; the turnover is at x ~ 0
            return self.r0 / 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if g(mid) < 0.0:
                lo = mid
            else:
                hi = mid
        x_w = 0.5 * (lo + hi)
        return self.r0 * (x_w + 1.0) / 2.0


@dataclass(frozen=True)
class SamplerParams:
    """Metropolis sampler configuration.

    proposal_covariance is a 2x2 SPD matrix stored as nested tuples; None
    means the default (0.2 * v_max)^2 * I, resolved by SwarmConfig once
    v_max is known.
    """

    iterations: int = 100
    burn_in: int | None = None  # None -> iterations // 2
    proposal_covariance: tuple[tuple[float, float], tuple[float, float]] | None = None
    temperature: float = 1.0
    proposal_center_mode: str = "previous_velocity"

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        burn = self.iterations // 2 if self.burn_in is None else int(self.burn_in)
        if not 0 <= burn < self.iterations:
            raise ValueError(
                f"burn_in must lie in [0, iterations), got {burn} with iterations={self.iterations}"
            )
        object.__setattr__(self, "burn_in", burn)
        if self.proposal_center_mode not in ("previous_velocity", "chain_state"):
            raise ValueError(f"unknown proposal_center_mode {self.proposal_center_mode!r}")
        if self.temperature <= 0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")
        if self.proposal_covariance is not None:
            cov = tuple(tuple(float(v) for v in row) for row in self.proposal_covariance)
            if len(cov) != 2 or any(len(r) != 2 for r in cov):
                raise ValueError("proposal_covariance must be 2x2")
            if cov[0][1] != cov[1][0]:
                raise ValueError("proposal_covariance must be symmetric")
            try:
                np.linalg.cholesky(np.asarray(cov))
            except np.linalg.LinAlgError:
                raise ValueError("proposal_covariance must be positive definite") from None
            object.__setattr__(self, "proposal_covariance", cov)

    @cached_property
    def covariance(self) -> np.ndarray:
        if self.proposal_covariance is None:
            raise ValueError("proposal_covariance not resolved; build configs via SwarmConfig")
        return np.asarray(self.proposal_covariance, dtype=float)

    @cached_property
    def cholesky(self) -> np.ndarray:
        return np.linalg.cholesky(self.covariance)


@dataclass(frozen=True)
class RobotState:
    """Immutable snapshot of one robot."""

    id: int
    position: tuple[float, float]
    velocity: tuple[float, float]
    type_label: int

    def __post_init__(self):
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))
        object.__setattr__(self, "velocity", (float(self.velocity[0]), float(self.velocity[1])))


CONTROLLERS = ("grf", "gd")
NOISE_TRUNCATIONS = ("bounded", "unbounded")


@dataclass(frozen=True)
class SwarmConfig:
    """Complete, validated description of one simulation run.

    Construction resolves the deferred defaults (per-group charges, proposal
    covariance, burn-in), so a SwarmConfig is always fully explicit and can
    be serialized as the run's provenance record.
    """

    partition: GroupPartition
    arena: Arena
    attractors: tuple[VirtualAttractor, ...] = ()
    potential: PotentialParams = field(default_factory=PotentialParams)
    sampler: SamplerParams = field(default_factory=SamplerParams)
    v_max: float = 1.0
    sensing_radius: float = 0.5
    tick_duration: float = 0.02
    noise_fraction: float = 0.0
    noise_truncation: str = "bounded"
    rng_seed: int = 0
    max_ticks: int = 5000
    controller: str = "grf"
    cluster_distance: float = 0.3  # same-type robots closer than this share a cluster

    def __post_init__(self):
        if self.cluster_distance <= 0:
            raise ValueError(f"cluster_distance must be > 0, got {self.cluster_distance}")
        if self.v_max <= 0:
            raise ValueError(f"v_max must be > 0, got {self.v_max}")
        if self.sensing_radius <= 0:
            raise ValueError(f"sensing_radius must be > 0, got {self.sensing_radius}")
        if self.tick_duration <= 0:
            raise ValueError(f"tick_duration must be > 0, got {self.tick_duration}")
        if not 0.0 <= self.noise_fraction < 1.0:
            raise ValueError(f"noise_fraction must lie in [0, 1), got {self.noise_fraction}")
        if self.noise_truncation not in NOISE_TRUNCATIONS:
            raise ValueError(f"unknown noise_truncation {self.noise_truncation!r}")
        if self.max_ticks < 0:
            raise ValueError(f"max_ticks must be >= 0, got {self.max_ticks}")
        if self.controller not in CONTROLLERS:
            raise ValueError(f"unknown controller {self.controller!r}")
        groups = self.partition.group_count
        pot = self.potential
        if pot.charges is None:
            pot = replace(pot, charges=(1.0,) * groups)
        elif len(pot.charges) != groups:
            raise ValueError(
                f"got {len(pot.charges)} charges for {groups} groups; lengths must match"
            )
        object.__setattr__(self, "potential", pot)
        samp = self.sampler
        if samp.proposal_covariance is None:
            sigma2 = (0.2 * self.v_max) ** 2
            samp = replace(samp, proposal_covariance=((sigma2, 0.0), (0.0, sigma2)))
        object.__setattr__(self, "sampler", samp)
        for a in self.attractors:
            if a.target_type >= groups:
                raise ValueError(
                    f"attractor target_type {a.target_type} out of range for {groups} groups"
                )
        object.__setattr__(self, "attractors", tuple(self.attractors))

    @property
    def n_robots(self) -> int:
        return self.partition.n_robots

    @property
    def displacement_cap(self) -> float:
        """Upper bound on per-tick displacement, v_max * dt (0.02 m default)."""
        return self.v_max * self.tick_duration
