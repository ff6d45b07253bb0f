from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from grfswarm.model import (
    Arena,
    GroupPartition,
    PotentialParams,
    SamplerParams,
    SwarmConfig,
    VirtualAttractor,
    build_obstacle_points,
    kinematic_step,
)


def test_kinematic_step_zero_velocity():
    assert tuple(kinematic_step((0.0, 0.0), (0.0, 0.0), 0.02)) == (0.0, 0.0)


def test_kinematic_step_axis_aligned_unit_speed():
    q = kinematic_step((1.0, 1.0), (1.0, 0.0), 0.02)
    assert np.allclose(q, (1.02, 1.0), rtol=0, atol=1e-15)


def test_kinematic_step_displacement_norm_exact():
    # unit-speed velocity: displacement norm must be exactly v_max * dt
    q = kinematic_step((0.0, 0.0), (0.6, 0.8), 0.02)
    assert math.hypot(q[0], q[1]) == pytest.approx(0.02, rel=1e-15)


def test_kinematic_step_linear_in_dt():
    q, v = np.array([0.3, -0.7]), np.array([0.5, 0.1])
    twice = kinematic_step(kinematic_step(q, v, 0.01), v, 0.01)
    once = kinematic_step(q, v, 0.02)
    assert np.allclose(twice, once, rtol=0, atol=1e-15)


def test_kinematic_step_rejects_negative_dt():
    with pytest.raises(ValueError):
        kinematic_step((0.0, 0.0), (1.0, 0.0), -0.01)


def test_obstacle_points_uniform_subdivision():
    pts = build_obstacle_points((((0.0, 0.0), (1.0, 0.0)),), 0.5)
    assert sorted(map(tuple, pts)) == [(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)]


def test_obstacle_points_empty_segments():
    assert build_obstacle_points((), 0.5).shape == (0, 2)


def test_obstacle_points_zero_length_segment():
    pts = build_obstacle_points((((0.3, 0.4), (0.3, 0.4)),), 0.05)
    assert pts.shape == (1, 2) and tuple(pts[0]) == (0.3, 0.4)


def _subdivision_count_oracle(segments, spacing):
    """Count unique points by direct subdivision, independent of the library."""
    seen = set()
    for (x1, y1), (x2, y2) in segments:
        length = math.hypot(x2 - x1, y2 - y1)
        n = max(1, math.ceil(length / spacing - 1e-12))
        for k in range(n + 1):
            f = k / n
            seen.add((round(x1 + f * (x2 - x1), 9), round(y1 + f * (y2 - y1), 9)))
    return len(seen)


def test_obstacle_points_10x10_walls_count():
    walls = Arena(10.0, 10.0, point_spacing=0.05).wall_segments
    pts = build_obstacle_points(walls, 0.05)
    assert len(pts) == 800  # 4 sides x 201 points, 4 corners deduplicated
    assert len(pts) == _subdivision_count_oracle(walls, 0.05)


def test_obstacle_points_spacing_and_endpoints():
    seg = ((0.0, 0.0), (1.3, 0.7))
    pts = build_obstacle_points((seg,), 0.2)
    rows = sorted(map(tuple, pts))
    assert (0.0, 0.0) in rows and (1.3, 0.7) in rows
    # consecutive points along the segment are at most `spacing` apart
    along = sorted(pts.tolist(), key=lambda p: p[0])
    gaps = [math.dist(a, b) for a, b in zip(along, along[1:])]
    assert max(gaps) <= 0.2 + 1e-12


def test_obstacle_points_invariant_under_segment_reordering():
    segs = Arena(4.0, 3.0).wall_segments
    a = build_obstacle_points(segs, 0.05)
    b = build_obstacle_points(tuple(reversed(segs)), 0.05)
    assert np.array_equal(a, b)


def test_partition_disjoint_and_exhaustive():
    part = GroupPartition(sizes=(3, 1, 4))
    assert part.n_robots == 8
    assert part.group_count == 3
    seen = []
    for g in range(part.group_count):
        members = part.members(g).tolist()
        assert all(part.group_of(i) == g for i in members)
        seen.extend(members)
    assert sorted(seen) == list(range(8))


def test_partition_uniform():
    part = GroupPartition.uniform(3, 5)
    assert part.sizes == (5, 5, 5)
    assert part.types.tolist() == [0] * 5 + [1] * 5 + [2] * 5


def test_partition_random_sizes_property(rng):
    for _ in range(20):
        sizes = tuple(int(s) for s in rng.integers(0, 6, size=rng.integers(1, 5)))
        part = GroupPartition(sizes=sizes)
        counts = [int(np.sum(part.types == g)) for g in range(len(sizes))]
        assert counts == list(sizes)


def test_partition_rejects_empty_and_negative():
    with pytest.raises(ValueError):
        GroupPartition(sizes=())
    with pytest.raises(ValueError):
        GroupPartition(sizes=(3, -1))


def test_arena_clamp():
    arena = Arena(4.0, 2.0)
    q = np.array([[-1.0, 0.5], [5.0, 3.0], [2.0, 1.0]])
    clamped = arena.clamp(q)
    assert clamped.tolist() == [[0.0, 0.5], [4.0, 2.0], [2.0, 1.0]]


def test_arena_rejects_bad_dimensions():
    with pytest.raises(ValueError):
        Arena(0.0, 4.0)
    with pytest.raises(ValueError):
        Arena(4.0, 4.0, point_spacing=0.0)


def test_attractor_validation():
    with pytest.raises(ValueError):
        VirtualAttractor(position=(1.0, 1.0), target_type=0, charge=-1.0)
    with pytest.raises(ValueError):
        VirtualAttractor(position=(1.0, 1.0), target_type=-1)


def test_potential_params_validation():
    with pytest.raises(ValueError):
        PotentialParams(alpha=6.0)  # exp-6 structure needs alpha > 6
    with pytest.raises(ValueError):
        PotentialParams(epsilon=0.0)
    with pytest.raises(ValueError):
        PotentialParams(mass=0.0)
    with pytest.raises(ValueError):
        PotentialParams(sign_mode="both")
    with pytest.raises(ValueError):
        PotentialParams(obstacle_charge=-0.5)


def test_hard_core_radius_matches_turnover_root():
    # the guard starts halfway between the exp-6 inner turnover x_w and the
    # well at r0; x_w solves alpha*(1-x) + 7*ln(x) = 0 below 7/alpha
    for alpha in (8.0, 12.0, 30.0, 80.0):
        p = PotentialParams(alpha=alpha)
        x_w = brentq(lambda x: alpha * (1 - x) + 7 * math.log(x),
                     math.exp(-alpha / 7.0) / 2, 7.0 / alpha)
        assert p.hard_core_radius == pytest.approx(p.r0 * (x_w + 1) / 2, rel=1e-9)


def test_hard_core_radius_low_alpha_and_huge_alpha_limits():
    assert PotentialParams(alpha=6.5).hard_core_radius == 0.3  # no wall, guard at r0
    assert PotentialParams(alpha=9000.0).hard_core_radius == pytest.approx(0.15)


def test_sampler_params_validation():
    with pytest.raises(ValueError):
        SamplerParams(iterations=0)
    with pytest.raises(ValueError):
        SamplerParams(iterations=10, burn_in=10)  # burn-in must leave samples
    with pytest.raises(ValueError):
        SamplerParams(proposal_covariance=((1.0, 0.2), (0.3, 1.0)))  # asymmetric
    with pytest.raises(ValueError):
        SamplerParams(proposal_covariance=((1.0, 2.0), (2.0, 1.0)))  # indefinite
    with pytest.raises(ValueError):
        SamplerParams(temperature=0.0)
    with pytest.raises(ValueError):
        SamplerParams(proposal_center_mode="midpoint")


def test_sampler_params_default_burn_in_is_half():
    assert SamplerParams(iterations=100).burn_in == 50
    assert SamplerParams(iterations=7).burn_in == 3


def test_swarm_config_resolves_defaults():
    cfg = SwarmConfig(partition=GroupPartition.uniform(3, 2), arena=Arena(4.0, 4.0))
    assert cfg.potential.charges == (1.0, 1.0, 1.0)
    sigma2 = (0.2 * cfg.v_max) ** 2
    assert cfg.sampler.proposal_covariance == ((sigma2, 0.0), (0.0, sigma2))
    assert cfg.displacement_cap == pytest.approx(0.02)


def test_swarm_config_validation():
    part, arena = GroupPartition.uniform(2, 2), Arena(4.0, 4.0)
    with pytest.raises(ValueError):
        SwarmConfig(partition=part, arena=arena, controller="pso")
    with pytest.raises(ValueError):
        SwarmConfig(partition=part, arena=arena, noise_fraction=1.0)
    with pytest.raises(ValueError):
        SwarmConfig(partition=part, arena=arena,
                    potential=PotentialParams(charges=(1.0,)))  # wrong length
    with pytest.raises(ValueError):
        SwarmConfig(partition=part, arena=arena,
                    attractors=(VirtualAttractor((1.0, 1.0), target_type=2),))
