from __future__ import annotations

import numpy as np
import pytest

from grfswarm.metrics import (
    MetricSample,
    cluster_count,
    convergence_iteration,
    mean_intragroup_distance,
    mean_speed,
    velocity_consensus_error,
)
from grfswarm.model import VirtualAttractor
from grfswarm.metrics import attractor_distances


def _bfs_cluster_count(positions, types, cluster_distance: float) -> int:
    """Independent oracle: BFS connected components per type."""
    q = np.asarray(positions, dtype=float)
    t = np.asarray(types)
    n = q.shape[0]
    seen = [False] * n
    count = 0
    for start in range(n):
        if seen[start]:
            continue
        count += 1
        stack = [start]
        seen[start] = True
        while stack:
            i = stack.pop()
            for j in range(n):
                if seen[j] or t[j] != t[i]:
                    continue
                if np.linalg.norm(q[i] - q[j]) < cluster_distance:
                    seen[j] = True
                    stack.append(j)
    return count


def test_cluster_chain_is_transitive():
    # 0.2 + 0.2 chain: the endpoints are 0.4 apart but share a cluster
    q = [(0.0, 0.0), (0.2, 0.0), (0.4, 0.0)]
    assert cluster_count(q, [0, 0, 0], 0.3) == 1


def test_cluster_all_far_apart():
    q = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]
    assert cluster_count(q, [0, 0, 1, 1], 0.3) == 4


def test_cluster_five_blobs():
    rng = np.random.default_rng(0)
    centers = [(0.0, 0.0), (3.0, 0.0), (0.0, 3.0), (3.0, 3.0), (6.0, 6.0)]
    q, t = [], []
    for g, c in enumerate(centers):
        for _ in range(4):
            q.append(np.asarray(c) + rng.uniform(-0.05, 0.05, 2))
            t.append(g)
    assert cluster_count(q, t, 0.3) == 5


def test_cluster_boundary_is_strict():
    # exactly at the threshold distance the pair stays separate
    q = [(0.0, 0.0), (0.3, 0.0)]
    assert cluster_count(q, [0, 0], 0.3) == 2
    assert cluster_count([(0.0, 0.0), (0.3 - 1e-9, 0.0)], [0, 0], 0.3) == 1


def test_cluster_types_never_merge():
    q = [(0.0, 0.0), (0.01, 0.0)]
    assert cluster_count(q, [0, 1], 0.3) == 2


def test_cluster_matches_bfs_oracle():
    rng = np.random.default_rng(42)
    for _ in range(200):
        n = 30
        q = rng.uniform(0.0, 2.0, (n, 2))
        t = rng.integers(0, 3, n)
        assert cluster_count(q, t, 0.3) == _bfs_cluster_count(q, t, 0.3)


def test_cluster_monotone_in_distance():
    rng = np.random.default_rng(1)
    q = rng.uniform(0.0, 2.0, (25, 2))
    t = rng.integers(0, 3, 25)
    counts = [cluster_count(q, t, d) for d in (0.1, 0.2, 0.3, 0.5, 1.0, 3.0)]
    assert counts == sorted(counts, reverse=True)
    assert counts[-1] == len(np.unique(t))


def test_consensus_opposite_pair():
    err = velocity_consensus_error([(1.0, 0.0), (-1.0, 0.0)], [0, 0])
    assert err == pytest.approx(1.0, rel=1e-12)


def test_consensus_zero_in_perfect_agreement():
    v = [(0.3, 0.4)] * 5
    assert velocity_consensus_error(v, [0, 0, 1, 1, 1]) == pytest.approx(0.0, abs=1e-15)


def test_consensus_translation_invariant():
    rng = np.random.default_rng(2)
    v = rng.normal(size=(8, 2))
    t = [0, 0, 0, 1, 1, 1, 1, 1]
    base = velocity_consensus_error(v, t)
    shifted = velocity_consensus_error(v + np.array([5.0, -3.0]), t)
    assert shifted == pytest.approx(base, rel=1e-12)


def test_consensus_singleton_group_contributes_zero():
    v = [(1.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
    assert velocity_consensus_error(v, [0, 0, 1]) == 0.0


def test_intragroup_distance_two_robots():
    d = mean_intragroup_distance([(0.0, 0.0), (1.0, 0.0)], [0, 0])
    assert d == pytest.approx(1.0, rel=1e-12)


def test_intragroup_distance_equilateral():
    s = 0.7
    q = [(0.0, 0.0), (s, 0.0), (s / 2.0, s * np.sqrt(3.0) / 2.0)]
    d = mean_intragroup_distance(q, [0, 0, 0])
    assert d == pytest.approx(s, rel=1e-12)


def test_intragroup_distance_all_pairs_oracle():
    rng = np.random.default_rng(3)
    q = rng.uniform(0.0, 4.0, (12, 2))
    t = np.repeat([0, 1, 2], 4)
    per_group = []
    for g in range(3):
        idx = np.flatnonzero(t == g)
        acc = [np.linalg.norm(q[a] - q[b]) for k, a in enumerate(idx)
               for b in idx[k + 1:]]
        per_group.append(np.mean(acc))
    assert mean_intragroup_distance(q, t) == pytest.approx(
        np.mean(per_group), rel=1e-12)


def test_intragroup_distance_none_when_all_singletons():
    assert mean_intragroup_distance([(0.0, 0.0), (1.0, 1.0)], [0, 1]) is None


def test_mean_speed_hand_values():
    assert mean_speed([(3.0, 4.0), (0.0, 1.0)]) == pytest.approx(3.0, rel=1e-12)
    assert mean_speed(np.empty((0, 2))) == 0.0


def test_attractor_distances_nearest_site():
    attractors = (VirtualAttractor(position=(0.0, 0.0), target_type=0),
                  VirtualAttractor(position=(4.0, 0.0), target_type=0))
    q = [(1.0, 0.0), (3.0, 0.0), (2.0, 2.0)]
    out = attractor_distances(q, [0, 0, 1], attractors, 2)
    assert out[0] == pytest.approx(1.0, rel=1e-12)
    assert out[1] is None


def _sample(tick: int, clusters: int) -> MetricSample:
    return MetricSample(tick=tick, cluster_count=clusters,
                        mean_intragroup_distance=None,
                        velocity_consensus_error=0.0, mean_speed=0.0)


def test_convergence_first_minimum():
    ticks = [0, 100, 200, 300, 400]
    clusters = [15, 7, 5, 5, 6]
    samples = [_sample(tk, c) for tk, c in zip(ticks, clusters)]
    assert convergence_iteration(samples) == 200


def test_convergence_constant_run_is_tick_zero():
    samples = [_sample(tk, 3) for tk in (0, 50, 100)]
    assert convergence_iteration(samples) == 0


def test_convergence_empty_is_none():
    assert convergence_iteration([]) is None
