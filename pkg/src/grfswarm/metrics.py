"""Segregation and flocking metrics.

All metrics are pure functions of a state snapshot (positions, velocities,
type labels), so they can be recomputed offline from recorded runs. Cluster
structure uses single-linkage connectivity: two same-type robots closer than
the cluster distance share a cluster, and clusters are the connected
components of that per-type graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_CLUSTER_DISTANCE = 0.3  # m


@dataclass(frozen=True)
class MetricSample:
    """Metrics of one state snapshot.

    mean_intragroup_distance is None when no group has at least two robots.
    attractor_distances (per-type mean distance to the nearest matching
    attractor; None for types without one) is only filled when the scenario
    defines attractors.
    """

    tick: int
    cluster_count: int
    mean_intragroup_distance: float | None
    velocity_consensus_error: float
    mean_speed: float
    attractor_distances: tuple[float | None, ...] | None = None


class _UnionFind:
    """Path-compressing union-find over 0..n-1."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:  # compress
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def cluster_count(positions, types, cluster_distance: float = DEFAULT_CLUSTER_DISTANCE) -> int:
    """Number of same-type connected components, summed over types.

    Robots of the same type are connected when their distance is strictly
    below cluster_distance. The count is minimal (one cluster per type) when
    the swarm is fully segregated, and at most the number of robots.
    """
    q = np.asarray(positions, dtype=float)
    t = np.asarray(types)
    n = q.shape[0]
    uf = _UnionFind(n)
    for g in np.unique(t):
        members = np.flatnonzero(t == g)
        if members.size < 2:
            continue
        sub = q[members]
        diff = sub[:, None, :] - sub[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        for a in range(members.size):
            for b in range(a + 1, members.size):
                if dist[a, b] < cluster_distance:
                    uf.union(int(members[a]), int(members[b]))
    roots = {uf.find(i) for i in range(n)}
    return len(roots)


def velocity_consensus_error(velocities, types) -> float:
    """Mean over groups of the group's mean deviation from its mean velocity.

    A single-robot group deviates from itself by zero. The value is zero
    exactly when every group moves in perfect consensus.
    """
    v = np.asarray(velocities, dtype=float)
    t = np.asarray(types)
    errors = []
    for g in np.unique(t):
        members = np.flatnonzero(t == g)
        group_v = v[members]
        mean_v = group_v.mean(axis=0)
        errors.append(float(np.linalg.norm(group_v - mean_v[None, :], axis=1).mean()))
    if not errors:  # no robots at all
        return 0.0
    return float(np.mean(errors))


def mean_intragroup_distance(positions, types) -> float | None:
    """Mean over groups of the mean pairwise distance inside the group.

    Groups with fewer than two robots have no pairwise distances and are
    skipped; with every group a singleton there is nothing to average and
    the result is None.
    """
    q = np.asarray(positions, dtype=float)
    t = np.asarray(types)
    per_group = []
    for g in np.unique(t):
        members = np.flatnonzero(t == g)
        if members.size < 2:
            continue
        sub = q[members]
        diff = sub[:, None, :] - sub[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        iu = np.triu_indices(members.size, k=1)
        per_group.append(float(dist[iu].mean()))
    if not per_group:
        return None
    return float(np.mean(per_group))


def mean_speed(velocities) -> float:
    v = np.asarray(velocities, dtype=float)
    if v.shape[0] == 0:
        return 0.0
    return float(np.linalg.norm(v, axis=1).mean())


def attractor_distances(positions, types, attractors, group_count: int) -> tuple[float | None, ...]:
    """Per type: mean distance of its robots to the nearest matching attractor.

    Types without a matching attractor get None.
    """
    q = np.asarray(positions, dtype=float)
    t = np.asarray(types)
    out: list[float | None] = []
    for g in range(group_count):
        sites = [a.position for a in attractors if a.target_type == g]
        members = np.flatnonzero(t == g)
        if not sites or members.size == 0:
            out.append(None)
            continue
        sites_arr = np.asarray(sites, dtype=float)
        diff = q[members][:, None, :] - sites_arr[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        out.append(float(dist.min(axis=1).mean()))
    return tuple(out)


def convergence_iteration(samples) -> int | None:
    """First tick at which the run attains its minimum cluster count.

    None for an empty sample list.
    """
    samples = list(samples)
    if not samples:
        return None
    best = min(s.cluster_count for s in samples)
    for s in samples:
        if s.cluster_count == best:
            return s.tick
    raise AssertionError("unreachable: minimum taken over the same list")
