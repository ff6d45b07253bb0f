from __future__ import annotations

import math

import numpy as np
import pytest

from grfswarm.baseline_gd import gd_velocity
from grfswarm.model import PotentialParams
from grfswarm.potential import NeighborObservation, hamiltonian


def params_one_group(**overrides) -> PotentialParams:
    kwargs = {"charges": (1.0,)}
    kwargs.update(overrides)
    return PotentialParams(**kwargs)


def test_rest_is_a_stationary_point():
    # the speed incentive 0.5*m*(v_max - |v|)^2 has zero gradient at the
    # origin only through the finite-difference cancellation of the
    # symmetric probes; an isolated robot at rest never starts moving
    p = params_one_group()
    got = gd_velocity((1.0, 1.0), (0.0, 0.0), [], (), 0, p, 1.0, 0.02)
    assert np.allclose(got, (0.0, 0.0), atol=1e-12)


def test_full_speed_is_a_minimum():
    p = params_one_group()
    v = (0.6, 0.8)
    got = gd_velocity((1.0, 1.0), v, [], (), 0, p, 1.0, 0.02)
    assert np.allclose(got, v, atol=1e-6)


def test_isolated_robot_accelerates_toward_v_max():
    p = params_one_group()
    v = np.array([0.5, 0.0])
    for _ in range(200):
        v = gd_velocity((1.0, 1.0), v, [], (), 0, p, 1.0, 0.02)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-3)


def test_gradient_matches_secant_oracle():
    # a same-type neighbor ahead makes the energy depend on vx through the
    # predicted-gap interaction; compare the descent step against a secant
    # slope of the full hamiltonian along that axis
    p = params_one_group(mass=2.0)
    obs = [NeighborObservation(kind="robot", relative_position=(0.5, 0.0),
                               velocity=(0.0, 0.0), type_label=0)]

    def energy(vx: float) -> float:
        return hamiltonian((1.0, 1.0), (vx, 0.3), obs, (), 0, p, 1.0, 0.02)

    v0, mu, h = 0.2, 0.05, 1e-5
    slope = (energy(v0 + h) - energy(v0 - h)) / (2.0 * h)
    got = gd_velocity((1.0, 1.0), (v0, 0.3), obs, (), 0, p, 1.0, 0.02,
                      step_size=mu)
    assert got[0] == pytest.approx(v0 - mu * slope, rel=1e-4)


def test_small_step_descends_energy():
    p = params_one_group()
    obs = [NeighborObservation(kind="robot", relative_position=(0.4, 0.2),
                               velocity=(0.1, -0.2), type_label=0)]
    v0 = (0.3, -0.1)
    e0 = hamiltonian((1.0, 1.0), v0, obs, (), 0, p, 1.0, 0.02)
    v1 = gd_velocity((1.0, 1.0), v0, obs, (), 0, p, 1.0, 0.02, step_size=1e-3)
    e1 = hamiltonian((1.0, 1.0), tuple(v1), obs, (), 0, p, 1.0, 0.02)
    assert e1 < e0


def test_result_clamped_to_ball():
    p = params_one_group(mass=500.0)
    got = gd_velocity((1.0, 1.0), (0.1, 0.0), [], (), 0, p, 1.0, 0.02,
                      step_size=10.0)
    assert np.linalg.norm(got) <= 1.0 + 1e-12


def test_deterministic():
    p = params_one_group()
    obs = [NeighborObservation(kind="robot", relative_position=(0.3, 0.3),
                               velocity=(0.0, 0.5), type_label=0)]
    a = gd_velocity((1.0, 1.0), (0.2, 0.2), obs, (), 0, p, 1.0, 0.02)
    b = gd_velocity((1.0, 1.0), (0.2, 0.2), obs, (), 0, p, 1.0, 0.02)
    assert np.array_equal(a, b)


def test_non_finite_component_contributes_zero():
    # alpha large enough that the repulsive exponential overflows for a
    # neighbor just inside the hard-core guard: that axis's difference
    # quotient is non-finite and must not poison the step
    p = params_one_group(alpha=1500.0)
    guard = p.hard_core_radius
    obs = [NeighborObservation(kind="robot",
                               relative_position=(guard * 1.001, 0.0),
                               velocity=(0.0, 0.0), type_label=0)]
    got = gd_velocity((1.0, 1.0), (0.0, 0.0), obs, (), 0, p, 1.0, 0.02)
    assert np.all(np.isfinite(got))
