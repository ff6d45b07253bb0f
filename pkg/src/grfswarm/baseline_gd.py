"""Gradient-descent baseline controller.

The contrast case for the sampler: instead of drawing from the Gibbs
distribution, descend the same energy surface deterministically. The gradient
comes from central finite differences in velocity space (no analytic forces),
so both controllers consume exactly the same energy model. Being
deterministic and strictly local, this controller stalls in local minima,
e.g. an isolated robot at rest sits at a stationary point of the speed
incentive and never starts moving.
"""

from __future__ import annotations

import math

import numpy as np

from .model import PotentialParams
from .potential import pack_observations

DEFAULT_STEP_SIZE = 0.1  # descent rate on the energy surface


def gd_velocity(position, velocity, observations, attractors, type_i: int,
                potential: PotentialParams, v_max: float, dt: float,
                step_size: float = DEFAULT_STEP_SIZE,
                fd_step: float | None = None) -> np.ndarray:
    """One deterministic descent step in velocity space.

    v' = clamp(v - mu * grad H(v)) with the gradient estimated by central
    differences of step h = 1e-3 * v_max per component. A component whose
    difference quotient is non-finite contributes zero. The result is
    clamped to the v_max ball. No randomness is consumed.
    """
    model = pack_observations(position, observations, attractors, type_i,
                              potential, v_max, dt)
    v = np.asarray(velocity, dtype=float)
    h = 1e-3 * v_max if fd_step is None else fd_step
    probes = np.array([
        [v[0] + h, v[1]],
        [v[0] - h, v[1]],
        [v[0], v[1] + h],
        [v[0], v[1] - h],
    ])
    with np.errstate(invalid="ignore"):
        e = model.total(probes)
    grad = np.zeros(2)
    for axis in range(2):
        hi, lo = e[2 * axis], e[2 * axis + 1]
        if math.isfinite(hi) and math.isfinite(lo):
            grad[axis] = (hi - lo) / (2.0 * h)
    new_v = v - step_size * grad
    speed = float(np.linalg.norm(new_v))
    if speed > v_max:
        new_v = new_v * (v_max / speed)
    return new_v
