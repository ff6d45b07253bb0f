"""Energy model for the swarm controller.

A robot scores a candidate velocity by the total energy of the world it
predicts one tick ahead: pair interactions with every sensed robot (both
advanced by their velocities), repulsion from sensed obstacle points,
attraction to matching virtual attractors, a kinetic consensus term over
same-type neighbors and a speed incentive toward full speed. Lower energy
means a more desirable velocity; the sampler never needs gradients or the
normalizing constant, only energy differences.

The pair interaction is a Coulomb-Buckingham (exp-6 plus Coulomb) potential.
The raw exp-6 formula inverts at short range (its dispersion term diverges to
-inf faster than the exponential wall grows), so below a hard-core radius the
implemented pair energy continues with a C1 strictly-repulsive extension; see
`pair_energy`. `coulomb_buckingham` itself is the unmodified formula.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import PotentialParams, VirtualAttractor

OBSTACLE_TYPE = -1  # type_label carried by obstacle observations
OBSTACLE_CHARGE = 1.0  # default unit charge of obstacle points (PotentialParams.obstacle_charge)

ObservationKind = str  # "robot" | "obstacle"


@dataclass(frozen=True)
class NeighborObservation:
    """One sensed neighbor, in the observer's reference frame.

    relative_position is the neighbor's position minus the observer's, after
    sensor noise. For obstacle points the velocity is zero and type_label is
    OBSTACLE_TYPE. With noise-free sensing the relative position norm is at
    most the sensing radius; bounded noise can exceed it by at most
    noise_fraction * radius per component.
    """

    kind: ObservationKind
    relative_position: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)
    type_label: int = OBSTACLE_TYPE

    def __post_init__(self):
        if self.kind not in ("robot", "obstacle"):
            raise ValueError(f"unknown observation kind {self.kind!r}")
        object.__setattr__(
            self, "relative_position",
            (float(self.relative_position[0]), float(self.relative_position[1])),
        )
        object.__setattr__(
            self, "velocity", (float(self.velocity[0]), float(self.velocity[1]))
        )


def charge_product(type_i: int, type_j: int, params: PotentialParams) -> float:
    """Signed charge product for a robot pair.

    The magnitude is |c_i * c_j|. In "segregating" mode the sign is negative
    for same-group pairs (Coulomb attraction) and positive for cross-group
    pairs (Coulomb repulsion); "literal" mode is the opposite convention,
    kept for ablation.
    """
    mag = abs(params.charge_of(type_i) * params.charge_of(type_j))
    same = 2.0 * float(type_i == type_j) - 1.0  # +1 same group, -1 otherwise
    if params.sign_mode == "segregating":
        return -same * mag
    return same * mag


def coulomb_buckingham(r, C, params: PotentialParams):
    """Raw Coulomb-Buckingham pair potential.

    phi(r) = eps * ( 6/(a-6) * exp(a*(1 - r/r0)) - a/(a-6) * (r0/r)^6 )
             + k_e * C / r

    At r = r0 with C = 0 the value is exactly -eps (the well identity).
    Vectorized over r (C broadcasts). Raises on any r <= 0; callers must
    clamp or reject first.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0.0):
        raise ValueError("coulomb_buckingham is singular at r <= 0; clamp or reject first")
    a = params.alpha
    with np.errstate(over="ignore"):
        buck = params.epsilon * (
            (6.0 / (a - 6.0)) * np.exp(a * (1.0 - r_arr / params.r0))
            - (a / (a - 6.0)) * (params.r0 / r_arr) ** 6
        )
        out = buck + params.coulomb_coupling * np.asarray(C, dtype=float) / r_arr
    if np.isscalar(r) or r_arr.ndim == 0:
        return float(out)
    return out


def _buckingham(r: np.ndarray, params: PotentialParams) -> np.ndarray:
    a = params.alpha
    with np.errstate(over="ignore"):
        return params.epsilon * (
            (6.0 / (a - 6.0)) * np.exp(a * (1.0 - r / params.r0))
            - (a / (a - 6.0)) * (params.r0 / r) ** 6
        )


@lru_cache(maxsize=None)
def _hard_core_coeffs(params: PotentialParams) -> tuple[float, float, float]:
    """(r_h, buckingham(r_h), d/dr buckingham(r_h)) for the guard junction.

    The junction slope comes from central differencing the raw curve, which
    keeps the extension C1 without introducing analytic force expressions.
    """
    r_h = params.hard_core_radius
    h = 1e-6 * params.r0
    f = lambda x: float(_buckingham(np.asarray(x, dtype=float), params))
    slope = (f(r_h + h) - f(r_h - h)) / (2.0 * h)
    return r_h, f(r_h), slope


def pair_energy(r, C, params: PotentialParams):
    """Guarded pair energy used by the Hamiltonian.

    Equal to `coulomb_buckingham` for r >= hard-core radius r_h. Below r_h
    the energy continues as

        phi(r_h) + phi'(r_h) * r_h * (1 - r_h / r),

    which matches value and slope at the junction and rises like 1/r as
    r -> 0, so collisions always score as very large finite energies.
    Distances at or below d_min are floored to d_min first.

    Vectorized over r; C broadcasts against r.
    """
    r_arr = np.maximum(np.asarray(r, dtype=float), params.d_min)
    C_arr = np.asarray(C, dtype=float)
    r_h, buck_h, buck_slope = _hard_core_coeffs(params)
    ke = params.coulomb_coupling
    with np.errstate(over="ignore", invalid="ignore"):
        # Raw branch. Evaluated at max(r, r_h) so the dead branch cannot
        # overflow; the guard branch replaces it below r_h anyway.
        r_safe = np.maximum(r_arr, r_h)
        raw = _buckingham(r_safe, params) + ke * C_arr / r_safe
        value_h = buck_h + ke * C_arr / r_h
        slope_h = buck_slope - ke * C_arr / (r_h * r_h)
        ext = value_h + slope_h * r_h * (1.0 - r_h / r_arr)
        out = np.where(r_arr >= r_h, raw, ext)
    if np.isscalar(r) or r_arr.ndim == 0:
        return float(out)
    return out


def kinetic_energy(resultant, mass: float) -> float:
    """E_k = 0.5 * m * (V . V) for a resultant velocity vector V."""
    v = np.asarray(resultant, dtype=float)
    return 0.5 * mass * float(v @ v)


def resultant_velocity(candidate_velocity, same_type_velocities, params: PotentialParams) -> np.ndarray:
    """Resultant of same-type neighbor velocities entering the kinetic term.

    Default (relative_kinetic=True): sum of (v_j - candidate), which vanishes
    exactly when the candidate equals the neighbors' mean velocity, making
    the kinetic term a consensus penalty. The ablation mode sums the raw
    neighbor velocities, which does not depend on the candidate.
    """
    vs = np.asarray(same_type_velocities, dtype=float).reshape(-1, 2)
    if vs.shape[0] == 0:
        return np.zeros(2)
    total = vs.sum(axis=0)
    if params.relative_kinetic:
        return total - vs.shape[0] * np.asarray(candidate_velocity, dtype=float)
    return total


def speed_incentive(candidate_velocity, v_max: float, mass: float) -> float:
    """0.5 * m * (v_max - |v|)^2: zero at full speed, maximal at rest."""
    speed = float(np.linalg.norm(np.asarray(candidate_velocity, dtype=float)))
    return 0.5 * mass * (v_max - speed) ** 2


class CandidateEnergyModel:
    """Energy of many candidate velocities against one frozen sensing snapshot.

    Packs a robot's observations once, then evaluates batches of candidates
    with a handful of vectorized operations. `hamiltonian` and the Metropolis
    sampler share this code path, so a single candidate scores bit-identically
    whether evaluated alone or inside a batch.
    """

    def __init__(self, rel_predicted: np.ndarray, charges: np.ndarray,
                 same_velocity_sum: np.ndarray, same_count: int,
                 params: PotentialParams, v_max: float, dt: float):
        self.rel_predicted = rel_predicted  # (n, 2) neighbor offsets, advanced one tick
        self.charges = charges  # (n,) signed charge products
        self.same_velocity_sum = same_velocity_sum  # (2,)
        self.same_count = same_count
        self.params = params
        self.v_max = v_max
        self.dt = dt

    def interaction(self, candidates: np.ndarray) -> np.ndarray:
        """Summed pair energies (robots, obstacles, attractors) per candidate."""
        cand = np.asarray(candidates, dtype=float).reshape(-1, 2)
        if self.rel_predicted.shape[0] == 0:
            return np.zeros(cand.shape[0])
        d = self.rel_predicted[None, :, :] - cand[:, None, :] * self.dt
        r = np.sqrt(np.einsum("mnk,mnk->mn", d, d))
        return pair_energy(r, self.charges[None, :], self.params).sum(axis=1)

    def kinetic(self, candidates: np.ndarray) -> np.ndarray:
        cand = np.asarray(candidates, dtype=float).reshape(-1, 2)
        if self.params.relative_kinetic:
            V = self.same_velocity_sum[None, :] - self.same_count * cand
        else:
            V = np.broadcast_to(self.same_velocity_sum, cand.shape)
        return 0.5 * self.params.mass * np.einsum("mk,mk->m", V, V)

    def incentive(self, candidates: np.ndarray) -> np.ndarray:
        cand = np.asarray(candidates, dtype=float).reshape(-1, 2)
        speed = np.sqrt(np.einsum("mk,mk->m", cand, cand))
        return 0.5 * self.params.mass * (self.v_max - speed) ** 2

    def total(self, candidates: np.ndarray) -> np.ndarray:
        return self.interaction(candidates) + self.kinetic(candidates) + self.incentive(candidates)


def pack_observations(position, observations, attractors, type_i: int,
                      params: PotentialParams, v_max: float, dt: float,
                      include_robots: bool = True) -> CandidateEnergyModel:
    """Build a CandidateEnergyModel from one robot's sensing snapshot.

    Neighbor robots enter at their predicted offset (relative position plus
    their observed velocity times dt); obstacle points are static. Attractors
    matching type_i enter as attractive terms at their true offset, outside
    sensing range and noise. Packing preserves the caller's observation
    order, followed by attractors in configuration order.
    """
    rel_rows: list[np.ndarray] = []
    charge_rows: list[float] = []
    vel_sum = np.zeros(2)
    same_count = 0
    c_i = params.charge_of(type_i)
    for obs in observations:
        rel = np.asarray(obs.relative_position, dtype=float)
        if obs.kind == "robot":
            if not include_robots:
                continue
            rel_rows.append(rel + np.asarray(obs.velocity, dtype=float) * dt)
            charge_rows.append(charge_product(type_i, obs.type_label, params))
            if obs.type_label == type_i:
                vel_sum += np.asarray(obs.velocity, dtype=float)
                same_count += 1
        else:
            rel_rows.append(rel)
            charge_rows.append(abs(c_i * params.obstacle_charge))  # always repulsive
    q = None
    for attr in attractors:
        if attr.target_type != type_i:
            continue  # invisible to every other type
        if q is None:
            q = np.asarray(position, dtype=float)
        rel_rows.append(np.asarray(attr.position, dtype=float) - q)
        charge_rows.append(-abs(c_i * attr.charge))  # always attractive
    if rel_rows:
        rel_arr = np.vstack(rel_rows)
        charge_arr = np.asarray(charge_rows, dtype=float)
    else:
        rel_arr = np.empty((0, 2))
        charge_arr = np.empty((0,))
    return CandidateEnergyModel(rel_arr, charge_arr, vel_sum, same_count, params, v_max, dt)


def obstacle_term(position, candidate_velocity, observations, attractors,
                  type_i: int, params: PotentialParams, v_max: float, dt: float) -> float:
    """Singleton energy: obstacle repulsion plus matching-attractor pull.

    Sums the guarded pair energy between the robot's predicted position and
    every sensed obstacle point (positive charge product, repulsive) and
    every attractor whose target type matches (negative charge product,
    attractive). Robot observations are ignored here.
    """
    model = pack_observations(position, observations, attractors, type_i,
                              params, v_max, dt, include_robots=False)
    cand = np.asarray(candidate_velocity, dtype=float)
    return float(model.interaction(cand[None, :])[0])


def hamiltonian(position, candidate_velocity, observations, attractors,
                type_i: int, params: PotentialParams, v_max: float, dt: float) -> float:
    """Total energy of one candidate velocity for one robot.

    The sum of: guarded pair energies against every observed robot (both
    positions advanced one tick, the neighbor by its observed velocity, the
    robot by the candidate), obstacle repulsion, matching-attractor
    attraction, the kinetic consensus term over same-type neighbors and the
    speed incentive. An isolated robot at rest therefore scores exactly the
    speed incentive, and zero at full speed.
    """
    model = pack_observations(position, observations, attractors, type_i, params, v_max, dt)
    cand = np.asarray(candidate_velocity, dtype=float)
    return float(model.total(cand[None, :])[0])
