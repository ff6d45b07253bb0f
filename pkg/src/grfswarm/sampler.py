"""Metropolis velocity sampling.

Each tick every robot resamples its velocity from the local Gibbs
distribution p(v) ~ exp(-H(v)/T) over the ball |v| <= v_max, where H is the
energy model built from its own sensing snapshot. The normalizing constant is
never computed: a Metropolis chain only compares energies of candidate
velocities. The returned command is the average of the post-burn-in chain,
which both smooths the command and keeps it inside the velocity ball.

`gibbs_local_pmf` is the independent ground truth used in tests: on a finite
velocity grid the Gibbs distribution can be normalized exactly, and a long
chain restricted to that grid must reproduce it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import PotentialParams, SamplerParams
from .potential import pack_observations


@dataclass(frozen=True)
class ChainTrace:
    """Full record of one Metropolis run.

    velocities[k] / energies[k] describe the chain state after iteration k
    (index 0 is the initial velocity), so both have length iterations + 1.
    proposals, proposal_energies and accepted describe the iterations
    themselves (length = iterations). Auto-rejected proposals (speed above
    v_max, or a non-finite energy) carry +inf proposal energy.
    """

    velocities: np.ndarray
    energies: np.ndarray
    proposals: np.ndarray
    proposal_energies: np.ndarray
    accepted: np.ndarray

    @property
    def acceptance_count(self) -> int:
        return int(self.accepted.sum())


def accept_proposal(delta_e: float, temperature: float, u: float) -> bool:
    """Metropolis rule: accept downhill moves always, uphill with
    probability exp(-delta_e / T) compared against the uniform draw u."""
    if delta_e < 0.0:
        return True
    return u < math.exp(-delta_e / temperature)


def metropolis_chain(position, velocity, observations, attractors, type_i: int,
                     potential: PotentialParams, sampler: SamplerParams,
                     v_max: float, dt: float, rng: np.random.Generator) -> ChainTrace:
    """Run the Metropolis chain and return its full trace.

    Proposals are Gaussian with the configured covariance. In
    "previous_velocity" mode every proposal is centered on the velocity the
    robot entered the tick with (all proposal vectors are drawn up front,
    then the uniforms); in "chain_state" mode proposals are centered on the
    current chain state (each step draws its proposal, then its uniform).
    A proposal faster than v_max is rejected without evaluating its energy,
    and a non-finite energy is rejected as well.
    """
    model = pack_observations(position, observations, attractors, type_i,
                              potential, v_max, dt)
    v0 = np.asarray(velocity, dtype=float)
    n_iter = sampler.iterations
    T = sampler.temperature
    L = sampler.cholesky

    velocities = np.empty((n_iter + 1, 2))
    energies = np.empty(n_iter + 1)
    accepted = np.zeros(n_iter, dtype=bool)
    velocities[0] = v0
    e0 = float(model.total(v0[None, :])[0])
    # A non-finite starting energy would poison every comparison; treat it as
    # +inf so the first finite proposal is accepted and the chain escapes.
    energies[0] = e0 if math.isfinite(e0) else math.inf

    v_max_sq = v_max * v_max
    if sampler.proposal_center_mode == "previous_velocity":
        steps = rng.standard_normal((n_iter, 2)) @ L.T
        proposals = v0[None, :] + steps
        uniforms = rng.random(n_iter)
        with np.errstate(invalid="ignore"):
            prop_e = model.total(proposals)
        speed_ok = np.einsum("mk,mk->m", proposals, proposals) <= v_max_sq
        prop_e = np.where(speed_ok & np.isfinite(prop_e), prop_e, np.inf)
        cur_e = energies[0]
        cur_v = v0
        for k in range(n_iter):
            if accept_proposal(prop_e[k] - cur_e, T, uniforms[k]):
                cur_v = proposals[k]
                cur_e = prop_e[k]
                accepted[k] = True
            velocities[k + 1] = cur_v
            energies[k + 1] = cur_e
        return ChainTrace(velocities, energies, proposals, prop_e, accepted)

    # chain_state mode: proposals depend on the evolving state, so the chain
    # is evaluated one step at a time.
    proposals = np.empty((n_iter, 2))
    prop_e = np.empty(n_iter)
    cur_v = v0
    cur_e = energies[0]
    for k in range(n_iter):
        cand = cur_v + rng.standard_normal(2) @ L.T
        u = rng.random()
        proposals[k] = cand
        if cand @ cand > v_max_sq:
            e = math.inf
        else:
            e = float(model.total(cand[None, :])[0])
            if not math.isfinite(e):
                e = math.inf
        prop_e[k] = e
        if accept_proposal(e - cur_e, T, u):
            cur_v = cand
            cur_e = e
            accepted[k] = True
        velocities[k + 1] = cur_v
        energies[k + 1] = cur_e
    return ChainTrace(velocities, energies, proposals, prop_e, accepted)


def metropolis_update(position, velocity, observations, attractors, type_i: int,
                      potential: PotentialParams, sampler: SamplerParams,
                      v_max: float, dt: float, rng: np.random.Generator) -> np.ndarray:
    """Sample the next velocity command: the mean of the post-burn-in chain.

    The mean of chain states inside the v_max ball stays inside it (the ball
    is convex); the final renormalization only guards against last-ulp
    rounding, so a command is never rejected at this stage. With every
    proposal rejected the chain is constant and the exact input velocity
    comes back.
    """
    trace = metropolis_chain(position, velocity, observations, attractors,
                             type_i, potential, sampler, v_max, dt, rng)
    if trace.acceptance_count == 0:
        return np.asarray(velocity, dtype=float)
    avg = trace.velocities[sampler.burn_in:].mean(axis=0)
    speed = float(np.linalg.norm(avg))
    if speed > v_max:
        avg = avg * (v_max / speed)
    return avg


def gibbs_pmf_from_energies(energies, temperature: float) -> np.ndarray:
    """Normalized Gibbs probabilities exp(-E/T) / sum(exp(-E/T)).

    Shift-invariant in E (a constant added to every energy cancels), computed
    with the max-shift trick so large energies cannot overflow.
    """
    if temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    e = np.asarray(energies, dtype=float)
    if e.size == 0:
        raise ValueError("empty energy set has no Gibbs distribution")
    logits = -e / temperature
    logits = logits - logits.max()
    p = np.exp(logits)
    return p / p.sum()


def gibbs_local_pmf(position, observations, attractors, type_i: int,
                    potential: PotentialParams, velocity_grid,
                    v_max: float, dt: float, temperature: float = 1.0) -> np.ndarray:
    """Exact local Gibbs distribution restricted to a finite velocity grid.

    This is the sampler's ground truth: the long-run occupancy of a correct
    Metropolis chain over the same grid converges to these probabilities.
    Every grid point must lie inside the v_max ball.
    """
    grid = np.asarray(velocity_grid, dtype=float)
    if grid.ndim != 2 or grid.shape[1] != 2 or grid.shape[0] == 0:
        raise ValueError(f"velocity_grid must be a nonempty (n, 2) array, got {grid.shape}")
    speeds_sq = np.einsum("mk,mk->m", grid, grid)
    if np.any(speeds_sq > v_max * v_max * (1.0 + 1e-12)):
        raise ValueError("velocity_grid contains points outside the v_max ball")
    model = pack_observations(position, observations, attractors, type_i,
                              potential, v_max, dt)
    return gibbs_pmf_from_energies(model.total(grid), temperature)


def grid_metropolis_states(energy_grid: np.ndarray, n_steps: int,
                           temperature: float, rng: np.random.Generator,
                           start: tuple[int, int] | None = None) -> np.ndarray:
    """Metropolis chain over a rectangular grid of precomputed energies.

    The proposal moves to one of the 8 adjacent cells, chosen uniformly;
    moves off the grid are rejected (which keeps the proposal symmetric).
    Returns the flat cell index after every step, rejections included, so the
    result is the chain's occupancy sequence. Used to verify the sampler
    against `gibbs_local_pmf`.
    """
    E = np.asarray(energy_grid, dtype=float)
    if E.ndim != 2:
        raise ValueError("energy_grid must be 2-D")
    h, w = E.shape
    i, j = (h // 2, w // 2) if start is None else start
    moves = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    move_idx = rng.integers(0, 8, size=n_steps)
    uniforms = rng.random(n_steps)
    out = np.empty(n_steps, dtype=np.int64)
    cur_e = E[i, j]
    for k in range(n_steps):
        di, dj = moves[move_idx[k]]
        ni, nj = i + di, j + dj
        if 0 <= ni < h and 0 <= nj < w:
            e = E[ni, nj]
            if accept_proposal(e - cur_e, temperature, uniforms[k]):
                i, j, cur_e = ni, nj, e
        out[k] = i * w + j
    return out
