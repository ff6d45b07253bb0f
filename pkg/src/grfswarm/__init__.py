"""Decentralized Gibbs-sampling swarm controller and experiment harness.

Heterogeneous robots segregate into same-type clusters and flock by
resampling their velocities each tick from a local Gibbs distribution over a
shared potential (Coulomb-Buckingham pair interactions, kinetic consensus,
speed incentive). The package provides the energy model, the Metropolis
sampler, a deterministic gradient-descent baseline, a headless simulator,
segregation/flocking metrics and a batch experiment harness with a CLI.
"""

from .baseline_gd import gd_velocity
from .harness import (BatchResult, RunRecord, load_run, run_batch,
                      run_experiment, write_batch, write_run)
from .metrics import (MetricSample, attractor_distances, cluster_count,
                      convergence_iteration, mean_intragroup_distance,
                      mean_speed, velocity_consensus_error)
from .model import (Arena, GroupPartition, PotentialParams, RobotState,
                    SamplerParams, SwarmConfig, VirtualAttractor,
                    build_obstacle_points, kinematic_step)
from .potential import (NeighborObservation, charge_product,
                        coulomb_buckingham, hamiltonian, kinetic_energy,
                        obstacle_term, pair_energy, resultant_velocity,
                        speed_incentive)
from .sampler import (ChainTrace, accept_proposal, gibbs_local_pmf,
                      gibbs_pmf_from_energies, metropolis_chain,
                      metropolis_update)
from .scenario import (ScenarioError, build_config, config_mapping,
                       load_scenario)
from .sim import SwarmState, initial_state, run, sense, step

__version__ = "0.1.0"

__all__ = [
    "Arena", "BatchResult", "ChainTrace", "GroupPartition", "MetricSample",
    "NeighborObservation", "PotentialParams", "RobotState", "RunRecord",
    "SamplerParams", "ScenarioError",
    "SwarmConfig", "SwarmState", "VirtualAttractor", "accept_proposal",
    "attractor_distances", "build_config", "build_obstacle_points",
    "charge_product", "cluster_count", "config_mapping",
    "convergence_iteration", "coulomb_buckingham",
    "gd_velocity", "gibbs_local_pmf", "gibbs_pmf_from_energies",
    "hamiltonian", "initial_state", "kinematic_step", "kinetic_energy",
    "load_run", "load_scenario",
    "mean_intragroup_distance", "mean_speed", "metropolis_chain",
    "metropolis_update", "obstacle_term", "pair_energy",
    "resultant_velocity", "run", "run_batch", "run_experiment", "sense",
    "speed_incentive", "step", "velocity_consensus_error", "write_batch",
    "write_run",
]
