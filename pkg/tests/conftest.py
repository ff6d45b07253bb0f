from __future__ import annotations

import numpy as np
import pytest

from grfswarm.model import Arena, GroupPartition, PotentialParams, SamplerParams, SwarmConfig


def small_config(**overrides) -> SwarmConfig:
    """A cheap two-group configuration for fast end-to-end tests."""
    defaults = dict(
        partition=GroupPartition.uniform(2, 3),
        arena=Arena(3.0, 3.0),
        potential=PotentialParams(mass=5.0),
        sampler=SamplerParams(iterations=20),
        rng_seed=0,
        max_ticks=40,
    )
    defaults.update(overrides)
    return SwarmConfig(**defaults)


@pytest.fixture
def reference_potential() -> PotentialParams:
    return PotentialParams()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
