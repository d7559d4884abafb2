"""Shared fixtures: small channel instances sized for fast, deterministic tests."""

import numpy as np
import pytest

from svbeam.channel import SVChannelConfig, generate_sv_channels


@pytest.fixture
def desk_channels():
    """Factory for a 3-user desk-scale channel set (16x4, 6 paths)."""

    def _make(seed=7, num_users=3, n_t=16, n_r=4, num_paths=6):
        cfg = SVChannelConfig(
            num_users=num_users, n_t=n_t, n_r=n_r, num_paths=num_paths, rng_seed=seed
        )
        return generate_sv_channels(cfg)

    return _make


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)
