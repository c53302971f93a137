"""
Pytest fixtures for integration tests
Full issuance runs through the simulation event loop
"""

import pytest

from src.blockpki.features.actors.models import ScenarioConfig
from src.blockpki.features.ledger import ChainConfig


@pytest.fixture
def scenario_for():
    """Ideal-schedule scenario builder: instant validation, no tx latency."""

    def _build(threshold: int = 2, depth: int = 0, **changes) -> ScenarioConfig:
        data = {
            "chain": ChainConfig(
                confirmation_depth=depth,
                mean_block_interval=15.0,
                rng_seed=1,
                genesis_time=1514764800,
            ).model_dump(),
            "group": "secp256k1",
            "threshold": threshold,
            "seed": 7,
        }
        data.update(changes)
        return ScenarioConfig.model_validate(data)

    return _build
