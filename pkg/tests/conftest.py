"""
Shared pytest fixtures for unit and integration tests
"""

from pathlib import Path

import pytest
from faker import Faker

from src.blockpki.core.canonical import derive_address
from src.blockpki.features.actors.models import ScenarioConfig
from src.blockpki.features.contracts.runtime import ContractRuntime
from src.blockpki.features.group_crypto import (
    GroupParams,
    SchnorrService,
    get_group,
    register_hash,
    unregister_hash,
)
from src.blockpki.features.ledger import ChainConfig, Ledger

FIXTURES_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES_DIR


@pytest.fixture
def faker():
    """Seeded Faker so random domain names are reproducible."""
    fake = Faker()
    Faker.seed(4242)
    return fake


@pytest.fixture(scope="session")
def tiny_schnorr():
    return SchnorrService(GroupParams.named("tiny"))


@pytest.fixture(scope="session")
def secp_schnorr():
    return SchnorrService(GroupParams.named("secp256k1"))


@pytest.fixture
def oracle_hash():
    """Register a hash that maps (N=6, b"m") to 5 and everything else to 1."""
    tiny = get_group("tiny")
    expected = tiny.encode(6) + b"m"
    register_hash("oracle", lambda data: 5 if data == expected else 1)
    yield SchnorrService(GroupParams(group=tiny, hash_tag="oracle"))
    unregister_hash("oracle")


@pytest.fixture
def chain_config():
    return ChainConfig(confirmation_depth=0, mean_block_interval=15.0, rng_seed=1, genesis_time=1514764800)


@pytest.fixture
def runtime(secp_schnorr):
    return ContractRuntime(secp_schnorr, onchain_signature_check=False, issuance_timeout_blocks=20)


@pytest.fixture
def ledger(chain_config, runtime):
    return Ledger(chain_config, runtime)


@pytest.fixture
def alice():
    return derive_address("test", "alice")


@pytest.fixture
def bob():
    return derive_address("test", "bob")


@pytest.fixture
def ideal_scenario(chain_config):
    """T=2, instant validation, no confirmations."""
    return ScenarioConfig(chain=chain_config, group="secp256k1", threshold=2, seed=7)


@pytest.fixture
def make_scenario(ideal_scenario):
    """Copy of the ideal scenario with fields replaced (validators re-run)."""

    def _make(**changes) -> ScenarioConfig:
        data = ideal_scenario.model_dump()
        data.update(changes)
        return ScenarioConfig.model_validate(data)

    return _make
