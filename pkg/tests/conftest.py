import pytest
from stakesim.base import Block, ChainStore
from stakesim.engine import ParticipantConfig, ProtocolConfig, SimConfig
from stakesim.protocols import make_oracle


@pytest.fixture
def always():
    """Random oracle protocol with recency 1 under which every coin is always eligible"""
    return make_oracle(1.0, recency=1, seed=3)


@pytest.fixture
def two_party_store() -> ChainStore:
    """Coins 0, 1 owned by participant 0 and coins 2, 3 by participant 1"""
    return ChainStore({0: 0, 1: 0, 2: 1, 3: 1}, Block.genesis())


@pytest.fixture
def small_config() -> SimConfig:
    return SimConfig(slots=120, seed=4, protocol=ProtocolConfig(name="oracle", success_prob=0.05),
                     participants=[ParticipantConfig(name="alice", coins=4), ParticipantConfig(name="bob", coins=3),
                                   ParticipantConfig(name="carol", coins=3)]).validate()
