"""Independent double-spend races. Every trial starts from a fresh genesis and a fresh oracle
key; the attacker wins when its private chain reaches z blocks strictly before the network does,
computed either with the strategies' own lookahead code or by running the race inside the simulator."""
import logging
import math
import struct
from dataclasses import dataclass
from ..base.Block import Block
from ..base.ChainStore import ChainStore
from ..protocols import Keyring, OracleKey, SlotHash
from ..strategies.Strategy import MinerView
from ..strategies import RaceDoubleSpender, lookahead
from .SimConfig import ParticipantConfig, ProtocolConfig, SimConfig
from .Simulation import Simulation

logger = logging.getLogger(__name__)

ATTACKER, NETWORK = 0, 1


@dataclass(frozen=True)
class TrialResult:
    successes: int
    trials: int

    @property
    def rate(self) -> float:
        return self.successes / self.trials

    @property
    def stderr(self) -> float:
        return math.sqrt(self.rate * (1.0 - self.rate) / self.trials)


def race_to_depth(protocol, attacker_coins: int, network_coins: int, z: int, horizon: int, nonce: int = 0) -> bool:
    """One race from a fresh genesis: True iff t'_z < t*_z"""
    allocation = {c: ATTACKER if c < attacker_coins else NETWORK for c in range(attacker_coins + network_coins)}
    store = ChainStore(allocation, Block.genesis(aux=struct.pack(">Q", nonce)))
    view = MinerView(participant=ATTACKER, clock=0, tip=store.genesis, keyring=Keyring.of(protocol.key, ATTACKER),
                     miners=frozenset([ATTACKER, NETWORK]))
    t_star = lookahead.forecast_others(view, store, protocol, store.genesis, horizon, 0, max_k=z).arrivals[z]
    until = None if math.isinf(t_star) else int(t_star) - 1
    t_prime, _ = lookahead.search_self(view, store, protocol, store.genesis, horizon, 0, max_k=z, beam=1, until=until)
    return z in t_prime and t_prime[z] < t_star


def double_spend_trials(attacker_coins: int, network_coins: int, z: int, trials: int, success_prob: float = 0.002,
                        seed: int = 0, horizon: int = 20000) -> TrialResult:
    """Frequency with which the attacker's chain reaches depth z first, each trial under a slot
    hashed protocol with its own key"""
    if trials < 1:
        raise ValueError("Number of trials must be at least 1, got {}".format(trials))
    if attacker_coins < 1 or network_coins < 1:
        raise ValueError("Both sides need at least one coin")
    wins = 0
    for i in range(trials):
        protocol = SlotHash(OracleKey(seed * 1000003 + i), success_prob)
        wins += race_to_depth(protocol, attacker_coins, network_coins, z, horizon, nonce=i)
    result = TrialResult(successes=wins, trials=trials)
    logger.debug("double-spend races z={} with {}/{} coins: {} of {} won".format(z, attacker_coins, network_coins, wins, trials))
    return result


def race_config(attacker_coins: int, network_coins: int, z: int, success_prob: float, seed: int, max_slots: int) -> SimConfig:
    """Two miners under the slot hashed protocol: a race double-spender paying at slot 1 and an honest network"""
    return SimConfig(slots=max_slots, seed=seed, detector=False, protocol=ProtocolConfig(name="p2", success_prob=success_prob),
                     participants=[ParticipantConfig(name="attacker", coins=attacker_coins, strategy=RaceDoubleSpender.name,
                                                     params={"confirm_depth": z}),
                                   ParticipantConfig(name="network", coins=network_coins)])


def simulated_race(config: SimConfig, decided_only: bool = False) -> dict:
    """Steps the engine until the attacker's first race closes and returns its episode.
    ARGS:
        - decided_only (bool): stop as soon as one side is z blocks above the base"""
    sim = Simulation(config)
    attacker = sim.strategies[ATTACKER]
    for t in range(1, config.slots + 1):
        sim.step(t)
        if attacker.episodes:
            return attacker.episodes[0]
        race = attacker.race
        if decided_only and race is not None and race.won is not None:
            return {"race_won": race.won, "outcome": "decided", "end": t}
    race = attacker.race
    logger.warning("race of seed {} still open after {} slots".format(config.seed, config.slots))
    return {"race_won": bool(race is not None and race.won), "outcome": "open", "end": config.slots}


def engine_double_spend_trials(attacker_coins: int, network_coins: int, z: int, trials: int, success_prob: float = 0.002,
                               seed: int = 0, max_slots: int = 20000) -> TrialResult:
    """Frequency of won races when the double-spend runs inside the simulator, one run per trial"""
    if trials < 1:
        raise ValueError("Number of trials must be at least 1, got {}".format(trials))
    if attacker_coins < 1 or network_coins < 1:
        raise ValueError("Both sides need at least one coin")
    wins = 0
    for i in range(trials):
        config = race_config(attacker_coins, network_coins, z, success_prob, seed * 1000003 + i, max_slots)
        episode = simulated_race(config, decided_only=True)
        wins += episode["race_won"]
    logger.debug("simulated double-spends z={} with {}/{} coins: {} of {} won".format(z, attacker_coins, network_coins, wins, trials))
    return TrialResult(successes=wins, trials=trials)
