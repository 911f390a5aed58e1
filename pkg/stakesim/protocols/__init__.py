from .OracleKey import OracleKey, Keyring, oracle_eligible, to_unit
from .Protocol import ProtocolSpec, Predictability, PredictabilityProfile
from .RandomOracle import RandomOracle, mine_random_oracle
from .AnchoredHash import AnchoredHash
from .SlotHash import SlotHash
from .SignatureChain import SignatureChain
from .prediction import classify, prediction_game


def _check_threshold(threshold_p: float):
    if not 0.0 < threshold_p < 1.0:
        raise ValueError("Threshold probability must lie in (0, 1), got {}".format(threshold_p))


def make_p1(threshold_p: float, seed: int = 0, freeze: int = 1) -> AnchoredHash:
    _check_threshold(threshold_p)
    return AnchoredHash(OracleKey(seed), threshold_p, freeze)


def make_p2(threshold_p: float, seed: int = 0, freeze: int = 1) -> SlotHash:
    _check_threshold(threshold_p)
    return SlotHash(OracleKey(seed), threshold_p, freeze)


def make_p3(threshold_p: float, seed: int = 0, freeze: int = 1) -> SignatureChain:
    _check_threshold(threshold_p)
    return SignatureChain(OracleKey(seed), threshold_p, freeze)


def make_oracle(success_prob: float, recency: int = 1, seed: int = 0, freeze: int = 1) -> RandomOracle:
    return RandomOracle(OracleKey(seed), success_prob, recency, freeze)


PROTOCOLS = {
    RandomOracle.name: RandomOracle,
    AnchoredHash.name: AnchoredHash,
    SlotHash.name: SlotHash,
    SignatureChain.name: SignatureChain,
}


def protocol_from_config(name: str, success_prob: float, seed: int, recency: int = 1, freeze: int = 1) -> ProtocolSpec:
    """Builds a protocol by its configuration name"""
    if name not in PROTOCOLS:
        raise ValueError("Unknown protocol {}, expected one of {}".format(name, ", ".join(sorted(PROTOCOLS))))
    key = OracleKey(seed)
    if name == RandomOracle.name:
        return RandomOracle(key, success_prob, recency, freeze)
    return PROTOCOLS[name](key, success_prob, freeze)
