from .OracleKey import Keyring, oracle_eligible
from .Protocol import PredictabilityProfile, ProtocolSpec


class SlotHash (ProtocolSpec):

    """Eligibility HASH(t_B, c_B) < T. The same coin is eligible at the same slot on every fork."""

    name = "p2"
    domain = b"p2"

    @property
    def profile(self) -> PredictabilityProfile:
        return PredictabilityProfile(global_depth=None, local_depth=None)

    def eligible(self, store, parent: bytes, coin: int, t: int, miner: int, keyring: Keyring) -> bool:
        return oracle_eligible(self.key, b"", coin, t, self.success_prob, self.domain)
