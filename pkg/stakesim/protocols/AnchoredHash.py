from ..exceptions import UnpredictableError
from .OracleKey import Keyring, oracle_eligible
from .Protocol import PredictabilityProfile, ProtocolSpec


class AnchoredHash (ProtocolSpec):

    """Eligibility HASH(Pred(B), t_B, c_B) < T. Publicly computable at any known parent."""

    name = "p1"
    domain = b"p1"

    @property
    def profile(self) -> PredictabilityProfile:
        return PredictabilityProfile(global_depth=None, local_depth=None)

    def eligible(self, store, parent: bytes, coin: int, t: int, miner: int, keyring: Keyring) -> bool:
        if store.is_hidden(parent):
            raise UnpredictableError("Parent {} has hidden content".format(parent.hex()[:12]))
        return oracle_eligible(self.key, parent, coin, t, self.success_prob, self.domain)
