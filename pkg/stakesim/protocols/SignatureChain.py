import hashlib
import struct
from ..base.Block import Block
from ..exceptions import UnpredictableError
from .OracleKey import Keyring, to_unit
from .Protocol import PredictabilityProfile, ProtocolSpec


class SignatureChain (ProtocolSpec):

    """Signature chained eligibility: s_B = SIG_owner(HASH(s_A), t_B, c_B) and B is valid iff
    HASH(s_B) < T. Only the coin owner can evaluate its own eligibility, one level ahead.
    The coin id is part of the signed message so that each coin gets its own draw and
    eligibility stays proportional to stake."""

    name = "p3"
    owner_restricted = True

    @property
    def profile(self) -> PredictabilityProfile:
        return PredictabilityProfile(global_depth=0, local_depth=1)

    @staticmethod
    def message(seed: bytes, t: int, coin: int) -> bytes:
        return hashlib.blake2b(seed, digest_size=32).digest() + struct.pack(">QI", t, coin)

    def _seed(self, store, parent: bytes) -> bytes:
        if store.is_hidden(parent):
            raise UnpredictableError("Parent {} has hidden content".format(parent.hex()[:12]))
        return store.get(parent).aux

    def _passes(self, s: bytes) -> bool:
        return to_unit(hashlib.blake2b(s, digest_size=32).digest()) < self.success_prob

    def make_aux(self, store, parent: bytes, coin: int, t: int, miner: int, keyring: Keyring) -> bytes:
        return keyring.sign(miner, self.message(self._seed(store, parent), t, coin))

    def eligible(self, store, parent: bytes, coin: int, t: int, miner: int, keyring: Keyring) -> bool:
        return self._passes(self.make_aux(store, parent, coin, t, miner, keyring))

    def validate(self, store, block: Block) -> bool:
        if block.aux is None:
            return False
        parent = store.get(block.pred)
        if parent.aux is None:
            return False
        if not self.key.verify(block.miner, self.message(parent.aux, block.t, block.coin), block.aux):
            return False
        return self._passes(block.aux)
