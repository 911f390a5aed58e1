import struct
from typing import Optional
from ..base.Block import Block
from ..exceptions import UnpredictableError
from .OracleKey import Keyring, OracleKey, oracle_eligible
from .Protocol import PredictabilityProfile, ProtocolSpec


class RandomOracle (ProtocolSpec):

    """Random oracle protocol with recency ell: the mining function of a block depends only on
    its ell-th predecessor. Every block carries a nonce signed by its miner, so a block's id is
    only known once it exists and descendants ell levels down are unpredictable."""

    name = "oracle"
    domain = b"oracle"

    def __init__(self, key: OracleKey, success_prob: float, recency: int = 1, freeze: int = 1):
        if recency < 1:
            raise ValueError("Recency must be at least 1, got {}".format(recency))
        self.recency_ell = int(recency)
        super().__init__(key, success_prob, freeze)

    def __repr__(self):
        return "RandomOracle(p={}, ell={}, freeze={}, seed={})".format(self.success_prob, self.recency_ell,
                                                                      self.freeze, self.key.seed)

    @property
    def profile(self) -> PredictabilityProfile:
        return PredictabilityProfile(global_depth=self.recency_ell, local_depth=self.recency_ell)

    def anchor(self, store, parent: bytes) -> bytes:
        """Pred^ell of a block mined on parent, genesis when the chain is shorter"""
        a = store.predecessor(parent, self.recency_ell - 1)
        return a if a is not None else store.genesis

    def eligible(self, store, parent: bytes, coin: int, t: int, miner: int, keyring: Keyring) -> bool:
        anchor = self.anchor(store, parent)
        if store.is_hidden(anchor):
            raise UnpredictableError("Anchor {} has hidden content".format(anchor.hex()[:12]))
        return oracle_eligible(self.key, anchor, coin, t, self.success_prob, self.domain)

    def make_aux(self, store, parent: bytes, coin: int, t: int, miner: int, keyring: Keyring) -> Optional[bytes]:
        return keyring.sign(miner, parent + struct.pack(">QI", t, coin))

    def aux_ok(self, store, block: Block) -> bool:
        if block.aux is None:
            return False
        return self.key.verify(block.miner, block.pred + struct.pack(">QI", block.t, block.coin), block.aux)


def mine_random_oracle(spec: RandomOracle, store, A: bytes, c: int, t: int, miner: int) -> Optional[Block]:
    """Valid block on A witnessed by coin c at slot t for miner, or None"""
    if spec.recency_ell is None:
        raise ValueError("{} is not a random oracle protocol".format(spec))
    store.get(A)
    return spec.mine(store, A, c, t, miner)
