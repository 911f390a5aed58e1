from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional
from ..base.Block import Block
from ..base.Transfer import Transfer
from ..exceptions import UnpredictableError
from .OracleKey import Keyring, OracleKey


class Predictability(Enum):

    GLOBAL = "globally-predictable"
    LOCAL = "locally-predictable"
    RECENT = "recent"
    UNCLASSIFIED = "unclassified"

    @property
    def predictable(self) -> bool:
        """Locally predictable, globally predictable coins included"""
        return self in (Predictability.GLOBAL, Predictability.LOCAL)


@dataclass(frozen=True)
class PredictabilityProfile:

    """Declared predictability by prediction depth D.
    ARGS:
        - global_depth (Optional[int]): every participant can predict up to this depth (None: all D)
        - local_depth (Optional[int]): the coin owner can predict up to this depth (None: all D)"""

    global_depth: Optional[int] = None
    local_depth: Optional[int] = None

    def __post_init__(self):
        if self.local_depth is not None and self.local_depth < 1:
            raise ValueError("Every coin is predictable by its owner one level ahead, local depth must be >= 1")
        if self.global_depth is not None and (self.local_depth is not None and self.global_depth > self.local_depth):
            raise ValueError("Global predictability cannot reach deeper than local predictability")

    def kind(self, D: int) -> Predictability:
        if D < 1:
            raise ValueError("Prediction depth must be at least 1, got {}".format(D))
        if self.global_depth is None or D <= self.global_depth:
            return Predictability.GLOBAL
        if self.local_depth is None or D <= self.local_depth:
            return Predictability.LOCAL
        return Predictability.RECENT


class ProtocolSpec (ABC):

    """Abstract proof-of-stake protocol: the validating function V_P and the mining function M_P.
    Subclasses define a name and the eligibility test; ownership, timestamps and block assembly
    are shared.
    ARGS:
        - key (OracleKey): pseudorandom function standing in for hashes and signatures
        - success_prob (float): eligibility probability p per (anchor, coin, slot)
        - freeze (int): number of predecessors over which the witness coin must be owned by the miner"""

    owner_restricted = False
    recency_ell = None

    def __init__(self, key: OracleKey, success_prob: float, freeze: int = 1):
        if not hasattr(self, "name"):
            raise NotImplementedError("Undefined name for this protocol. Please define a name and rerun.")
        if not 0.0 <= success_prob <= 1.0:
            raise ValueError("Success probability must lie in [0, 1], got {}".format(success_prob))
        if freeze < 1:
            raise ValueError("Freeze parameter must be at least 1, got {}".format(freeze))
        self.key = key
        self.success_prob = float(success_prob)
        self.freeze = int(freeze)
        self.world = Keyring(key)

    def __repr__(self):
        return "{}(p={}, freeze={}, seed={})".format(type(self).__name__, self.success_prob, self.freeze, self.key.seed)

    @property
    def cache_key(self) -> tuple:
        return (self.name, self.key.seed, self.success_prob, self.freeze, self.recency_ell)

    @property
    def profile(self) -> Optional[PredictabilityProfile]:
        """Declared predictability, None for protocols that do not declare one"""
        return None

    @abstractmethod
    def eligible(self, store, parent: bytes, coin: int, t: int, miner: int, keyring: Keyring) -> bool:
        """Eligibility part of M_P for a block on parent. Raises UnpredictableError when the
        keyring lacks a needed subkey or the computation needs hidden block content."""
        pass

    def make_aux(self, store, parent: bytes, coin: int, t: int, miner: int, keyring: Keyring) -> Optional[bytes]:
        """Protocol specific bytes stored in the new block"""
        return b""

    def aux_ok(self, store, block: Block) -> bool:
        return block.aux is not None

    def owns(self, store, parent: bytes, coin: int, miner: int) -> bool:
        """Ownership indicator over the freeze window Pred^1 .. Pred^F"""
        if coin not in store.genesis_allocation:
            return False
        cur = parent
        for _ in range(self.freeze):
            if cur is None:
                break
            if store.owner_at(cur, coin) != miner:
                return False
            cur = store.get(cur).pred
        return True

    def validate(self, store, block: Block) -> bool:
        """V_P, a pure function of the block and its ancestors"""
        if not self.aux_ok(store, block):
            return False
        try:
            return self.eligible(store, block.pred, block.coin, block.t, block.miner, self.world)
        except UnpredictableError:
            return False

    def mine(self, store, parent: bytes, coin: int, t: int, miner: int, keyring: Optional[Keyring] = None,
             payload: Iterable[Transfer] = (), allow_opaque: bool = False) -> Optional[Block]:
        """M_P: the valid block on parent witnessed by coin at slot t, or None if no such block exists.
        ARGS:
            - keyring (Keyring): subkeys available to the caller, the world keyring by default
            - payload (Iterable[Transfer]): transfers to include, must be spendable at parent
            - allow_opaque (bool): return a block with hidden aux instead of raising when the
              caller cannot compute the protocol bytes of someone else's block"""
        keyring = keyring if keyring is not None else self.world
        pred = store.get(parent)
        if t <= pred.t:
            return None
        if not self.owns(store, parent, coin, miner):
            return None
        if not self.eligible(store, parent, coin, t, miner, keyring):
            return None
        payload = tuple(payload)
        if payload and not store.payload_ok(parent, payload):
            raise ValueError("Payload spends coins its senders do not own at {}".format(parent.hex()[:12]))
        try:
            aux = self.make_aux(store, parent, coin, t, miner, keyring)
        except UnpredictableError:
            if not allow_opaque:
                raise
            aux = None
        return Block.create(pred=parent, miner=miner, t=t, coin=coin, payload=payload, aux=aux)

    def to_dict(self) -> dict:
        return {"name": self.name, "success_prob": self.success_prob, "freeze": self.freeze,
                "recency": self.recency_ell, "seed": self.key.seed}
