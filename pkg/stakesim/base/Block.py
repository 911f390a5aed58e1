import hashlib
import struct
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple
from .Transfer import Transfer

ID_WIDTH = 32
# fixed-width placeholders for the fields genesis does not have
NO_PARTICIPANT = 0xFFFFFFFF
NO_COIN = 0xFFFFFFFF


def _field(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def serialize_block(pred: Optional[bytes], miner: Optional[int], t: int, coin: Optional[int],
                    payload: Iterable[Transfer], aux: Optional[bytes]) -> bytes:
    """Canonical serialization of the block contents. Every field is length prefixed and
    integers are fixed-width big-endian, in declared field order."""
    transfers = b"".join(struct.pack(">III", tr.coin, tr.sender, tr.receiver) for tr in payload)
    # opaque blocks (aux unknown) get a distinct marker so they never collide with real ones
    aux_field = b"\x01" if aux is None else b"\x00" + aux
    return b"".join([
        _field(pred if pred is not None else b""),
        _field(struct.pack(">I", NO_PARTICIPANT if miner is None else miner)),
        _field(struct.pack(">Q", t)),
        _field(struct.pack(">I", NO_COIN if coin is None else coin)),
        _field(transfers),
        _field(aux_field),
    ])


def block_digest(data: bytes) -> bytes:
    return hashlib.blake2b(data, digest_size=ID_WIDTH, person=b"stakesim-block").digest()


@dataclass(frozen=True)
class Block:

    """Node of the block DAG.
    ARGS:
        - id (bytes): digest of the canonical serialization
        - pred (Optional[bytes]): id of the predecessor, None only for genesis
        - miner (Optional[int]): participant that produced the block
        - t (int): claimed slot
        - coin (Optional[int]): witness coin
        - payload (Tuple[Transfer]): ordered transfers
        - aux (Optional[bytes]): protocol specific bytes. None marks a hypothetical block whose
          content is hidden from the party that built it"""

    id: bytes
    pred: Optional[bytes]
    miner: Optional[int]
    t: int
    coin: Optional[int]
    payload: Tuple[Transfer, ...] = ()
    aux: Optional[bytes] = b""

    @classmethod
    def create(cls, pred: Optional[bytes], miner: Optional[int], t: int, coin: Optional[int],
               payload: Iterable[Transfer] = (), aux: Optional[bytes] = b""):
        if t < 0:
            raise ValueError("Block slot must be a natural number, got {}".format(t))
        payload = tuple(payload)
        bid = block_digest(serialize_block(pred, miner, t, coin, payload, aux))
        return cls(id=bid, pred=pred, miner=miner, t=t, coin=coin, payload=payload, aux=aux)

    @classmethod
    def genesis(cls, aux: bytes = b""):
        """Genesis block: no predecessor, slot 0 and no witness coin. aux seeds chained
        protocols and lets independent experiments use distinct roots."""
        return cls.create(pred=None, miner=None, t=0, coin=None, aux=aux)

    @property
    def is_genesis(self) -> bool:
        return self.pred is None

    @property
    def is_opaque(self) -> bool:
        return self.aux is None

    @property
    def hex(self) -> str:
        return self.id.hex()

    def to_dict(self) -> dict:
        return {
            "id": self.id.hex(),
            "pred": None if self.pred is None else self.pred.hex(),
            "miner": self.miner,
            "t": self.t,
            "coin": self.coin,
            "payload": [tr.to_dict() for tr in self.payload],
            "aux": None if self.aux is None else self.aux.hex(),
        }

    @classmethod
    def from_dict(cls, d: dict):
        block = cls.create(pred=None if d["pred"] is None else bytes.fromhex(d["pred"]),
                           miner=d["miner"],
                           t=int(d["t"]),
                           coin=d["coin"],
                           payload=[Transfer.from_dict(x) for x in d["payload"]],
                           aux=None if d["aux"] is None else bytes.fromhex(d["aux"]))
        if block.id.hex() != d["id"]:
            raise ValueError("Block id {} does not match its contents".format(d["id"]))
        return block
