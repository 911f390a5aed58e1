import hashlib
import hmac
import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, Optional, Tuple
import numpy as np
from ..exceptions import UnpredictableError

# uniforms per 64-byte digest
LANES = 8
_UNIT = 1.0 / float(1 << 53)


def to_unit(digest: bytes) -> float:
    """Maps the first 8 bytes of a digest to [0, 1) using the top 53 bits"""
    return (int.from_bytes(digest[:8], "big") >> 11) * _UNIT


@lru_cache(maxsize=1 << 17)
def _lane_block(secret: bytes, domain: bytes, anchor: bytes, t: int, index: int) -> Tuple[float, ...]:
    msg = _field(domain) + _field(anchor) + struct.pack(">QI", t, index)
    words = np.frombuffer(hashlib.blake2b(msg, key=secret, digest_size=64).digest(), dtype=">u8")
    return tuple(((words >> np.uint64(11)).astype(np.float64) * _UNIT).tolist())


def _field(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


class OracleKey:

    """Keyed pseudorandom function standing in for HASH and SIG. Immutable after construction.
    ARGS:
        - seed (int): master seed; equal seeds give equal outputs on every platform"""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.secret = hashlib.blake2b(str(self.seed).encode(), digest_size=32, person=b"stakesim-master").digest()

    def __repr__(self):
        return "OracleKey(seed={})".format(self.seed)

    def uniform(self, anchor: bytes, coin: int, t: int, domain: bytes = b"") -> float:
        """Pseudorandom draw in [0, 1) for (anchor, coin, t). Coins share digests in groups of
        eight lanes so that all coins at one anchor cost a handful of hash calls."""
        return _lane_block(self.secret, domain, anchor, t, coin // LANES)[coin % LANES]

    def subkey(self, participant: int) -> bytes:
        return hashlib.blake2b(struct.pack(">I", participant), key=self.secret, digest_size=32, person=b"subkey").digest()

    def sign(self, participant: int, message: bytes) -> bytes:
        """Signature-like PRF output under the participant's subkey"""
        return hashlib.blake2b(message, key=self.subkey(participant), digest_size=32).digest()

    def verify(self, participant: int, message: bytes, signature: Optional[bytes]) -> bool:
        if signature is None:
            return False
        return hmac.compare_digest(self.sign(participant, message), signature)


def oracle_eligible(key: OracleKey, anchor: bytes, c: int, t: int, p: float, domain: bytes = b"") -> bool:
    """Bernoulli(p) eligibility of coin c at slot t, deterministic in (key, anchor, c, t)"""
    if not 0.0 <= p <= 1.0:
        raise ValueError("Success probability must lie in [0, 1], got {}".format(p))
    return key.uniform(anchor, c, t, domain) < p


@dataclass(frozen=True)
class Keyring:

    """The subkeys one party holds. holders=None is the simulation world, which can sign for
    everyone; a participant's keyring holds only its own subkey."""

    key: OracleKey
    holders: Optional[FrozenSet[int]] = None

    @classmethod
    def of(cls, key: OracleKey, participant: int):
        return cls(key=key, holders=frozenset([participant]))

    def can_sign(self, participant: int) -> bool:
        return self.holders is None or participant in self.holders

    def sign(self, participant: int, message: bytes) -> bytes:
        if not self.can_sign(participant):
            raise UnpredictableError("No subkey for participant {}".format(participant))
        return self.key.sign(participant, message)
