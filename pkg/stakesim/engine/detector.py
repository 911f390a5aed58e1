"""Provable-deviation detector: pairs of blocks from one coin that no honest miner, even one
suffering arbitrary latency, could have announced."""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Tuple, Union
from ..base.Block import Block
from ..base.ChainStore import ChainStore

logger = logging.getLogger(__name__)

SAME_SLOT = "same-slot"
REGRESSIVE = "regressive-predecessor"


@dataclass(frozen=True)
class Announcement:

    """A block as it went out on the network.
    ARGS:
        - block (Block)
        - by (int): announcing participant
        - at (int): real announcement slot, at least the claimed slot of the block"""

    block: Block
    by: int
    at: int

    def __post_init__(self):
        if self.at < self.block.t:
            raise ValueError("Block {} announced at slot {} before its claimed slot {}".format(self.block.hex[:12], self.at, self.block.t))


@dataclass(frozen=True)
class DeviationEvidence:
    coin: int
    first: bytes
    second: bytes
    kind: str

    def to_dict(self) -> dict:
        return {"coin": self.coin, "first": self.first.hex(), "second": self.second.hex(), "kind": self.kind}


class Explanation(Enum):
    IMPOSSIBLE = "impossible"


@dataclass(frozen=True)
class AwarenessSet:

    """Blocks an honest miner with latency could have known when producing block at slot t,
    given by the heads (maximal blocks) of the ancestor-closed set"""

    block: bytes
    t: int
    heads: Tuple[bytes, ...]


def _classify(store: ChainStore, a: Block, b: Block) -> Union[str, None]:
    """Deviation kind of the ordered pair (a, b) with t_a <= t_b, if any"""
    if a.t == b.t:
        return SAME_SLOT
    if store.score(a.id) > store.score(b.pred):
        return REGRESSIVE
    return None


class DeviationDetector:

    """Global observer comparing every new block with every earlier block of the same coin.
    ARGS:
        - store (ChainStore): store holding every observed block and its ancestors"""

    def __init__(self, store: ChainStore):
        self.store = store
        self.by_coin: Dict[int, List[Block]] = {}
        self.evidence: List[DeviationEvidence] = []

    def observe(self, ann: Announcement) -> List[DeviationEvidence]:
        block = ann.block
        if block.is_genesis:
            return []
        seen = self.by_coin.setdefault(block.coin, [])
        found = []
        for prev in seen:
            if prev.id == block.id:
                return []
            first, second = (prev, block) if prev.t <= block.t else (block, prev)
            kind = _classify(self.store, first, second)
            if kind is not None:
                found.append(DeviationEvidence(coin=block.coin, first=first.id, second=second.id, kind=kind))
        seen.append(block)
        for ev in found:
            logger.warning("provable deviation of coin {} ({}): {} / {}".format(ev.coin, ev.kind, ev.first.hex()[:12], ev.second.hex()[:12]))
        self.evidence.extend(found)
        return found


def detect(announcements: Iterable[Announcement], store: ChainStore) -> List[DeviationEvidence]:
    """Every per-coin pair forming a provable deviation, in observation order"""
    detector = DeviationDetector(store)
    for ann in announcements:
        detector.observe(ann)
    return detector.evidence


def _heads(store: ChainStore, blocks: Iterable[bytes]) -> Tuple[bytes, ...]:
    blocks = sorted(set(blocks), key=lambda b: (-store.score(b), b))
    heads = []
    for b in blocks:
        if not any(store.is_ancestor(b, h) for h in heads):
            heads.append(b)
    return tuple(sorted(heads))


def honest_explanation(announcements: Iterable[Announcement], store: ChainStore) -> Union[List[AwarenessSet], Explanation]:
    """Awareness schedule under which an honest miner with latency produces exactly the given
    single-coin blocks: at the slot of the i-th block (in slot order) it knows the ancestors of
    its predecessor and of every earlier block. Impossible when a provable deviation exists."""
    blocks = sorted((a.block for a in announcements), key=lambda b: (b.t, b.id))
    if len({b.coin for b in blocks}) > 1:
        raise ValueError("Honest explanation takes the announcements of a single coin")
    if detect((Announcement(b, -1, b.t) for b in blocks), store):
        return Explanation.IMPOSSIBLE
    schedule = []
    heads: Tuple[bytes, ...] = ()
    prev = None
    for b in blocks:
        new = list(heads) + [b.pred] + ([prev.id] if prev is not None else [])
        heads = _heads(store, new)
        # the predecessor must be a best block of what the miner knew
        if store.score(b.pred) < max(store.score(h) for h in heads):
            return Explanation.IMPOSSIBLE
        schedule.append(AwarenessSet(block=b.id, t=b.t, heads=heads))
        prev = b
    return schedule
