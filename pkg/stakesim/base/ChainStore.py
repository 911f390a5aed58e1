import logging
from collections import ChainMap
from typing import Dict, Iterable, Iterator, List, Optional, Tuple
from sortedcontainers import SortedList
from .Block import Block
from .Transfer import Transfer
from ..exceptions import MissingAncestorError, UnknownBlockError, UnknownCoinError

logger = logging.getLogger(__name__)


def _last_receiver(payload: Tuple[Transfer, ...], coin: int) -> Optional[int]:
    for tr in reversed(payload):
        if tr.coin == coin:
            return tr.receiver
    return None


class ChainStore:

    """Append-only DAG of blocks rooted at genesis. Derived data (scores, owners, static
    validity) is cached and never invalidated since stored blocks never change.
    ARGS:
        - genesis_allocation (Dict[int, int]): coin id -> participant owning it at genesis
        - genesis (Optional[Block]): root block, defaults to Block.genesis()"""

    def __init__(self, genesis_allocation: Dict[int, int], genesis: Optional[Block] = None):
        if len(genesis_allocation) == 0:
            raise ValueError("Genesis allocation must hold at least one coin")
        genesis = genesis if genesis is not None else Block.genesis()
        if not genesis.is_genesis:
            raise ValueError("Root block {} has a predecessor".format(genesis.hex[:12]))
        self.genesis = genesis.id
        self.genesis_allocation = dict(genesis_allocation)
        self.parent = None
        self.blocks = {genesis.id: genesis}
        self._heights = {genesis.id: 0}
        self._children = {}
        # nearest ancestor-or-self carrying a payload; owner replay only visits these
        self._transfer_anchor = {genesis.id: genesis.id}
        self._hidden = {genesis.id: False}
        self._owner_cache = {}
        self._holdings = {}
        self._valid_cache = {}
        self._order = [genesis.id]
        # keyed by (-score, id) so iteration runs from the highest score down
        self._leaves = SortedList([(0, genesis.id)])

    def overlay(self) -> "ChainStore":
        """Copy-on-write scratch store on top of this one. Blocks added to the overlay stay
        invisible to this store. Overlays keep no leaf index."""
        child = object.__new__(ChainStore)
        child.genesis = self.genesis
        child.genesis_allocation = self.genesis_allocation
        child.parent = self
        child.blocks = ChainMap({}, self.blocks)
        child._heights = ChainMap({}, self._heights)
        child._children = {}
        child._transfer_anchor = ChainMap({}, self._transfer_anchor)
        child._hidden = ChainMap({}, self._hidden)
        child._owner_cache = ChainMap({}, self._owner_cache)
        child._holdings = ChainMap({}, self._holdings)
        child._valid_cache = ChainMap({}, self._valid_cache)
        child._order = []
        child._leaves = None
        return child

    def __contains__(self, b: bytes) -> bool:
        return b in self.blocks

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def coins(self) -> List[int]:
        return sorted(self.genesis_allocation)

    def get(self, b: bytes) -> Block:
        try:
            return self.blocks[b]
        except KeyError:
            raise UnknownBlockError("Unknown block {}".format(b.hex()[:12] if isinstance(b, bytes) else b))

    def add(self, block: Block) -> bool:
        """Insert a block whose predecessor is stored. Returns False if it was already present."""
        if block.id in self.blocks:
            return False
        if block.is_genesis:
            raise ValueError("A store holds exactly one genesis, got a second root {}".format(block.hex[:12]))
        if block.pred not in self.blocks:
            raise MissingAncestorError("Predecessor {} of block {} is not stored".format(block.pred.hex()[:12], block.hex[:12]))
        height = self._heights[block.pred] + 1
        self.blocks[block.id] = block
        self._heights[block.id] = height
        self._children[block.pred] = self._children.get(block.pred, ()) + (block.id,)
        self._transfer_anchor[block.id] = block.id if block.payload else self._transfer_anchor[block.pred]
        self._hidden[block.id] = block.is_opaque or self._hidden[block.pred]
        self._order.append(block.id)
        if self._leaves is not None:
            self._leaves.discard((-(height - 1), block.pred))
            self._leaves.add((-height, block.id))
        return True

    def adopt(self, overlay: "ChainStore") -> List[bytes]:
        """Adds the blocks of an overlay of this store in insertion order together with the
        validity verdicts it reached. Returns the ids that were new."""
        if overlay.parent is not self:
            raise ValueError("Only overlays of this store can be adopted")
        new = [b for b in overlay.blocks_in_order() if self.add(overlay.blocks[b])]
        for key, ok in overlay._valid_cache.maps[0].items():
            if key[1] in self.blocks:
                self._valid_cache[key] = ok
        return new

    def blocks_in_order(self) -> List[bytes]:
        """Ids in insertion order (own blocks only for overlays)"""
        return list(self._order)

    def predecessor(self, b: bytes, d: int) -> Optional[bytes]:
        """The d-th ancestor of b, or None if the chain down to genesis is shorter than d"""
        if d < 0:
            raise ValueError("Predecessor depth must be natural, got {}".format(d))
        cur = self.get(b).id
        for _ in range(d):
            cur = self.blocks[cur].pred
            if cur is None:
                return None
        return cur

    def score(self, b: bytes) -> int:
        """Number of predecessor hops from b down to genesis"""
        try:
            return self._heights[b]
        except KeyError:
            raise UnknownBlockError("Unknown block {}".format(b.hex()[:12]))

    def is_hidden(self, b: bytes) -> bool:
        """True if b or one of its ancestors is opaque, i.e. its real id is unknown to the builder"""
        try:
            return self._hidden[b]
        except KeyError:
            raise UnknownBlockError("Unknown block {}".format(b.hex()[:12]))

    def children(self, b: bytes) -> Tuple[bytes, ...]:
        own = self._children.get(b, ())
        if self.parent is None:
            return own
        return self.parent.children(b) + own

    def is_ancestor(self, a: bytes, b: bytes) -> bool:
        """True if a lies on the path from genesis to b (a block is its own ancestor)"""
        diff = self.score(b) - self.score(a)
        if diff < 0:
            return False
        return self.predecessor(b, diff) == a

    def common_ancestor(self, a: bytes, b: bytes) -> bytes:
        ha, hb = self.score(a), self.score(b)
        if ha > hb:
            a = self.predecessor(a, ha - hb)
        elif hb > ha:
            b = self.predecessor(b, hb - ha)
        while a != b:
            a = self.blocks[a].pred
            b = self.blocks[b].pred
        return a

    def path(self, b: bytes) -> List[bytes]:
        """Ids from genesis to b, both included"""
        out = []
        cur = self.get(b).id
        while cur is not None:
            out.append(cur)
            cur = self.blocks[cur].pred
        out.reverse()
        return out

    def descendants(self, b: bytes) -> List[bytes]:
        """b and every stored block below it, parents before children"""
        out = []
        stack = [self.get(b).id]
        while stack:
            cur = stack.pop()
            out.append(cur)
            stack.extend(sorted(self.children(cur), reverse=True))
        return out

    def leaves(self) -> Iterator[Tuple[int, bytes]]:
        """(score, id) of every childless block, highest score first, ties by smallest id"""
        if self._leaves is None:
            raise RuntimeError("The leaf index is only kept on root stores")
        for neg_score, b in self._leaves:
            yield -neg_score, b

    # ledger

    def owner_at(self, b: bytes, c: int) -> int:
        """Owner of coin c after replaying the transfers on the path genesis -> b"""
        if c not in self.genesis_allocation:
            raise UnknownCoinError("Unknown coin {}".format(c))
        cur = self._transfer_anchor[self.get(b).id]
        walked = []
        while True:
            owner = self._owner_cache.get((cur, c))
            if owner is not None:
                break
            block = self.blocks[cur]
            owner = _last_receiver(block.payload, c)
            if owner is not None:
                break
            if block.pred is None:
                owner = self.genesis_allocation[c]
                break
            walked.append(cur)
            cur = self._transfer_anchor[block.pred]
        self._owner_cache[(cur, c)] = owner
        for w in walked:
            self._owner_cache[(w, c)] = owner
        return owner

    def coins_of(self, b: bytes, participant: int) -> Tuple[int, ...]:
        """Coins owned by participant at b, ascending"""
        anchor = self._transfer_anchor[self.get(b).id]
        key = (anchor, participant)
        held = self._holdings.get(key)
        if held is None:
            held = tuple(c for c in sorted(self.genesis_allocation) if self.owner_at(anchor, c) == participant)
            self._holdings[key] = held
        return held

    def replay_owners(self, b: bytes) -> Dict[int, int]:
        """Full ownership map at b by a plain forward replay, without any cache"""
        owners = dict(self.genesis_allocation)
        for bid in self.path(b)[1:]:
            for tr in self.blocks[bid].payload:
                owners[tr.coin] = tr.receiver
        return owners

    def payload_ok(self, pred: bytes, payload: Iterable[Transfer]) -> bool:
        """Every transfer spends a coin its sender owns, applying the payload in order"""
        pending = {}
        for tr in payload:
            if tr.coin not in self.genesis_allocation:
                return False
            current = pending[tr.coin] if tr.coin in pending else self.owner_at(pred, tr.coin)
            if current != tr.sender:
                return False
            pending[tr.coin] = tr.receiver
        return True

    # validity

    def check_block(self, block: Block, protocol) -> bool:
        """Single step of the validity product for a block whose predecessor is stored: strict
        timestamps, the frozen ownership window, payload ownership and V_P. The predecessor's
        own validity is not consulted."""
        pred = self.blocks.get(block.pred)
        if pred is None:
            raise MissingAncestorError("Predecessor of block {} is not stored".format(block.hex[:12]))
        if not pred.t < block.t:
            return False
        if block.coin is None or block.miner is None or block.coin not in self.genesis_allocation:
            return False
        if not protocol.owns(self, block.pred, block.coin, block.miner):
            return False
        if not self.payload_ok(block.pred, block.payload):
            return False
        return bool(protocol.validate(self, block))

    def is_valid(self, block: Block, now: int, protocol) -> bool:
        """Validity of block at slot now. Stored ancestors are judged once and cached since
        their static validity cannot change."""
        if block.is_genesis:
            return block.id == self.genesis
        if block.t > now:
            return False
        key = protocol.cache_key
        chain = []
        cur = block
        while True:
            if cur.is_genesis:
                ok = cur.id == self.genesis
                break
            cached = self._valid_cache.get((key, cur.id))
            if cached is not None:
                ok = cached
                break
            chain.append(cur)
            if cur.pred not in self.blocks:
                raise MissingAncestorError("Ancestor {} of block {} is not stored".format(cur.pred.hex()[:12], block.hex[:12]))
            cur = self.blocks[cur.pred]
        for blk in reversed(chain):
            ok = ok and self.check_block(blk, protocol)
            self._valid_cache[(key, blk.id)] = ok
        return ok

    def best_tip(self, known: Iterable[bytes], now: int, protocol) -> bytes:
        """Valid block of maximum score among known, ties by smallest id. Genesis if none."""
        best, best_score = self.genesis, 0
        for b in known:
            s = self.score(b)
            if s < best_score or (s == best_score and b >= best):
                continue
            if self.is_valid(self.blocks[b], now, protocol):
                best, best_score = b, s
        return best
