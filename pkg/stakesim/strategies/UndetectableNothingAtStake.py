import logging
from typing import Dict, List, Optional
from ..base.Block import Block
from ..base.ChainStore import ChainStore
from .Strategy import MinerView, Strategy, honest_payload

logger = logging.getLogger(__name__)


def alternative_tip(store: ChainStore, A: bytes, D: int) -> Optional[bytes]:
    """Block of maximum score (ties by smallest id) among all blocks that are not descendants of
    Pred^D(A). A block counts as its own descendant, so ancestors of Pred^D(A) qualify and on a
    single chain the answer is Pred^{D+1}(A). None when Pred^D(A) does not exist or is genesis."""
    P = store.predecessor(A, D)
    if P is None or P == store.genesis:
        return None
    best = store.get(P).pred
    best_score = store.score(best)
    for score, leaf in store.leaves():
        if score < best_score:
            break
        if store.is_ancestor(P, leaf):
            continue
        if score > best_score or leaf < best:
            best, best_score = leaf, score
        break
    return best


class UndetectableNothingAtStake (Strategy):

    """Mines on the best tip A and, with coins that were not eligible there, on the best block
    outside the subtree of Pred^D(A). Announcements on the alternative tip are skipped whenever
    they could be paired with one of the coin's own announcements into a provable deviation.
    ARGS:
        - depth (int): the D of the alternative tip"""

    name = "unas"

    def __init__(self, participant: int, depth: int = 10):
        super().__init__(participant)
        if depth < 1:
            raise ValueError("UNaS depth must be at least 1, got {}".format(depth))
        self.depth = depth
        self._max_score: Dict[int, int] = {}
        self._last_slot: Dict[int, int] = {}
        self.side_blocks = 0

    def _record(self, store: ChainStore, coin: int, b: Block):
        s = store.score(b.pred) + 1
        self._max_score[coin] = max(self._max_score.get(coin, 0), s)
        self._last_slot[coin] = b.t

    def _safe(self, store: ChainStore, coin: int, alt: bytes, A: bytes, t: int) -> bool:
        s_alt = store.score(alt)
        if self._last_slot.get(coin) == t:
            return False
        # the side block may not outscore any of the coin's earlier blocks' rivals, nor future honest ones
        return self._max_score.get(coin, 0) <= s_alt and s_alt < store.score(A)

    def step(self, view: MinerView, store: ChainStore, protocol, t: int) -> List[Block]:
        A = view.tip
        alt = alternative_tip(store, A, self.depth)
        payload = honest_payload(store, A, view.visible_transfers())
        alt_payload = honest_payload(store, alt, view.visible_transfers()) if alt is not None else ()
        out = []
        coins = set(view.owned(store, A))
        if alt is not None:
            coins.update(view.owned(store, alt))
        for c in sorted(coins):
            b = protocol.mine(store, A, c, t, self.participant, view.keyring, payload)
            if b is not None:
                out.append(b)
                self._record(store, c, b)
                continue
            if alt is None or not self._safe(store, c, alt, A, t):
                continue
            b = protocol.mine(store, alt, c, t, self.participant, view.keyring, alt_payload)
            if b is not None:
                out.append(b)
                self._record(store, c, b)
                self.side_blocks += 1
        return out

    def describe(self) -> dict:
        return {"strategy": self.name, "depth": self.depth, "side_blocks": self.side_blocks}


def unas_step(view: MinerView, store: ChainStore, protocol, D: int, t: int, state: Optional[UndetectableNothingAtStake] = None) -> List[Block]:
    """Single UNaS step. Pass the same state object across slots to keep the per-coin history."""
    state = state if state is not None else UndetectableNothingAtStake(view.participant, D)
    return state.step(view, store, protocol, t)
