from typing import Iterable
from .ChainStore import ChainStore


class TipTracker:

    """Incremental longest-chain tip. The tip only moves to a strictly higher score, so a tip
    chosen at some score is never swapped for an equal-score rival that shows up later.
    Blocks arriving together are ordered by score, then smallest id."""

    def __init__(self, store: ChainStore, protocol):
        self.store = store
        self.protocol = protocol
        self.tip = store.genesis
        self.score = 0

    def update(self, block_ids: Iterable[bytes], now: int) -> bytes:
        best = None
        for b in block_ids:
            s = self.store.score(b)
            if s <= self.score:
                continue
            key = (-s, b)
            if best is not None and key >= best:
                continue
            if self.store.is_valid(self.store.get(b), now, self.protocol):
                best = key
        if best is not None:
            self.score, self.tip = -best[0], best[1]
        return self.tip
