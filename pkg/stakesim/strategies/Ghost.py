from typing import Dict, Iterable, Optional, Set
from ..base.ChainStore import ChainStore


class GhostWeights:

    """Subtree sizes W(B) = 1 + sum of W over the children of B, kept incrementally.
    ARGS:
        - store (ChainStore): store whose blocks are weighed; blocks must be added
          here in the order they are added to the store"""

    def __init__(self, store: ChainStore):
        self.store = store
        self.subtree_size: Dict[bytes, int] = {}
        for b in store.blocks_in_order():
            self.add(b)

    def add(self, b: bytes):
        if b in self.subtree_size:
            return
        self.subtree_size[b] = 0
        cur = b
        while cur is not None:
            self.subtree_size[cur] += 1
            cur = self.store.get(cur).pred

    def __getitem__(self, b: bytes) -> int:
        return self.subtree_size.get(b, 0)


def ghost_fork_choice(store: ChainStore, weights: GhostWeights, known: Optional[Iterable[bytes]] = None) -> bytes:
    """Walk down from genesis, always into the child of largest subtree (ties by smallest id)"""
    allowed: Optional[Set[bytes]] = set(known) if known is not None else None
    cur = store.genesis
    while True:
        best, best_w = None, 0
        for child in store.children(cur):
            if allowed is not None and child not in allowed:
                continue
            w = weights[child]
            if w > best_w or (w == best_w and best is not None and child < best):
                best, best_w = child, w
        if best is None:
            return cur
        cur = best
