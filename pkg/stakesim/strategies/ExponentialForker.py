import logging
from typing import List, Optional
from ..base.Block import Block
from ..base.ChainStore import ChainStore
from .Strategy import MinerView, Strategy

logger = logging.getLogger(__name__)

ROOT_PARENTS = ("genesis", "tip")


class ExponentialForker (Strategy):

    """Attack on GHOST: after mining honestly until fork_start, the miner plants a root block and
    from then on mines on every block of the root's subtree with every coin, so the subtree
    grows geometrically.
    ARGS:
        - fork_start (int): first slot of the attack
        - root_parent (str): genesis or tip, where the root block is planted"""

    name = "exp-fork"

    def __init__(self, participant: int, fork_start: int = 10, root_parent: str = "genesis"):
        super().__init__(participant)
        if root_parent not in ROOT_PARENTS:
            raise ValueError("Unknown root parent {}, expected one of {}".format(root_parent, ", ".join(ROOT_PARENTS)))
        self.fork_start = fork_start
        self.root_parent = root_parent
        self.root: Optional[bytes] = None
        self.root_slot: Optional[int] = None

    def step(self, view: MinerView, store: ChainStore, protocol, t: int) -> List[Block]:
        if t < self.fork_start:
            return self.mine_honestly(view, store, protocol, t)
        if self.root is None:
            parent = store.genesis if self.root_parent == "genesis" else view.tip
            for c in view.owned(store, parent):
                b = protocol.mine(store, parent, c, t, self.participant, view.keyring)
                if b is not None:
                    self.root, self.root_slot = b.id, t
                    logger.info("participant {} plants subtree root {} at slot {}".format(self.participant, b.hex[:12], t))
                    return [b]
            return []
        return exponential_fork_step(view, store, protocol, self.root, t)

    def describe(self) -> dict:
        return {"strategy": self.name, "fork_start": self.fork_start, "root_parent": self.root_parent,
                "root": None if self.root is None else self.root.hex(), "root_slot": self.root_slot}


def exponential_fork_step(view: MinerView, store: ChainStore, protocol, root: bytes, t: int) -> List[Block]:
    """One block attempt per (site in the subtree of root, owned coin)"""
    out = []
    for site in store.descendants(root):
        for c in view.owned(store, site):
            b = protocol.mine(store, site, c, t, view.participant, view.keyring)
            if b is not None:
                out.append(b)
    return out
