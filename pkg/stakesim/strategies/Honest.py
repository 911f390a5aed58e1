from typing import List
from ..base.Block import Block
from .Strategy import MinerView, Strategy


class Honest (Strategy):

    """Mines on the fork-choice tip with every owned coin and announces each success"""

    name = "honest"

    def step(self, view: MinerView, store, protocol, t: int) -> List[Block]:
        return self.mine_honestly(view, store, protocol, t)


def honest_step(view: MinerView, store, protocol, t: int) -> List[Block]:
    if t != view.clock:
        raise ValueError("Honest step at slot {} with a view of slot {}".format(t, view.clock))
    return Honest(view.participant).step(view, store, protocol, t)
