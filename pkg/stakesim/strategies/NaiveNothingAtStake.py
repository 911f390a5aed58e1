from typing import List
from ..base.Block import Block
from .Strategy import MinerView, Strategy


class NaiveNothingAtStake (Strategy):

    """Control miner: mines with every coin on the best tip and on the highest other leaves,
    announcing everything without any deviation check.
    ARGS:
        - max_forks (int): number of leaves besides the tip to extend"""

    name = "naive-nas"

    def __init__(self, participant: int, max_forks: int = 8):
        super().__init__(participant)
        if max_forks < 0:
            raise ValueError("max_forks must be natural, got {}".format(max_forks))
        self.max_forks = max_forks

    def step(self, view: MinerView, store, protocol, t: int) -> List[Block]:
        targets = [view.tip]
        for _, leaf in store.leaves():
            if len(targets) > self.max_forks:
                break
            if leaf != view.tip:
                targets.append(leaf)
        out = []
        for parent in targets:
            out.extend(self.mine_honestly(view, store, protocol, t, parent))
        return out

    def describe(self) -> dict:
        return {"strategy": self.name, "max_forks": self.max_forks}
