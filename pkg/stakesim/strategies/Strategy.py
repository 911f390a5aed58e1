import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Tuple
from ..base.Block import Block
from ..base.ChainStore import ChainStore
from ..base.Transfer import Transfer
from ..protocols.OracleKey import Keyring

logger = logging.getLogger(__name__)


@dataclass
class MinerView:

    """What one participant sees at the start of a slot. Under zero latency the blocks it knows
    are exactly the public store (every announcement of earlier slots) plus whatever it keeps
    private.
    ARGS:
        - participant (int): id of the viewing participant
        - clock (int): current slot
        - tip (bytes): fork-choice tip of the public store at the start of the slot
        - keyring (Keyring): the participant's subkeys
        - miners (FrozenSet[int]): every participant running a mining strategy
        - mempool (Tuple[Tuple[int, Transfer]]): announced transfers with the slot they become visible"""

    participant: int
    clock: int
    tip: bytes
    keyring: Keyring
    miners: FrozenSet[int] = frozenset()
    mempool: Tuple[Tuple[int, Transfer], ...] = ()

    def owned(self, store: ChainStore, at: bytes) -> Tuple[int, ...]:
        return store.coins_of(at, self.participant)

    def visible_transfers(self, slot: Optional[int] = None) -> List[Transfer]:
        slot = self.clock if slot is None else slot
        return [tx for visible_from, tx in self.mempool if visible_from <= slot]


def honest_payload(store: ChainStore, parent: bytes, transfers: List[Transfer]) -> Tuple[Transfer, ...]:
    """Greedy selection of the visible transfers that are spendable on top of parent. Transfers
    already applied on the chain fail the ownership check and drop out."""
    chosen = []
    for tx in transfers:
        if store.payload_ok(parent, chosen + [tx]):
            chosen.append(tx)
    return tuple(chosen)


class Strategy (ABC):

    """Abstract miner behaviour. One instance per participant, holding its private state.
    ARGS:
        - participant (int): id of the participant running the strategy"""

    def __init__(self, participant: int):
        if not hasattr(self, "name"):
            raise NotImplementedError("Undefined name for this strategy. Please define a name and rerun.")
        self.participant = participant
        # tip of a chain released this slot, checked by the engine at slot end
        self.release = None
        self.episodes = []
        self._outbox = []

    def __repr__(self):
        return "{}(participant={})".format(type(self).__name__, self.participant)

    @abstractmethod
    def step(self, view: MinerView, store: ChainStore, protocol, t: int) -> List[Block]:
        """Blocks announced at slot t, predecessors first"""
        pass

    def announce_transfer(self, tx: Transfer):
        self._outbox.append(tx)

    def drain_transfers(self) -> List[Transfer]:
        out, self._outbox = self._outbox, []
        return out

    def mine_honestly(self, view: MinerView, store: ChainStore, protocol, t: int, parent: Optional[bytes] = None) -> List[Block]:
        """One block per owned coin on parent (the view's tip by default) carrying the visible transfers"""
        parent = view.tip if parent is None else parent
        payload = honest_payload(store, parent, view.visible_transfers())
        blocks = []
        for c in view.owned(store, parent):
            b = protocol.mine(store, parent, c, t, self.participant, view.keyring, payload)
            if b is not None:
                blocks.append(b)
        return blocks

    def describe(self) -> dict:
        return {"strategy": self.name}
