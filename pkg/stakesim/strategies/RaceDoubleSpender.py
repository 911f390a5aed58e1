import logging
from dataclasses import dataclass, field
from typing import List, Optional
from ..base.Block import Block
from ..base.ChainStore import ChainStore
from ..base.Transfer import Transfer
from .DoubleSpender import Phase, confirmations
from .Strategy import MinerView, Strategy

logger = logging.getLogger(__name__)


@dataclass
class Race:

    """A payment and the private chain racing to cancel it.
    ARGS:
        - tx (Transfer): the public payment to the vendor
        - conflict (Transfer): the same coin moved to a sink, carried by private block z
        - base (bytes): public tip the payment was made on
        - started (int): slot of the payment
        - private (List[Block]): withheld chain above base
        - reached (Optional[int]): slot of private block z
        - won (Optional[bool]): None until one side is z blocks above base
        - goods_slot (Optional[int]): slot at which the vendor saw the payment confirmed"""

    tx: Transfer
    conflict: Transfer
    base: bytes
    started: int
    phase: Phase = Phase.ANNOUNCED
    private: List[Block] = field(default_factory=list)
    reached: Optional[int] = None
    won: Optional[bool] = None
    goods_slot: Optional[int] = None

    @property
    def tip(self) -> bytes:
        return self.private[-1].id if self.private else self.base


class RaceDoubleSpender (Strategy):

    """Double-spend without foresight. The miner pays the vendor, then mines a private chain on
    the payment's base block with every coin it still owns there, one block per slot. Private
    block z moves the paid coin to the sink. The race is won when the private chain is z blocks
    above the base strictly before the public chain is. A won race is withheld until the vendor
    counts z confirmations and released as soon as it cannot be tied within the slot; a lost race
    is dropped.
    ARGS:
        - vendor (int): receiver of the payment
        - sink (int): receiver of the conflicting transfer
        - confirm_depth (int): the vendor's z
        - max_attempts (int): number of races before mining honestly for good"""

    name = "race-double-spend"

    def __init__(self, participant: int, vendor: int, sink: int, confirm_depth: int = 2, max_attempts: int = 1):
        super().__init__(participant)
        if confirm_depth < 1:
            raise ValueError("Confirmation depth must be at least 1, got {}".format(confirm_depth))
        if vendor == participant or sink == participant:
            raise ValueError("Vendor and sink must differ from the attacker")
        self.vendor = vendor
        self.sink = sink
        self.confirm_depth = confirm_depth
        self.max_attempts = max_attempts
        self.attempts = 0
        self.race: Optional[Race] = None

    @property
    def phase(self) -> Phase:
        return Phase.DORMANT if self.race is None else self.race.phase

    def _start(self, view: MinerView, store: ChainStore, t: int) -> Optional[Race]:
        coins = view.owned(store, view.tip)
        if not coins:
            return None
        coin = coins[0]
        race = Race(tx=Transfer(coin, self.participant, self.vendor), conflict=Transfer(coin, self.participant, self.sink),
                    base=view.tip, started=t)
        self.announce_transfer(race.tx)
        logger.debug("participant {} pays coin {} to {} and races from slot {}".format(self.participant, coin, self.vendor, t))
        return race

    def _extend(self, view: MinerView, store: ChainStore, protocol, t: int):
        race = self.race
        scratch = store.overlay()
        for b in race.private:
            scratch.add(b)
        parent = race.tip
        payload = (race.conflict,) if len(race.private) + 1 == self.confirm_depth else ()
        for c in view.owned(scratch, parent):
            b = protocol.mine(scratch, parent, c, t, self.participant, view.keyring, payload)
            if b is not None:
                race.private.append(b)
                if len(race.private) == self.confirm_depth:
                    race.reached = t
                return

    def _judge(self, store: ChainStore, tip: bytes, public: int, t: int):
        """Decides the race from the public blocks of slots before t"""
        race = self.race
        z = self.confirm_depth
        if public >= z:
            # slot of the public block z above the base
            public_slot = store.get(store.predecessor(tip, public - z)).t
            race.won = race.reached is not None and race.reached < public_slot
        elif race.reached is not None and race.reached < t:
            race.won = True

    def _finish(self, t: int, outcome: str, blocks: Optional[List[Block]] = None) -> List[Block]:
        race = self.race
        episode = {"participant": self.participant, "base": race.base.hex(), "k": len(race.private), "start": race.started,
                   "end": t, "outcome": outcome, "race_won": bool(race.won), "tx": race.tx.to_dict(),
                   "confirm_depth": self.confirm_depth, "goods_slot": race.goods_slot,
                   "goods_received": race.goods_slot is not None, "kind": "double-spend"}
        if blocks:
            self.release = blocks[-1].id
            episode["tip"] = blocks[-1].hex
            race.phase = Phase.RELEASED
            logger.info("participant {} releases {} blocks at slot {} ending in {}".format(self.participant, len(blocks), t, blocks[-1].hex[:12]))
        self.episodes.append(episode)
        self.race = None
        return blocks or []

    def step(self, view: MinerView, store: ChainStore, protocol, t: int) -> List[Block]:
        self.release = None
        race = self.race
        if race is not None:
            if not store.is_ancestor(race.base, view.tip):
                self._finish(t, "reorg")
            else:
                public = store.score(view.tip) - store.score(race.base)
                if race.won is None:
                    self._judge(store, view.tip, public, t)
                if race.won is False:
                    logger.info("participant {} lost its race at slot {}".format(self.participant, t))
                    self._finish(t, "lost")
                else:
                    if race.phase == Phase.ANNOUNCED:
                        race.phase = Phase.AWAITING_CONFIRMATION
                    if race.phase == Phase.AWAITING_CONFIRMATION:
                        depth = confirmations(store, view.tip, race.tx, race.base)
                        if depth is not None and depth >= self.confirm_depth:
                            race.phase = Phase.GOODS_RECEIVED
                            race.goods_slot = t
                    self._extend(view, store, protocol, t)
                    # the public chain grows by at most one block within the slot
                    if race.won and race.phase == Phase.GOODS_RECEIVED and len(race.private) > public + 1:
                        return self._finish(t, "released", list(race.private))
                    if race.won and public > len(race.private):
                        logger.info("participant {} drops its won race at slot {}, public chain ahead".format(self.participant, t))
                        self._finish(t, "overtaken")
                    else:
                        return []
        if self.attempts < self.max_attempts:
            race = self._start(view, store, t)
            if race is not None:
                self.attempts += 1
                self.race = race
                self._extend(view, store, protocol, t)
                return []
        return self.mine_honestly(view, store, protocol, t)

    def describe(self) -> dict:
        return {"strategy": self.name, "confirm_depth": self.confirm_depth, "vendor": self.vendor, "sink": self.sink,
                "attempts": self.attempts}
