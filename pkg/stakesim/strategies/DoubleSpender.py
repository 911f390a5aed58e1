import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple
from ..base.Block import Block
from ..base.ChainStore import ChainStore
from ..base.Transfer import Transfer
from .SelfishMiner import SelfishMiner, SelfishPlan, pick_lead, search_limit
from .Strategy import MinerView
from . import lookahead

logger = logging.getLogger(__name__)

TIMEOUT_POLICIES = ("discard", "release")


class Phase(Enum):

    DORMANT = "dormant"
    ANNOUNCED = "announced"
    AWAITING_CONFIRMATION = "awaiting_confirmation"
    GOODS_RECEIVED = "goods_received"
    RELEASED = "released"


@dataclass
class DoubleSpendPlan:

    """A payment to cancel and the private chain that cancels it.
    ARGS:
        - tx (Transfer): the public payment to the vendor
        - conflict (Transfer): the same coin moved to a sink, carried by the first private block
        - confirm_depth (int): descendants the vendor waits for before handing out the goods
        - phase (Phase): progress of the attack
        - plan (SelfishPlan): the withheld chain and its timing
        - goods_slot (Optional[int]): slot at which the vendor saw the payment confirmed"""

    tx: Transfer
    conflict: Transfer
    confirm_depth: int
    phase: Phase
    plan: SelfishPlan
    goods_slot: Optional[int] = None


def confirmations(store: ChainStore, tip: bytes, tx: Transfer, floor: bytes) -> Optional[int]:
    """Number of descendants of the block carrying tx on the chain ending at tip, searching down to floor"""
    floor_score = store.score(floor)
    cur = tip
    while cur is not None and store.score(cur) > floor_score:
        block = store.get(cur)
        if tx in block.payload:
            return store.score(tip) - store.score(cur)
        cur = block.pred
    return None


class DoubleSpender (SelfishMiner):

    """Predictable double-spend. When the miner can foresee that the network confirms a payment
    z blocks deep strictly before its own private chain (which moves the paid coin elsewhere)
    overtakes the public one, it announces the payment, withholds, and releases the private chain
    once the goods are received.
    ARGS:
        - vendor (int): receiver of the payment
        - sink (int): receiver of the conflicting transfer
        - confirm_depth (int): the vendor's z
        - on_timeout (str): discard or release a private chain whose payment was never confirmed
        - max_attempts (int): number of attacks before mining honestly for good"""

    name = "double-spend"

    def __init__(self, participant: int, vendor: int, sink: int, confirm_depth: int = 2, mode: str = "global",
                 on_timeout: str = "discard", max_attempts: int = 1, horizon: int = lookahead.DEFAULT_HORIZON,
                 max_k: int = lookahead.DEFAULT_MAX_K, beam: int = lookahead.DEFAULT_BEAM, quantile: float = 0.5):
        super().__init__(participant, mode=mode, horizon=horizon, max_k=max_k, beam=beam, quantile=quantile)
        if confirm_depth < 1:
            raise ValueError("Confirmation depth must be at least 1, got {}".format(confirm_depth))
        if on_timeout not in TIMEOUT_POLICIES:
            raise ValueError("Unknown timeout policy {}, expected one of {}".format(on_timeout, ", ".join(TIMEOUT_POLICIES)))
        if vendor == participant or sink == participant:
            raise ValueError("Vendor and sink must differ from the attacker")
        self.vendor = vendor
        self.sink = sink
        self.confirm_depth = confirm_depth
        self.on_timeout = on_timeout
        self.max_attempts = max_attempts
        self.attempts = 0
        self.attack: Optional[DoubleSpendPlan] = None

    @property
    def phase(self) -> Phase:
        return Phase.DORMANT if self.attack is None else self.attack.phase

    def _payment(self, view: MinerView, store: ChainStore) -> Optional[Tuple[Transfer, Transfer]]:
        coins = view.owned(store, view.tip)
        if not coins:
            return None
        coin = coins[0]
        return Transfer(coin, self.participant, self.vendor), Transfer(coin, self.participant, self.sink)

    def trigger_double_spend(self, view: MinerView, store: ChainStore, protocol, t: int) -> Optional[DoubleSpendPlan]:
        payment = self._payment(view, store)
        if payment is None:
            return None
        tx, conflict = payment
        base = view.tip
        z = self.confirm_depth
        if self.mode == "global":
            mempool = tuple(view.mempool) + ((t + 1, tx),)

            def forecast():
                return lookahead.forecast_others(view, store, protocol, base, self.horizon, t - 1, self.max_k, mempool)

            fc = self._cached(base, "ds-forecast", forecast)
            # a cached forecast assumed an earlier payment slot; stale once its first block is due now
            if fc.chain and fc.chain[0].t <= t:
                fc = self._cache["ds-forecast"] = forecast()
            level = fc.inclusion(tx)
            goods = fc.arrivals.get(level + z, math.inf) if level is not None else math.inf
        else:
            fc = lookahead.estimate_others(view, store, protocol, base, t - 1, self.max_k, self.quantile)
            goods = fc.arrivals.get(z + 1, math.inf)
        if math.isinf(goods):
            return None
        t_prime, chains = self._cached(base, "ds-self", lambda: lookahead.search_self(
            view, store, protocol, base, self.horizon, t - 1, self.max_k, self.beam,
            until=None if self.mode == "local" else search_limit(fc.arrivals),
            first_payload=(conflict,)))
        eligible = {k: tp for k, tp in t_prime.items() if tp > goods}
        k = pick_lead(eligible, fc.arrivals, t, strict=self.mode == "global")
        if k is None:
            return None
        plan = SelfishPlan(base=base, k=k, t_prime=t_prime, t_star=fc.arrivals, withheld=list(chains[k]), started=t)
        return DoubleSpendPlan(tx=tx, conflict=conflict, confirm_depth=z, phase=Phase.ANNOUNCED, plan=plan)

    def _finish(self, t: int, outcome: str, blocks: Optional[List[Block]] = None) -> List[Block]:
        attack = self.attack
        self.plan = attack.plan
        extra = {"tx": attack.tx.to_dict(), "confirm_depth": attack.confirm_depth, "goods_slot": attack.goods_slot,
                 "goods_received": attack.goods_slot is not None, "kind": "double-spend"}
        if blocks:
            self.release = blocks[-1].id
            extra["tip"] = blocks[-1].hex
            attack.phase = Phase.RELEASED
        self._close(t, outcome, **extra)
        self.attack = None
        return blocks or []

    def step(self, view: MinerView, store: ChainStore, protocol, t: int) -> List[Block]:
        self.release = None
        attack = self.attack
        if attack is not None:
            self.plan = attack.plan
            broken = self._plan_broken(view, store)
            self.plan = None
            if broken is not None:
                logger.info("participant {} abandons its double-spend at slot {}: {}".format(self.participant, t, broken))
                self._finish(t, broken)
            else:
                if attack.phase == Phase.ANNOUNCED:
                    attack.phase = Phase.AWAITING_CONFIRMATION
                if attack.phase == Phase.AWAITING_CONFIRMATION:
                    depth = confirmations(store, view.tip, attack.tx, attack.plan.base)
                    if depth is not None and depth >= attack.confirm_depth:
                        attack.phase = Phase.GOODS_RECEIVED
                        attack.goods_slot = t
                        logger.info("vendor {} confirmed payment of coin {} at slot {}".format(self.vendor, attack.tx.coin, t))
                if t < attack.plan.release_at:
                    return []
                if attack.phase == Phase.GOODS_RECEIVED or self.on_timeout == "release":
                    return self._finish(t, "released", list(attack.plan.withheld))
                logger.info("participant {} discards its private chain, payment unconfirmed at slot {}".format(self.participant, t))
                self._finish(t, "timeout")
        if self.attempts < self.max_attempts:
            attack = self.trigger_double_spend(view, store, protocol, t)
            if attack is not None:
                self.attempts += 1
                self.attack = attack
                self.announce_transfer(attack.tx)
                logger.debug("participant {} pays coin {} to {} and withholds until slot {}".format(
                    self.participant, attack.tx.coin, self.vendor, attack.plan.release_at))
                return []
        return self.mine_honestly(view, store, protocol, t)

    def describe(self) -> dict:
        return {"strategy": self.name, "mode": self.mode, "confirm_depth": self.confirm_depth,
                "vendor": self.vendor, "sink": self.sink, "attempts": self.attempts}


def double_spend_step(plan: Optional[DoubleSpendPlan], view: MinerView, store: ChainStore, protocol, t: int,
                      state: DoubleSpender) -> Tuple[List[Block], Optional[DoubleSpendPlan]]:
    """Single double-spend step returning the announcements and the updated plan"""
    state.attack = plan
    blocks = state.step(view, store, protocol, t)
    return blocks, state.attack
