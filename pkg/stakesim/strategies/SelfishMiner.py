import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
from ..base.Block import Block
from ..base.ChainStore import ChainStore
from .Strategy import MinerView, Strategy
from . import lookahead

logger = logging.getLogger(__name__)

MODES = ("global", "local")


@dataclass
class SelfishPlan:

    """An active withholding attempt.
    ARGS:
        - base (bytes): the tip A the private chain starts from
        - k (int): lead target, the private chain reaches S(A) + k
        - t_prime (Dict[int, int]): earliest slots of the viewer's own chains
        - t_star (Dict[int, float]): earliest slots of the rest of the network (estimates in local mode)
        - withheld (List[Block]): private chain B_1 .. B_k
        - cutoffs (Dict[int, float]): T_k of the local variant, relative to the decision slot
        - started (int): slot the plan was adopted"""

    base: bytes
    k: int
    t_prime: Dict[int, int]
    t_star: Dict[int, float]
    withheld: List[Block]
    cutoffs: Dict[int, float] = field(default_factory=dict)
    started: int = 0

    @property
    def release_at(self) -> int:
        return self.t_prime[self.k]


def search_limit(t_star: Dict[int, float]) -> Optional[int]:
    """Last slot at which an own chain can still beat the network at some level, None when some
    level is out of the network's reach and the whole horizon counts"""
    if not t_star or any(math.isinf(v) for v in t_star.values()):
        return None
    return int(max(t_star.values())) - 1


def pick_lead(t_prime: Dict[int, int], t_star: Dict[int, float], earliest: int, strict: bool = True) -> Optional[int]:
    """Largest k whose own chain arrives before the network's (at or before when not strict)"""
    best = None
    for k, tp in t_prime.items():
        if tp < earliest:
            continue
        ts = t_star.get(k, math.inf)
        if tp < ts or (not strict and tp <= ts):
            best = k if best is None else max(best, k)
    return best


class SelfishMiner (Strategy):

    """Predictable selfish mining. Before acting at slot t the miner compares the earliest slots
    t'_k at which it alone reaches S(A) + k with the rest of the network's t*_k, both counted from
    slot t - 1 so the block of the current slot can already be withheld. When some k wins it stops
    publishing and releases the whole private chain at t'_k; otherwise it mines honestly.
    ARGS:
        - mode (str): global (exact forecast of the others) or local (quantile cutoffs T_k)
        - horizon (int): slots searched ahead
        - max_k (int): largest lead considered
        - beam (int): frontier width of the private chain search
        - quantile (float): quantile of the network race used for the local cutoffs"""

    name = "selfish"

    def __init__(self, participant: int, mode: str = "global", horizon: int = lookahead.DEFAULT_HORIZON,
                 max_k: int = lookahead.DEFAULT_MAX_K, beam: int = lookahead.DEFAULT_BEAM, quantile: float = 0.5):
        super().__init__(participant)
        if mode not in MODES:
            raise ValueError("Unknown selfish mining mode {}, expected one of {}".format(mode, ", ".join(MODES)))
        if horizon < 1 or max_k < 1 or beam < 1:
            raise ValueError("horizon, max_k and beam must be positive")
        if not 0.0 < quantile < 1.0:
            raise ValueError("Cutoff quantile must lie in (0, 1), got {}".format(quantile))
        self.mode = mode
        self.horizon = horizon
        self.max_k = max_k
        self.beam = beam
        self.quantile = quantile
        self.plan: Optional[SelfishPlan] = None
        self._cache_base = None
        self._cache = {}

    def _cached(self, base: bytes, key: str, fn):
        if base != self._cache_base:
            self._cache_base, self._cache = base, {}
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def network_arrivals(self, view: MinerView, store: ChainStore, protocol, base: bytes, t: int, mempool=None) -> Tuple[Dict[int, float], lookahead.Forecast]:
        """t*_k from slot t, the exact forecast in global mode and the cutoffs (t + T_k) in local mode"""
        if self.mode == "global":
            fc = self._cached(base, "forecast", lambda: lookahead.forecast_others(view, store, protocol, base, self.horizon, t, self.max_k, mempool))
            return fc.arrivals, fc
        fc = lookahead.estimate_others(view, store, protocol, base, t, self.max_k, self.quantile)
        return fc.arrivals, fc

    def own_arrivals(self, view: MinerView, store: ChainStore, protocol, base: bytes, t: int, t_star: Dict[int, float], first_payload=()):
        # local cutoffs move with the slot, so the cached search keeps the full horizon
        until = search_limit(t_star) if self.mode == "global" else None
        return self._cached(base, "self", lambda: lookahead.search_self(view, store, protocol, base, self.horizon, t, self.max_k,
                                                                        self.beam, until=until, first_payload=first_payload))

    def trigger(self, view: MinerView, store: ChainStore, protocol, t: int) -> Optional[SelfishPlan]:
        base = view.tip
        t_star, fc = self.network_arrivals(view, store, protocol, base, t - 1)
        t_prime, chains = self.own_arrivals(view, store, protocol, base, t - 1, t_star)
        k = pick_lead(t_prime, t_star, t, strict=self.mode == "global")
        if k is None:
            return None
        cutoffs = {j: v - (t - 1) for j, v in t_star.items()} if fc.statistical else {}
        return SelfishPlan(base=base, k=k, t_prime=t_prime, t_star=t_star, withheld=list(chains[k]), cutoffs=cutoffs, started=t)

    def _close(self, t: int, outcome: str, **extra):
        plan = self.plan
        episode = {"participant": self.participant, "base": plan.base.hex(), "k": plan.k, "start": plan.started,
                   "t_prime": plan.release_at, "t_star": plan.t_star.get(plan.k), "end": t, "outcome": outcome}
        episode.update(extra)
        self.episodes.append(episode)
        self.plan = None
        return episode

    def _plan_broken(self, view: MinerView, store: ChainStore) -> Optional[str]:
        plan = self.plan
        if not store.is_ancestor(plan.base, view.tip):
            return "reorg"
        if self.mode == "local" and store.score(view.tip) >= store.score(plan.base) + plan.k:
            return "overtaken"
        return None

    def _release(self, t: int, **extra) -> List[Block]:
        blocks = list(self.plan.withheld)
        self.release = blocks[-1].id
        logger.info("participant {} releases {} blocks at slot {} ending in {}".format(self.participant, len(blocks), t, blocks[-1].hex[:12]))
        self._close(t, "released", tip=blocks[-1].hex, **extra)
        return blocks

    def step(self, view: MinerView, store: ChainStore, protocol, t: int) -> List[Block]:
        self.release = None
        if self.plan is not None:
            broken = self._plan_broken(view, store)
            if broken is not None:
                logger.info("participant {} abandons its plan on {} at slot {}: {}".format(self.participant, self.plan.base.hex()[:12], t, broken))
                self._close(t, broken)
            elif t >= self.plan.release_at:
                return self._release(t)
            else:
                return []
        plan = self.trigger(view, store, protocol, t)
        if plan is None:
            return self.mine_honestly(view, store, protocol, t)
        if plan.release_at == t:
            # a lead reached in this very slot is a plain honest block
            return list(plan.withheld)
        self.plan = plan
        logger.debug("participant {} withholds for k={} until slot {} on {}".format(self.participant, plan.k, plan.release_at, plan.base.hex()[:12]))
        return []

    def describe(self) -> dict:
        return {"strategy": self.name, "mode": self.mode, "horizon": self.horizon, "max_k": self.max_k}


def selfish_step(plan: Optional[SelfishPlan], view: MinerView, store: ChainStore, protocol, t: int, mode: str = "global",
                 state: Optional[SelfishMiner] = None) -> Tuple[List[Block], Optional[SelfishPlan]]:
    """Single selfish step returning the announcements and the updated plan"""
    state = state if state is not None else SelfishMiner(view.participant, mode=mode)
    state.plan = plan
    blocks = state.step(view, store, protocol, t)
    return blocks, state.plan
