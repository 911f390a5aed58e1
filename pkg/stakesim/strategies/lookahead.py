import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple
import numpy as np
from scipy.stats import nbinom
from ..base.Block import Block
from ..base.ChainStore import ChainStore
from ..base.Transfer import Transfer
from ..exceptions import UnpredictableError
from .Strategy import MinerView, honest_payload

logger = logging.getLogger(__name__)

DEFAULT_HORIZON = 256
DEFAULT_MAX_K = 32
DEFAULT_BEAM = 4


@dataclass
class Forecast:

    """Predicted continuation of the rest of the network from a base block.
    ARGS:
        - arrivals (Dict[int, float]): k -> earliest slot the network reaches S(base) + k
        - chain (List[Block]): the forecast blocks, lowest first
        - stopped (Optional[int]): slot at which the forecast hit content it cannot compute;
          arrivals from there on are lower bounds
        - statistical (bool): arrivals are quantile estimates rather than an enumeration"""

    arrivals: Dict[int, float]
    chain: List[Block] = field(default_factory=list)
    stopped: Optional[int] = None
    statistical: bool = False

    def inclusion(self, tx: Transfer) -> Optional[int]:
        """Level k (1-based) of the first forecast block carrying tx"""
        for k, b in enumerate(self.chain, start=1):
            if tx in b.payload:
                return k
        return None


def search_self(view: MinerView, store: ChainStore, protocol, base: bytes, horizon: int, t: int,
                max_k: int = DEFAULT_MAX_K, beam: int = DEFAULT_BEAM, until: Optional[int] = None,
                first_payload: Iterable[Transfer] = ()) -> Tuple[Dict[int, int], Dict[int, List[Block]]]:
    """Level by level expansion of the blocks the viewer alone can mine above base with slots in
    (t, t + horizon]. Each level keeps the `beam` earliest blocks (ties by id) as the frontier of
    the next level. Returns t'_k and the chain that reaches S(base) + k at t'_k.
    ARGS:
        - until (Optional[int]): last slot worth searching, tighter than the horizon
        - first_payload (Iterable[Transfer]): transfers carried by the first private block"""
    arrivals, chains = {}, {}
    if horizon <= 0 or beam <= 0:
        return arrivals, chains
    hi = t + horizon if until is None else min(t + horizon, until)
    scratch = store.overlay()
    base_score = scratch.score(base)
    first_payload = tuple(first_payload)
    me = view.participant
    frontier = [base]
    for k in range(1, max_k + 1):
        candidates = []
        for node in frontier:
            payload = first_payload if k == 1 else ()
            coins = [c for c in scratch.coins_of(node, me) if protocol.owns(scratch, node, c, me)]
            found = 0
            for s in range(max(t, scratch.get(node).t) + 1, hi + 1):
                for c in coins:
                    if not protocol.eligible(scratch, node, c, s, me, view.keyring):
                        continue
                    b = protocol.mine(scratch, node, c, s, me, view.keyring, payload)
                    if b is not None:
                        candidates.append((s, b.id, b))
                        found += 1
                        if found >= beam:
                            break
                if found >= beam:
                    break
        if not candidates:
            break
        candidates.sort(key=lambda x: (x[0], x[1]))
        kept = candidates[:beam]
        for _, _, b in kept:
            scratch.add(b)
        arrivals[k] = kept[0][0]
        chains[k] = [scratch.get(x) for x in scratch.path(kept[0][1])[base_score + 1:]]
        frontier = [bid for _, bid, _ in kept]
        # later levels cannot complete before this one
        if arrivals[k] >= hi:
            break
    return arrivals, chains


def lookahead_self(view: MinerView, store: ChainStore, protocol, base: bytes, horizon: int, t: int,
                   max_k: int = DEFAULT_MAX_K, beam: int = DEFAULT_BEAM) -> Dict[int, int]:
    """t'_k: earliest slot at which the viewer alone completes a chain of score S(base) + k"""
    return search_self(view, store, protocol, base, horizon, t, max_k, beam)[0]


def _other_coins(view: MinerView, store: ChainStore, at: bytes) -> List[Tuple[int, int]]:
    out = []
    for p in sorted(view.miners):
        if p == view.participant:
            continue
        out.extend((c, p) for c in store.coins_of(at, p))
    out.sort()
    return out


def forecast_others(view: MinerView, store: ChainStore, protocol, base: bytes, horizon: int, t: int,
                    max_k: int = DEFAULT_MAX_K, mempool: Optional[Iterable[Tuple[int, Transfer]]] = None) -> Forecast:
    """Deterministic continuation of honest play by every other miner from base over the slots
    (t, t + horizon]: all of them extend the current tip, the smallest id wins when several
    blocks appear together. Transfers join the payload from their visible slot on."""
    mempool = list(view.mempool if mempool is None else mempool)
    arrivals = {}
    chain = []
    stopped = None
    scratch = store.overlay()
    tip = base
    k = 0
    for s in range(t + 1, t + horizon + 1):
        if k >= max_k:
            break
        payload = honest_payload(scratch, tip, [tx for visible_from, tx in mempool if visible_from <= s])
        candidates = []
        try:
            for c, owner in _other_coins(view, scratch, tip):
                if not protocol.owns(scratch, tip, c, owner):
                    continue
                if not protocol.eligible(scratch, tip, c, s, owner, view.keyring):
                    continue
                b = protocol.mine(scratch, tip, c, s, owner, view.keyring, payload, allow_opaque=True)
                if b is not None:
                    candidates.append(b)
        except UnpredictableError:
            stopped = s
            break
        if candidates:
            b = min(candidates, key=lambda x: x.id)
            scratch.add(b)
            chain.append(b)
            tip = b.id
            k += 1
            arrivals[k] = s
    for j in range(1, max_k + 1):
        if j not in arrivals:
            arrivals[j] = float(stopped) if stopped is not None else math.inf
    return Forecast(arrivals=arrivals, chain=chain, stopped=stopped)


def network_rate(protocol, n_coins: int) -> float:
    """Probability that at least one of n_coins is eligible in a slot"""
    return 1.0 - (1.0 - protocol.success_prob) ** n_coins


def race_quantiles(protocol, n_coins: int, max_k: int = DEFAULT_MAX_K, q: float = 0.5) -> Dict[int, float]:
    """Quantile of the number of slots the network needs for k blocks, one block per slot at most,
    for k = 1 .. max_k"""
    r = network_rate(protocol, n_coins)
    if r <= 0.0:
        return {k: math.inf for k in range(1, max_k + 1)}
    ks = np.arange(1, max_k + 1)
    slots = ks + nbinom.ppf(q, ks, r)
    return {int(k): float(s) for k, s in zip(ks, slots)}


def estimate_others(view: MinerView, store: ChainStore, protocol, base: bytes, t: int,
                    max_k: int = DEFAULT_MAX_K, q: float = 0.5) -> Forecast:
    """Quantile estimates of t*_k for protocols the viewer cannot enumerate"""
    n = len(_other_coins(view, store, base))
    est = race_quantiles(protocol, n, max_k, q)
    return Forecast(arrivals={k: t + v for k, v in est.items()}, statistical=True)


def lookahead_others(view: MinerView, store: ChainStore, protocol, base: bytes, horizon: int, t: int,
                     mode: str = "global", max_k: int = DEFAULT_MAX_K) -> Dict[int, float]:
    """t*_k: exact forecast in global mode, median estimate in local mode. math.inf marks levels
    the network does not reach within the horizon."""
    if mode == "global":
        return forecast_others(view, store, protocol, base, horizon, t, max_k).arrivals
    if mode == "local":
        return estimate_others(view, store, protocol, base, t, max_k).arrivals
    raise ValueError("Unknown lookahead mode {}, expected global or local".format(mode))
