"""Builders shared by the test modules"""
import math
import os
from typing import Dict, List, Optional
import numpy as np
from stakesim.base import ChainStore
from stakesim.protocols import Keyring
from stakesim.strategies import MinerView

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs")


def extend(store: ChainStore, protocol, parent: bytes, coin: int, t: int, miner: Optional[int] = None, payload=()) -> bytes:
    """Mines and stores one block, failing the test if the coin is not eligible"""
    miner = store.owner_at(parent, coin) if miner is None else miner
    b = protocol.mine(store, parent, coin, t, miner, payload=payload)
    assert b is not None, "coin {} not eligible at slot {}".format(coin, t)
    store.add(b)
    return b.id


def build_chain(store: ChainStore, protocol, parent: bytes, n: int, coin: int = 0, start: Optional[int] = None) -> List[bytes]:
    """n blocks on top of parent at consecutive slots, under an always-eligible protocol"""
    t = store.get(parent).t + 1 if start is None else start
    ids = []
    for i in range(n):
        parent = extend(store, protocol, parent, coin, t + i)
        ids.append(parent)
    return ids


def view_of(store: ChainStore, protocol, participant: int, tip: bytes, clock: int, miners=None, mempool=()) -> MinerView:
    miners = frozenset(miners if miners is not None else set(store.genesis_allocation.values()))
    return MinerView(participant=participant, clock=clock, tip=tip, keyring=Keyring.of(protocol.key, participant),
                     miners=miners, mempool=tuple(mempool))


def pooled_stderr(values) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def config_path(name: str) -> str:
    return os.path.join(CONFIG_DIR, name)


def allocation(coins: Dict[int, int]) -> Dict[int, int]:
    """participant -> number of coins, to a coin -> participant allocation"""
    out, c = {}, 0
    for p in sorted(coins):
        for _ in range(coins[p]):
            out[c] = p
            c += 1
    return out
