import logging
import struct
from time import time
from typing import List, Optional
import numpy as np
from ..base.Block import Block
from ..base.ChainStore import ChainStore
from ..base.TipTracker import TipTracker
from ..exceptions import ConfigError
from ..protocols import Keyring, protocol_from_config
from ..strategies import GhostWeights, MinerView, ghost_fork_choice, make_strategy
from .detector import Announcement, DeviationDetector
from .RunLog import RunLog
from .SimConfig import SimConfig

logger = logging.getLogger(__name__)


class Simulation:

    """Discrete-time run under the ideal network: every block announced in slot t is seen by
    everyone from slot t + 1 on. Strategies act once per slot in a fixed seed-shuffled order.
    ARGS:
        - config (SimConfig): validated run configuration
        - verbose (int): > 0 logs progress at INFO"""

    def __init__(self, config: SimConfig, verbose: int = 0):
        self.config = config.validate()
        self.verbose = verbose
        pc = config.protocol
        self.protocol = protocol_from_config(pc.name, pc.success_prob, config.seed, pc.recency, pc.freeze)
        genesis = Block.genesis(aux=struct.pack(">q", config.seed))
        self.store = ChainStore(config.allocation(), genesis)
        n = len(config.participants)
        self.miners = frozenset(range(n))
        self.strategies = []
        for pid, p in enumerate(config.participants):
            try:
                self.strategies.append(make_strategy(p.strategy, pid, p.params, n))
            except (TypeError, ValueError) as err:
                path = "participants[{}].params".format(pid)
                line = config.line_of(path) or config.line_of("participants[{}]".format(pid))
                raise ConfigError("{}: {}".format(path, err), line)
        self.keyrings = [Keyring.of(self.protocol.key, pid) for pid in range(n)]
        self.order = [int(i) for i in np.random.default_rng(config.seed).permutation(n)]
        self.tracker = TipTracker(self.store, self.protocol)
        self.weights = GhostWeights(self.store) if config.fork_choice == "ghost" else None
        self.detector = DeviationDetector(self.store) if config.detector else None
        self.mempool = []
        self.announced = [0] * n
        self.tip = self.store.genesis
        self.top_score, self.top_count = 0, 1
        self.log = RunLog(config.to_dict())
        self.dropped = 0

    def fork_choice(self) -> bytes:
        if self.weights is not None:
            return ghost_fork_choice(self.store, self.weights)
        return self.tracker.tip

    def _accept(self, staging: ChainStore, block: Block, pid: int, t: int) -> bool:
        if block.id in staging:
            return False
        if block.t > t:
            logger.warning("participant {} announced block {} from future slot {} at slot {}".format(pid, block.hex[:12], block.t, t))
        elif block.pred not in staging:
            logger.warning("participant {} announced block {} without its predecessor".format(pid, block.hex[:12]))
        elif not staging.is_valid(block, t, self.protocol):
            logger.warning("participant {} announced invalid block {}".format(pid, block.hex[:12]))
        else:
            staging.add(block)
            return True
        self.dropped += 1
        return False

    def _commit(self, staging: ChainStore, anns: List[Announcement], t: int) -> List[bytes]:
        new_ids = self.store.adopt(staging)
        for ann in anns:
            b = ann.block
            self.announced[ann.by] += 1
            s = self.store.score(b.id)
            if s > self.top_score:
                self.top_score, self.top_count = s, 1
            elif s == self.top_score:
                self.top_count += 1
            if self.weights is not None:
                self.weights.add(b.id)
            if self.detector is not None:
                for ev in self.detector.observe(ann):
                    self.log.add("deviation", t=t, by=ann.by, **ev.to_dict())
        return new_ids

    def _check_releases(self, t: int):
        """A released chain must end up as the unique block of maximum score"""
        for strat in self.strategies:
            if strat.release is None:
                continue
            unique = self.top_count == 1 and self.store.score(strat.release) == self.top_score
            strat.episodes[-1]["unique_best"] = unique
            if not unique:
                logger.warning("participant {} released chain {} at slot {} without winning".format(strat.participant, strat.release.hex()[:12], t))

    def _record_subtrees(self, t: int):
        for strat in self.strategies:
            root = getattr(strat, "root", None)
            if root is None or root not in self.store:
                continue
            size = self.weights[root] if self.weights is not None else len(self.store.descendants(root))
            self.log.add("trajectory", t=t, k=t - strat.root_slot, participant=strat.participant, subtree=size,
                         captured=self.store.is_ancestor(root, self.tip))

    def step(self, t: int):
        staging = self.store.overlay()
        anns = []
        transfers = []
        mempool = tuple(self.mempool)
        for pid in self.order:
            strat = self.strategies[pid]
            view = MinerView(participant=pid, clock=t, tip=self.tip, keyring=self.keyrings[pid], miners=self.miners, mempool=mempool)
            for b in strat.step(view, self.store, self.protocol, t):
                if self._accept(staging, b, pid, t):
                    anns.append(Announcement(block=b, by=pid, at=t))
            transfers.extend((t + 1, tx) for tx in strat.drain_transfers())
        self.mempool.extend(transfers)
        new_ids = self._commit(staging, anns, t)
        old_tip = self.tip
        self.tracker.update(new_ids, t)
        self.tip = self.fork_choice()
        reorg = self.store.score(old_tip) - self.store.score(self.store.common_ancestor(old_tip, self.tip))
        if reorg > 0:
            logger.debug("slot {}: reorg of depth {} to {}".format(t, reorg, self.tip.hex()[:12]))
        self._check_releases(t)
        self._record_subtrees(t)
        self.log.add("slot", t=t, tip=self.tip.hex(), score=self.store.score(self.tip), reorg=reorg,
                     announcements=[{"id": a.block.hex, "pred": a.block.pred.hex(), "by": a.by, "coin": a.block.coin,
                                     "t": a.block.t, "payload": len(a.block.payload)} for a in anns],
                     transfers=[tx.to_dict() for _, tx in transfers])

    def finish(self):
        episodes = []
        for strat in self.strategies:
            for e in strat.episodes:
                episodes.append(dict(e, strategy=strat.name))
        for e in sorted(episodes, key=lambda e: (e["end"], e["participant"])):
            self.log.add("episode", **e)
        on_chain = [0] * len(self.strategies)
        for b in self.store.path(self.tip)[1:]:
            on_chain[self.store.get(b).miner] += 1
        for pid, p in enumerate(self.config.participants):
            self.log.add("tally", participant=pid, name=p.name, strategy=p.strategy, coins=p.coins,
                         stake=self.config.stake(pid), announced=self.announced[pid], on_chain=on_chain[pid],
                         details=self.strategies[pid].describe())
        self.log.add("footer", tip=self.tip.hex(), score=self.store.score(self.tip), blocks=len(self.store) - 1,
                     dropped=self.dropped)

    def run(self) -> RunLog:
        t0 = time()
        for t in range(1, self.config.slots + 1):
            self.step(t)
            if self.verbose > 0 and t % max(1, self.config.slots // 10) == 0:
                logger.info("slot {} of {}, tip score {}".format(t, self.config.slots, self.store.score(self.tip)))
        self.finish()
        if self.verbose > 0:
            logger.info("simulation of {} slots done in {} seconds".format(self.config.slots, round(time() - t0, 2)))
        return self.log


def run(config: SimConfig, verbose: int = 0) -> RunLog:
    """Runs one simulation, a pure function of the configuration"""
    return Simulation(config, verbose).run()
