import logging
import struct
from typing import Optional, Tuple
from ..base.Block import Block
from ..base.ChainStore import ChainStore
from ..exceptions import UnpredictableError
from .OracleKey import Keyring
from .Protocol import Predictability, ProtocolSpec

logger = logging.getLogger(__name__)

PREDICTOR = 0
NETWORK_COINS = 7
# slots searched per intermediate level before the chain stops growing
MAX_WAIT = 4096


def classify(spec: ProtocolSpec, D: int) -> Predictability:
    """Predictability class of the protocol's coins at depth D, read from its declared profile.
    Protocols without a profile are reported as unclassified."""
    profile = spec.profile
    if profile is None:
        return Predictability.UNCLASSIFIED
    return profile.kind(D)


def _grow(spec: ProtocolSpec, store: ChainStore, keyring: Keyring, D: int, allow_opaque: bool) -> Tuple[bytes, int]:
    """Extends genesis by D - 1 network blocks, each at the first slot where some network coin
    is eligible (smallest id wins). Returns the last block and the slot of the target block."""
    parent, t = store.genesis, 0
    for _ in range(D - 1):
        block = None
        waited = 0
        while block is None and waited < MAX_WAIT:
            t += 1
            waited += 1
            candidates = []
            for c in range(1, NETWORK_COINS + 1):
                b = spec.mine(store, parent, c, t, c, keyring, allow_opaque=allow_opaque)
                if b is not None:
                    candidates.append(b)
            if candidates:
                block = min(candidates, key=lambda b: b.id)
        if block is None:
            break
        store.add(block)
        parent = block.id
    return parent, t + 1


def _target(spec: ProtocolSpec, store: ChainStore, keyring: Keyring, parent: bytes, t: int) -> bool:
    return spec.eligible(store, parent, PREDICTOR, t, PREDICTOR, keyring)


def prediction_game(spec: ProtocolSpec, D: int, trials: int, seed: int = 0) -> float:
    """Empirical predictability test. In every trial the predictor (owner of coin 0) commits to a
    guess of whether its coin can mine a valid block D levels above a fresh genesis, computing
    whatever it can with its own subkey before the D - 1 intermediate network blocks exist.
    When the computation needs content it cannot know it falls back to the likelier outcome.
    Returns |accuracy - majority outcome rate|."""
    if trials < 1:
        raise ValueError("Number of trials must be at least 1, got {}".format(trials))
    if D < 1:
        raise ValueError("Prediction depth must be at least 1, got {}".format(D))
    allocation = {c: c for c in range(NETWORK_COINS + 1)}
    own = Keyring.of(spec.key, PREDICTOR)
    hits, positives, fallbacks = 0, 0, 0
    for trial in range(trials):
        genesis = Block.genesis(aux=struct.pack(">qQ", seed, trial))
        # realized world
        world = ChainStore(allocation, genesis)
        parent, t = _grow(spec, world, spec.world, D, allow_opaque=False)
        outcome = _target(spec, world, spec.world, parent, t)
        # predictor replay on its own scratch store
        scratch = ChainStore(allocation, genesis)
        try:
            parent, t = _grow(spec, scratch, own, D, allow_opaque=True)
            guess = _target(spec, scratch, own, parent, t)
        except UnpredictableError:
            fallbacks += 1
            guess = spec.success_prob >= 0.5
        hits += guess == outcome
        positives += outcome
    accuracy = hits / trials
    rate = positives / trials
    logger.debug("prediction game {} D={}: accuracy {:.3f}, base rate {:.3f}, {} fallbacks".format(spec, D, accuracy, rate, fallbacks))
    return abs(accuracy - max(rate, 1.0 - rate))
