from .Strategy import Strategy, MinerView, honest_payload
from .Honest import Honest, honest_step
from .UndetectableNothingAtStake import UndetectableNothingAtStake, alternative_tip, unas_step
from .NaiveNothingAtStake import NaiveNothingAtStake
from .SelfishMiner import SelfishMiner, SelfishPlan, selfish_step
from .DoubleSpender import DoubleSpender, DoubleSpendPlan, Phase, double_spend_step
from .RaceDoubleSpender import Race, RaceDoubleSpender
from .Ghost import GhostWeights, ghost_fork_choice
from .ExponentialForker import ExponentialForker, exponential_fork_step
from .lookahead import lookahead_self, lookahead_others, search_self, forecast_others, Forecast

STRATEGIES = {
    Honest.name: Honest,
    UndetectableNothingAtStake.name: UndetectableNothingAtStake,
    NaiveNothingAtStake.name: NaiveNothingAtStake,
    SelfishMiner.name: SelfishMiner,
    DoubleSpender.name: DoubleSpender,
    RaceDoubleSpender.name: RaceDoubleSpender,
    ExponentialForker.name: ExponentialForker,
}


def make_strategy(name: str, participant: int, params: dict, n_participants: int) -> Strategy:
    """Builds a strategy from its configuration name. The double-spenders' vendor and sink
    default to the first two participant ids past the miners."""
    if name not in STRATEGIES:
        raise ValueError("Unknown strategy {}, expected one of {}".format(name, ", ".join(sorted(STRATEGIES))))
    params = dict(params)
    if name in (DoubleSpender.name, RaceDoubleSpender.name):
        params.setdefault("vendor", n_participants)
        params.setdefault("sink", n_participants + 1)
    return STRATEGIES[name](participant, **params)
