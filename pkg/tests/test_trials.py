import math
import pytest
from stakesim.analysis import race_probability
from stakesim.engine import (TrialResult, double_spend_trials, engine_double_spend_trials, race_config, race_to_depth,
                             simulated_race)
from stakesim.protocols import make_p2


def _within(result: TrialResult, exact: float, sigmas: float = 3.0) -> bool:
    return abs(result.rate - exact) <= sigmas * math.sqrt(exact * (1.0 - exact) / result.trials)


def test_trial_result():
    r = TrialResult(successes=3, trials=10)
    assert r.rate == 0.3
    assert r.stderr == pytest.approx(math.sqrt(0.021))


def test_race_is_deterministic():
    spec = make_p2(0.01, seed=4)
    assert race_to_depth(spec, 3, 7, 2, 5000) == race_to_depth(spec, 3, 7, 2, 5000)
    assert double_spend_trials(3, 7, 2, 20, seed=1) == double_spend_trials(3, 7, 2, 20, seed=1)


def test_nothing_is_won_without_a_horizon():
    assert not race_to_depth(make_p2(0.05, seed=2), 3, 7, 2, 0)


def test_double_spend_frequency_matches_the_race():
    res = double_spend_trials(3, 7, 2, 300, seed=3)
    assert _within(res, race_probability(0.3, 2), sigmas=4.0)


def test_arguments_checked():
    with pytest.raises(ValueError):
        double_spend_trials(3, 7, 2, 0)
    with pytest.raises(ValueError):
        double_spend_trials(0, 7, 2, 10)


@pytest.mark.slow
@pytest.mark.parametrize("attacker,network", [(3, 7), (4, 6)])
@pytest.mark.parametrize("z", [2, 3])
def test_double_spend_frequency_grid(attacker, network, z):
    res = double_spend_trials(attacker, network, z, 1000, seed=z)
    assert _within(res, race_probability(attacker / (attacker + network), z))


def test_simulated_race_ties_are_lost():
    # every coin is eligible every slot, so both sides are two blocks up at slot 2
    episode = simulated_race(race_config(3, 7, 2, 1.0 - 1e-12, seed=1, max_slots=20))
    assert (episode["outcome"], episode["race_won"], episode["end"]) == ("lost", False, 3)


def test_simulated_races_are_deterministic():
    first = engine_double_spend_trials(3, 7, 2, 10, success_prob=0.02, seed=2)
    assert first == engine_double_spend_trials(3, 7, 2, 10, success_prob=0.02, seed=2)
    with pytest.raises(ValueError):
        engine_double_spend_trials(3, 0, 2, 10)


@pytest.mark.slow
@pytest.mark.parametrize("attacker,network", [(3, 7), (4, 6)])
@pytest.mark.parametrize("z", [2, 3, 4])
def test_simulated_double_spend_matches_the_race(attacker, network, z):
    res = engine_double_spend_trials(attacker, network, z, 1000, seed=z)
    assert _within(res, race_probability(attacker / (attacker + network), z))
