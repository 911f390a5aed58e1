import math
import numpy as np
import pytest
from stakesim.base import ChainStore, Transfer
from stakesim.protocols import make_oracle, make_p2
from stakesim.strategies import (DoubleSpender, ExponentialForker, GhostWeights, Honest, NaiveNothingAtStake,
                                 SelfishMiner, Strategy, alternative_tip, exponential_fork_step, forecast_others,
                                 ghost_fork_choice, honest_payload, honest_step, lookahead_others, lookahead_self,
                                 make_strategy, unas_step, UndetectableNothingAtStake)
from stakesim.strategies.DoubleSpender import confirmations
from stakesim.strategies.RaceDoubleSpender import RaceDoubleSpender
from stakesim.strategies.SelfishMiner import pick_lead, search_limit
from stakesim.strategies.lookahead import race_quantiles
from helpers import build_chain, extend, view_of

# slot hashed, so other participants' blocks stay computable, and eligible in practice every slot
CERTAIN = make_p2(1.0 - 1e-12, seed=1)


def test_strategy_needs_a_name():
    class Nameless (Strategy):
        def step(self, view, store, protocol, t):
            return []

    with pytest.raises(NotImplementedError):
        Nameless(0)


def test_make_strategy():
    assert isinstance(make_strategy("honest", 0, {}, 3), Honest)
    ds = make_strategy("double-spend", 1, {"confirm_depth": 3}, 3)
    assert (ds.vendor, ds.sink, ds.confirm_depth) == (3, 4, 3)
    with pytest.raises(ValueError):
        make_strategy("bribery", 0, {}, 3)
    with pytest.raises(TypeError):
        make_strategy("unas", 0, {"dpeth": 3}, 3)


def test_honest_mines_every_coin_on_the_tip(two_party_store, always):
    store = two_party_store
    tx = Transfer(0, 0, 1)
    view = view_of(store, always, 0, store.genesis, 1, mempool=[(0, tx), (5, Transfer(1, 0, 1))])
    blocks = honest_step(view, store, always, 1)
    assert sorted(b.coin for b in blocks) == [0, 1]
    assert all(b.pred == store.genesis and b.t == 1 and b.payload == (tx,) for b in blocks)
    with pytest.raises(ValueError):
        honest_step(view, store, always, 2)


def test_honest_payload_drops_applied_transfers(two_party_store, always):
    store = two_party_store
    tx = Transfer(0, 0, 1)
    b1 = extend(store, always, store.genesis, 0, 1, payload=[tx])
    assert honest_payload(store, store.genesis, [tx, Transfer(2, 1, 0)]) == (tx, Transfer(2, 1, 0))
    assert honest_payload(store, b1, [tx]) == ()


def test_alternative_tip_on_a_single_chain(two_party_store, always):
    store = two_party_store
    chain = build_chain(store, always, store.genesis, 15)
    assert alternative_tip(store, chain[-1], 10) == chain[3]
    assert alternative_tip(store, chain[-1], 14) == store.genesis
    assert alternative_tip(store, chain[-1], 15) is None
    assert alternative_tip(store, chain[-1], 20) is None


def test_alternative_tip_prefers_a_higher_outside_leaf(two_party_store, always):
    store = two_party_store
    chain = build_chain(store, always, store.genesis, 15)
    side = build_chain(store, always, chain[2], 4, coin=2, start=20)
    # Pred^10 of the tip is chain[4]; the side fork leaves from chain[2] and reaches score 7
    assert alternative_tip(store, chain[-1], 10) == side[-1]
    # the side fork sits inside the subtree of Pred^13
    assert alternative_tip(store, chain[-1], 13) == chain[0]


def test_unas_side_blocks_stay_below_the_tip(two_party_store, always):
    store = two_party_store
    chain = build_chain(store, always, store.genesis, 15, coin=2)
    A = chain[-1]
    spec = make_oracle(0.5, seed=8)
    state = UndetectableNothingAtStake(0, depth=3)
    alt = alternative_tip(store, A, 3)
    first_main = {}
    side = 0
    for t in range(16, 60):
        blocks = unas_step(view_of(store, spec, 0, A, t), store, spec, 3, t, state)
        assert len({b.coin for b in blocks}) == len(blocks)
        for b in blocks:
            assert b.pred in (A, alt)
            if b.pred == A:
                first_main.setdefault(b.coin, t)
            else:
                side += 1
                assert store.score(alt) < store.score(A)
                assert b.coin not in first_main
    assert side == state.side_blocks
    assert state.describe()["side_blocks"] == side


def test_unas_depth_checked():
    with pytest.raises(ValueError):
        UndetectableNothingAtStake(0, depth=0)


def test_naive_nas_extends_every_leaf(two_party_store, always):
    store = two_party_store
    a = extend(store, always, store.genesis, 2, 1)
    b = extend(store, always, store.genesis, 3, 1)
    blocks = NaiveNothingAtStake(0).step(view_of(store, always, 0, a, 2), store, always, 2)
    assert {x.pred for x in blocks} == {a, b}
    assert len(blocks) == 4
    assert len(NaiveNothingAtStake(0, max_forks=0).step(view_of(store, always, 0, a, 2), store, always, 2)) == 2


def test_lookahead_with_certain_eligibility(two_party_store, always):
    store = two_party_store
    view = view_of(store, always, 0, store.genesis, 0)
    assert lookahead_self(view, store, always, store.genesis, 10, 0) == {k: k for k in range(1, 11)}
    assert lookahead_self(view, store, always, store.genesis, 0, 0) == {}
    never = make_oracle(0.0, seed=1)
    assert lookahead_self(view, store, never, store.genesis, 10, 0) == {}
    # the search leaves the real store untouched
    assert len(store) == 1


def test_lookahead_first_arrival_is_geometric():
    store = ChainStore({0: 0, 1: 1})
    gaps = []
    for seed in range(400):
        spec = make_oracle(0.5, seed=seed)
        view = view_of(store, spec, 0, store.genesis, 0)
        gaps.append(lookahead_self(view, store, spec, store.genesis, 64, 0, max_k=1)[1])
    gaps = np.array(gaps, dtype=float)
    assert abs(gaps.mean() - 2.0) < 4 * math.sqrt(2.0 / len(gaps))


def test_forecast_without_other_miners(two_party_store, always):
    store = two_party_store
    view = view_of(store, always, 0, store.genesis, 0, miners={0})
    fc = forecast_others(view, store, always, store.genesis, 20, 0, max_k=5)
    assert fc.chain == []
    assert all(math.isinf(v) for v in fc.arrivals.values())
    assert sorted(fc.arrivals) == [1, 2, 3, 4, 5]


def test_forecast_matches_first_eligible_slot():
    store = ChainStore({0: 0, 1: 1})
    spec = make_p2(0.2, seed=3)
    view = view_of(store, spec, 0, store.genesis, 0)
    fc = forecast_others(view, store, spec, store.genesis, 200, 0, max_k=1)
    first = next(s for s in range(1, 201) if spec.eligible(store, store.genesis, 1, s, 1, spec.world))
    assert fc.arrivals[1] == first
    assert fc.chain[0].miner == 1


def test_forecast_includes_visible_transfers(two_party_store):
    store = two_party_store
    tx = Transfer(0, 0, 1)
    view = view_of(store, CERTAIN, 0, store.genesis, 0)
    fc = forecast_others(view, store, CERTAIN, store.genesis, 10, 0, max_k=5, mempool=[(3, tx)])
    assert fc.inclusion(tx) == 3


def test_lookahead_others_modes(two_party_store):
    store = two_party_store
    view = view_of(store, CERTAIN, 0, store.genesis, 0)
    exact = lookahead_others(view, store, CERTAIN, store.genesis, 10, 0, mode="global", max_k=4)
    assert exact == {1: 1, 2: 2, 3: 3, 4: 4}
    sparse = make_p2(0.1, seed=2)
    estimate = lookahead_others(view, store, sparse, store.genesis, 10, 0, mode="local", max_k=4)
    assert sorted(estimate) == [1, 2, 3, 4]
    assert all(k <= estimate[k] < math.inf for k in estimate)
    with pytest.raises(ValueError):
        lookahead_others(view, store, CERTAIN, store.genesis, 10, 0, mode="psychic")


def test_race_quantiles_grow_with_k():
    spec = make_oracle(0.1, seed=0)
    q = race_quantiles(spec, 5, max_k=10)
    values = [q[k] for k in range(1, 11)]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert all(q[k] >= k for k in q)
    assert all(math.isinf(v) for v in race_quantiles(make_oracle(0.0), 5, max_k=3).values())


def test_pick_lead():
    t_prime = {1: 5, 2: 7, 3: 9}
    t_star = {1: 6, 2: 7, 3: 8}
    assert pick_lead(t_prime, t_star, 0) == 1
    assert pick_lead(t_prime, t_star, 0, strict=False) == 2
    assert pick_lead(t_prime, t_star, 6) is None
    assert pick_lead({1: 3, 2: 4}, {}, 0) == 2


def test_search_limit():
    assert search_limit({1: 4.0, 2: 9.0}) == 8
    assert search_limit({1: 4.0, 2: math.inf}) is None
    assert search_limit({}) is None


def test_own_chains_searched_past_the_last_network_block(two_party_store, always):
    store = two_party_store
    miner = SelfishMiner(0, horizon=5, max_k=3)
    # the network reaches one block at slot 1 and nothing more within the horizon
    t_star = {1: 1.0, 2: math.inf, 3: math.inf}
    t_prime, chains = miner.own_arrivals(view_of(store, always, 0, store.genesis, 1), store, always, store.genesis, 0, t_star)
    assert t_prime == {1: 1, 2: 2, 3: 3}
    assert len(chains[3]) == 3
    assert pick_lead(t_prime, t_star, 1) == 3


def test_selfish_miner_withholds_and_releases(two_party_store, always):
    store = two_party_store
    miner = SelfishMiner(0, horizon=5)
    out = {}
    for t in range(1, 6):
        out[t] = miner.step(view_of(store, always, 0, store.genesis, t, miners={0}), store, always, t)
    assert all(out[t] == [] for t in range(1, 5))
    released = out[5]
    assert [b.t for b in released] == [1, 2, 3, 4, 5]
    assert released[0].pred == store.genesis
    assert all(b.pred == a.id for a, b in zip(released, released[1:]))
    assert miner.release == released[-1].id
    assert miner.plan is None
    assert miner.episodes[0]["outcome"] == "released"
    assert miner.episodes[0]["k"] == 5


def test_selfish_miner_mines_honestly_without_a_lead(two_party_store):
    store = two_party_store
    miner = SelfishMiner(0, horizon=8)
    blocks = miner.step(view_of(store, CERTAIN, 0, store.genesis, 1), store, CERTAIN, 1)
    assert sorted(b.coin for b in blocks) == [0, 1]
    assert miner.plan is None


def test_selfish_arguments_checked():
    with pytest.raises(ValueError):
        SelfishMiner(0, mode="psychic")
    with pytest.raises(ValueError):
        SelfishMiner(0, horizon=0)
    with pytest.raises(ValueError):
        SelfishMiner(0, quantile=1.0)


def test_double_spender_arguments_checked():
    with pytest.raises(ValueError):
        DoubleSpender(0, vendor=0, sink=5)
    with pytest.raises(ValueError):
        DoubleSpender(0, vendor=4, sink=5, confirm_depth=0)
    with pytest.raises(ValueError):
        DoubleSpender(0, vendor=4, sink=5, on_timeout="shrug")


def test_confirmations(two_party_store, always):
    store = two_party_store
    tx = Transfer(0, 0, 1)
    b1 = extend(store, always, store.genesis, 2, 1)
    b2 = extend(store, always, b1, 2, 2, payload=[tx])
    rest = build_chain(store, always, b2, 3, coin=2)
    assert confirmations(store, rest[-1], tx, store.genesis) == 3
    assert confirmations(store, b2, tx, store.genesis) == 0
    assert confirmations(store, b1, tx, store.genesis) is None
    assert confirmations(store, rest[-1], tx, b2) is None


def test_race_double_spender_wins_and_releases(two_party_store, always):
    store = two_party_store
    miner = RaceDoubleSpender(0, vendor=4, sink=5, confirm_depth=2)

    def step(tip, t):
        return miner.step(view_of(store, always, 0, tip, t), store, always, t)

    assert step(store.genesis, 1) == []
    tx = miner.race.tx
    assert miner.drain_transfers() == [tx] and tx.receiver == 4
    assert step(store.genesis, 2) == []
    assert miner.race.reached == 2 and miner.race.private[1].payload == (miner.race.conflict,)
    assert step(store.genesis, 3) == []
    assert miner.race.won
    p1 = extend(store, always, store.genesis, 2, 3, payload=[tx])
    p2 = extend(store, always, p1, 2, 4)
    p3 = extend(store, always, p2, 2, 5)
    assert step(p1, 4) == [] and step(p2, 5) == []
    released = step(p3, 6)
    assert [b.t for b in released] == [1, 2, 3, 4, 5, 6]
    assert miner.release == released[-1].id
    episode = miner.episodes[0]
    assert (episode["outcome"], episode["race_won"], episode["goods_slot"]) == ("released", True, 6)
    assert episode["kind"] == "double-spend"


def test_race_double_spender_loses_a_tie(two_party_store, always):
    store = two_party_store
    miner = RaceDoubleSpender(0, vendor=4, sink=5, confirm_depth=2)
    miner.step(view_of(store, always, 0, store.genesis, 1), store, always, 1)
    q1 = extend(store, always, store.genesis, 2, 1)
    q2 = extend(store, always, q1, 2, 2)
    assert miner.step(view_of(store, always, 0, q1, 2), store, always, 2) == []
    assert miner.race.reached == 2
    # both sides are two blocks up at slot 2, so the attacker gives up and mines honestly
    blocks = miner.step(view_of(store, always, 0, q2, 3), store, always, 3)
    assert sorted(b.coin for b in blocks) == [0, 1] and all(b.pred == q2 for b in blocks)
    assert miner.race is None
    assert (miner.episodes[0]["outcome"], miner.episodes[0]["race_won"]) == ("lost", False)


def test_race_double_spender_registered():
    ds = make_strategy("race-double-spend", 0, {"confirm_depth": 3}, 2)
    assert isinstance(ds, RaceDoubleSpender) and (ds.vendor, ds.sink) == (2, 3)
    with pytest.raises(ValueError):
        RaceDoubleSpender(0, vendor=0, sink=3)


def test_ghost_follows_the_heavier_subtree(two_party_store, always):
    store = two_party_store
    a = extend(store, always, store.genesis, 0, 1)
    b = extend(store, always, store.genesis, 2, 1)
    kids = [extend(store, always, a, 0, 2), extend(store, always, a, 1, 2), extend(store, always, a, 0, 3)]
    b1, b2 = build_chain(store, always, b, 2, coin=2)
    weights = GhostWeights(store)
    assert weights[a] == 4 and weights[b] == 3 and weights[store.genesis] == 8
    assert ghost_fork_choice(store, weights) == min(kids)
    assert ghost_fork_choice(store, weights, known={store.genesis, b, b1, b2}) == b2
    # one more block under b tips the tie towards the smaller id
    b3 = extend(store, always, b2, 3, 5)
    weights.add(b3)
    assert weights[b] == 4
    assert ghost_fork_choice(store, weights) == (b3 if b < a else min(kids))


def test_exponential_forker_grows_its_subtree(two_party_store, always):
    store = two_party_store
    forker = ExponentialForker(0, fork_start=1)
    planted = forker.step(view_of(store, always, 0, store.genesis, 1), store, always, 1)
    assert len(planted) == 1 and planted[0].pred == store.genesis
    store.add(planted[0])
    assert forker.root == planted[0].id and forker.root_slot == 1
    second = forker.step(view_of(store, always, 0, store.genesis, 2), store, always, 2)
    assert len(second) == 2
    for b in second:
        store.add(b)
    assert len(exponential_fork_step(view_of(store, always, 0, store.genesis, 3), store, always, forker.root, 3)) == 6
    with pytest.raises(ValueError):
        ExponentialForker(0, root_parent="moon")
