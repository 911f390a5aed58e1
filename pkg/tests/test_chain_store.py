import struct
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st
from stakesim.base import Block, ChainStore, TipTracker, Transfer
from stakesim.exceptions import MissingAncestorError, UnknownBlockError, UnknownCoinError
from stakesim.protocols import make_oracle
from helpers import build_chain, extend


def test_missing_predecessor_is_structural(two_party_store, always):
    orphan = Block.create(b"\x00" * 32, 0, 1, 0)
    with pytest.raises(MissingAncestorError):
        two_party_store.add(orphan)
    with pytest.raises(UnknownBlockError):
        two_party_store.score(orphan.id)


def test_duplicate_add(two_party_store, always):
    store = two_party_store
    b = always.mine(store, store.genesis, 0, 1, 0)
    assert store.add(b)
    assert not store.add(b)
    assert len(store) == 2


def test_second_genesis_rejected(two_party_store):
    with pytest.raises(ValueError):
        two_party_store.add(Block.genesis(aux=b"other"))


def test_scores_paths_and_ancestors(two_party_store, always):
    store = two_party_store
    main = build_chain(store, always, store.genesis, 5)
    side = build_chain(store, always, main[1], 2, coin=2)
    assert [store.score(b) for b in main] == [1, 2, 3, 4, 5]
    assert store.score(side[-1]) == 4
    assert store.predecessor(main[4], 2) == main[2]
    assert store.predecessor(main[4], 5) == store.genesis
    assert store.predecessor(main[4], 6) is None
    assert store.common_ancestor(main[4], side[1]) == main[1]
    assert store.path(side[1]) == [store.genesis, main[0], main[1], side[0], side[1]]
    assert store.is_ancestor(main[1], side[1])
    assert store.is_ancestor(side[1], side[1])
    assert not store.is_ancestor(main[2], side[1])
    assert set(store.descendants(main[1])) == set(main[1:] + side)


def test_leaves_by_score_then_id(two_party_store, always):
    store = two_party_store
    a = extend(store, always, store.genesis, 0, 1)
    b = extend(store, always, store.genesis, 2, 1)
    leaves = list(store.leaves())
    assert [s for s, _ in leaves] == [1, 1]
    assert [x for _, x in leaves] == sorted([a, b])
    c = extend(store, always, b, 3, 2)
    assert list(store.leaves())[0] == (2, c)


def test_owner_replay(two_party_store, always):
    store = two_party_store
    b1 = extend(store, always, store.genesis, 0, 1, payload=[Transfer(1, 0, 1)])
    b2 = extend(store, always, b1, 2, 2)
    b3 = extend(store, always, b2, 1, 3, payload=[Transfer(1, 1, 0), Transfer(3, 1, 0)])
    assert store.owner_at(store.genesis, 1) == 0
    assert store.owner_at(b2, 1) == 1
    assert store.owner_at(b3, 1) == 0
    assert store.coins_of(b2, 1) == (1, 2, 3)
    assert store.coins_of(b3, 0) == (0, 1, 3)
    assert store.replay_owners(b3) == {0: 0, 1: 0, 2: 1, 3: 0}
    with pytest.raises(UnknownCoinError):
        store.owner_at(b3, 9)


def test_payload_applies_in_order(two_party_store):
    store = two_party_store
    g = store.genesis
    assert store.payload_ok(g, [Transfer(0, 0, 1), Transfer(0, 1, 0)])
    assert not store.payload_ok(g, [Transfer(0, 1, 0)])
    assert not store.payload_ok(g, [Transfer(0, 0, 1), Transfer(0, 0, 1)])
    assert not store.payload_ok(g, [Transfer(7, 0, 1)])


def test_validity_rules(two_party_store, always):
    store = two_party_store
    b1 = extend(store, always, store.genesis, 0, 2)
    assert store.is_valid(store.get(b1), 2, always)
    # claimed in the future
    assert not store.is_valid(store.get(b1), 1, always)
    # timestamps must strictly increase
    aux = always.key.sign(0, b1 + struct.pack(">QI", 2, 1))
    same_slot = Block.create(b1, 0, 2, 1, aux=aux)
    assert not store.is_valid(same_slot, 5, always)
    # coin not owned by the miner
    aux = always.key.sign(0, b1 + struct.pack(">QI", 3, 2))
    stolen = Block.create(b1, 0, 3, 2, aux=aux)
    assert not store.is_valid(stolen, 5, always)
    # forged signature
    forged = Block.create(b1, 0, 3, 0, aux=b"\x00" * 32)
    assert not store.is_valid(forged, 5, always)
    assert store.is_valid(Block.create(b1, 0, 3, 0, aux=always.key.sign(0, b1 + struct.pack(">QI", 3, 0))), 5, always)


def test_freeze_window():
    protocol = make_oracle(1.0, seed=1, freeze=2)
    store = ChainStore({0: 0, 1: 1})
    b1 = extend(store, protocol, store.genesis, 0, 1, payload=[Transfer(0, 0, 1)])
    # coin 0 belongs to 1 at b1 but not at genesis
    assert protocol.mine(store, b1, 0, 2, 1) is None
    b2 = extend(store, protocol, b1, 1, 2)
    assert protocol.mine(store, b2, 0, 3, 1) is not None


def test_best_tip_breaks_ties_by_id(two_party_store, always):
    store = two_party_store
    a = extend(store, always, store.genesis, 0, 1)
    b = extend(store, always, store.genesis, 2, 1)
    assert store.best_tip([a, b], 1, always) == min(a, b)
    assert store.best_tip([], 1, always) == store.genesis


def test_overlay_is_copy_on_write(two_party_store, always):
    store = two_party_store
    base = build_chain(store, always, store.genesis, 2)
    scratch = store.overlay()
    x = extend(scratch, always, base[-1], 0, 3)
    assert x in scratch and x not in store
    assert base[-1] in scratch
    assert x in scratch.children(base[-1])
    assert store.children(base[-1]) == ()
    assert len(store) == 3


def test_adopt_carries_validity(two_party_store, always):
    store = two_party_store
    staging = store.overlay()
    b = always.mine(staging, store.genesis, 0, 1, 0)
    assert staging.is_valid(b, 1, always)
    staging.add(b)
    assert store.adopt(staging) == [b.id]
    assert store._valid_cache[(always.cache_key, b.id)]
    with pytest.raises(ValueError):
        store.adopt(ChainStore({0: 0}).overlay())


def test_tip_tracker_keeps_first_of_equal_score(two_party_store, always):
    store = two_party_store
    tracker = TipTracker(store, always)
    a = extend(store, always, store.genesis, 0, 1)
    b = extend(store, always, store.genesis, 2, 1)
    assert tracker.update([a, b], 1) == min(a, b)
    first = tracker.tip
    c = extend(store, always, store.genesis, 1, 2)
    assert tracker.update([c], 2) == first
    d = extend(store, always, c, 3, 3)
    assert tracker.update([d], 3) == d
    assert tracker.score == 2


QUICK = settings(max_examples=200, deadline=None)
THOROUGH = settings(max_examples=10000, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def random_stores(draw, max_blocks=60):
    n_part = draw(st.integers(1, 3))
    n_coins = draw(st.integers(1, 5))
    alloc = {c: draw(st.integers(0, n_part - 1)) for c in range(n_coins)}
    protocol = make_oracle(1.0, seed=draw(st.integers(0, 10 ** 6)))
    store = ChainStore(alloc)
    ids = [store.genesis]
    for _ in range(draw(st.integers(0, max_blocks))):
        parent = ids[draw(st.integers(0, len(ids) - 1))]
        coin = draw(st.integers(0, n_coins - 1))
        t = store.get(parent).t + draw(st.integers(1, 3))
        payload = ()
        if draw(st.booleans()):
            moved = draw(st.integers(0, n_coins - 1))
            payload = (Transfer(moved, store.owner_at(parent, moved), draw(st.integers(0, n_part - 1))),)
        b = protocol.mine(store, parent, coin, t, store.owner_at(parent, coin), payload=payload)
        if store.add(b):
            ids.append(b.id)
    return store, protocol, ids


def store_laws(drawn):
    store, protocol, ids = drawn
    horizon = max(store.get(b).t for b in ids)
    for b in ids[1:]:
        block = store.get(b)
        # strict score monotonicity
        assert store.score(b) == store.score(block.pred) + 1
        # cached ownership equals a plain replay
        owners = store.replay_owners(b)
        assert {c: store.owner_at(b, c) for c in store.coins} == owners
        assert store.is_valid(block, horizon, protocol)


def chain_dependence_and_monotonicity(drawn, seed, p):
    store, _, ids = drawn
    strict = make_oracle(p, seed=seed)
    horizon = max(store.get(b).t for b in ids)
    for b in ids[1:]:
        block = store.get(b)
        valid = store.is_valid(block, horizon, strict)
        if valid and not store.get(block.pred).is_genesis:
            assert store.is_valid(store.get(block.pred), horizon, strict)
        # validity never depends on the observation slot once the block is due
        assert store.is_valid(block, horizon + 7, strict) == valid
        assert not store.is_valid(block, block.t - 1, strict)


def mining_and_validation_agree(drawn, seed, p, data):
    store, _, ids = drawn
    spec = make_oracle(p, seed=seed)
    for _ in range(20):
        A = data.draw(st.sampled_from(ids))
        c = data.draw(st.sampled_from(store.coins))
        t = store.get(A).t + data.draw(st.integers(1, 4))
        miner = data.draw(st.sampled_from(sorted(set(store.genesis_allocation.values()) | {7})))
        mined = spec.mine(store, A, c, t, miner)
        candidate = Block.create(A, miner, t, c, aux=spec.key.sign(miner, A + struct.pack(">QI", t, c)))
        if store.check_block(candidate, spec):
            assert mined == candidate
        else:
            assert mined is None
        if mined is not None:
            assert store.check_block(mined, spec)


def superset_verdicts_agree(drawn, seed, p, data):
    store, protocol, ids = drawn
    strict = make_oracle(p, seed=seed)
    bigger = ChainStore(dict(store.genesis_allocation), store.get(store.genesis))
    for b in store.blocks_in_order()[1:]:
        bigger.add(store.get(b))
    known = list(ids)
    for _ in range(data.draw(st.integers(1, 20))):
        parent = data.draw(st.sampled_from(known))
        coin = data.draw(st.sampled_from(store.coins))
        t = bigger.get(parent).t + data.draw(st.integers(1, 3))
        extra = protocol.mine(bigger, parent, coin, t, bigger.owner_at(parent, coin))
        if bigger.add(extra):
            known.append(extra.id)
    horizon = max(bigger.get(b).t for b in known)
    # judge the bigger store first so no verdict is shared through a cache
    for b in reversed(ids[1:]):
        assert bigger.is_valid(bigger.get(b), horizon, strict) == store.is_valid(store.get(b), horizon, strict)


def recursive_validity_matches_a_forward_pass(drawn, seed, p, data):
    store, protocol, ids = drawn
    strict = make_oracle(p, seed=seed)
    # a forged block and a child on top of it put an invalid block on some chains
    A = data.draw(st.sampled_from(ids))
    c = data.draw(st.sampled_from(store.coins))
    forged = Block.create(A, store.owner_at(A, c), store.get(A).t + 1, c, aux=b"\x00" * 32)
    store.add(forged)
    child = protocol.mine(store, forged.id, c, forged.t + 1, store.owner_at(forged.id, c))
    store.add(child)
    ids = ids + [forged.id, child.id]
    horizon = max(store.get(b).t for b in ids)
    for spec in (protocol, strict):
        for b in data.draw(st.permutations(ids[1:])):
            ok = all(store.check_block(store.get(x), spec) for x in store.path(b)[1:])
            assert store.is_valid(store.get(b), horizon, spec) == ok
    assert not store.is_valid(child, horizon, protocol)


test_store_laws = QUICK(given(random_stores())(store_laws))
test_chain_dependence_and_monotonicity = QUICK(given(random_stores(max_blocks=40), st.integers(0, 10 ** 6),
                                                     st.floats(0.05, 0.95))(chain_dependence_and_monotonicity))
test_mining_and_validation_agree = QUICK(given(random_stores(max_blocks=30), st.integers(0, 10 ** 6), st.floats(0.05, 0.95),
                                               st.data())(mining_and_validation_agree))
test_superset_verdicts_agree = QUICK(given(random_stores(max_blocks=40), st.integers(0, 10 ** 6), st.floats(0.05, 0.95),
                                           st.data())(superset_verdicts_agree))
test_recursive_validity_matches_a_forward_pass = QUICK(given(random_stores(max_blocks=40), st.integers(0, 10 ** 6),
                                                             st.floats(0.05, 0.95), st.data())(recursive_validity_matches_a_forward_pass))

test_store_laws_thorough = pytest.mark.slow(THOROUGH(given(random_stores())(store_laws)))
test_chain_dependence_thorough = pytest.mark.slow(THOROUGH(given(random_stores(max_blocks=40), st.integers(0, 10 ** 6),
                                                                 st.floats(0.05, 0.95))(chain_dependence_and_monotonicity)))
test_mining_and_validation_thorough = pytest.mark.slow(THOROUGH(given(random_stores(max_blocks=30), st.integers(0, 10 ** 6),
                                                                      st.floats(0.05, 0.95), st.data())(mining_and_validation_agree)))
test_superset_verdicts_thorough = pytest.mark.slow(THOROUGH(given(random_stores(max_blocks=40), st.integers(0, 10 ** 6),
                                                                  st.floats(0.05, 0.95), st.data())(superset_verdicts_agree)))
test_recursive_validity_thorough = pytest.mark.slow(THOROUGH(given(random_stores(max_blocks=40), st.integers(0, 10 ** 6),
                                                                   st.floats(0.05, 0.95), st.data())(recursive_validity_matches_a_forward_pass)))
