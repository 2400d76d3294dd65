from __future__ import annotations

import itertools
import random

import pytest

from tradenet.errors import GuardExceededError, PreconditionError
from tradenet.fixedpoint import (
    OfferPair,
    buyer_optimal,
    canonical_pair,
    compare_terminal_superiority,
    enumerate_fixed_points,
    fixed_point_outcomes,
    iterate_from,
    pair_join,
    pair_leq,
    pair_meet,
    respond,
    seller_optimal,
    terminal_lattice,
    top_pair,
)
from tradenet.instances import instance_from_json
from tradenet.oracle import brute_force_stable, generate_instance


def test_respond_from_top_keeps_buyer_side_full(example1):
    start = top_pair(example1)
    after = respond(example1, start)
    assert after.buyer_side == example1.contract_ids  # nothing offered to sellers yet


def test_example1_iteration_reaches_the_singleton(example1):
    run = buyer_optimal(example1)
    assert run.outcome == {"w"}
    assert respond(example1, run.pair) == run.pair
    assert seller_optimal(example1).outcome == {"w"}


def test_trace_is_monotone(example1):
    run = buyer_optimal(example1)
    for a, b in zip(run.trace, run.trace[1:]):
        assert pair_leq(b, a)  # descending from the top
    run = seller_optimal(example1)
    for a, b in zip(run.trace, run.trace[1:]):
        assert pair_leq(a, b)


def test_example2_unique_optimum(example2):
    assert buyer_optimal(example2).outcome == {"z", "y"}
    assert seller_optimal(example2).outcome == {"z", "y"}


def test_example3_unique_optimum(example3):
    assert buyer_optimal(example3).outcome == {"w", "x", "y", "z"}
    assert seller_optimal(example3).outcome == {"w", "x", "y", "z"}


def test_empty_network_fixed_immediately():
    inst = instance_from_json(
        {
            "agents": ["a"],
            "contracts": [],
            "choice_functions": [{"agent": "a", "type": "quota", "order": [], "quota": 1}],
        }
    )
    run = buyer_optimal(inst)
    assert run.outcome == frozenset()
    assert run.iterations == 0


def test_incomparable_start_rejected(example1):
    with pytest.raises(PreconditionError, match="not comparable"):
        iterate_from(example1, OfferPair(frozenset(), frozenset()))


def test_comparable_warm_start_converges(example1):
    # a mid-lattice pair comparable with its response is a legal start
    warm = OfferPair(example1.contract_ids, frozenset({"w", "x"}))
    run = iterate_from(example1, warm)
    assert run.outcome == {"w"}
    assert respond(example1, run.pair) == run.pair


def test_single_contract_both_accept():
    inst = instance_from_json(
        {
            "agents": ["a", "b"],
            "contracts": [{"id": "c", "seller": "a", "buyer": "b"}],
            "choice_functions": [
                {"agent": "a", "type": "quota", "order": ["c"], "quota": 1},
                {"agent": "b", "type": "quota", "order": ["c"], "quota": 1},
            ],
        }
    )
    assert buyer_optimal(inst).outcome == {"c"}
    assert seller_optimal(inst).outcome == {"c"}


def test_non_substitutable_choices_are_diagnosed():
    from tradenet.errors import IterationDiagnosisError

    # the buyer wants the two inputs only as a package; once one seller
    # withdraws, the buyer un-rejects nothing and re-rejects the survivor,
    # which knocks the response off the monotone path
    inst = instance_from_json(
        {
            "agents": ["s1", "s2", "b"],
            "contracts": [
                {"id": "c1", "seller": "s1", "buyer": "b"},
                {"id": "c2", "seller": "s2", "buyer": "b"},
            ],
            "choice_functions": [
                {"agent": "s1", "type": "quota", "order": [], "quota": 1},
                {"agent": "s2", "type": "quota", "order": ["c2"], "quota": 1},
                {"agent": "b", "type": "preference_list", "ranking": [["c1", "c2"]]},
            ],
        }
    )
    with pytest.raises(IterationDiagnosisError):
        buyer_optimal(inst)


def test_enumeration_pruning_matches_full_pair_scan(reduced, example1):
    # independent oracle over all 4^|X| offer pairs validates the cover-based
    # 3^|X| scan
    for inst in (reduced, example1):
        ids = sorted(inst.contract_ids)
        full_scan = set()
        for b_mask in range(1 << len(ids)):
            buyer = frozenset(c for i, c in enumerate(ids) if b_mask >> i & 1)
            for s_mask in range(1 << len(ids)):
                seller = frozenset(c for i, c in enumerate(ids) if s_mask >> i & 1)
                pair = OfferPair(buyer, seller)
                if respond(inst, pair) == pair:
                    full_scan.add(pair)
        assert {r.pair for r in enumerate_fixed_points(inst)} == full_scan


def test_enumeration_covers_contracts_and_contains_optima(example1):
    results = enumerate_fixed_points(example1)
    assert results
    outcomes = {r.outcome for r in results}
    assert frozenset({"w"}) in outcomes
    for r in results:
        assert r.pair.buyer_side | r.pair.seller_side == example1.contract_ids
        assert respond(example1, r.pair) == r.pair
    assert buyer_optimal(example1).pair in {r.pair for r in results}


def test_enumeration_guard():
    contracts = [{"id": f"c{i:02d}", "seller": "a", "buyer": "b"} for i in range(13)]
    inst = instance_from_json(
        {
            "agents": ["a", "b"],
            "contracts": contracts,
            "choice_functions": [
                {"agent": "a", "type": "quota", "order": [], "quota": 1},
                {"agent": "b", "type": "quota", "order": [], "quota": 1},
            ],
        }
    )
    with pytest.raises(GuardExceededError):
        enumerate_fixed_points(inst)


def test_all_rejecting_instance_has_empty_outcome():
    inst = instance_from_json(
        {
            "agents": ["a", "b"],
            "contracts": [{"id": "c", "seller": "a", "buyer": "b"}],
            "choice_functions": [
                {"agent": "a", "type": "quota", "order": [], "quota": 1},
                {"agent": "b", "type": "quota", "order": [], "quota": 1},
            ],
        }
    )
    assert frozenset() in set(fixed_point_outcomes(inst))


def test_engine_agrees_with_brute_force(example1, example2, example3, reduced):
    for inst in (example1, example2, example3, reduced):
        assert fixed_point_outcomes(inst) == brute_force_stable(inst, "full_trail")


def test_isotone_on_sampled_comparable_pairs(example2):
    rng = random.Random(7)
    ids = sorted(example2.contract_ids)
    for _ in range(200):
        small_b = frozenset(c for c in ids if rng.random() < 0.4)
        big_b = small_b | frozenset(c for c in ids if rng.random() < 0.4)
        big_s = frozenset(c for c in ids if rng.random() < 0.4)
        small_s = big_s | frozenset(c for c in ids if rng.random() < 0.4)
        low = OfferPair(small_b, small_s)
        high = OfferPair(big_b, big_s)
        assert pair_leq(low, high)
        assert pair_leq(respond(example2, low), respond(example2, high))


def test_canonical_pair_round_trip(example2, reduced):
    pair = canonical_pair(example2, {"z", "y"})
    assert respond(example2, pair) == pair
    assert pair.outcome == {"z", "y"}

    # nothing is kept by its seller next to the empty outcome here
    pair = canonical_pair(reduced, frozenset())
    assert pair == OfferPair(frozenset(), reduced.contract_ids)
    assert respond(reduced, pair) == pair


def test_canonical_pair_requires_full_trail_stability(example2):
    with pytest.raises(PreconditionError, match="locally blocking"):
        canonical_pair(example2, frozenset())  # blocked by the circuit trail
    with pytest.raises(PreconditionError, match="acceptable"):
        canonical_pair(example2, {"x"})


def test_canonical_pair_round_trip_on_generated_instances():
    for seed in range(12):
        inst = generate_instance(seed, "fsirc").instance
        for res in enumerate_fixed_points(inst):
            again = canonical_pair(inst, res.outcome, check=False)
            assert respond(inst, again) == again
            assert again.outcome == res.outcome


def test_fixed_points_closed_under_join_and_meet():
    found_multiple = 0
    for seed in range(30):
        inst = generate_instance(seed, "ladlas").instance
        pairs = [r.pair for r in enumerate_fixed_points(inst)]
        if len(pairs) > 1:
            found_multiple += 1
        as_set = set(pairs)
        for p, q in itertools.combinations(pairs, 2):
            assert pair_join(p, q) in as_set
            assert pair_meet(p, q) in as_set
    assert found_multiple >= 3  # the closure must actually bite somewhere


def test_superiority_reflexive_and_terminal_blind(example2):
    assert compare_terminal_superiority(example2, {"z", "y"}, {"z", "y"}).relation == "equal"
    # terminal agents hold nothing in either outcome, so the two compare equal
    assert compare_terminal_superiority(example2, {"z", "y"}, frozenset()).relation == "equal"


def test_superiority_requires_terminal_rationality():
    inst = instance_from_json(
        {
            "agents": ["a", "b"],
            "contracts": [{"id": "c", "seller": "a", "buyer": "b"}],
            "choice_functions": [
                {"agent": "a", "type": "quota", "order": ["c"], "quota": 1},
                {"agent": "b", "type": "quota", "order": [], "quota": 1},
            ],
        }
    )
    # terminal buyer b turns c down, so {c} cannot enter the comparison
    with pytest.raises(PreconditionError, match="individually rational"):
        compare_terminal_superiority(inst, {"c"}, frozenset())


def test_optima_are_superiority_extremes_on_generated_instances():
    for seed in range(40):
        inst = generate_instance(seed, "ladlas").instance
        outcomes = fixed_point_outcomes(inst)
        best = buyer_optimal(inst).outcome
        worst = seller_optimal(inst).outcome
        for other in outcomes:
            assert compare_terminal_superiority(inst, best, other).relation in (
                "buyer_superior",
                "equal",
            )
            assert compare_terminal_superiority(inst, worst, other).relation in (
                "seller_superior",
                "equal",
            )


@pytest.fixture(scope="module")
def crossed_market():
    """Two sellers, two buyers, unit quotas, crossed rankings: the classic
    configuration with distinct side-optimal outcomes."""
    return instance_from_json(
        {
            "agents": ["b1", "b2", "s1", "s2"],
            "contracts": [
                {"id": "c11", "seller": "s1", "buyer": "b1"},
                {"id": "c12", "seller": "s1", "buyer": "b2"},
                {"id": "c21", "seller": "s2", "buyer": "b1"},
                {"id": "c22", "seller": "s2", "buyer": "b2"},
            ],
            "choice_functions": [
                {"agent": "s1", "type": "quota", "order": ["c11", "c12"], "quota": 1},
                {"agent": "s2", "type": "quota", "order": ["c22", "c21"], "quota": 1},
                {"agent": "b1", "type": "quota", "order": ["c21", "c11"], "quota": 1},
                {"agent": "b2", "type": "quota", "order": ["c12", "c22"], "quota": 1},
            ],
        }
    )


def test_crossed_market_strict_superiority(crossed_market):
    best = buyer_optimal(crossed_market).outcome
    worst = seller_optimal(crossed_market).outcome
    assert best == {"c21", "c12"}
    assert worst == {"c11", "c22"}
    assert compare_terminal_superiority(crossed_market, best, worst).relation == "buyer_superior"
    assert compare_terminal_superiority(crossed_market, worst, best).relation == "seller_superior"
    for other in fixed_point_outcomes(crossed_market):
        assert compare_terminal_superiority(crossed_market, best, other).relation in (
            "buyer_superior",
            "equal",
        )


def test_superiority_is_a_partial_order_on_stable_outcomes():
    for seed in range(25):
        inst = generate_instance(seed, "ladlas").instance
        outcomes = fixed_point_outcomes(inst)

        def seller_weakly_above(a, b):
            return compare_terminal_superiority(inst, a, b).relation in (
                "seller_superior",
                "equal",
            )

        for a in outcomes:
            assert compare_terminal_superiority(inst, a, a).relation == "equal"
            for b in outcomes:
                if seller_weakly_above(a, b) and seller_weakly_above(b, a):
                    assert compare_terminal_superiority(inst, a, b).relation == "equal"
                for c in outcomes:
                    if seller_weakly_above(a, b) and seller_weakly_above(b, c):
                        assert seller_weakly_above(a, c), (seed, a, b, c)


def test_terminal_lattice_unique_outcome_is_one_element(example1, example2, example3):
    for inst in (example1, example2, example3):
        lattice = terminal_lattice(inst, validate=False)
        assert len(lattice.elements) == 1
        assert lattice.joins == {(0, 0): 0}


def test_terminal_lattice_elements_match_terminal_outcomes():
    for seed in range(40):
        inst = generate_instance(seed, "ladlas").instance
        part = inst.network.terminal_partition()
        terminal_contracts = frozenset(
            c for a in part.terminal_agents for c in inst.choice[a].domain
        )
        lat = terminal_lattice(inst, validate=False)
        expected = {o & terminal_contracts for o in fixed_point_outcomes(inst)}
        assert set(lat.outcomes) == expected
        assert len(lat.elements) == len(expected)


def _assert_lattice_axioms(lat):
    n = len(lat.elements)
    for i in range(n):
        assert lat.joins[(i, i)] == i
        assert lat.meets[(i, i)] == i
        for j in range(n):
            assert lat.joins[(i, j)] == lat.joins[(j, i)]
            assert lat.meets[(i, j)] == lat.meets[(j, i)]
            # absorption ties join and meet together
            assert lat.joins[(i, lat.meets[(i, j)])] == i
            assert lat.meets[(i, lat.joins[(i, j)])] == i


def test_terminal_lattice_axioms_on_generated_instances():
    checked = 0
    for seed in range(80):
        inst = generate_instance(seed, "ladlas").instance
        lat = terminal_lattice(inst, validate=False)
        if len(lat.elements) > 1:
            checked += 1
        _assert_lattice_axioms(lat)
    assert checked >= 2


def test_terminal_lattice_of_crossed_market(crossed_market):
    lat = terminal_lattice(crossed_market, validate=False)
    assert len(lat.elements) == len(fixed_point_outcomes(crossed_market))
    assert len(lat.elements) >= 2
    _assert_lattice_axioms(lat)


def test_terminal_lattice_precondition_reported():
    raw = {
        "agents": ["a", "b", "c"],
        "contracts": [
            {"id": "u", "seller": "a", "buyer": "b"},
            {"id": "d1", "seller": "b", "buyer": "c"},
            {"id": "d2", "seller": "b", "buyer": "c"},
        ],
        # sells two outputs only when the input arrives: violates the
        # aggregate laws while staying a valid choice function
        "choice_functions": [
            {"agent": "a", "type": "quota", "order": ["u"], "quota": 1},
            {"agent": "b", "type": "preference_list", "ranking": [["u", "d1", "d2"]]},
            {"agent": "c", "type": "quota", "order": ["d1", "d2"], "quota": 2},
        ],
    }
    inst = instance_from_json(raw)
    with pytest.raises(PreconditionError) as err:
        terminal_lattice(inst)
    assert any(not r.holds for r in err.value.reports)
