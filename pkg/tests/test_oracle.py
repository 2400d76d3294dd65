from __future__ import annotations

import itertools

import pytest

from tradenet.axioms import check_full_substitutability, check_irc
from tradenet.errors import GuardExceededError
from tradenet.oracle import (
    brute_force_stable,
    gadget_not_set_stable,
    generate_instance,
    needle_family,
    partition_to_gs,
    solve_partition,
)
from tradenet.stability import find_blocking_set


def split_evenly_reference(weights) -> bool:
    """Independent oracle: try every subset directly."""
    total = sum(weights)
    if total % 2:
        return False
    for r in range(len(weights) + 1):
        for combo in itertools.combinations(range(len(weights)), r):
            if 2 * sum(weights[i] for i in combo) == total:
                return True
    return False


def test_solver_against_subset_enumeration():
    for k in range(1, 5):
        for weights in itertools.combinations_with_replacement(range(1, 7), k):
            assert solve_partition(weights) == split_evenly_reference(weights), weights


def test_gadget_choice_functions_pass_axioms():
    for weights in ((1, 1), (1, 2), (1, 2, 3), (2, 2, 3, 5)):
        inst = partition_to_gs(weights).instance
        for cf in inst.choice.values():
            assert check_full_substitutability(cf).holds, weights
            assert check_irc(cf).holds, weights


def test_even_split_creates_block():
    gadget = partition_to_gs((1, 1))
    verdict = find_blocking_set(gadget.instance, gadget.outcome)
    assert not verdict.stable
    assert verdict.witness.contracts == ("x1", "y")


def test_no_split_no_block():
    gadget = partition_to_gs((1, 2))
    assert find_blocking_set(gadget.instance, gadget.outcome).stable


def test_three_one_split():
    assert gadget_not_set_stable((1, 1, 1, 3))
    assert solve_partition((1, 1, 1, 3))


def test_odd_total_flagged_and_unsolvable():
    gadget = partition_to_gs((1, 2, 4))
    assert gadget.half_integral
    assert not solve_partition((1, 2, 4))
    assert not gadget_not_set_stable((1, 2, 4))


def test_reduction_agrees_with_solver_small_sweep():
    for k in range(1, 6):
        for weights in itertools.combinations_with_replacement(range(1, 7), k):
            assert gadget_not_set_stable(weights) == solve_partition(weights), weights


def test_weights_must_be_sorted_and_positive():
    with pytest.raises(ValueError):
        partition_to_gs((2, 1))
    with pytest.raises(ValueError):
        solve_partition((0, 1))
    with pytest.raises(ValueError):
        solve_partition(())


def test_needle_with_hidden_subset():
    inst = needle_family(2, hidden=[1, 3])
    verdict = find_blocking_set(inst, frozenset())
    assert not verdict.stable
    assert verdict.witness.contracts == ("x1", "x3", "y")


def test_needle_without_hidden_subset():
    inst = needle_family(2)
    assert find_blocking_set(inst, frozenset()).stable


def test_needle_rejects_wrong_hidden_size():
    from tradenet.errors import ChoiceFunctionError

    with pytest.raises(ChoiceFunctionError):
        needle_family(2, hidden=[1])


def test_needle_query_counter_grows_with_n():
    from math import comb

    counts = []
    for n in (1, 2, 3):
        inst = needle_family(n)
        assert find_blocking_set(inst, frozenset()).stable
        counts.append(inst.choice["f"].query_count)
        # deciding stability must at least separate all n-subsets
        assert counts[-1] >= comb(2 * n, n)
    assert counts == sorted(counts)
    assert counts[0] < counts[-1]


def test_generation_is_deterministic():
    a = generate_instance(11, "fsirc")
    b = generate_instance(11, "fsirc")
    assert a.instance.to_json() == b.instance.to_json()
    assert a.certificates == b.certificates
    c = generate_instance(12, "fsirc")
    assert c.instance.to_json() != a.instance.to_json()


def test_generation_certificates_are_real():
    from tradenet.axioms import check_instance, check_simplicity

    gen = generate_instance(3, "simple")
    assert "simplicity" in gen.certificates
    for agent in gen.instance.network.agents:
        cf = gen.instance.choice[agent]
        assert check_simplicity(cf, gen.intensities[agent]).holds
    reports = check_instance(gen.instance, ("full_substitutability", "irc"))
    assert all(r.holds for r in reports)


def test_generation_unknown_profile():
    with pytest.raises(ValueError):
        generate_instance(0, "mystery")


def test_brute_force_guard():
    from tradenet.instances import instance_from_json

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
        brute_force_stable(inst, "set")


def test_parallel_scan_matches_sequential(example1):
    for notion in ("trail", "set"):
        assert brute_force_stable(example1, notion, jobs=2) == brute_force_stable(
            example1, notion
        )
