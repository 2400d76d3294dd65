from __future__ import annotations

import pytest

from tradenet.errors import NetworkValidationError
from tradenet.network import Trail, validate_network
from tradenet.oracle import generate_instance


def test_ring4_validates(ring4):
    assert len(ring4.agents) == 4
    assert len(ring4.contracts) == 4
    assert ring4.upstream["j"] == {"y", "w"}
    assert ring4.downstream["j"] == {"x", "z"}


def test_empty_contract_list_is_valid():
    net = validate_network({"agents": ["solo"], "contracts": []})
    assert net.contract_ids == frozenset()
    assert net.is_acyclic()


def test_self_loop_rejected():
    with pytest.raises(NetworkValidationError, match="self-loop"):
        validate_network(
            {"agents": ["j"], "contracts": [{"id": "c", "seller": "j", "buyer": "j"}]}
        )


def test_validation_collects_all_issues():
    try:
        validate_network(
            {
                "agents": ["a", "a"],
                "contracts": [
                    {"id": "c", "seller": "a", "buyer": "ghost"},
                    {"id": "c", "seller": "a", "buyer": "a"},
                ],
                "extra": 1,
            }
        )
    except NetworkValidationError as err:
        text = " ".join(err.issues)
        for needle in ("duplicate agent", "unknown network fields", "duplicate contract",
                       "self-loop", "unknown buyer"):
            assert needle in text, text
    else:
        pytest.fail("expected validation to fail")


def test_unknown_contract_field_rejected():
    with pytest.raises(NetworkValidationError, match="unknown contract fields"):
        validate_network(
            {
                "agents": ["a", "b"],
                "contracts": [{"id": "c", "seller": "a", "buyer": "b", "weight": 3}],
            }
        )


def _trails_reference(net, max_len):
    """Independent recursive enumeration used as the oracle for trails()."""
    found = set()

    def extend(seq):
        found.add(seq)
        if len(seq) == max_len:
            return
        tail_buyer = net.contract(seq[-1]).buyer
        for c in net.contracts:
            if c.id not in seq and c.seller == tail_buyer:
                extend(seq + (c.id,))

    for c in net.contracts:
        extend((c.id,))
    return found


def test_ring4_trails_match_reference_and_count(ring4):
    got = ring4.trails(4)
    reference = _trails_reference(ring4, 4)
    assert {t.contracts for t in got} == reference
    assert len(got) == len(reference) == 12  # frozen from the reference enumeration
    assert ("w", "z", "y", "x") in {t.contracts for t in got}


def test_trails_are_valid_sorted_and_unique(ring4):
    got = ring4.trails()
    seqs = [t.contracts for t in got]
    assert len(set(seqs)) == len(seqs)
    assert seqs == sorted(seqs)
    for t in got:
        t.validate(ring4)


def test_single_contract_network_has_one_trail():
    net = validate_network(
        {"agents": ["a", "b"], "contracts": [{"id": "c", "seller": "a", "buyer": "b"}]}
    )
    assert [t.contracts for t in net.trails()] == [("c",)]


def test_max_len_truncates(ring4):
    assert all(len(t) <= 2 for t in ring4.trails(2))
    with pytest.raises(ValueError):
        ring4.trails(0)


def test_is_chain(ring4):
    assert Trail(("w", "z")).is_chain(ring4)  # agents m, j, k
    assert not Trail(("w", "z", "y", "x")).is_chain(ring4)  # j repeats
    for cid in "wxyz":
        assert Trail((cid,)).is_chain(ring4)


def test_is_circuit(ring4):
    assert Trail(("z", "y")).is_circuit(ring4)
    assert not Trail(("w",)).is_circuit(ring4)
    assert not Trail(("w", "z", "y", "x")).is_circuit(ring4)


def test_terminal_partition(ring4):
    part = ring4.terminal_partition()
    assert part.terminal_sellers == {"m"}
    assert part.terminal_buyers == {"i"}


def test_terminal_partition_single_contract():
    net = validate_network(
        {"agents": ["a", "b"], "contracts": [{"id": "c", "seller": "a", "buyer": "b"}]}
    )
    part = net.terminal_partition()
    assert part.terminal_sellers == {"a"}
    assert part.terminal_buyers == {"b"}


def test_isolated_agent_is_terminal_on_both_sides():
    net = validate_network(
        {
            "agents": ["a", "b", "idle"],
            "contracts": [{"id": "c", "seller": "a", "buyer": "b"}],
        }
    )
    part = net.terminal_partition()
    assert "idle" in part.terminal_sellers
    assert "idle" in part.terminal_buyers


def test_terminal_membership_matches_empty_upstream(ring4):
    part = ring4.terminal_partition()
    for agent in ring4.agents:
        assert (agent in part.terminal_sellers) == (not ring4.upstream[agent])
        assert (agent in part.terminal_buyers) == (not ring4.downstream[agent])


def test_acyclicity():
    chain = validate_network(
        {
            "agents": ["p1", "p2", "m1", "m2", "c1", "c2"],
            "contracts": [
                {"id": "a", "seller": "p1", "buyer": "m1"},
                {"id": "b", "seller": "p2", "buyer": "m1"},
                {"id": "c", "seller": "p2", "buyer": "m2"},
                {"id": "d", "seller": "m1", "buyer": "c1"},
                {"id": "e", "seller": "m2", "buyer": "c2"},
                {"id": "f", "seller": "p2", "buyer": "c1"},
            ],
        }
    )
    assert chain.is_acyclic()


def test_ring4_is_cyclic(ring4):
    assert not ring4.is_acyclic()


def test_acyclic_trails_are_chains():
    for seed in range(10):
        inst = generate_instance(seed, "acyclic").instance
        net = inst.network
        assert net.is_acyclic()
        for trail in net.trails():
            assert trail.is_chain(net)


def test_json_round_trip(ring4):
    assert validate_network(ring4.to_json()) == ring4
