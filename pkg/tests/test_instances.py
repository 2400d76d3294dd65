from __future__ import annotations

import pytest

from tradenet.errors import InstanceFormatError
from tradenet.instances import (
    BUNDLED,
    bundled_instance,
    bundled_json,
    instance_from_json,
)


def minimal_raw():
    return {
        "agents": ["a", "b"],
        "contracts": [{"id": "c", "seller": "a", "buyer": "b"}],
        "choice_functions": [
            {"agent": "a", "type": "quota", "order": ["c"], "quota": 1},
            {"agent": "b", "type": "quota", "order": ["c"], "quota": 1},
        ],
    }


def test_round_trip():
    raw = minimal_raw()
    inst = instance_from_json(raw)
    assert instance_from_json(inst.to_json()).to_json() == inst.to_json()


def test_missing_choice_functions():
    raw = minimal_raw()
    del raw["choice_functions"]
    with pytest.raises(InstanceFormatError, match="missing 'choice_functions'"):
        instance_from_json(raw)


def test_agent_without_choice_function():
    raw = minimal_raw()
    raw["choice_functions"] = raw["choice_functions"][:1]
    with pytest.raises(InstanceFormatError, match="without a choice function"):
        instance_from_json(raw)


def test_duplicate_choice_function():
    raw = minimal_raw()
    raw["choice_functions"].append(raw["choice_functions"][0])
    with pytest.raises(InstanceFormatError, match="two choice functions"):
        instance_from_json(raw)


def test_unknown_top_level_field():
    raw = minimal_raw()
    raw["notes"] = "hello"
    with pytest.raises(InstanceFormatError, match="unknown instance fields"):
        instance_from_json(raw)


def test_side_mismatch_rejected():
    from tradenet.choices import QuotaChoice
    from tradenet.instances import Instance
    from tradenet.network import validate_network

    net = validate_network(
        {"agents": ["a", "b"], "contracts": [{"id": "c", "seller": "a", "buyer": "b"}]}
    )
    wrong = {
        "a": QuotaChoice("a", {"c"}, frozenset(), ["c"], 1),  # c is a's sale, not buy
        "b": QuotaChoice("b", {"c"}, frozenset(), ["c"], 1),
    }
    with pytest.raises(InstanceFormatError, match="disagree with the network"):
        Instance(net, wrong)


def test_bundled_instances_load():
    assert BUNDLED == ("example1", "example2", "example3", "reduced")
    for name in BUNDLED:
        inst = bundled_instance(name)
        assert inst.network.contract_ids
        assert instance_from_json(inst.to_json()).to_json() == inst.to_json()
    with pytest.raises(InstanceFormatError, match="no bundled instance"):
        bundled_json("example9")
