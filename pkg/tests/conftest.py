from __future__ import annotations

import pytest

from tradenet.instances import bundled_instance
from tradenet.network import validate_network


@pytest.fixture(scope="session")
def ring4():
    """Four firms around a cycle: m sells w to j, j sells z to k, k sells y
    back to j, j sells x to i."""
    return validate_network(
        {
            "agents": ["i", "j", "k", "m"],
            "contracts": [
                {"id": "x", "seller": "j", "buyer": "i"},
                {"id": "y", "seller": "k", "buyer": "j"},
                {"id": "z", "seller": "j", "buyer": "k"},
                {"id": "w", "seller": "m", "buyer": "j"},
            ],
        }
    )


@pytest.fixture(scope="session")
def example1():
    return bundled_instance("example1")


@pytest.fixture(scope="session")
def example2():
    return bundled_instance("example2")


@pytest.fixture(scope="session")
def example3():
    return bundled_instance("example3")


@pytest.fixture(scope="session")
def reduced():
    return bundled_instance("reduced")


def outcomes_as_sets(outcomes):
    return [sorted(o) for o in outcomes]
