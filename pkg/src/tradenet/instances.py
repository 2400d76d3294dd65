"""Instances bundle a validated network with one choice function per agent.

Also home to the JSON file format (network + choice-function array, plus the
priced extension handled by the equilibrium module) and the bundled example
instances used across the docs and the test suite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .choices import ChoiceFunction, build_family
from .errors import InstanceFormatError
from .network import ContractNetwork, validate_network

INSTANCE_FIELDS = {"agents", "contracts", "choice_functions"}


@dataclass(frozen=True)
class Instance:
    network: ContractNetwork
    choice: dict[str, ChoiceFunction]

    def __post_init__(self):
        missing = set(self.network.agents) - set(self.choice)
        if missing:
            raise InstanceFormatError(f"agents without a choice function: {sorted(missing)}")
        extra = set(self.choice) - set(self.network.agents)
        if extra:
            raise InstanceFormatError(f"choice functions for unknown agents: {sorted(extra)}")
        for agent, cf in self.choice.items():
            if cf.agent != agent:
                raise InstanceFormatError(f"choice function for {cf.agent!r} filed under {agent!r}")
            if cf.upstream != self.network.upstream[agent] or (
                cf.downstream != self.network.downstream[agent]
            ):
                raise InstanceFormatError(
                    f"{agent}: choice function sides disagree with the network"
                )

    @property
    def contract_ids(self) -> frozenset[str]:
        return self.network.contract_ids

    def rejected_by_buyers(self, available_up, available_down) -> frozenset[str]:
        out: set[str] = set()
        for cf in self.choice.values():
            out |= cf.rejected_upstream(available_up, available_down)
        return frozenset(out)

    def rejected_by_sellers(self, available_down, available_up) -> frozenset[str]:
        out: set[str] = set()
        for cf in self.choice.values():
            out |= cf.rejected_downstream(available_down, available_up)
        return frozenset(out)

    def to_json(self) -> dict:
        out = self.network.to_json()
        out["choice_functions"] = [
            self.choice[a].to_json() for a in self.network.agents
        ]
        return out


def instance_from_json(raw: dict) -> Instance:
    if not isinstance(raw, dict):
        raise InstanceFormatError("instance description must be an object")
    unknown = set(raw) - INSTANCE_FIELDS
    if unknown:
        raise InstanceFormatError(f"unknown instance fields: {sorted(unknown)}")
    if "choice_functions" not in raw:
        raise InstanceFormatError("instance is missing 'choice_functions'")
    net = validate_network({k: raw[k] for k in ("agents", "contracts") if k in raw})
    descs = raw["choice_functions"]
    if not isinstance(descs, list):
        raise InstanceFormatError("'choice_functions' must be a list")
    choice: dict[str, ChoiceFunction] = {}
    for desc in descs:
        cf = build_family(net, desc)
        if cf.agent in choice:
            raise InstanceFormatError(f"two choice functions for agent {cf.agent!r}")
        choice[cf.agent] = cf
    return Instance(net, choice)


def load_instance(path) -> Instance:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceFormatError(f"cannot read instance file {path}: {exc}") from exc
    return instance_from_json(raw)


BUNDLED = ("example1", "example2", "example3", "reduced")


def bundled_json(name: str) -> dict:
    if name not in BUNDLED:
        raise InstanceFormatError(f"no bundled instance named {name!r}")
    text = resources.files("tradenet").joinpath(f"data/{name}.json").read_text("utf-8")
    return json.loads(text)


def bundled_instance(name: str) -> Instance:
    return instance_from_json(bundled_json(name))


def write_examples(directory) -> list[str]:
    """Materialize the bundled instance files into a directory."""
    import os

    os.makedirs(directory, exist_ok=True)
    written = []
    for name in BUNDLED:
        path = os.path.join(directory, f"{name}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(bundled_json(name), fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
    return written
