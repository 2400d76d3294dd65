"""Contract-network data model.

A network is a directed multigraph: vertices are agents, edges are bilateral
contracts pointing from seller to buyer.  Everything downstream of this module
treats contracts by their string id; the network object owns the id ->
endpoint lookup and the graph utilities (trails, chains, circuits, terminal
agents, acyclicity).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import NetworkValidationError

NETWORK_FIELDS = {"agents", "contracts"}
CONTRACT_FIELDS = {"id", "seller", "buyer", "label"}
CONTRACT_REQUIRED = {"id", "seller", "buyer"}


@dataclass(frozen=True)
class Contract:
    id: str
    seller: str
    buyer: str
    label: str | None = None

    def to_json(self) -> dict:
        out = {"id": self.id, "seller": self.seller, "buyer": self.buyer}
        if self.label is not None:
            out["label"] = self.label
        return out


@dataclass(frozen=True)
class Trail:
    """A sequence of distinct contracts where each buyer sells the next one."""

    contracts: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.contracts)

    def agents(self, net: "ContractNetwork") -> tuple[str, ...]:
        """Agent walk visited by the trail: seller of the first contract,
        then the buyer of each contract in turn (length + 1 entries)."""
        first = net.contract(self.contracts[0])
        return (first.seller,) + tuple(net.contract(c).buyer for c in self.contracts)

    def is_chain(self, net: "ContractNetwork") -> bool:
        walk = self.agents(net)
        return len(set(walk)) == len(walk)

    def is_circuit(self, net: "ContractNetwork") -> bool:
        first = net.contract(self.contracts[0])
        last = net.contract(self.contracts[-1])
        return last.buyer == first.seller

    def validate(self, net: "ContractNetwork") -> None:
        if not self.contracts:
            raise NetworkValidationError(["trail is empty"])
        if len(set(self.contracts)) != len(self.contracts):
            raise NetworkValidationError(["trail repeats a contract"])
        for cid in self.contracts:
            if cid not in net.contracts_by_id:
                raise NetworkValidationError([f"trail uses unknown contract {cid!r}"])
        for a, b in zip(self.contracts, self.contracts[1:]):
            if net.contract(a).buyer != net.contract(b).seller:
                raise NetworkValidationError(
                    [f"consecutive contracts {a!r}, {b!r} do not share an agent"]
                )


@dataclass(frozen=True)
class TerminalPartition:
    """Agents that only sell (terminal sellers) or only buy (terminal buyers).

    Isolated agents (no contracts at all) are deliberately placed in both
    sets: they vacuously satisfy every condition stated over terminal agents,
    and keeping them in the partition keeps comparisons total.
    """

    terminal_sellers: frozenset[str]
    terminal_buyers: frozenset[str]

    @property
    def terminal_agents(self) -> frozenset[str]:
        return self.terminal_sellers | self.terminal_buyers


@dataclass(frozen=True)
class ContractNetwork:
    agents: tuple[str, ...]
    contracts: tuple[Contract, ...]

    @cached_property
    def contracts_by_id(self) -> dict[str, Contract]:
        return {c.id: c for c in self.contracts}

    @cached_property
    def contract_ids(self) -> frozenset[str]:
        return frozenset(self.contracts_by_id)

    @cached_property
    def upstream(self) -> dict[str, frozenset[str]]:
        """Per agent, the contracts it buys."""
        out: dict[str, set[str]] = {a: set() for a in self.agents}
        for c in self.contracts:
            out[c.buyer].add(c.id)
        return {a: frozenset(s) for a, s in out.items()}

    @cached_property
    def downstream(self) -> dict[str, frozenset[str]]:
        """Per agent, the contracts it sells."""
        out: dict[str, set[str]] = {a: set() for a in self.agents}
        for c in self.contracts:
            out[c.seller].add(c.id)
        return {a: frozenset(s) for a, s in out.items()}

    def contract(self, cid: str) -> Contract:
        return self.contracts_by_id[cid]

    def contracts_of(self, agent: str) -> frozenset[str]:
        return self.upstream[agent] | self.downstream[agent]

    def agents_of(self, contract_set) -> frozenset[str]:
        """All agents involved in a set of contract ids."""
        out = set()
        for cid in contract_set:
            c = self.contract(cid)
            out.add(c.seller)
            out.add(c.buyer)
        return frozenset(out)

    def restricted_to(self, keep_agents, keep_contracts) -> "ContractNetwork":
        keep_agents = set(keep_agents)
        keep_contracts = set(keep_contracts)
        return validate_network(
            {
                "agents": [a for a in self.agents if a in keep_agents],
                "contracts": [
                    c.to_json() for c in self.contracts if c.id in keep_contracts
                ],
            }
        )

    def terminal_partition(self) -> TerminalPartition:
        sellers = frozenset(a for a in self.agents if not self.upstream[a])
        buyers = frozenset(a for a in self.agents if not self.downstream[a])
        return TerminalPartition(sellers, buyers)

    def is_acyclic(self) -> bool:
        """True when the agent digraph induced by contracts has no directed cycle."""
        succ: dict[str, set[str]] = {a: set() for a in self.agents}
        for c in self.contracts:
            succ[c.seller].add(c.buyer)
        WHITE, GREY, BLACK = 0, 1, 2
        color = {a: WHITE for a in self.agents}

        for root in self.agents:
            if color[root] != WHITE:
                continue
            stack = [(root, iter(sorted(succ[root])))]
            color[root] = GREY
            while stack:
                node, it = stack[-1]
                advanced = False
                for nxt in it:
                    if color[nxt] == GREY:
                        return False
                    if color[nxt] == WHITE:
                        color[nxt] = GREY
                        stack.append((nxt, iter(sorted(succ[nxt]))))
                        advanced = True
                        break
                if not advanced:
                    color[node] = BLACK
                    stack.pop()
        return True

    def trails(self, max_len: int | None = None) -> list[Trail]:
        """Every trail of length <= max_len, lexicographic by id sequence.

        max_len defaults to the number of contracts, which is an upper bound
        on any trail since contracts cannot repeat.
        """
        if max_len is None:
            max_len = len(self.contracts)
        if max_len < 1:
            raise ValueError("max_len must be at least 1")
        by_seller: dict[str, list[str]] = {a: [] for a in self.agents}
        for c in self.contracts:
            by_seller[c.seller].append(c.id)
        for lst in by_seller.values():
            lst.sort()

        out: list[Trail] = []
        path: list[str] = []
        used: set[str] = set()

        def grow(agent: str) -> None:
            for cid in by_seller[agent]:
                if cid in used:
                    continue
                path.append(cid)
                used.add(cid)
                out.append(Trail(tuple(path)))
                if len(path) < max_len:
                    grow(self.contract(cid).buyer)
                used.remove(cid)
                path.pop()

        for cid in sorted(self.contracts_by_id):
            path.append(cid)
            used.add(cid)
            out.append(Trail((cid,)))
            if max_len > 1:
                grow(self.contract(cid).buyer)
            used.remove(cid)
            path.pop()
        return out

    def to_json(self) -> dict:
        return {
            "agents": list(self.agents),
            "contracts": [c.to_json() for c in self.contracts],
        }


def validate_network(raw: dict) -> ContractNetwork:
    """Build a ContractNetwork from a raw description, collecting every
    violation into a single error instead of stopping at the first."""
    issues: list[str] = []
    if not isinstance(raw, dict):
        raise NetworkValidationError(["network description must be an object"])
    unknown = set(raw) - NETWORK_FIELDS
    if unknown:
        issues.append(f"unknown network fields: {sorted(unknown)}")
    agents = raw.get("agents", [])
    contracts_raw = raw.get("contracts", [])
    if not isinstance(agents, list) or not all(isinstance(a, str) for a in agents):
        issues.append("agents must be a list of strings")
        agents = []
    if len(set(agents)) != len(agents):
        issues.append("duplicate agent id")
    for a in agents:
        if not a:
            issues.append("empty agent id")

    contracts: list[Contract] = []
    seen_ids: set[str] = set()
    agent_set = set(agents)
    if not isinstance(contracts_raw, list):
        issues.append("contracts must be a list")
        contracts_raw = []
    for item in contracts_raw:
        if not isinstance(item, dict):
            issues.append("contract entries must be objects")
            continue
        unknown = set(item) - CONTRACT_FIELDS
        if unknown:
            issues.append(f"unknown contract fields: {sorted(unknown)}")
        missing = CONTRACT_REQUIRED - set(item)
        if missing:
            issues.append(f"contract missing fields: {sorted(missing)}")
            continue
        cid, seller, buyer = item["id"], item["seller"], item["buyer"]
        if not all(isinstance(v, str) and v for v in (cid, seller, buyer)):
            issues.append(f"contract {cid!r}: id, seller, buyer must be nonempty strings")
            continue
        if cid in seen_ids:
            issues.append(f"duplicate contract id {cid!r}")
        seen_ids.add(cid)
        if seller == buyer:
            issues.append(f"contract {cid!r} is a self-loop on agent {seller!r}")
        if seller not in agent_set:
            issues.append(f"contract {cid!r} references unknown seller {seller!r}")
        if buyer not in agent_set:
            issues.append(f"contract {cid!r} references unknown buyer {buyer!r}")
        contracts.append(Contract(cid, seller, buyer, item.get("label")))

    if issues:
        raise NetworkValidationError(issues)
    return ContractNetwork(tuple(agents), tuple(contracts))


def sorted_ids(contract_set) -> list[str]:
    """Canonical list form used whenever a contract set leaves the library."""
    return sorted(contract_set)
