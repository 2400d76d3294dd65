"""Definition-level stability checkers and witness finders.

Every checker replays its notion's literal definition and, when the outcome
is unstable, reports the first witness in a deterministic order: shortest
blocking structures first, lexicographic by contract-id sequence within a
length.  Witnesses therefore double as minimal counterexamples and can be
replayed through the definitions to validate the verdict.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .choices import is_rational
from .errors import GuardExceededError, StabilityContradictionError
from .instances import Instance
from .network import sorted_ids

TRAIL_GUARD = 10**6
SET_GUARD = 20

NOTIONS = ("acceptable", "trail", "full_trail", "chain", "set", "strong_trail")


@dataclass(frozen=True)
class Witness:
    kind: str  # not_acceptable | trail | chain | set
    contracts: tuple[str, ...]
    agent: str | None = None
    option: str | None = None  # prefix | suffix (blocking trails only)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "contracts": list(self.contracts),
            "agent": self.agent,
            "option": self.option,
        }


@dataclass(frozen=True)
class StabilityVerdict:
    notion: str
    stable: bool
    witness: Witness | None = None

    def to_json(self) -> dict:
        return {
            "notion": self.notion,
            "stable": self.stable,
            "witness": self.witness.to_json() if self.witness else None,
        }


def _keeps_all(inst: Instance, agent: str, subset, alongside) -> bool:
    return is_rational(inst.choice[agent], subset, alongside)


def is_acceptable(inst: Instance, outcome) -> StabilityVerdict:
    """Every agent keeps all of its outcome contracts when offered just them."""
    outcome = frozenset(outcome)
    for agent in sorted(inst.network.agents):
        cf = inst.choice[agent]
        own = outcome & cf.domain
        if cf.choose(own) != own:
            return StabilityVerdict(
                "acceptable",
                False,
                Witness("not_acceptable", tuple(sorted_ids(own)), agent=agent),
            )
    return StabilityVerdict("acceptable", True)


def _unacceptable_short_circuit(inst, outcome, notion):
    base = is_acceptable(inst, outcome)
    if not base.stable:
        return StabilityVerdict(notion, False, base.witness)
    return None


class _Budget:
    __slots__ = ("left",)

    def __init__(self, limit: int = TRAIL_GUARD):
        self.left = limit

    def spend(self, n: int = 1) -> None:
        self.left -= n
        if self.left < 0:
            raise GuardExceededError(
                f"trail search exceeded the {TRAIL_GUARD} candidate guard"
            )


def _seller(inst, cid):
    return inst.network.contract(cid).seller


def _buyer(inst, cid):
    return inst.network.contract(cid).buyer


def _start_ok(inst, outcome, cid) -> bool:
    return _keeps_all(inst, _seller(inst, cid), {cid}, outcome)


def _end_ok(inst, outcome, cid) -> bool:
    return _keeps_all(inst, _buyer(inst, cid), {cid}, outcome)


def _grow_forward(inst, outcome, avail, trail, condition, budget):
    """Extensions of a left-to-right partial trail that keep `condition`
    satisfied at the new linking agent."""
    out = []
    last = trail[-1]
    link = _buyer(inst, last)
    for ext in avail:
        if ext in trail or _seller(inst, ext) != link:
            continue
        budget.spend()
        if condition(trail + (ext,), link):
            out.append(trail + (ext,))
    return out


def _search_prefix(inst, outcome, avail, budget, require_distinct_agents=False,
                   pair_condition=False):
    """Shortest-lex blocking trail whose intermediate agents keep either all
    their contracts seen so far (prefix reading) or, with pair_condition,
    just the consecutive pair.  Distinct agents restrict the walk to chains.
    """
    net = inst.network

    def condition(trail, link):
        new = trail[-1]
        cf = inst.choice[link]
        if pair_condition:
            kept = {trail[-2], new}
        else:
            kept = {c for c in trail if c in cf.domain}
        return is_rational(cf, kept, outcome)

    def agents_ok(trail):
        walk = (net.contract(trail[0]).seller,) + tuple(
            net.contract(c).buyer for c in trail
        )
        return len(set(walk)) == len(walk)

    frontier = []
    for cid in avail:
        budget.spend()
        if _start_ok(inst, outcome, cid):
            frontier.append((cid,))
    while frontier:
        for trail in frontier:
            if require_distinct_agents and not agents_ok(trail):
                continue
            if _end_ok(inst, outcome, trail[-1]):
                return trail
        nxt = []
        for trail in frontier:
            if require_distinct_agents and not agents_ok(trail):
                continue
            nxt.extend(_grow_forward(inst, outcome, avail, trail, condition, budget))
        frontier = sorted(nxt)
    return None


def _search_suffix(inst, outcome, avail, budget):
    """Shortest-lex blocking trail under the suffix reading: grown right to
    left, each intermediate agent keeping all its contracts seen so far."""

    frontier = []
    for cid in avail:
        budget.spend()
        if _end_ok(inst, outcome, cid):
            frontier.append((cid,))
    while frontier:
        for trail in frontier:
            if _start_ok(inst, outcome, trail[0]):
                return trail
        nxt = []
        for trail in frontier:
            first = trail[0]
            link = _seller(inst, first)
            cf = inst.choice[link]
            for ext in avail:
                if ext in trail or _buyer(inst, ext) != link:
                    continue
                budget.spend()
                extended = (ext,) + trail
                kept = {c for c in extended if c in cf.domain}
                if is_rational(cf, kept, outcome):
                    nxt.append(extended)
        frontier = sorted(nxt)
    return None


def _search_mixed(inst, outcome, avail, budget):
    """Experimental per-agent mixed reading: each intermediate agent may
    independently satisfy the prefix or the suffix requirement.  Enumerates
    whole trails, so it prunes nothing."""
    frontier = []
    for cid in avail:
        budget.spend()
        if _start_ok(inst, outcome, cid):
            frontier.append((cid,))
    while frontier:
        for trail in frontier:
            if not _end_ok(inst, outcome, trail[-1]):
                continue
            ok = True
            for m in range(1, len(trail)):
                link = _buyer(inst, trail[m - 1])
                cf = inst.choice[link]
                prefix = {c for c in trail[: m + 1] if c in cf.domain}
                suffix = {c for c in trail[m - 1 :] if c in cf.domain}
                if not (
                    is_rational(cf, prefix, outcome)
                    or is_rational(cf, suffix, outcome)
                ):
                    ok = False
                    break
            if ok:
                return trail
        nxt = []
        for trail in frontier:
            link = _buyer(inst, trail[-1])
            for ext in avail:
                if ext in trail or _seller(inst, ext) != link:
                    continue
                budget.spend()
                nxt.append(trail + (ext,))
        frontier = sorted(nxt)
    return None


def find_blocking_trail(inst: Instance, outcome, *, mixed_options: bool = False) -> StabilityVerdict:
    """Trail stability: no trail of fresh contracts may start with a contract
    its seller keeps, end with one its buyer keeps, and have every
    intermediate agent keep either all its prefix contracts (one global
    reading) or all its suffix contracts (the other).

    The two readings are searched independently and the overall witness is
    the shortest-lex one; `mixed_options` switches to the per-agent mixed
    disjunction, which is not the default reading.
    """
    outcome = frozenset(outcome)
    short = _unacceptable_short_circuit(inst, outcome, "trail")
    if short:
        return short
    avail = sorted(inst.contract_ids - outcome)
    budget = _Budget()
    if mixed_options:
        found = _search_mixed(inst, outcome, avail, budget)
        if found:
            return StabilityVerdict("trail", False, Witness("trail", found, option="mixed"))
        return StabilityVerdict("trail", True)
    by_prefix = _search_prefix(inst, outcome, avail, budget)
    by_suffix = _search_suffix(inst, outcome, avail, budget)
    candidates = []
    if by_prefix:
        candidates.append(((len(by_prefix), by_prefix), "prefix"))
    if by_suffix:
        candidates.append(((len(by_suffix), by_suffix), "suffix"))
    if not candidates:
        return StabilityVerdict("trail", True)
    (_, trail), option = min(candidates)
    return StabilityVerdict("trail", False, Witness("trail", trail, option=option))


def find_locally_blocking_trail(inst: Instance, outcome) -> StabilityVerdict:
    """Full trail stability: like trail blocking, but each intermediate agent
    only needs to keep the consecutive pair it links.  Search is incremental;
    partial trails failing a pair condition are never extended."""
    outcome = frozenset(outcome)
    short = _unacceptable_short_circuit(inst, outcome, "full_trail")
    if short:
        return short
    avail = sorted(inst.contract_ids - outcome)
    budget = _Budget()
    found = _search_prefix(inst, outcome, avail, budget, pair_condition=True)
    if found:
        return StabilityVerdict("full_trail", False, Witness("trail", found))
    return StabilityVerdict("full_trail", True)


def find_blocking_chain(inst: Instance, outcome) -> StabilityVerdict:
    """Chain stability: locally blocking trails whose agents are all distinct."""
    outcome = frozenset(outcome)
    short = _unacceptable_short_circuit(inst, outcome, "chain")
    if short:
        return short
    avail = sorted(inst.contract_ids - outcome)
    budget = _Budget()
    found = _search_prefix(
        inst, outcome, avail, budget, require_distinct_agents=True, pair_condition=True
    )
    if found:
        return StabilityVerdict("chain", False, Witness("chain", found))
    return StabilityVerdict("chain", True)


def find_blocking_set(inst: Instance, outcome) -> StabilityVerdict:
    """Set stability: no nonempty fresh contract set that every involved
    agent keeps in full alongside the outcome."""
    outcome = frozenset(outcome)
    short = _unacceptable_short_circuit(inst, outcome, "set")
    if short:
        return short
    avail = sorted(inst.contract_ids - outcome)
    if len(avail) > SET_GUARD:
        raise GuardExceededError(
            f"set search guard is {SET_GUARD} candidate contracts, have {len(avail)}"
        )
    net = inst.network
    for size in range(1, len(avail) + 1):
        for combo in itertools.combinations(avail, size):
            block = frozenset(combo)
            if all(
                _keeps_all(inst, agent, block, outcome)
                for agent in sorted(net.agents_of(block))
            ):
                return StabilityVerdict("set", False, Witness("set", combo))
    return StabilityVerdict("set", True)


def find_blocking_strong_trail(inst: Instance, outcome) -> StabilityVerdict:
    """Strong trail stability: no trail of fresh contracts kept in full by
    every involved agent.  Whole-trail conditions admit no prefix pruning,
    so this enumerates trails within the guard."""
    outcome = frozenset(outcome)
    short = _unacceptable_short_circuit(inst, outcome, "strong_trail")
    if short:
        return short
    avail = sorted(inst.contract_ids - outcome)
    budget = _Budget()
    net = inst.network

    def blocks(trail) -> bool:
        block = frozenset(trail)
        return all(
            _keeps_all(inst, agent, block, outcome)
            for agent in sorted(net.agents_of(block))
        )

    frontier = [(cid,) for cid in avail]
    budget.spend(len(frontier))
    while frontier:
        for trail in frontier:
            if blocks(trail):
                return StabilityVerdict("strong_trail", False, Witness("trail", trail))
        nxt = []
        for trail in frontier:
            link = _buyer(inst, trail[-1])
            for ext in avail:
                if ext in trail or _seller(inst, ext) != link:
                    continue
                budget.spend()
                nxt.append(trail + (ext,))
        frontier = sorted(nxt)
    return StabilityVerdict("strong_trail", True)


_CHECKERS = {
    "acceptable": is_acceptable,
    "trail": find_blocking_trail,
    "full_trail": find_locally_blocking_trail,
    "chain": find_blocking_chain,
    "set": find_blocking_set,
    "strong_trail": find_blocking_strong_trail,
}


def check_notion(inst: Instance, outcome, notion: str) -> StabilityVerdict:
    if notion not in _CHECKERS:
        raise ValueError(f"unknown stability notion {notion!r}")
    return _CHECKERS[notion](inst, outcome)


def classify(inst: Instance, outcome) -> dict[str, StabilityVerdict]:
    """All verdicts at once, cross-checked against the implication chain
    set => full trail => trail => chain.

    The implications are guaranteed whenever the choice functions are fully
    substitutable and consistent; a breach on such instances means a checker
    bug, so it is a hard failure rather than a quiet report.
    """
    out = {notion: _CHECKERS[notion](inst, outcome) for notion in NOTIONS}
    order = ("set", "full_trail", "trail", "chain")
    for weaker, stronger in zip(order, order[1:]):
        if out[weaker].stable and not out[stronger].stable:
            raise StabilityContradictionError(
                f"outcome is {weaker}-stable but not {stronger}-stable; either a "
                "checker bug or choice functions without full substitutability"
            )
    return out
