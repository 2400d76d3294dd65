"""Offer-pair fixed points and their lattice structure.

The engine iterates one operator on pairs of contract sets: `buyer_side` is
what buyers may currently sign, `seller_side` what sellers may.  A response
round removes, from the whole contract set, everything sellers reject out of
the seller side (to form the next buyer side) and everything buyers reject
out of the buyer side (to form the next seller side).  With fully
substitutable, consistent choice functions the operator is isotone in the
order (buyer side grows, seller side shrinks), so iterating from either
lattice extreme converges; the outcomes read off the fixed points are exactly
the outcomes no locally blocking trail can upset.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .choices import is_rational
from .errors import GuardExceededError, IterationDiagnosisError, PreconditionError
from .instances import Instance
from .network import sorted_ids

ENUMERATION_GUARD = 12


@dataclass(frozen=True)
class OfferPair:
    buyer_side: frozenset[str]
    seller_side: frozenset[str]

    @property
    def outcome(self) -> frozenset[str]:
        return self.buyer_side & self.seller_side

    def to_json(self) -> dict:
        return {
            "buyer_side": sorted_ids(self.buyer_side),
            "seller_side": sorted_ids(self.seller_side),
        }

    def sort_key(self):
        return (sorted(self.buyer_side), sorted(self.seller_side))


def pair_leq(p: OfferPair, q: OfferPair) -> bool:
    """Order with buyers up: smaller means fewer buyer options, more seller ones."""
    return p.buyer_side <= q.buyer_side and p.seller_side >= q.seller_side


def pair_join(p: OfferPair, q: OfferPair) -> OfferPair:
    return OfferPair(p.buyer_side | q.buyer_side, p.seller_side & q.seller_side)


def pair_meet(p: OfferPair, q: OfferPair) -> OfferPair:
    return OfferPair(p.buyer_side & q.buyer_side, p.seller_side | q.seller_side)


def top_pair(inst: Instance) -> OfferPair:
    return OfferPair(inst.contract_ids, frozenset())


def bottom_pair(inst: Instance) -> OfferPair:
    return OfferPair(frozenset(), inst.contract_ids)


def respond(inst: Instance, pair: OfferPair) -> OfferPair:
    """One simultaneous response round of all agents."""
    everything = inst.contract_ids
    seller_rejects = inst.rejected_by_sellers(pair.seller_side, pair.buyer_side)
    buyer_rejects = inst.rejected_by_buyers(pair.buyer_side, pair.seller_side)
    return OfferPair(everything - seller_rejects, everything - buyer_rejects)


@dataclass(frozen=True)
class FixedPointResult:
    pair: OfferPair
    outcome: frozenset[str]
    iterations: int
    trace: tuple[OfferPair, ...]

    def to_json(self, include_trace: bool = False) -> dict:
        out = {
            "buyer_side": sorted_ids(self.pair.buyer_side),
            "seller_side": sorted_ids(self.pair.seller_side),
            "outcome": sorted_ids(self.outcome),
            "iterations": self.iterations,
        }
        if include_trace:
            out["trace"] = [p.to_json() for p in self.trace]
        return out


def iterate_from(inst: Instance, start: OfferPair) -> FixedPointResult:
    """Repeated response rounds from a start comparable with its successor.

    The trace must stay monotone in a fixed direction and settle within
    2|X| + 2 rounds (the order has no longer strictly monotone path); any
    breach is diagnosed as an axiom violation in the supplied choice
    functions rather than silently looped over.
    """
    first = respond(inst, start)
    if pair_leq(start, first):
        ascending = True
    elif pair_leq(first, start):
        ascending = False
    else:
        raise PreconditionError(
            "start pair is not comparable with its response; "
            "begin from the top or bottom pair"
        )
    cap = 2 * len(inst.contract_ids) + 2
    trace = [start, first]
    prev, cur = start, first
    steps = 1
    while cur != prev:
        if steps > cap:
            raise IterationDiagnosisError(
                f"no fixed point within {cap} rounds; choice functions are "
                "not fully substitutable and consistent"
            )
        nxt = respond(inst, cur)
        ok = pair_leq(cur, nxt) if ascending else pair_leq(nxt, cur)
        if not ok:
            raise IterationDiagnosisError(
                "response rounds left the monotone path; choice functions "
                "are not fully substitutable and consistent"
            )
        prev, cur = cur, nxt
        trace.append(cur)
        steps += 1
    trace.pop()  # last entry repeats the fixed point
    return FixedPointResult(cur, cur.outcome, steps - 1, tuple(trace))


def buyer_optimal(inst: Instance) -> FixedPointResult:
    """Fixed point from the buyer-favorable extreme (every contract open to
    buyers, none yet conceded to sellers)."""
    return iterate_from(inst, top_pair(inst))


def seller_optimal(inst: Instance) -> FixedPointResult:
    return iterate_from(inst, bottom_pair(inst))


def enumerate_fixed_points(inst: Instance) -> list[FixedPointResult]:
    """All fixed points, by scanning candidate pairs.

    Any fixed point covers the contract set (a contract missing from the
    seller side is never rejected by its seller, so it lands on the buyer
    side), which cuts the scan from 4^|X| pairs to 3^|X| side assignments.
    """
    ids = sorted(inst.contract_ids)
    if len(ids) > ENUMERATION_GUARD:
        raise GuardExceededError(
            f"fixed-point enumeration guard is {ENUMERATION_GUARD} contracts, "
            f"instance has {len(ids)}"
        )
    out = []
    for assignment in itertools.product((0, 1, 2), repeat=len(ids)):
        buyer = frozenset(c for c, a in zip(ids, assignment) if a != 1)
        seller = frozenset(c for c, a in zip(ids, assignment) if a != 0)
        pair = OfferPair(buyer, seller)
        if respond(inst, pair) == pair:
            out.append(FixedPointResult(pair, pair.outcome, 0, (pair,)))
    out.sort(key=lambda r: r.pair.sort_key())
    return out


def fixed_point_outcomes(inst: Instance) -> list[frozenset[str]]:
    seen = []
    for res in enumerate_fixed_points(inst):
        if res.outcome not in seen:
            seen.append(res.outcome)
    return sorted(seen, key=sorted_ids)


def canonical_pair(inst: Instance, outcome, *, check: bool = True) -> OfferPair:
    """The fixed point carrying a given locally-unblockable outcome.

    A non-outcome contract goes to the buyer side when some trail of
    non-outcome contracts reaches it with its first contract kept by its
    seller alongside the outcome and every consecutive pair kept by the
    linking agent; everything else goes to the seller side.  Reachability by
    walks equals reachability by trails here (repeats can be cut out without
    breaking the consecutive conditions), so a closure computation suffices.
    """
    outcome = frozenset(outcome)
    if check:
        from .stability import find_locally_blocking_trail, is_acceptable

        verdict = is_acceptable(inst, outcome)
        if not verdict.stable:
            raise PreconditionError("outcome is not acceptable")
        verdict = find_locally_blocking_trail(inst, outcome)
        if not verdict.stable:
            raise PreconditionError("outcome has a locally blocking trail")
    net = inst.network
    rest = sorted(inst.contract_ids - outcome)
    reached: set[str] = set()
    frontier = [
        cid
        for cid in rest
        if is_rational(inst.choice[net.contract(cid).seller], {cid}, outcome)
    ]
    reached.update(frontier)
    while frontier:
        nxt = []
        for cid in frontier:
            link = net.contract(cid).buyer
            cf = inst.choice[link]
            for ext in rest:
                if ext in reached or net.contract(ext).seller != link:
                    continue
                if is_rational(cf, {cid, ext}, outcome):
                    reached.add(ext)
                    nxt.append(ext)
        frontier = nxt
    buyer_extra = frozenset(reached)
    seller_extra = frozenset(rest) - buyer_extra
    return OfferPair(outcome | buyer_extra, outcome | seller_extra)


# ---------------------------------------------------------------------------
# terminal superiority and the terminal lattice
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuperiorityVerdict:
    relation: str  # seller_superior | buyer_superior | equal | incomparable

    def to_json(self) -> dict:
        return {"relation": self.relation}


def _prefers(inst: Instance, agent: str, mine, theirs) -> bool:
    cf = inst.choice[agent]
    mine_own = frozenset(mine) & cf.domain
    theirs_own = frozenset(theirs) & cf.domain
    return cf.choose(mine_own | theirs_own) == mine_own


def compare_terminal_superiority(inst: Instance, first, second) -> SuperiorityVerdict:
    """Compare two outcomes through the eyes of terminal agents only.

    Seller-superior: every terminal seller keeps exactly the first outcome's
    contracts from the union, and every terminal buyer keeps the second's.
    Buyer-superior is the mirror image; two outcomes agreeing on every
    terminal agent's contracts are equal.
    """
    first, second = frozenset(first), frozenset(second)
    part = inst.network.terminal_partition()
    for agent in sorted(part.terminal_agents):
        cf = inst.choice[agent]
        for outcome in (first, second):
            own = outcome & cf.domain
            if cf.choose(own) != own:
                raise PreconditionError(
                    f"outcome is not individually rational for terminal agent {agent}"
                )
    if all(
        (first & inst.choice[a].domain) == (second & inst.choice[a].domain)
        for a in part.terminal_agents
    ):
        return SuperiorityVerdict("equal")
    seller_sup = all(
        _prefers(inst, a, first, second) for a in part.terminal_sellers
    ) and all(_prefers(inst, a, second, first) for a in part.terminal_buyers)
    buyer_sup = all(
        _prefers(inst, a, second, first) for a in part.terminal_sellers
    ) and all(_prefers(inst, a, first, second) for a in part.terminal_buyers)
    if seller_sup:
        return SuperiorityVerdict("seller_superior")
    if buyer_sup:
        return SuperiorityVerdict("buyer_superior")
    return SuperiorityVerdict("incomparable")


@dataclass(frozen=True)
class TerminalLattice:
    """Distinct terminal projections of the canonical fixed points, with join
    and meet computed through canonical inverse images (the join of all fixed
    points projecting weakly below an element).

    Elements are in bijection with the distinct terminal contract sets of the
    locally-unblockable outcomes: canonical pairs of outcomes agreeing on
    every terminal agent project identically, so a unique outcome always
    yields a one-element lattice even when many fixed points carry it."""

    elements: tuple[OfferPair, ...]          # projections to terminal contracts
    outcomes: tuple[frozenset[str], ...]     # terminal outcome per element
    joins: dict[tuple[int, int], int]
    meets: dict[tuple[int, int], int]

    def to_json(self) -> dict:
        return {
            "elements": [
                {
                    "buyer_side": sorted_ids(p.buyer_side),
                    "seller_side": sorted_ids(p.seller_side),
                    "terminal_outcome": sorted_ids(o),
                }
                for p, o in zip(self.elements, self.outcomes)
            ],
            "joins": {f"{i},{j}": k for (i, j), k in sorted(self.joins.items())},
            "meets": {f"{i},{j}": k for (i, j), k in sorted(self.meets.items())},
        }


def _project_terminal(inst: Instance, pair: OfferPair, terminal_contracts) -> OfferPair:
    return OfferPair(pair.buyer_side & terminal_contracts, pair.seller_side & terminal_contracts)


def terminal_lattice(inst: Instance, *, validate: bool = True) -> TerminalLattice:
    """Lattice of terminal projections of the fixed points.

    Requires full substitutability plus the aggregate demand/supply laws;
    without them the fixed points need not be closed under join and meet and
    the construction is refused rather than computed on bad footing.
    """
    if validate:
        from .axioms import check_instance

        reports = [
            r
            for r in check_instance(inst, ("full_substitutability", "lad_las"))
            if not r.holds
        ]
        if reports:
            raise PreconditionError(
                "terminal lattice needs full substitutability and the "
                "aggregate demand/supply laws",
                reports,
            )
    part = inst.network.terminal_partition()
    terminal_contracts = frozenset(
        cid
        for a in part.terminal_agents
        for cid in inst.choice[a].domain
    )
    results = enumerate_fixed_points(inst)
    fps = [r.pair for r in results]
    outcomes_seen: list[frozenset[str]] = []
    projections: list[OfferPair] = []
    for res in results:
        if res.outcome in outcomes_seen:
            continue
        outcomes_seen.append(res.outcome)
        proj = _project_terminal(
            inst, canonical_pair(inst, res.outcome, check=False), terminal_contracts
        )
        if proj not in projections:
            projections.append(proj)
    projections.sort(key=lambda p: p.sort_key())

    def canonical_inverse(proj: OfferPair) -> OfferPair:
        below = [p for p in fps if pair_leq(_project_terminal(inst, p, terminal_contracts), proj)]
        acc = below[0]
        for p in below[1:]:
            acc = pair_join(acc, p)
        return acc

    index = {p: i for i, p in enumerate(projections)}
    joins: dict[tuple[int, int], int] = {}
    meets: dict[tuple[int, int], int] = {}
    for i, p in enumerate(projections):
        for j, q in enumerate(projections):
            ci, cj = canonical_inverse(p), canonical_inverse(q)
            joined = _project_terminal(inst, pair_join(ci, cj), terminal_contracts)
            met = _project_terminal(inst, pair_meet(ci, cj), terminal_contracts)
            if joined not in index or met not in index:
                raise IterationDiagnosisError(
                    "terminal projections are not closed under join/meet; "
                    "axiom check was expected to preclude this"
                )
            joins[(i, j)] = index[joined]
            meets[(i, j)] = index[met]
    outcomes = tuple(p.outcome for p in projections)
    return TerminalLattice(tuple(projections), outcomes, joins, meets)
