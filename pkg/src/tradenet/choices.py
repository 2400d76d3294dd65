"""Per-agent choice functions over bilateral contracts.

Every family maps an offered set of the agent's own contracts to a chosen
subset.  Contracts that do not involve the agent are silently dropped before
evaluation; evaluation is pure and memoized (the cache never changes an
observable result, it only speeds up the exhaustive searches that hammer the
same menus).

Side conventions follow the rest of the library: *upstream* contracts are the
ones the agent buys, *downstream* the ones it sells.
"""

from __future__ import annotations

from .errors import ChoiceFunctionError
from .network import ContractNetwork


class ChoiceFunction:
    """Base evaluator.  Subclasses implement _select on restricted menus."""

    family = "abstract"

    def __init__(self, agent: str, upstream, downstream):
        self.agent = agent
        self.upstream = frozenset(upstream)
        self.downstream = frozenset(downstream)
        overlap = self.upstream & self.downstream
        if overlap:
            raise ChoiceFunctionError(
                f"{agent}: contracts {sorted(overlap)} listed on both sides"
            )
        self.domain = self.upstream | self.downstream
        self._cache: dict[frozenset[str], frozenset[str]] = {}

    # -- evaluation ---------------------------------------------------------

    def choose(self, offered) -> frozenset[str]:
        menu = frozenset(offered) & self.domain
        hit = self._cache.get(menu)
        if hit is None:
            hit = frozenset(self._select(menu))
            if not hit <= menu:
                raise ChoiceFunctionError(
                    f"{self.agent}: evaluator chose contracts outside the menu"
                )
            self._cache[menu] = hit
        return hit

    def _select(self, menu: frozenset[str]) -> frozenset[str]:
        raise NotImplementedError

    @property
    def query_count(self) -> int:
        """Number of distinct menus evaluated so far (oracle-call counter)."""
        return len(self._cache)

    # -- conditioned choice and rejection maps ------------------------------

    def chosen_upstream(self, available_up, available_down) -> frozenset[str]:
        menu = (frozenset(available_up) & self.upstream) | (
            frozenset(available_down) & self.downstream
        )
        return self.choose(menu) & self.upstream

    def chosen_downstream(self, available_down, available_up) -> frozenset[str]:
        menu = (frozenset(available_up) & self.upstream) | (
            frozenset(available_down) & self.downstream
        )
        return self.choose(menu) & self.downstream

    def rejected_upstream(self, available_up, available_down) -> frozenset[str]:
        offered = frozenset(available_up) & self.upstream
        return offered - self.chosen_upstream(available_up, available_down)

    def rejected_downstream(self, available_down, available_up) -> frozenset[str]:
        offered = frozenset(available_down) & self.downstream
        return offered - self.chosen_downstream(available_down, available_up)

    # -- restriction (used by terminal-agent exit surgery) ------------------

    def restrict(self, keep) -> "ChoiceFunction":
        raise ChoiceFunctionError(
            f"{self.family} choice functions do not support restriction"
        )

    def params_json(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> dict:
        out = {"agent": self.agent, "type": self.family}
        out.update(self.params_json())
        return out


def is_rational(cf: ChoiceFunction, subset, given) -> bool:
    """True when the agent keeps all of `subset` offered alongside `given`."""
    own = frozenset(subset) & cf.domain
    return own <= cf.choose(own | (frozenset(given) & cf.domain))


def is_individually_rational(cf: ChoiceFunction, contract_set) -> bool:
    own = frozenset(contract_set) & cf.domain
    return cf.choose(own) == own


def is_rational_pair(cf: ChoiceFunction, up_contract: str, down_contract: str, given) -> bool:
    """True when neither contract is kept alone alongside `given` but the
    pair is kept together.  The first contract must be upstream for the
    agent and the second downstream."""
    if up_contract not in cf.upstream or down_contract not in cf.downstream:
        raise ChoiceFunctionError(
            f"{cf.agent}: rational pair needs one upstream and one downstream contract"
        )
    if is_rational(cf, {up_contract}, given) or is_rational(cf, {down_contract}, given):
        return False
    return is_rational(cf, {up_contract, down_contract}, given)


# ---------------------------------------------------------------------------
# concrete families
# ---------------------------------------------------------------------------


class PreferenceListChoice(ChoiceFunction):
    """Strict ranking over acceptable contract sets, best first.

    The evaluator picks the best-ranked subset fully contained in the offer;
    if no ranked set fits, it picks nothing (the empty set is implicitly the
    last acceptable entry).
    """

    family = "preference_list"

    def __init__(self, agent, upstream, downstream, ranking):
        super().__init__(agent, upstream, downstream)
        seen = set()
        clean: list[frozenset[str]] = []
        for entry in ranking:
            fs = frozenset(entry)
            if not fs <= self.domain:
                raise ChoiceFunctionError(
                    f"{agent}: ranked set {sorted(fs)} uses contracts the agent is not part of"
                )
            if fs in seen:
                raise ChoiceFunctionError(f"{agent}: duplicate ranked set {sorted(fs)}")
            seen.add(fs)
            clean.append(fs)
        self.ranking = tuple(clean)

    def _select(self, menu):
        for entry in self.ranking:
            if entry <= menu:
                return entry
        return frozenset()

    def restrict(self, keep):
        keep = frozenset(keep)
        ranking = []
        seen = set()
        for entry in self.ranking:
            if entry <= keep and entry not in seen:
                seen.add(entry)
                ranking.append(entry)
        return PreferenceListChoice(
            self.agent, self.upstream & keep, self.downstream & keep, ranking
        )

    def params_json(self):
        return {"ranking": [sorted(entry) for entry in self.ranking]}


class SeparableIntensityChoice(ChoiceFunction):
    """Totally ordered sides, matched pairwise.

    Offered k upstream and l downstream contracts, the agent signs the
    min(k, l) best of each side.  Decisions about one upstream/downstream
    pair never depend on which other pairs are around.
    """

    family = "separable_intensity"

    def __init__(self, agent, upstream_order, downstream_order):
        super().__init__(agent, upstream_order, downstream_order)
        if len(set(upstream_order)) != len(tuple(upstream_order)):
            raise ChoiceFunctionError(f"{agent}: upstream order repeats a contract")
        if len(set(downstream_order)) != len(tuple(downstream_order)):
            raise ChoiceFunctionError(f"{agent}: downstream order repeats a contract")
        self.upstream_order = tuple(upstream_order)
        self.downstream_order = tuple(downstream_order)

    def _select(self, menu):
        ups = [c for c in self.upstream_order if c in menu]
        downs = [c for c in self.downstream_order if c in menu]
        take = min(len(ups), len(downs))
        return frozenset(ups[:take]) | frozenset(downs[:take])

    def restrict(self, keep):
        keep = frozenset(keep)
        return SeparableIntensityChoice(
            self.agent,
            [c for c in self.upstream_order if c in keep],
            [c for c in self.downstream_order if c in keep],
        )

    def params_json(self):
        return {
            "upstream_order": list(self.upstream_order),
            "downstream_order": list(self.downstream_order),
        }


class SimpleIntensityChoice(ChoiceFunction):
    """One-in, one-out by intensity.

    Picks the highest-intensity upstream contract and the lowest-intensity
    downstream contract, but only when the upstream one carries strictly more
    intensity than the downstream one; otherwise picks nothing.  Intensities
    must be pairwise distinct so the comparisons are strict.
    """

    family = "simple_intensity"

    def __init__(self, agent, upstream, downstream, intensity: dict[str, float]):
        super().__init__(agent, upstream, downstream)
        missing = self.domain - set(intensity)
        if missing:
            raise ChoiceFunctionError(
                f"{agent}: intensity missing for contracts {sorted(missing)}"
            )
        own = {c: float(intensity[c]) for c in self.domain}
        if len(set(own.values())) != len(own):
            raise ChoiceFunctionError(f"{agent}: intensities must be pairwise distinct")
        self.intensity = own

    def _select(self, menu):
        ups = menu & self.upstream
        downs = menu & self.downstream
        if not ups or not downs:
            return frozenset()
        best_up = max(ups, key=lambda c: (self.intensity[c], c))
        best_down = min(downs, key=lambda c: (self.intensity[c], c))
        if self.intensity[best_up] > self.intensity[best_down]:
            return frozenset({best_up, best_down})
        return frozenset()

    def restrict(self, keep):
        keep = frozenset(keep)
        return SimpleIntensityChoice(
            self.agent,
            self.upstream & keep,
            self.downstream & keep,
            {c: v for c, v in self.intensity.items() if c in keep},
        )

    def params_json(self):
        return {"intensity": {c: self.intensity[c] for c in sorted(self.intensity)}}


class QuotaChoice(ChoiceFunction):
    """One-sided responsive choice with a quota.

    `order` ranks the acceptable contracts of the agent's single active side,
    best first; contracts left out of the order are never chosen.  The agent
    signs the best min(quota, offered-acceptable) of them.  quota=1 models a
    unit-demand terminal agent.
    """

    family = "quota"

    def __init__(self, agent, upstream, downstream, order, quota: int = 1):
        super().__init__(agent, upstream, downstream)
        if self.upstream and self.downstream:
            raise ChoiceFunctionError(
                f"{agent}: quota choice is for agents active on one side only"
            )
        if len(set(order)) != len(tuple(order)):
            raise ChoiceFunctionError(f"{agent}: order repeats a contract")
        if not set(order) <= self.domain:
            raise ChoiceFunctionError(f"{agent}: order lists foreign contracts")
        if quota < 1:
            raise ChoiceFunctionError(f"{agent}: quota must be at least 1")
        self.order = tuple(order)
        self.quota = int(quota)

    def _select(self, menu):
        picked = [c for c in self.order if c in menu][: self.quota]
        return frozenset(picked)

    def restrict(self, keep):
        keep = frozenset(keep)
        return QuotaChoice(
            self.agent,
            self.upstream & keep,
            self.downstream & keep,
            [c for c in self.order if c in keep],
            self.quota,
        )

    def params_json(self):
        return {"order": list(self.order), "quota": self.quota}


def _indexed(ids_by_index: dict[int, str], menu) -> list[int]:
    return sorted(i for i, cid in ids_by_index.items() if cid in menu)


class PartitionChoiceF(ChoiceFunction):
    """Buyer of the weighted contracts in the subset-sum gadget.

    Keeps every weighted contract offered; keeps the single downstream
    contract exactly when the offered weights reach half the total.
    """

    family = "partition_f"

    def __init__(self, agent, weighted_ids: dict[int, str], down_id: str, weights):
        weights = tuple(int(w) for w in weights)
        if not weights or any(w <= 0 for w in weights):
            raise ChoiceFunctionError("weights must be positive integers")
        if list(weights) != sorted(weights):
            raise ChoiceFunctionError("weights must be sorted ascending")
        if sorted(weighted_ids) != list(range(1, len(weights) + 1)):
            raise ChoiceFunctionError("weighted contracts must be indexed 1..k")
        super().__init__(agent, weighted_ids.values(), [down_id])
        self.weights = weights
        self.weighted_ids = dict(weighted_ids)
        self.down_id = down_id
        self.double_threshold = sum(weights)  # compare 2*sum(offered) against this

    def _select(self, menu):
        idx = _indexed(self.weighted_ids, menu)
        ups = frozenset(self.weighted_ids[i] for i in idx)
        offered_weight = sum(self.weights[i - 1] for i in idx)
        if self.down_id in menu and 2 * offered_weight >= self.double_threshold:
            return ups | {self.down_id}
        return ups

    def params_json(self):
        return {"weights": list(self.weights)}


class PartitionChoiceG(ChoiceFunction):
    """Seller of the weighted contracts in the subset-sum gadget.

    Inactive without its single upstream contract.  With it, keeps the
    longest index-prefix of the offered weighted contracts whose weight stays
    within half the total (so everything, when the offer is light enough).
    """

    family = "partition_g"

    def __init__(self, agent, up_id: str, weighted_ids: dict[int, str], weights):
        weights = tuple(int(w) for w in weights)
        if not weights or any(w <= 0 for w in weights):
            raise ChoiceFunctionError("weights must be positive integers")
        if list(weights) != sorted(weights):
            raise ChoiceFunctionError("weights must be sorted ascending")
        super().__init__(agent, [up_id], weighted_ids.values())
        self.weights = weights
        self.weighted_ids = dict(weighted_ids)
        self.up_id = up_id
        self.double_threshold = sum(weights)

    def _select(self, menu):
        if self.up_id not in menu:
            return frozenset()
        kept = []
        running = 0
        for i in _indexed(self.weighted_ids, menu):
            running += self.weights[i - 1]
            if 2 * running > self.double_threshold:
                break
            kept.append(self.weighted_ids[i])
        return frozenset(kept) | {self.up_id}

    def params_json(self):
        return {"weights": list(self.weights)}


class NeedleChoiceF(ChoiceFunction):
    """Buyer side of the hidden-subset gadget on 2n parallel contracts.

    Keeps every offered upstream contract; keeps the downstream contract when
    more than half of the upstream contracts are offered, or when the offer
    is exactly the hidden n-subset (if one was planted).
    """

    family = "needle_f"

    def __init__(self, agent, weighted_ids: dict[int, str], down_id: str, n: int,
                 hidden=None):
        if n < 1:
            raise ChoiceFunctionError("n must be at least 1")
        if sorted(weighted_ids) != list(range(1, 2 * n + 1)):
            raise ChoiceFunctionError("hidden-subset gadget needs contracts indexed 1..2n")
        super().__init__(agent, weighted_ids.values(), [down_id])
        self.n = n
        self.weighted_ids = dict(weighted_ids)
        self.down_id = down_id
        if hidden is None:
            self.hidden = None
        else:
            hidden = frozenset(int(i) for i in hidden)
            if len(hidden) != n or not hidden <= set(weighted_ids):
                raise ChoiceFunctionError("hidden index set must contain exactly n valid indices")
            self.hidden = hidden

    def _select(self, menu):
        idx = frozenset(_indexed(self.weighted_ids, menu))
        ups = frozenset(self.weighted_ids[i] for i in idx)
        take_down = len(idx) >= self.n + 1 or (self.hidden is not None and idx == self.hidden)
        if self.down_id in menu and take_down:
            return ups | {self.down_id}
        return ups

    def params_json(self):
        out = {"n": self.n}
        if self.hidden is not None:
            out["hidden"] = sorted(self.hidden)
        return out


# ---------------------------------------------------------------------------
# constructors from JSON descriptions
# ---------------------------------------------------------------------------


def build_family(net: ContractNetwork, desc: dict) -> ChoiceFunction:
    """One constructor for every concrete family, keyed by desc["type"]."""
    if not isinstance(desc, dict) or "agent" not in desc or "type" not in desc:
        raise ChoiceFunctionError("choice description needs 'agent' and 'type'")
    agent = desc["agent"]
    if agent not in net.upstream:
        raise ChoiceFunctionError(f"choice function for unknown agent {agent!r}")
    kind = desc["type"]
    up = net.upstream[agent]
    down = net.downstream[agent]
    params = {k: v for k, v in desc.items() if k not in ("agent", "type")}

    def need(*names):
        missing = set(names) - set(params)
        extra = set(params) - set(names)
        if missing:
            raise ChoiceFunctionError(f"{agent}/{kind}: missing parameters {sorted(missing)}")
        if extra:
            raise ChoiceFunctionError(f"{agent}/{kind}: unknown parameters {sorted(extra)}")

    if kind == "preference_list":
        need("ranking")
        return PreferenceListChoice(agent, up, down, params["ranking"])
    if kind == "separable_intensity":
        need("upstream_order", "downstream_order")
        _check_cover(agent, params["upstream_order"], up, "upstream")
        _check_cover(agent, params["downstream_order"], down, "downstream")
        return SeparableIntensityChoice(
            agent, params["upstream_order"], params["downstream_order"]
        )
    if kind == "simple_intensity":
        need("intensity")
        return SimpleIntensityChoice(agent, up, down, params["intensity"])
    if kind in ("quota", "unit_demand"):
        if kind == "unit_demand":
            need("order")
            return QuotaChoice(agent, up, down, params["order"], 1)
        need("order", "quota")
        return QuotaChoice(agent, up, down, params["order"], params["quota"])
    if kind == "partition_f":
        need("weights")
        ids, down_id = _gadget_wiring(net, agent, up, down, len(params["weights"]))
        return PartitionChoiceF(agent, ids, down_id, params["weights"])
    if kind == "partition_g":
        need("weights")
        ids, up_id = _gadget_wiring(net, agent, down, up, len(params["weights"]))
        return PartitionChoiceG(agent, up_id, ids, params["weights"])
    if kind == "needle_f":
        n = params.get("n")
        if n is None:
            raise ChoiceFunctionError(f"{agent}/needle_f: missing parameter 'n'")
        extra = set(params) - {"n", "hidden"}
        if extra:
            raise ChoiceFunctionError(f"{agent}/needle_f: unknown parameters {sorted(extra)}")
        ids, down_id = _gadget_wiring(net, agent, up, down, 2 * int(n))
        return NeedleChoiceF(agent, ids, down_id, int(n), params.get("hidden"))
    raise ChoiceFunctionError(f"unknown choice family {kind!r}")


def _check_cover(agent, order, side, name):
    if set(order) != set(side):
        raise ChoiceFunctionError(
            f"{agent}: {name} order must cover exactly {sorted(side)}"
        )


def _gadget_wiring(net, agent, many_side, single_side, k):
    """Map a gadget agent's parallel contracts to indices 1..k by id order."""
    if len(single_side) != 1:
        raise ChoiceFunctionError(f"{agent}: gadget agent needs exactly one lone-side contract")
    if len(many_side) != k:
        raise ChoiceFunctionError(
            f"{agent}: gadget agent needs exactly {k} parallel contracts, got {len(many_side)}"
        )
    ids = {i + 1: cid for i, cid in enumerate(sorted(many_side))}
    (single,) = single_side
    return ids, single
