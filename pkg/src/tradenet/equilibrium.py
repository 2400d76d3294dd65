"""Priced trades, competitive-equilibrium arrangements, and the
price-adjustment process.

A priced economy lists trades with integer price windows; the contract grid
instantiates one contract per (trade, price) point, after which the generic
offer-pair machinery applies unchanged.  Price adjustment is that machinery
run from the buyer-favorable extreme while a bookkeeper tracks one price per
trade per round; completion then prices the unrealized trades at levels both
firms turn down, yielding an arrangement every firm re-chooses exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import axioms
from .choices import ChoiceFunction
from .errors import (
    ChoiceFunctionError,
    GuardExceededError,
    InstanceFormatError,
    PreconditionError,
)
from .fixedpoint import OfferPair, iterate_from, top_pair, bottom_pair
from .instances import Instance
from .network import sorted_ids, validate_network

PRICED_FIELDS = {"trades", "choice_functions"}
TRADE_FIELDS = {"id", "seller", "buyer", "price_min", "price_max"}
MENU_GUARD = 16  # matches the axiom validators' per-agent guard


@dataclass(frozen=True)
class Trade:
    id: str
    seller: str
    buyer: str
    price_min: int
    price_max: int

    def prices(self) -> range:
        return range(self.price_min, self.price_max + 1)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "seller": self.seller,
            "buyer": self.buyer,
            "price_min": self.price_min,
            "price_max": self.price_max,
        }


def contract_id(trade_id: str, price: int) -> str:
    return f"{trade_id}@{price}"


@dataclass(frozen=True)
class PricedInstance:
    trades: tuple[Trade, ...]
    instance: Instance

    @property
    def trade_ids(self) -> tuple[str, ...]:
        return tuple(t.id for t in self.trades)

    def trade(self, trade_id: str) -> Trade:
        for t in self.trades:
            if t.id == trade_id:
                return t
        raise KeyError(trade_id)

    def split(self, cid: str) -> tuple[str, int]:
        trade_id, _, price = cid.rpartition("@")
        return trade_id, int(price)

    def trade_of(self, cid: str) -> str:
        return self.split(cid)[0]

    def price_of(self, cid: str) -> int:
        return self.split(cid)[1]

    def to_json(self) -> dict:
        return {
            "trades": [t.to_json() for t in self.trades],
            "choice_functions": [
                self.instance.choice[a].to_json() for a in self.instance.network.agents
            ],
        }


@dataclass(frozen=True)
class Arrangement:
    realized: frozenset[str]  # trade ids
    prices: dict[str, int]  # every trade priced, realized or not

    def contracts(self) -> frozenset[str]:
        return frozenset(contract_id(t, self.prices[t]) for t in self.realized)

    def to_json(self) -> dict:
        return {
            "realized": sorted(self.realized),
            "prices": {t: self.prices[t] for t in sorted(self.prices)},
        }


class ReservationChoice(ChoiceFunction):
    """Integer reservation values with optional per-side capacities.

    As a buyer the firm looks at the cheapest offered price of each trade and
    takes the trades whose value covers that price, best margins first, up to
    its buy capacity; as a seller, dually, the dearest offered price against
    its cost.  The two sides never interact, which is what makes the family
    a clean, fully substitutable baseline for priced economies.
    """

    family = "reservation"

    def __init__(self, agent, upstream, downstream, decode, values, costs,
                 capacity_buy=None, capacity_sell=None):
        super().__init__(agent, upstream, downstream)
        self.decode = dict(decode)  # contract id -> (trade id, price)
        self.values = {str(t): int(v) for t, v in values.items()}
        self.costs = {str(t): int(v) for t, v in costs.items()}
        self.capacity_buy = None if capacity_buy is None else int(capacity_buy)
        self.capacity_sell = None if capacity_sell is None else int(capacity_sell)
        buy_trades = {self.decode[c][0] for c in self.upstream}
        sell_trades = {self.decode[c][0] for c in self.downstream}
        if buy_trades - set(self.values):
            raise ChoiceFunctionError(f"{agent}: missing buyer values")
        if sell_trades - set(self.costs):
            raise ChoiceFunctionError(f"{agent}: missing seller costs")

    def _side_pick(self, offers, book, cap, buying: bool):
        best: dict[str, str] = {}
        for cid in offers:
            trade, price = self.decode[cid]
            if trade not in best:
                best[trade] = cid
            else:
                incumbent = self.decode[best[trade]][1]
                if (buying and price < incumbent) or (not buying and price > incumbent):
                    best[trade] = cid
        scored = []
        for trade, cid in best.items():
            price = self.decode[cid][1]
            margin = book[trade] - price if buying else price - book[trade]
            if margin >= 0:
                scored.append((-margin, trade, cid))
        scored.sort()
        if cap is not None:
            scored = scored[:cap]
        return frozenset(cid for _, _, cid in scored)

    def _select(self, menu):
        return self._side_pick(
            menu & self.upstream, self.values, self.capacity_buy, True
        ) | self._side_pick(
            menu & self.downstream, self.costs, self.capacity_sell, False
        )

    def params_json(self):
        out = {
            "values": {t: self.values[t] for t in sorted(self.values)},
            "costs": {t: self.costs[t] for t in sorted(self.costs)},
        }
        if self.capacity_buy is not None:
            out["capacity_buy"] = self.capacity_buy
        if self.capacity_sell is not None:
            out["capacity_sell"] = self.capacity_sell
        return out


def build_priced(raw: dict) -> PricedInstance:
    if not isinstance(raw, dict):
        raise InstanceFormatError("priced description must be an object")
    unknown = set(raw) - PRICED_FIELDS
    if unknown:
        raise InstanceFormatError(f"unknown priced-instance fields: {sorted(unknown)}")
    trades_raw = raw.get("trades")
    descs = raw.get("choice_functions")
    if not isinstance(trades_raw, list) or not isinstance(descs, list):
        raise InstanceFormatError("priced instance needs 'trades' and 'choice_functions' lists")
    trades = []
    for item in trades_raw:
        if not isinstance(item, dict) or set(item) != TRADE_FIELDS:
            raise InstanceFormatError(f"trade entries need exactly fields {sorted(TRADE_FIELDS)}")
        t = Trade(item["id"], item["seller"], item["buyer"],
                  int(item["price_min"]), int(item["price_max"]))
        if t.price_min > t.price_max:
            raise InstanceFormatError(f"trade {t.id!r}: empty price window")
        if t.seller == t.buyer:
            raise InstanceFormatError(f"trade {t.id!r}: seller equals buyer")
        if "@" in t.id:
            raise InstanceFormatError(f"trade {t.id!r}: '@' is reserved")
        trades.append(t)
    if len({t.id for t in trades}) != len(trades):
        raise InstanceFormatError("duplicate trade id")
    agents = sorted({t.seller for t in trades} | {t.buyer for t in trades})
    contracts = [
        {"id": contract_id(t.id, p), "seller": t.seller, "buyer": t.buyer}
        for t in trades
        for p in t.prices()
    ]
    net = validate_network({"agents": agents, "contracts": contracts})
    decode = {
        contract_id(t.id, p): (t.id, p) for t in trades for p in t.prices()
    }
    choice: dict[str, ChoiceFunction] = {}
    for desc in descs:
        if not isinstance(desc, dict) or desc.get("type") != "reservation":
            raise InstanceFormatError("priced choice functions must have type 'reservation'")
        allowed = {"agent", "type", "values", "costs", "capacity_buy", "capacity_sell"}
        unknown = set(desc) - allowed
        if unknown:
            raise InstanceFormatError(f"unknown reservation fields: {sorted(unknown)}")
        agent = desc.get("agent")
        if agent not in net.upstream:
            raise InstanceFormatError(f"choice function for unknown agent {agent!r}")
        if agent in choice:
            raise InstanceFormatError(f"two choice functions for agent {agent!r}")
        choice[agent] = ReservationChoice(
            agent,
            net.upstream[agent],
            net.downstream[agent],
            decode,
            desc.get("values", {}),
            desc.get("costs", {}),
            desc.get("capacity_buy"),
            desc.get("capacity_sell"),
        )
    return PricedInstance(tuple(trades), Instance(net, choice))


# ---------------------------------------------------------------------------
# priced-economy axioms
# ---------------------------------------------------------------------------


def _menu_guard(cf: ChoiceFunction, what: str) -> None:
    if len(cf.domain) > MENU_GUARD:
        raise GuardExceededError(
            f"{what}: menu enumeration guard is {MENU_GUARD} contracts per firm, "
            f"agent {cf.agent} has {len(cf.domain)}"
        )


def _menus(cf: ChoiceFunction):
    pool = sorted(cf.domain)
    for r in range(len(pool) + 1):
        yield from (frozenset(m) for m in itertools.combinations(pool, r))


def check_feasibility(priced: PricedInstance) -> list[axioms.AxiomReport]:
    """No chosen set may carry two prices for one trade."""
    out = []
    for agent in sorted(priced.instance.network.agents):
        cf = priced.instance.choice[agent]
        _menu_guard(cf, "feasibility")
        witness = None
        for menu in _menus(cf):
            chosen = cf.choose(menu)
            seen: dict[str, str] = {}
            for cid in sorted(chosen):
                trade = priced.trade_of(cid)
                if trade in seen:
                    witness = {
                        "menu": sorted_ids(menu),
                        "chosen": sorted_ids(chosen),
                        "trade": trade,
                        "contracts": [seen[trade], cid],
                    }
                    break
                seen[trade] = cid
            if witness:
                break
        out.append(axioms.AxiomReport("feasibility", agent, witness is None, witness))
    return out


def _rejects(cf: ChoiceFunction, cid: str, menu) -> bool:
    return cid not in cf.choose(frozenset(menu) | {cid})


def check_cp(priced: PricedInstance) -> list[axioms.AxiomReport]:
    """Complete prices, one report per trade.

    (1) some price the buyer takes no matter what else is offered, (2) some
    price the seller always takes, and (3) no seller-rejected price sitting
    immediately below a buyer-rejected one without a commonly rejected price
    between them, for any fixed side menus.
    """
    out = []
    inst = priced.instance
    for t in priced.trades:
        buyer_cf = inst.choice[t.buyer]
        seller_cf = inst.choice[t.seller]
        _menu_guard(buyer_cf, "complete_prices")
        _menu_guard(seller_cf, "complete_prices")
        witness = None

        always_bought = [
            p
            for p in t.prices()
            if all(not _rejects(buyer_cf, contract_id(t.id, p), m) for m in _menus(buyer_cf))
        ]
        if not always_bought:
            witness = {"condition": "buyer_floor_missing", "trade": t.id}
        if witness is None:
            always_sold = [
                p
                for p in t.prices()
                if all(not _rejects(seller_cf, contract_id(t.id, p), m) for m in _menus(seller_cf))
            ]
            if not always_sold:
                witness = {"condition": "seller_ceiling_missing", "trade": t.id}
        if witness is None:
            witness = _cp3_witness(priced, t, buyer_cf, seller_cf)
        out.append(axioms.AxiomReport("complete_prices", t.id, witness is None, witness))
    return out


def _cp3_witness(priced, t, buyer_cf, seller_cf):
    """Crossing condition: side menus are quantified jointly over both firms'
    contracts, minus the trade's own price grid (the condition is applied to
    price an unrealized trade, so no second copy of it can be on the table)."""
    grid = {contract_id(t.id, p) for p in t.prices()}
    pool = sorted((buyer_cf.domain | seller_cf.domain) - grid)
    if len(pool) > MENU_GUARD:
        raise GuardExceededError(
            f"complete_prices: joint menu guard is {MENU_GUARD}, trade {t.id} has {len(pool)}"
        )
    for p in range(t.price_min, t.price_max):
        low = contract_id(t.id, p)
        high = contract_id(t.id, p + 1)
        for r in range(len(pool) + 1):
            for combo in itertools.combinations(pool, r):
                menu = frozenset(combo)
                if (
                    _rejects(seller_cf, low, menu)
                    and _rejects(buyer_cf, high, menu)
                    and not _rejects(buyer_cf, low, menu)
                    and not _rejects(seller_cf, high, menu)
                ):
                    return {
                        "condition": "no_common_rejection",
                        "trade": t.id,
                        "price": p,
                        "menu": sorted_ids(menu),
                    }
    return None


def check_pm(priced: PricedInstance) -> list[axioms.AxiomReport]:
    """Price monotonicity, one report per trade: alongside any outcome, the
    buyer never keeps the dearer of two same-trade contracts and the seller
    never keeps the cheaper."""
    out = []
    inst = priced.instance
    for t in priced.trades:
        witness = None
        for role, agent in (("buyer", t.buyer), ("seller", t.seller)):
            cf = inst.choice[agent]
            _menu_guard(cf, "price_monotonicity")
            pair_prices = itertools.combinations(t.prices(), 2)
            for low, high in pair_prices:
                cheap = contract_id(t.id, low)
                dear = contract_id(t.id, high)
                bad = dear if role == "buyer" else cheap
                rest = sorted(cf.domain - {cheap, dear})
                for r in range(len(rest) + 1):
                    for combo in itertools.combinations(rest, r):
                        outcome = frozenset(combo)
                        if bad in cf.choose(outcome | {cheap, dear}):
                            witness = {
                                "trade": t.id,
                                "role": role,
                                "prices": [low, high],
                                "outcome": sorted_ids(outcome),
                            }
                            break
                    if witness:
                        break
                if witness:
                    break
            if witness:
                break
        out.append(axioms.AxiomReport("price_monotonicity", t.id, witness is None, witness))
    return out


def check_priced_axioms(priced: PricedInstance) -> list[axioms.AxiomReport]:
    """Everything the price-adjustment process conditions on."""
    out = axioms.check_instance(priced.instance, ("full_substitutability", "irc"))
    out.extend(check_feasibility(priced))
    out.extend(check_cp(priced))
    out.extend(check_pm(priced))
    return out


# ---------------------------------------------------------------------------
# price adjustment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PriceRound:
    pair: OfferPair
    offers: frozenset[str]  # proposing side's demanded contracts
    responder_keeps: frozenset[str]
    responder_rejects: frozenset[str]
    prices: dict[str, int]

    def to_json(self) -> dict:
        return {
            "offers": sorted_ids(self.offers),
            "responder_keeps": sorted_ids(self.responder_keeps),
            "responder_rejects": sorted_ids(self.responder_rejects),
            "prices": {t: self.prices[t] for t in sorted(self.prices)},
        }


@dataclass(frozen=True)
class PriceTrace:
    perspective: str  # buyer | seller
    rounds: tuple[PriceRound, ...]
    last_rejected: dict[str, int]  # per trade, final offered-and-rejected price

    def to_json(self) -> dict:
        return {
            "perspective": self.perspective,
            "rounds": [r.to_json() for r in self.rounds],
            "last_rejected": {t: self.last_rejected[t] for t in sorted(self.last_rejected)},
        }


def _round_offers(priced: PricedInstance, pair: OfferPair, perspective: str):
    inst = priced.instance
    offers: set[str] = set()
    keeps: set[str] = set()
    rejects: set[str] = set()
    for cf in inst.choice.values():
        if perspective == "buyer":
            offers |= cf.chosen_upstream(pair.buyer_side, pair.seller_side)
            keeps |= cf.chosen_downstream(pair.seller_side, pair.buyer_side)
            rejects |= cf.rejected_downstream(pair.seller_side, pair.buyer_side)
        else:
            offers |= cf.chosen_downstream(pair.seller_side, pair.buyer_side)
            keeps |= cf.chosen_upstream(pair.buyer_side, pair.seller_side)
            rejects |= cf.rejected_upstream(pair.buyer_side, pair.seller_side)
    return frozenset(offers), frozenset(keeps), frozenset(rejects)


def price_adjustment(
    priced: PricedInstance, perspective: str = "buyer", validate: bool = True
) -> tuple[frozenset[str], PriceTrace]:
    """Offer-pair iteration on the price grid with per-round price records.

    Buyer perspective starts from every contract open to buyers: buyers
    demand each trade at its cheapest workable price, sellers discard what is
    below cost, and discarded price points leave the buyers' menu so demand
    climbs.  Each trade's recorded price is the currently offered one, or the
    price at which it was last offered and turned down.  The run ends at a
    fixed point whose outcome is the contract reading of the final offers.
    """
    if perspective not in ("buyer", "seller"):
        raise PreconditionError(f"unknown perspective {perspective!r}")
    if validate:
        bad = [r for r in check_priced_axioms(priced) if not r.holds]
        if bad:
            raise PreconditionError(
                "price adjustment requires full substitutability, consistency, "
                "feasibility, complete prices and price monotonicity",
                bad,
            )
    inst = priced.instance
    start = top_pair(inst) if perspective == "buyer" else bottom_pair(inst)
    run = iterate_from(inst, start)
    states = run.trace + (run.pair,)

    rounds: list[PriceRound] = []
    last_rejected: dict[str, int] = {}
    prev_offers: frozenset[str] = frozenset()
    for pair in states:
        offers, keeps, rejects = _round_offers(priced, pair, perspective)
        for cid in sorted(prev_offers & rejects):
            trade, price = priced.split(cid)
            last_rejected[trade] = price
        prices: dict[str, int] = {}
        offered_now: dict[str, int] = {}
        for cid in sorted(offers):
            trade, price = priced.split(cid)
            if trade in offered_now:
                raise PreconditionError(
                    f"two prices offered for trade {trade!r}; feasibility violated"
                )
            offered_now[trade] = price
        for t in priced.trades:
            if t.id in offered_now:
                prices[t.id] = offered_now[t.id]
            elif t.id in last_rejected:
                prices[t.id] = last_rejected[t.id]
            else:
                # never offered yet: the proposing side's opening price
                prices[t.id] = t.price_min if perspective == "buyer" else t.price_max
        rounds.append(PriceRound(pair, offers, keeps, rejects, prices))
        prev_offers = offers
    outcome = run.outcome
    return outcome, PriceTrace(perspective, tuple(rounds), last_rejected)


def complete_prices(
    priced: PricedInstance, outcome, trace: PriceTrace
) -> Arrangement:
    """Extend the final outcome to a full arrangement.

    Realized trades keep their contract prices.  Each unrealized trade is
    priced by walking from its last rejected offer toward the proposing
    side's worse prices until both of its firms turn it down next to the
    realized contracts; running out of window means the completeness
    conditions did not actually hold.
    """
    outcome = frozenset(outcome)
    inst = priced.instance
    realized: dict[str, int] = {}
    for cid in sorted(outcome):
        trade, price = priced.split(cid)
        if trade in realized:
            raise PreconditionError(f"outcome carries two prices for trade {trade!r}")
        realized[trade] = price
    prices = dict(realized)
    for t in priced.trades:
        if t.id in realized:
            continue
        anchor = trace.last_rejected.get(
            t.id, t.price_min if trace.perspective == "buyer" else t.price_max
        )
        if trace.perspective == "buyer":
            candidates = range(anchor, t.price_max + 1)
        else:
            candidates = range(anchor, t.price_min - 1, -1)
        assigned = None
        for p in candidates:
            cid = contract_id(t.id, p)
            buyer_cf = inst.choice[t.buyer]
            seller_cf = inst.choice[t.seller]
            if _rejects(buyer_cf, cid, outcome & buyer_cf.domain) and _rejects(
                seller_cf, cid, outcome & seller_cf.domain
            ):
                assigned = p
                break
        if assigned is None:
            raise PreconditionError(
                f"no commonly rejected price for unrealized trade {t.id!r}; "
                "complete-prices condition violated"
            )
        prices[t.id] = assigned
    return Arrangement(frozenset(realized), prices)


def verify_competitive_equilibrium(priced: PricedInstance, arr: Arrangement) -> bool:
    """Every firm, facing the whole economy at the arrangement's prices, must
    choose exactly its realized contracts."""
    missing = set(priced.trade_ids) - set(arr.prices)
    if missing:
        raise PreconditionError(f"arrangement leaves trades unpriced: {sorted(missing)}")
    menu = frozenset(contract_id(t, arr.prices[t]) for t in priced.trade_ids)
    realized_contracts = arr.contracts()
    inst = priced.instance
    for agent in inst.network.agents:
        cf = inst.choice[agent]
        if cf.choose(menu & cf.domain) != realized_contracts & cf.domain:
            return False
    return True


# ---------------------------------------------------------------------------
# trace audits
# ---------------------------------------------------------------------------


def trace_prices_monotone(trace: PriceTrace) -> bool:
    """Offered prices move against the proposing side, never back."""
    better = (lambda a, b: a < b) if trace.perspective == "buyer" else (lambda a, b: a > b)
    for prev, cur in zip(trace.rounds, trace.rounds[1:]):
        for t, p in cur.prices.items():
            if better(p, prev.prices[t]):
                return False
    return True


def trace_offers_remain_open(trace: PriceTrace) -> bool:
    """An offer the responder kept is renewed by the proposer next round."""
    for prev, cur in zip(trace.rounds, trace.rounds[1:]):
        if not prev.offers & cur.responder_keeps <= cur.offers:
            return False
    return True


def trace_rejections_remain_final(trace: PriceTrace) -> bool:
    """Responder rejections only accumulate."""
    for prev, cur in zip(trace.rounds, trace.rounds[1:]):
        if not prev.responder_rejects <= cur.responder_rejects:
            return False
    return True
