"""Trade-order fill tracking.

Two fill channels per step and side, with adverse fills taking precedence:

* adverse: the agent is posted and the touch moves through the order, so
  the fill is certain and executes at the pre-move quote;
* non-adverse: the agent is posted, a market order arrives on that side,
  no adverse fill happened, and a Bernoulli(rho) draw succeeds.

Cumulative counters keep the identity  total(side) = adverse + non-adverse
at every step.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .params import MarketParams

__all__ = [
    "Side",
    "FillKind",
    "FillEvent",
    "FillCounters",
    "EnvVariant",
    "EnvMode",
    "classify_fill",
    "detect_adverse_fills",
    "sample_nonadverse_fill",
    "accumulate",
    "step_fills",
    "write_fill_log",
    "read_fill_log",
]


class Side(enum.Enum):
    BID = "bid"
    ASK = "ask"


class FillKind(enum.Enum):
    ADVERSE = "adverse"
    NON_ADVERSE = "non_adverse"


@dataclass(frozen=True)
class FillEvent:
    """One unit fill: bid fills execute at the posted bid, asks at the ask."""

    t_index: int
    side: Side
    price: float
    kind: FillKind


@dataclass(frozen=True)
class FillCounters:
    """Cumulative fill counts by side and kind."""

    afa: int = 0
    nfa: int = 0
    afb: int = 0
    nfb: int = 0

    @property
    def n_plus(self) -> int:
        """Total ask-side fills (sell orders lifted)."""
        return self.afa + self.nfa

    @property
    def n_minus(self) -> int:
        """Total bid-side fills (buy orders hit)."""
        return self.afb + self.nfb


class EnvVariant(enum.Enum):
    BENCHMARK = "benchmark"
    IMPROVED = "improved"


@dataclass(frozen=True)
class EnvMode:
    """Simulation environment: benchmark ignores adverse fills and fills
    every posted order an arriving market order matches; improved forces
    adverse fills on trade-through and thins the rest by rho."""

    variant: EnvVariant
    rho_effective: float

    @classmethod
    def benchmark(cls) -> "EnvMode":
        return cls(EnvVariant.BENCHMARK, rho_effective=1.0)

    @classmethod
    def improved(cls, params: MarketParams) -> "EnvMode":
        return cls(EnvVariant.IMPROVED, rho_effective=params.rho)

    @property
    def detect_adverse(self) -> bool:
        return self.variant is EnvVariant.IMPROVED


def classify_fill(side: Side, price_now: float, price_next: float) -> FillKind:
    """A fill is adverse when the first subsequent touch move is against it."""
    if side is Side.BID:
        return FillKind.ADVERSE if price_next < price_now else FillKind.NON_ADVERSE
    return FillKind.ADVERSE if price_next > price_now else FillKind.NON_ADVERSE


def detect_adverse_fills(
    posted_bid: bool,
    posted_ask: bool,
    bid_now: float,
    ask_now: float,
    bid_next: float,
    ask_next: float,
    t_index: int = 0,
) -> list[FillEvent]:
    """Forced fills for posted sides the quote moved through (one max each)."""
    fills: list[FillEvent] = []
    if posted_ask and ask_next > ask_now:
        fills.append(FillEvent(t_index, Side.ASK, ask_now, FillKind.ADVERSE))
    if posted_bid and bid_next < bid_now:
        fills.append(FillEvent(t_index, Side.BID, bid_now, FillKind.ADVERSE))
    return fills


def sample_nonadverse_fill(
    posted: bool,
    mo_arrived: bool,
    adverse_already: bool,
    rho: float,
    rng: np.random.Generator,
) -> bool:
    """Bernoulli(rho) fill for a posted side an arriving MO could match.

    Sides already filled adversely this step are ineligible: each posted
    unit can fill at most once per step.  The draw is only consumed when
    the side is eligible.
    """
    if not (posted and mo_arrived and not adverse_already):
        return False
    return rng.random() < rho


def accumulate(counters: FillCounters, fills: list[FillEvent]) -> FillCounters:
    """Fold a step's fills into the cumulative counters."""
    afa, nfa, afb, nfb = counters.afa, counters.nfa, counters.afb, counters.nfb
    for fill in fills:
        if fill.side is Side.ASK:
            if fill.kind is FillKind.ADVERSE:
                afa += 1
            else:
                nfa += 1
        else:
            if fill.kind is FillKind.ADVERSE:
                afb += 1
            else:
                nfb += 1
    return FillCounters(afa=afa, nfa=nfa, afb=afb, nfb=nfb)


def step_fills(
    posted_bid: bool,
    posted_ask: bool,
    bid_now: float,
    ask_now: float,
    bid_next: float,
    ask_next: float,
    mo_buy: bool,
    mo_sell: bool,
    mode: EnvMode,
    rng: np.random.Generator,
    t_index: int = 0,
) -> list[FillEvent]:
    """Full fill pipeline for one step: adverse first, then thinned fills.

    Arriving buy MOs lift the posted ask; sell MOs hit the posted bid.  The
    ask side is always evaluated before the bid so the draw order is fixed.
    """
    fills: list[FillEvent] = []
    adverse_ask = adverse_bid = False
    if mode.detect_adverse:
        fills = detect_adverse_fills(
            posted_bid, posted_ask, bid_now, ask_now, bid_next, ask_next, t_index
        )
        adverse_ask = any(f.side is Side.ASK for f in fills)
        adverse_bid = any(f.side is Side.BID for f in fills)
    if sample_nonadverse_fill(posted_ask, mo_buy, adverse_ask, mode.rho_effective, rng):
        fills.append(FillEvent(t_index, Side.ASK, ask_now, FillKind.NON_ADVERSE))
    if sample_nonadverse_fill(posted_bid, mo_sell, adverse_bid, mode.rho_effective, rng):
        fills.append(FillEvent(t_index, Side.BID, bid_now, FillKind.NON_ADVERSE))
    return fills


def write_fill_log(fills: list[FillEvent], path) -> None:
    """Fill log CSV: t_index, side, price, kind."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t_index,side,price,kind\n")
        for f in fills:
            fh.write(f"{f.t_index},{f.side.value},{float(f.price)!r},{f.kind.value}\n")


def read_fill_log(path) -> list[FillEvent]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "t_index,side,price,kind":
            raise ValueError(f"unexpected fill log header {header!r}")
        fills = []
        for line in fh:
            if not line.strip():
                continue
            t, side, price, kind = line.rstrip("\n").split(",")
            fills.append(FillEvent(int(t), Side(side), float(price), FillKind(kind)))
    return fills
