"""Strategy simulation over a quote series.

Each window runs the optimal posting policy step by step: market orders are
simulated, the short-term drift evolves with them, the posting decision is
looked up at the nearest drift node for the current inventory, fills are
generated by the environment's fill rules, and cash/inventory/wealth paths
are recorded.  Batches split a session into consecutive non-overlapping
windows that share only their boundary sample, each with its own
deterministic RNG stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import RngStream, sample_mo_arrivals, step_alpha
from .fills import EnvMode, FillCounters, FillEvent, Side, accumulate, step_fills
from .market_data import PriceSeries
from .params import MarketParams
from .solver import PostingPolicy

__all__ = [
    "SimResult",
    "BatchResult",
    "SeriesTooShortError",
    "PolicyShapeMismatchError",
    "InventoryBoundBreachError",
    "update_inventory",
    "update_cash",
    "terminal_wealth",
    "run_simulation",
    "run_batch",
    "write_snapshot_csv",
    "write_batch_wealth_csv",
]


class SeriesTooShortError(ValueError):
    pass


class PolicyShapeMismatchError(ValueError):
    pass


class InventoryBoundBreachError(RuntimeError):
    """A fill pushed inventory past its bound: a policy/fill contract bug."""


@dataclass(eq=False)
class SimResult:
    """One window's paths; arrays hold n_dt+1 states, posting flags n_dt."""

    inventory: np.ndarray
    cash: np.ndarray
    wealth: np.ndarray
    fills: list[FillEvent]
    posted_bid: np.ndarray
    posted_ask: np.ndarray
    counters: FillCounters
    terminal_wealth: float
    objective: float


@dataclass(eq=False)
class BatchResult:
    terminal_wealths: np.ndarray
    objectives: np.ndarray
    fill_totals: FillCounters
    n_paths: int


def update_inventory(q: int, fills: list[FillEvent], q_max: int) -> int:
    """Apply one step of fills: buys add a lot, sells shed one."""
    out = q
    for f in fills:
        out += 1 if f.side is Side.BID else -1
    if abs(out) > q_max:
        raise InventoryBoundBreachError(
            f"inventory {out} outside [-{q_max}, {q_max}]; "
            "the policy must not post at an inventory bound"
        )
    return out


def update_cash(c: float, fills: list[FillEvent]) -> float:
    """Sells collect the fill price, buys pay it."""
    for f in fills:
        c += f.price if f.side is Side.ASK else -f.price
    return c


def terminal_wealth(c: float, q: int, s: float, params: MarketParams) -> float:
    """Cash plus the liquidation value of q lots at the horizon."""
    return c + q * (s - (params.delta / 2.0 + params.varphi * q))


def _check_policy(policy: PostingPolicy, params: MarketParams) -> None:
    expected = (params.n_dt + 1, policy.alpha_nodes.size, 2 * params.q_max + 1)
    if policy.post_ask.shape != expected or policy.post_bid.shape != expected:
        raise PolicyShapeMismatchError(
            f"policy shape {policy.post_ask.shape} does not match "
            f"(n_dt+1, n_alpha, 2 q_max+1) = {expected}"
        )


def run_simulation(
    policy: PostingPolicy,
    series: PriceSeries,
    mode: EnvMode,
    params: MarketParams,
    rng: RngStream | np.random.Generator,
) -> SimResult:
    """Run one window of n_dt steps over the leading samples of a series.

    Step i (state at sample i, transition to i+1):
      1. read the posting decision at (i, nearest drift node, inventory);
      2. draw market-order arrivals and advance the drift with them;
      3. improved mode: force adverse fills from the i -> i+1 quote move;
      4. thin the remaining posted sides by rho_effective on MO arrival;
      5. settle cash and inventory; mark wealth to the mid.

    At i = n_dt the terminal liquidation value replaces the mark-to-market,
    and the objective subtracts the running inventory penalty integral.
    """
    n = params.n_dt
    if len(series) < n + 1:
        raise SeriesTooShortError(f"need {n + 1} samples, series has {len(series)}")
    _check_policy(policy, params)
    gen = rng.generator() if isinstance(rng, RngStream) else rng

    bid, ask, mid = series.bid, series.ask, series.mid
    nodes = policy.alpha_nodes
    j0 = params.q_max

    inventory = np.zeros(n + 1, dtype=int)
    cash = np.zeros(n + 1)
    wealth = np.zeros(n + 1)
    posted_bid = np.zeros(n, dtype=bool)
    posted_ask = np.zeros(n, dtype=bool)
    fills: list[FillEvent] = []
    counters = FillCounters()

    q = 0
    c = 0.0
    alpha = 0.0
    wealth[0] = 0.0
    penalty = 0.0

    for i in range(n):
        a_idx = int(np.abs(nodes - alpha).argmin())
        j = q + j0
        p_ask = bool(policy.post_ask[i, a_idx, j])
        p_bid = bool(policy.post_bid[i, a_idx, j])
        posted_ask[i] = p_ask
        posted_bid[i] = p_bid

        arrivals = sample_mo_arrivals(params.lambda_plus, params.lambda_minus, params.dt, gen)
        alpha = step_alpha(alpha, arrivals, params.dt, params, gen)

        new_fills = step_fills(
            p_bid, p_ask, bid[i], ask[i], bid[i + 1], ask[i + 1],
            arrivals.buy, arrivals.sell, mode, gen, t_index=i,
        )
        penalty += params.phi * (q * q) * params.dt
        q = update_inventory(q, new_fills, params.q_max)
        c = update_cash(c, new_fills)
        fills.extend(new_fills)
        counters = accumulate(counters, new_fills)

        inventory[i + 1] = q
        cash[i + 1] = c
        wealth[i + 1] = c + q * mid[i + 1]

    final = terminal_wealth(c, q, mid[n], params)
    wealth[n] = final
    return SimResult(
        inventory=inventory,
        cash=cash,
        wealth=wealth,
        fills=fills,
        posted_bid=posted_bid,
        posted_ask=posted_ask,
        counters=counters,
        terminal_wealth=final,
        objective=final - penalty,
    )


def n_windows(series_len: int, n_dt: int) -> int:
    return (series_len - 1) // n_dt


def run_batch(
    policy: PostingPolicy,
    series: PriceSeries,
    mode: EnvMode,
    params: MarketParams,
    master_seed: int,
) -> BatchResult:
    """Run every full window in a session; window w uses stream_id = w.

    Windows cover samples [w n_dt, (w+1) n_dt] so consecutive windows share
    one boundary sample, and results do not depend on execution order.
    """
    count = n_windows(len(series), params.n_dt)
    if count < 1:
        raise SeriesTooShortError(
            f"series of {len(series)} samples holds no full window of {params.n_dt + 1}"
        )
    wealths = np.empty(count)
    objectives = np.empty(count)
    totals = FillCounters()
    for w in range(count):
        window = series.window(w * params.n_dt, params.n_dt + 1)
        result = run_simulation(policy, window, mode, params, RngStream(master_seed, w))
        wealths[w] = result.terminal_wealth
        objectives[w] = result.objective
        totals = accumulate_counters(totals, result.counters)
    return BatchResult(
        terminal_wealths=wealths, objectives=objectives, fill_totals=totals, n_paths=count
    )


def accumulate_counters(a: FillCounters, b: FillCounters) -> FillCounters:
    return FillCounters(afa=a.afa + b.afa, nfa=a.nfa + b.nfa,
                        afb=a.afb + b.afb, nfb=a.nfb + b.nfb)


def write_snapshot_csv(result: SimResult, series: PriceSeries, path) -> None:
    """Per-step path snapshot; multiple same-step fills join with ';'."""
    n = result.posted_bid.size
    by_step: dict[int, list[FillEvent]] = {}
    for f in result.fills:
        by_step.setdefault(f.t_index, []).append(f)
    mid = series.mid
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t_index,bid,ask,mid,posted_bid,posted_ask,fill_side,fill_kind,q,cash,wealth\n")
        for i in range(n + 1):
            step_fills_ = by_step.get(i, []) if i < n else []
            sides = ";".join(f.side.value for f in step_fills_)
            kinds = ";".join(f.kind.value for f in step_fills_)
            pb = int(result.posted_bid[i]) if i < n else ""
            pa = int(result.posted_ask[i]) if i < n else ""
            fh.write(
                f"{i},{float(series.bid[i])!r},{float(series.ask[i])!r},{float(mid[i])!r},"
                f"{pb},{pa},{sides},{kinds},"
                f"{int(result.inventory[i])},{float(result.cash[i])!r},{float(result.wealth[i])!r}\n"
            )


def write_batch_wealth_csv(batch: BatchResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("window,terminal_wealth,objective\n")
        for w in range(batch.n_paths):
            fh.write(f"{w},{float(batch.terminal_wealths[w])!r},{float(batch.objectives[w])!r}\n")
