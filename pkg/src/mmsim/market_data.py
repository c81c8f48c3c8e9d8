"""Recorded and synthetic quote data.

LOB CSV schema (header mandatory, UTF-8, LF):

    ts,bid_px_1,bid_sz_1,...,bid_px_5,bid_sz_5,
       ask_px_1,ask_sz_1,...,ask_px_5,ask_sz_5,trade_px,trade_sz

``ts`` is integer nanoseconds since epoch; price/size fields may be empty
for absent levels, and trade_px/trade_sz are empty on non-trade events.
"""

from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass

import numpy as np

from .dynamics import RngStream, round_to_tick
from .params import MarketParams

__all__ = [
    "LOBRecord",
    "PriceSeries",
    "TradeStats",
    "SchemaMismatchError",
    "MalformedRowError",
    "NonMonotoneTimestampError",
    "EmptyInputError",
    "NoDataBeforeStartError",
    "NoTradesError",
    "LOB_CSV_HEADER",
    "parse_lob_csv",
    "render_lob_csv",
    "resample_forward_fill",
    "trade_size_stats",
    "synthetic_quotes",
]

log = logging.getLogger(__name__)

N_LEVELS = 5
LOB_CSV_HEADER = (
    ["ts"]
    + [f"bid_{kind}_{lvl}" for lvl in range(1, N_LEVELS + 1) for kind in ("px", "sz")]
    + [f"ask_{kind}_{lvl}" for lvl in range(1, N_LEVELS + 1) for kind in ("px", "sz")]
    + ["trade_px", "trade_sz"]
)

NANOS = 1_000_000_000


class SchemaMismatchError(ValueError):
    """CSV header does not match the documented schema."""


class MalformedRowError(ValueError):
    def __init__(self, line: int, reason: str):
        self.line = line
        super().__init__(f"line {line}: {reason}")


class NonMonotoneTimestampError(ValueError):
    def __init__(self, line: int, ts: int, prev: int):
        self.line = line
        super().__init__(f"line {line}: timestamp {ts} precedes {prev}")


class EmptyInputError(ValueError):
    pass


class NoDataBeforeStartError(ValueError):
    pass


class NoTradesError(ValueError):
    pass


@dataclass(frozen=True)
class LOBRecord:
    """One book event: up to five levels per side plus an optional trade."""

    ts: int
    bid_px: tuple
    bid_sz: tuple
    ask_px: tuple
    ask_sz: tuple
    trade_px: float | None = None
    trade_sz: float | None = None


@dataclass(eq=False)
class PriceSeries:
    """Uniformly spaced top-of-book series (dt seconds apart, from t0 ns)."""

    t0: int
    dt: float
    bid: np.ndarray
    ask: np.ndarray
    level1_bid_sz: np.ndarray
    level1_ask_sz: np.ndarray

    def __post_init__(self):
        n = self.bid.size
        if not (self.ask.size == self.level1_bid_sz.size == self.level1_ask_sz.size == n):
            raise ValueError("series arrays must have equal length")
        if np.any(self.bid >= self.ask):
            raise ValueError("crossed quotes: bid must stay below ask")

    def __len__(self) -> int:
        return self.bid.size

    @property
    def mid(self) -> np.ndarray:
        return (self.bid + self.ask) / 2.0

    def window(self, start: int, n_samples: int) -> "PriceSeries":
        """Contiguous sub-series of n_samples starting at sample index start."""
        stop = start + n_samples
        if stop > len(self):
            raise ValueError(f"window [{start}, {stop}) exceeds series length {len(self)}")
        return PriceSeries(
            t0=self.t0 + int(start * self.dt * NANOS),
            dt=self.dt,
            bid=self.bid[start:stop],
            ask=self.ask[start:stop],
            level1_bid_sz=self.level1_bid_sz[start:stop],
            level1_ask_sz=self.level1_ask_sz[start:stop],
        )


@dataclass(frozen=True)
class TradeStats:
    mean_size: float
    median_size: float
    count: int


def _opt_float(text: str) -> float | None:
    return float(text) if text else None


def parse_lob_csv(stream) -> list[LOBRecord]:
    """Parse LOB CSV text (a string or line iterable) into records."""
    if isinstance(stream, str):
        stream = stream.splitlines()
    lines = iter(stream)
    try:
        header = next(lines).rstrip("\n").split(",")
    except StopIteration:
        raise SchemaMismatchError("empty input, header row required") from None
    if header != LOB_CSV_HEADER:
        raise SchemaMismatchError(
            f"header {header!r} does not match required {LOB_CSV_HEADER!r}"
        )

    records: list[LOBRecord] = []
    prev_ts: int | None = None
    for lineno, raw in enumerate(lines, start=2):
        line = raw.rstrip("\n")
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(LOB_CSV_HEADER):
            raise MalformedRowError(lineno, f"expected {len(LOB_CSV_HEADER)} fields, got {len(parts)}")
        try:
            ts = int(parts[0])
            bid_px = tuple(_opt_float(parts[1 + 2 * i]) for i in range(N_LEVELS))
            bid_sz = tuple(_opt_float(parts[2 + 2 * i]) for i in range(N_LEVELS))
            ask_px = tuple(_opt_float(parts[11 + 2 * i]) for i in range(N_LEVELS))
            ask_sz = tuple(_opt_float(parts[12 + 2 * i]) for i in range(N_LEVELS))
            trade_px = _opt_float(parts[21])
            trade_sz = _opt_float(parts[22])
        except ValueError as exc:
            raise MalformedRowError(lineno, str(exc)) from None
        if bid_px[0] is not None and ask_px[0] is not None and bid_px[0] >= ask_px[0]:
            raise MalformedRowError(lineno, f"crossed book: bid {bid_px[0]} >= ask {ask_px[0]}")
        if any(sz is not None and sz < 0 for sz in bid_sz + ask_sz):
            raise MalformedRowError(lineno, "negative size")
        if prev_ts is not None and ts < prev_ts:
            raise NonMonotoneTimestampError(lineno, ts, prev_ts)
        prev_ts = ts
        records.append(LOBRecord(ts, bid_px, bid_sz, ask_px, ask_sz, trade_px, trade_sz))
    return records


def render_lob_csv(records: list[LOBRecord]) -> str:
    """Inverse of :func:`parse_lob_csv` for well-formed records."""

    def _cell(value) -> str:
        return "" if value is None else repr(value)

    out = [",".join(LOB_CSV_HEADER)]
    for r in records:
        cells = [str(r.ts)]
        for px, sz in zip(r.bid_px, r.bid_sz):
            cells += [_cell(px), _cell(sz)]
        for px, sz in zip(r.ask_px, r.ask_sz):
            cells += [_cell(px), _cell(sz)]
        cells += [_cell(r.trade_px), _cell(r.trade_sz)]
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def resample_forward_fill(
    records: list[LOBRecord],
    dt: float,
    start: int | None = None,
    end: int | None = None,
) -> PriceSeries:
    """Sample the last-known book state on a uniform grid of boundaries.

    Boundaries run from ``start`` to ``end`` (nanoseconds) every dt seconds;
    each sample is the most recent record at or before the boundary.  When
    ``start`` is omitted it defaults to the first whole second at or after
    the first record.  Leading boundaries with no prior record are dropped
    with a warning; if none remain the input starts too late and
    :class:`NoDataBeforeStartError` is raised.
    """
    if not records:
        raise EmptyInputError("no records to resample")
    step = int(round(dt * NANOS))
    if step <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if start is None:
        start = ((records[0].ts + NANOS - 1) // NANOS) * NANOS
    if end is None:
        end = records[-1].ts
    if end < start:
        raise ValueError("end precedes start")

    boundaries = np.arange(start, end + 1, step, dtype=np.int64)
    ts = np.array([r.ts for r in records], dtype=np.int64)
    last = np.searchsorted(ts, boundaries, side="right") - 1

    covered = last >= 0
    if not covered.any():
        raise NoDataBeforeStartError(
            f"all {len(records)} records arrive after the final boundary {boundaries[-1]}"
        )
    n_dropped = int(np.argmax(covered))
    if n_dropped:
        log.warning("dropped %d leading boundaries with no prior record", n_dropped)
    boundaries = boundaries[n_dropped:]
    last = last[n_dropped:]

    def _col(getter, missing=np.nan):
        return np.array(
            [missing if getter(records[i]) is None else getter(records[i]) for i in last]
        )

    series = PriceSeries(
        t0=int(boundaries[0]),
        dt=dt,
        bid=_col(lambda r: r.bid_px[0]),
        ask=_col(lambda r: r.ask_px[0]),
        level1_bid_sz=_col(lambda r: r.bid_sz[0], missing=0.0),
        level1_ask_sz=_col(lambda r: r.ask_sz[0], missing=0.0),
    )
    return series


def trade_size_stats(records: list[LOBRecord]) -> TradeStats:
    """Mean and median executed size over all trade events."""
    sizes = [r.trade_sz for r in records if r.trade_sz is not None]
    if not sizes:
        raise NoTradesError("no trade sizes present in the input")
    return TradeStats(
        mean_size=sum(sizes) / len(sizes),
        median_size=statistics.median(sizes),
        count=len(sizes),
    )


def synthetic_quotes(
    params: MarketParams,
    n_steps: int,
    seed: int | RngStream = 0,
    move_prob: float = 0.25,
    s0: float = 100.0,
    level1_size: float = 10.0,
    tick: float | None = None,
) -> PriceSeries:
    """Tick random-walk quotes with a fixed spread (n_steps + 1 samples).

    Per step the mid moves one tick up with probability ``move_prob``, one
    tick down with the same probability, and otherwise stays put.  The bid
    and ask sit a half-spread either side, so ask - bid == delta always.
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    if not 0.0 <= move_prob <= 0.5:
        raise ValueError(f"move_prob must lie in [0, 0.5], got {move_prob}")
    if tick is None:
        tick = params.delta
    stream = seed if isinstance(seed, RngStream) else RngStream(seed=seed)
    gen = stream.generator()

    u = gen.random(n_steps)
    moves = np.where(u < move_prob, 1, np.where(u < 2 * move_prob, -1, 0))
    ticks0 = round(s0 / tick)
    mid_ticks = ticks0 + np.concatenate([[0], np.cumsum(moves)])
    mid = np.round(mid_ticks * tick, 12)

    # canonicalize quotes on the half-tick grid (when the half-spread sits on
    # it) so equal prices repr equally across the series
    half = params.delta / 2.0
    grid = tick / 2.0
    if abs(round(half / grid) * grid - half) < 1e-12:
        bid = np.round(np.round((mid - half) / grid) * grid, 12)
        ask = np.round(np.round((mid + half) / grid) * grid, 12)
    else:
        bid = mid - half
        ask = mid + half
    n = n_steps + 1
    return PriceSeries(
        t0=0,
        dt=params.dt,
        bid=bid,
        ask=ask,
        level1_bid_sz=np.full(n, level1_size),
        level1_ask_sz=np.full(n, level1_size),
    )
