"""Result summaries emitted as machine-readable files for external plotting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fills import FillCounters, FillEvent, FillKind, Side

__all__ = [
    "Histogram",
    "EmptyValuesError",
    "terminal_cash_histogram",
    "summarize_fills",
    "counters_from_fills",
    "write_histogram_csv",
    "write_fill_type_summary_csv",
    "read_batch_wealth_csv",
]


class EmptyValuesError(ValueError):
    pass


@dataclass(eq=False)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray


def terminal_cash_histogram(values, n_bins: int) -> Histogram:
    """Equal-width histogram over [min, max]; the max lands in the last bin."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise EmptyValuesError("no terminal values to bin")
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    counts, edges = np.histogram(values, bins=n_bins)
    return Histogram(bin_edges=edges, counts=counts)


def summarize_fills(fill_totals: FillCounters) -> list[tuple[str, int]]:
    """Aggregate fill counts by kind and side, ask side first."""
    return [
        ("AFA", fill_totals.afa),
        ("NFA", fill_totals.nfa),
        ("AFB", fill_totals.afb),
        ("NFB", fill_totals.nfb),
    ]


def counters_from_fills(fills: list[FillEvent]) -> FillCounters:
    afa = sum(1 for f in fills if f.side is Side.ASK and f.kind is FillKind.ADVERSE)
    nfa = sum(1 for f in fills if f.side is Side.ASK and f.kind is FillKind.NON_ADVERSE)
    afb = sum(1 for f in fills if f.side is Side.BID and f.kind is FillKind.ADVERSE)
    nfb = sum(1 for f in fills if f.side is Side.BID and f.kind is FillKind.NON_ADVERSE)
    return FillCounters(afa=afa, nfa=nfa, afb=afb, nfb=nfb)


def write_histogram_csv(hist: Histogram, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("bin_lo,bin_hi,count\n")
        for i in range(hist.counts.size):
            fh.write(f"{float(hist.bin_edges[i])!r},{float(hist.bin_edges[i + 1])!r},{int(hist.counts[i])}\n")


def write_fill_type_summary_csv(rows: list[tuple[str, int]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("fill_type,count\n")
        for name, count in rows:
            fh.write(f"{name},{count}\n")


def read_batch_wealth_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read back (terminal_wealths, objectives) written by the simulator."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "window,terminal_wealth,objective":
            raise ValueError(f"unexpected batch wealth header {header!r}")
        wealths, objectives = [], []
        for line in fh:
            if not line.strip():
                continue
            _, tw, obj = line.rstrip("\n").split(",")
            wealths.append(float(tw))
            objectives.append(float(obj))
    return np.asarray(wealths), np.asarray(objectives)
