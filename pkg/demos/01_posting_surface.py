"""Solve the posting problem and look at the optimal policy.

The market maker decides each second whether to rest one lot at the best
bid and/or best ask.  The value of doing so depends on time to horizon,
the short-term drift alpha, and current inventory q.  This script solves
the value function backward from the horizon, prints slices of the policy,
and shows how a lower non-adverse fill probability reshapes it.

Run:  python3 demos/01_posting_surface.py
"""

from dataclasses import replace
from pathlib import Path

import numpy as np

from mmsim import default_grid, default_params, extract_policy, solve_dpe
from mmsim.solver import export_surface_csv

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)


def describe(policy, label):
    n_t = policy.post_ask.shape[0]
    print(f"\n--- {label} ---")
    print(f"posting fraction (ask): {policy.post_ask.mean():.3f}")
    print(f"posting fraction (bid): {policy.post_bid.mean():.3f}")

    # where does the MM quote the ask at mid-horizon, as a function of q?
    k = n_t // 2
    i0 = int(np.where(policy.alpha_nodes == 0.0)[0][0])
    rows = []
    for j, q in enumerate(policy.q_nodes):
        ask = "A" if policy.post_ask[k, i0, j] else "."
        bid = "B" if policy.post_bid[k, i0, j] else "."
        rows.append(f"q={q:+d} {bid}{ask}")
    print("mid-horizon decisions at alpha=0 (B=post bid, A=post ask):")
    print("  " + "  ".join(rows))


def main():
    grid = default_grid()
    p_low = default_params()              # rho = 0.2
    p_full = replace(p_low, rho=1.0)      # every matched order fills

    for params, label in ((p_full, "fill probability 1.0"),
                          (p_low, f"fill probability {p_low.rho}")):
        surface = solve_dpe(params, grid)
        policy = extract_policy(surface, params)
        describe(policy, label)
        stem = f"surface_rho{params.rho}".replace(".", "_")
        export_surface_csv(surface, policy, OUT / f"{stem}.csv")

    pol_full = extract_policy(solve_dpe(p_full, grid), p_full)
    pol_low = extract_policy(solve_dpe(p_low, grid), p_low)
    changed = (pol_full.post_ask != pol_low.post_ask).sum()
    changed += (pol_full.post_bid != pol_low.post_bid).sum()
    total = 2 * pol_full.post_ask.size
    print(f"\nlowering the fill probability flips {changed} of {total} decisions")
    print(f"surfaces written to {OUT}/")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
        for ax, (pol, label) in zip(
            axes, ((pol_full, "rho = 1.0"), (pol_low, "rho = 0.2"))
        ):
            # lowest inventory at which the ask is quoted, per (t, alpha)
            frontier = np.argmax(pol.post_ask, axis=2).astype(float)
            frontier[~pol.post_ask.any(axis=2)] = np.nan
            im = ax.imshow(
                frontier.T - pol.q_nodes.size // 2,
                aspect="auto", origin="lower", cmap="coolwarm",
                extent=[0, frontier.shape[0] - 1,
                        pol.alpha_nodes[0], pol.alpha_nodes[-1]],
            )
            ax.set_title(f"ask-posting frontier, {label}")
            ax.set_xlabel("time step")
        axes[0].set_ylabel("alpha")
        fig.colorbar(im, ax=axes, label="lowest q posting the ask")
        fig.savefig(OUT / "posting_frontier.png", dpi=120)
        print(f"plot written to {OUT / 'posting_frontier.png'}")
    except ImportError:
        print("matplotlib not installed; skipping the plot")


if __name__ == "__main__":
    main()
