#!/usr/bin/env python3
"""Plot range-slice CSVs from `isacsim slice`: one panel per iteration."""
import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="output of `isacsim slice`")
    ap.add_argument("-o", "--output", default="slice.png")
    ap.add_argument("--floor-db", type=float, default=-60.0)
    args = ap.parse_args()

    df = pd.read_csv(args.csv, comment="#")
    fig, axes = plt.subplots(2, 1, figsize=(9, 7), sharex=True)
    for iteration, ax in zip((1, 2), axes):
        sub = df[df["iteration"] == iteration]
        for kind, group in sub.groupby("constellation", sort=False):
            ax.plot(group["range_m"], group["value_db"].clip(lower=args.floor_db),
                    label=kind, linewidth=1.0)
        ax.set_ylabel(f"iteration {iteration} [dB]")
        ax.set_ylim(args.floor_db, 2)
        ax.grid(True, alpha=0.3)
    axes[0].legend(ncol=3, fontsize=8)
    axes[1].set_xlabel("range [m]")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
