#!/usr/bin/env python3
"""Plot Pd sweeps from `isacsim pd-sweep` with binomial error bars."""
import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="output of `isacsim pd-sweep`")
    ap.add_argument("-o", "--output", default="pd_sweep.png")
    ap.add_argument("--xlabel", default="axis value [dB]")
    args = ap.parse_args()

    df = pd.read_csv(args.csv, comment="#")
    fig, ax = plt.subplots(figsize=(7, 5))
    for (det, kind), group in df.groupby(["detector", "constellation"],
                                         sort=False):
        label = det if df["constellation"].nunique() == 1 else f"{det}/{kind}"
        ax.errorbar(group["axis_value"], group["pd"], yerr=2 * group["stderr"],
                    marker="o", markersize=3, capsize=2, label=label)
    ax.set_xlabel(args.xlabel)
    ax.set_ylabel("Pd")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
