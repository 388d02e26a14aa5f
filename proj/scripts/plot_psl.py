#!/usr/bin/env python3
"""Bar chart of peak-sidelobe statistics from `isacsim psl`."""
import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="output of `isacsim psl`")
    ap.add_argument("-o", "--output", default="psl.png")
    args = ap.parse_args()

    df = pd.read_csv(args.csv, comment="#")
    x = np.arange(len(df))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(x - 0.2, df["psl_db_mean"].clip(lower=-60), width=0.4, label="mean")
    ax.bar(x + 0.2, df["psl_db_p95"].clip(lower=-60), width=0.4, label="p95")
    ax.set_xticks(x, df["constellation"])
    ax.set_ylabel("PSL [dB]")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
