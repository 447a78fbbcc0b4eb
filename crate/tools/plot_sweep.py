"""Plot a noise sweep written by `humble experiment`.

Usage: python tools/plot_sweep.py sweep/ [-o sweep.png]
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("dir", type=Path, help="directory with trials.csv and summary.csv")
    ap.add_argument("-o", "--out", type=Path, default=None)
    args = ap.parse_args()

    summary = pd.read_csv(args.dir / "summary.csv")
    trials = pd.read_csv(args.dir / "trials.csv")

    fig, (left, right) = plt.subplots(1, 2, figsize=(11, 4))
    for method, group in summary.groupby("method"):
        left.errorbar(group["sigma"], group["mean"], yerr=group["std"], marker="o", capsize=3, label=method)
    left.set_xscale("symlog", linthresh=0.05)
    left.set_xlabel("noise sigma")
    left.set_ylabel("RBO with true ranking")
    left.legend()

    wide = trials.pivot_table(index=["sigma", "trial"], columns="method", values="rbo").reset_index()
    wide["diff"] = wide["expected-rank"] - wide["deterministic"]
    sigmas = sorted(wide["sigma"].unique())
    right.boxplot([wide.loc[wide["sigma"] == s, "diff"] for s in sigmas], tick_labels=[f"{s:g}" for s in sigmas])
    right.axhline(0.0, color="grey", lw=0.8)
    right.set_xlabel("noise sigma")
    right.set_ylabel("RBO(expected-rank) - RBO(deterministic)")

    fig.tight_layout()
    fig.savefig(args.out or args.dir / "sweep.png", dpi=150)


if __name__ == "__main__":
    main()
