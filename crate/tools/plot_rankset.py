"""Bar charts of rank probabilities from `humble export-rankset`.

Usage: python tools/plot_rankset.py rankset.csv c0001 c0420 [-o ranksets.png]
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv", type=Path)
    ap.add_argument("candidates", nargs="+")
    ap.add_argument("-o", "--out", type=Path, default=Path("ranksets.png"))
    args = ap.parse_args()

    df = pd.read_csv(args.csv, dtype={"candidate_id": str})
    n = df["rank"].max()
    fig, axes = plt.subplots(len(args.candidates), 1, figsize=(8, 2.2 * len(args.candidates)), squeeze=False)
    for ax, cid in zip(axes[:, 0], args.candidates):
        rows = df[df["candidate_id"] == cid]
        if rows.empty:
            ax.text(0.5, 0.5, "every rank below the export threshold", ha="center", transform=ax.transAxes)
        ax.bar(rows["rank"], rows["probability"], width=1.0)
        ax.set_xlim(0.5, n + 0.5)
        ax.set_ylim(0, 1)
        ax.set_title(cid, fontsize=9)
        ax.set_ylabel("P(rank)")
    axes[-1, 0].set_xlabel("rank")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
