"""Overlay the simulated and approximate average histograms of a histogram CSV."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main(argv=None):
    parser = argparse.ArgumentParser()
    parser.add_argument("csv")
    parser.add_argument("png")
    args = parser.parse_args(argv)

    df = pd.read_csv(args.csv)
    width = df["bin_right"] - df["bin_left"]
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.bar(df["bin_left"], df["exact_mass"], width=width, align="edge", alpha=0.5, label="simulated average")
    ax.step(df["bin_left"], df["approx_mass"], where="post", color="k", label="approximate average")
    l1 = (df["exact_mass"] - df["approx_mass"]).abs().sum()
    ax.set_title(f"L1 distance {l1:.4f}")
    ax.set_xlabel("average logreturn")
    ax.set_ylabel("probability mass")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.png, dpi=150)


if __name__ == "__main__":
    main()
