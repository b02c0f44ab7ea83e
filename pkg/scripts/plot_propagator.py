"""Contour plot of a propagator-grid CSV."""

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
    first, second = df.columns[:2]
    table = df.pivot(index=second, columns=first, values="density")
    fig, ax = plt.subplots(figsize=(7, 6))
    contour = ax.contourf(table.columns, table.index, table.values, levels=30)
    fig.colorbar(contour, ax=ax, label="density")
    ax.set_xlabel(first)
    ax.set_ylabel(second)
    fig.tight_layout()
    fig.savefig(args.png, dpi=150)


if __name__ == "__main__":
    main()
