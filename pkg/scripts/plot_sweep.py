"""Plot a sweep CSV: closed-form prices as lines, Monte Carlo as error bars.

    python -m asianpath sweep ... --out sweep.csv
    python scripts/plot_sweep.py sweep.csv sweep.png
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main(argv=None):
    parser = argparse.ArgumentParser()
    parser.add_argument("csv")
    parser.add_argument("png")
    parser.add_argument("--xlabel", default="S0y")
    args = parser.parse_args(argv)

    df = pd.read_csv(args.csv)
    fig, ax = plt.subplots(figsize=(8, 5))
    for rho, group in df.groupby("rho"):
        line = ax.plot(group["param_value"], group["analytic_value"], label=f"closed form, rho={rho:g}")[0]
        ax.errorbar(group["param_value"], group["mc_value"], yerr=3 * group["mc_std_error"], fmt="o",
                    ms=3, color=line.get_color(), label=f"Monte Carlo, rho={rho:g}")
    ax.set_xlabel(args.xlabel)
    ax.set_ylabel("option price")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.png, dpi=150)


if __name__ == "__main__":
    main()
