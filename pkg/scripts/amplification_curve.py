"""G(chi) for the three source operators, with an optional plot."""
import argparse

from cedgrp.stiff_source import amplification_table, write_amplification_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--chi-max", type=float, default=40.0)
    ap.add_argument("--samples", type=int, default=401)
    ap.add_argument("--csv", default="amplification.csv")
    ap.add_argument("--png", help="also plot to this file (needs matplotlib)")
    args = ap.parse_args()
    table = amplification_table(args.chi_max, args.samples)
    write_amplification_csv(args.csv, table)
    print(f"wrote {args.csv}; G at chi={table[-1, 0]:g}: exact {table[-1, 1]:.6f},"
          f" backward Euler {table[-1, 2]:.6f}, L-stable average {table[-1, 3]:.6f}")
    if args.png:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for col, label in ((1, "exact"), (2, "backward Euler"), (3, "L-stable average")):
            ax.plot(table[:, 0], table[:, col], label=label)
        ax.axhline(0, color="0.6", lw=0.5)
        ax.set_xlabel("chi = dt Sigma")
        ax.set_ylabel("G(chi)")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.png, dpi=120)


if __name__ == "__main__":
    main()
