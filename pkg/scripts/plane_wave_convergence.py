"""Oracle convergence ladder for the periodic plane wave (Dy and Bz)."""
import argparse
from pathlib import Path

from cedgrp.studies import format_convergence, plane_wave_convergence, write_convergence_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", default="16,32,64,128")
    ap.add_argument("--cfl", type=float, default=0.45)
    ap.add_argument("--t-final", type=float, default=3.5e-9)
    ap.add_argument("--limiter", default="none", choices=("none", "minmod"))
    ap.add_argument("--csv", type=Path)
    args = ap.parse_args()
    levels = tuple(int(v) for v in args.levels.split(","))
    tables = plane_wave_convergence(levels, cfl=args.cfl, t_final=args.t_final,
                                    limiter=args.limiter)
    print(format_convergence(tables))
    if args.csv:
        write_convergence_csv(args.csv, tables)


if __name__ == "__main__":
    main()
