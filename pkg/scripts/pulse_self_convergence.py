"""Self-convergence of the Gaussian pulse crossing a dielectric disk.

The default ladder (120..480 against 960) is the manual 30-60 minute target;
``--levels 30,60 --reference 240`` gives a quick look.
"""
import argparse

from cedgrp.studies import format_convergence, pulse_self_convergence


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", default="120,240,480")
    ap.add_argument("--reference", type=int, default=960)
    args = ap.parse_args()
    levels = tuple(int(v) for v in args.levels.split(","))
    print(format_convergence(pulse_self_convergence(levels, args.reference)))


if __name__ == "__main__":
    main()
