"""Total internal reflection: energy flux leaking past the interface."""
import argparse

from cedgrp.problems import BeamSpec
from cedgrp.studies import tir_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--probe", type=float, default=3.0, help="probe distance in wavelengths")
    ap.add_argument("--limiter", default="none", choices=("none", "minmod"))
    args = ap.parse_args()
    res = tir_study(BeamSpec.tir(limiter=args.limiter), args.probe)
    print(f"probe x = {res.probe_x:.3e} m: leaked {res.leaked:.4e}, incident {res.incident:.4e},"
          f" fraction {100 * res.fraction:.4f} % ({res.wall_time:.0f} s)")


if __name__ == "__main__":
    main()
