"""Skin-depth decay in carbon and copper: fitted slope against -1/delta."""
import argparse

import numpy as np

from cedgrp.problems import SkinDepthSpec
from cedgrp.studies import skin_depth_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("materials", nargs="*", default=["carbon", "copper"])
    ap.add_argument("--init", default="exact", choices=("exact", "zero"))
    ap.add_argument("--envelope", help="write x, envelope, analytic columns to this .csv prefix")
    args = ap.parse_args()
    for name in args.materials:
        res = skin_depth_study(SkinDepthSpec.preset(name, init=args.init))
        print(f"{name:7s} delta exact {res.delta_exact:.5e} m  fitted {res.delta_measured:.5e} m"
              f"  slope error {100 * res.rel_error:.3f} %  ({res.steps} steps)")
        if args.envelope:
            x0 = res.x[0]
            ana = res.envelope[0] * np.exp(-(res.x - x0) / res.delta_exact)
            np.savetxt(f"{args.envelope}_{name}.csv", np.column_stack([res.x, res.envelope, ana]),
                       delimiter=",", fmt="%.12e", header="x,envelope,analytic", comments="")


if __name__ == "__main__":
    main()
