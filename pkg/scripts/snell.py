"""Refraction of a 45 degree beam into an eps = 2.25 slab (Snell angle 28.1 degrees)."""
import argparse

from cedgrp.problems import BeamSpec
from cedgrp.studies import refraction_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--limiter", default="none", choices=("none", "minmod"))
    ap.add_argument("--scale", type=float, default=1.0, help="mesh refinement factor")
    ap.add_argument("--frames", type=int, default=32)
    args = ap.parse_args()
    base = BeamSpec.refraction()
    dims = tuple(int(round(n * args.scale)) for n in base.dims)
    res = refraction_study(BeamSpec.refraction(dims=dims, limiter=args.limiter), args.frames)
    print(f"mesh {dims[0]}x{dims[1]}: refracted angle {res.angle_deg:.2f} deg,"
          f" Snell {res.expected_deg:.2f} deg ({res.wall_time:.0f} s)")
    for t, (x, y, w) in zip(res.track.times, res.track.centroids):
        print(f"  t={t:.3e}  centroid ({x:.3e}, {y:.3e})  weight {w:.3e}")


if __name__ == "__main__":
    main()
