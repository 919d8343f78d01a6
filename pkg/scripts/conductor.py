"""Beam reflecting off a copper wall: energy split between vacuum and metal."""
from cedgrp.studies import conductor_study


def main():
    res = conductor_study()
    print(f"vacuum side {100 * res.reflected_fraction:.2f} %, inside metal"
          f" {100 * res.transmitted_fraction:.4f} % of initial energy;"
          f" max |U| {res.max_field:.3e} ({res.wall_time:.0f} s)")


if __name__ == "__main__":
    main()
