"""Optimal coincidence CHSH value as the splitter moves from balanced to fully transmitting."""

import argparse
import math

import numpy as np

from belltime import oumandel as om


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--unweighted", action="store_true",
                   help="bare polarizer projections instead of splitter-weighted detector fields")
    args = p.parse_args()

    print("T\tchsh_max\ta_deg\ta2_deg\tb_deg\tb2_deg")
    for t in np.linspace(0.5, 1.0, args.steps):
        params = om.BeamSplitterParams.from_transmissions(float(t), float(t))
        best, angles = om.optimize_chsh_menu(params, weighted=not args.unweighted)
        degs = "\t".join(f"{math.degrees(x) % 180:.3f}" for x in angles)
        print(f"{t:.2f}\t{best:.9f}\t{degs}")


if __name__ == "__main__":
    main()
