"""Render escape classes over the disk |z| <= 4R_1 and box-count the frontier.

Every pixel center is followed until it lands in some band B_k, which is
conclusive for fast escape.  The frontier between different first-B levels
is a proxy for the Julia set; its box-counting slope is printed and the
images are written next to this script.
"""

import argparse
import os

from transcend import PolySpec, SequenceRule, build, make_head
from transcend.dynamics import a1_window, box_count, grid_rgb, julia_mask, render, write_pbm, write_png


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--res", type=int, default=1024)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "out"))
    args = ap.parse_args()

    spec = PolySpec([1.0])
    c = build(spec, make_head(spec), SequenceRule("constant", 8, "one"), 5)
    grid = render(c, a1_window(c), (args.res, args.res))
    print("class fractions:", grid.class_fractions())
    mask = julia_mask(grid)
    res = box_count(mask)
    print(f"frontier pixels: {int(mask.sum())}, box-counting slope {res.slope:.4f} +/- {res.slope_stderr:.4f}")
    for e, n in zip(res.epsilons, res.counts):
        print(f"  eps = {e:<10g} N = {n}")
    os.makedirs(args.out, exist_ok=True)
    write_png(os.path.join(args.out, "escape_a1.png"), grid_rgb(grid))
    write_pbm(os.path.join(args.out, "frontier_a1.pbm"), mask)
    print(f"images written to {args.out}")


if __name__ == "__main__":
    main()
