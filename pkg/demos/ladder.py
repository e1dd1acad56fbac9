"""Build the default radius ladder and check it against its closed-form bounds.

Each R_{k+1} is the maximum of |f_k| on |z| = 2R_k.  The radii grow so fast
that from k = 3 on they only exist as logarithms.
"""

import argparse
import math

from transcend import PolySpec, SequenceRule, build, make_head
from transcend.checks import check_ladder, format_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depth", type=int, default=5)
    args = ap.parse_args()

    spec = PolySpec([1.0])
    head = make_head(spec)
    print(f"seed p(z) = 10 (z^2 - 1), N = {head.N}: m = {head.m}, m* = {head.m_star}, R = {head.R:g}")
    c = build(spec, head, SequenceRule("constant", 8, "one"), args.depth)
    for lv in c.levels:
        digits = lv.logR / math.log(10)
        print(f"  k = {lv.k}: log R_k = {lv.logR:.10g}  (about 10^{digits:.4g}), m_k = {lv.m_k}")
    print(f"  log R_{c.K + 1} = {c.logR_next:.10g}")
    print()
    print(format_table(check_ladder(c)))


if __name__ == "__main__":
    main()
