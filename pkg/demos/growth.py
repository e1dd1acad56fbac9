"""Order-of-growth signatures of the sequence rules.

The ledger alone determines the estimates: rho_hat uses M(2R_k) = R_{k+1},
rho_lower uses the minimum-modulus bound 2^{n_k}.  Constant n_k gives order
zero, n_k = R_k^s gives order s, n_k = R_k^k gives infinite order, and
n_k = (log R_k)^s sits between order zero and positive order.
"""

import math

from transcend import PolySpec, SequenceRule, build, make_head
from transcend.checks import growth_order, liminf_criterion

RULES = [
    ("constant n = 8", SequenceRule("constant", 8, "one")),
    ("power s = 0.5", SequenceRule("power", 0.5, "one")),
    ("power s = 1", SequenceRule("power", 1.0, "one")),
    ("tower", SequenceRule("tower", 0, "one")),
    ("log power s = 2", SequenceRule("logpower", 2.0, "one")),
]


def fmt(xs):
    return "  ".join("     nan" if math.isnan(x) else f"{x:8.4g}" for x in xs)


def main():
    spec = PolySpec([1.0])
    head = make_head(spec)
    for name, rule in RULES:
        c = build(spec, head, rule, 5)
        rho_hat, rho_lower = growth_order(c)
        print(f"{name}: depth {c.K}{' (capped)' if c.capped else ''}")
        print(f"  n_k          {'  '.join(str(lv.n) for lv in c.levels)}")
        print(f"  rho_hat      {fmt(rho_hat)}")
        print(f"  rho_lower    {fmt(rho_lower)}")
        print(f"  liminf ratio {fmt(liminf_criterion(c))}")


if __name__ == "__main__":
    main()
