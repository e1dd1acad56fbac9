"""Critical points of f_k in A_k and the size of H_{n_k} there.

In the normal form f ~ C z^{-s} H_n(z/R_k)^l with s = m_{k-1} - n_k l_k, the
critical points off the petal centers sit on the ring u^n = v with
v = (2s + 2nl)/(s + 2nl), where 1 - H = (1 - v)^2.  So |H| >= 3/4 there
exactly when s is small next to n_k l_k.  With constant n_k = 8 the degree
m_{k-1} keeps growing, and the bound holds at k = 1, 2 and fails from k = 3.
"""

import math

from transcend import PolySpec, SequenceRule, build, make_head
from transcend.checks import check_critical_H_bound, critical_points_in_annulus


def main():
    spec = PolySpec([1.0])
    c = build(spec, make_head(spec), SequenceRule("constant", 8, "one"), 4)
    for k in range(1, c.K + 1):
        lv = c.level(k)
        n, l = lv.n.exact_value, lv.l
        s = lv.m_prev.exact_value - n * l
        v = (2 * s + 2 * n * l) / (s + 2 * n * l)
        pts = critical_points_in_annulus(c, k)
        res = check_critical_H_bound(c, k)[0]
        print(f"k = {k}: s = {s:3d}, v = {v:.4f}, predicted |H| = {abs(1 - (1 - v) ** 2):.4f}, "
              f"measured min |H| = {math.exp(res.rhs_log):.4f} over {len(pts)} points -> {res.verdict}")


if __name__ == "__main__":
    main()
