"""Whitney sums of a thin annulus against the closed form (1/t) delta^{t-1} r^t.

Squares of side s near either boundary circle number about 4 pi r / s per
dyadic layer, so the sum behaves like 4 pi r 2^{t/2} delta^{t-1} times a
geometric series in 2^{1-t}.  That constant is tens of times the closed form,
and at t = 1 the series diverges, so the sum grows with the resolution.
"""

from transcend.dynamics import annulus_mask, whitney_squares, whitney_tsum


def main():
    r, delta = 1.0, 1 / 64
    for n in (1024, 2048, 4096):
        mask, px = annulus_mask(r, delta, n)
        sq = whitney_squares(mask)
        line = [f"grid {n}: {sum(sq.values())} squares"]
        for t in (1.0, 1.5, 2.0):
            s = whitney_tsum(mask, t, px)
            line.append(f"t={t}: sum {s:.4g}, ratio {s / ((1 / t) * delta ** (t - 1) * r ** t):.1f}")
        print("  ".join(line))


if __name__ == "__main__":
    main()
