"""Geometry of H_m(z) = z^m (2 - z^m), a conjugate of the Chebyshev T_2.

``H_m(z) = -T_2(r2 z^m + z2)`` with ``T_2(x) = 2x^2 - 1``,
``z2 = -1/sqrt(2)`` and ``r2 = 1/sqrt(2)``.  The set ``{|H_m| < 1}`` has a
central component around 0 and ``m`` petals near the unit circle, all inside
the annulus ``1 - 1/m <= |z| <= 1 + 2/m``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import BracketFailure
from .extrange import (
    LN2,
    BigCount,
    LogComplex,
    ModInterval,
    lc_add,
    lc_mul,
    lc_pow,
    mi_mul,
    mi_one_minus_half,
)
from .result import CheckResult

Z2 = -1.0 / math.sqrt(2.0)
RT2 = 1.0 / math.sqrt(2.0)
R2 = 1.0 - 2.0**-0.5


def H_eval(m, z: LogComplex):
    """H_m(z) in log-polar form; a ModInterval when m is log-only."""
    w = lc_pow(z, BigCount.of(m))
    if isinstance(w, LogComplex):
        two_minus = lc_add(LogComplex(LN2, 0.0), LogComplex(w.log_mag, w.arg + math.pi, w.is_zero))
        return lc_mul(w, two_minus)
    # |2 - w| = 2 |1 - w/2|
    half = mi_one_minus_half(w)
    return mi_mul(w, ModInterval(half.lo_log + LN2, half.hi_log + LN2))


def H_native(m: int, z):
    u = np.asarray(z, dtype=np.complex128) ** m
    return u * (2.0 - u)


def T2(x):
    return 2.0 * x * x - 1.0


def chebyshev_consistency(m: int, z) -> np.ndarray:
    """Defect of ``H_m(z) = -T_2(z^m/sqrt2 - 1/sqrt2)``.

    The absolute defect is divided by ``max(1, |z|^{2m})``, the size of the
    terms being compared, so that the value measures relative rounding.
    """
    if m > 64:
        raise ValueError("identity checks run at native precision, m <= 64")
    z = np.asarray(z, dtype=np.complex128)
    u = z**m
    d = np.abs(u * (2.0 - u) + T2(u * RT2 + Z2))
    return d / np.maximum(1.0, np.abs(u) ** 2)


def one_minus_H_identity(m: int, z) -> np.ndarray:
    """Relative defect of ``1 - H_m(z) = (1 - z^m)^2``."""
    if m > 64:
        raise ValueError("identity checks run at native precision, m <= 64")
    z = np.asarray(z, dtype=np.complex128)
    u = z**m
    d = np.abs((1.0 - u * (2.0 - u)) - (1.0 - u) ** 2)
    return d / np.maximum(1.0, np.abs(u) ** 2)


@dataclass(frozen=True)
class PetalGeometry:
    """Samples of the level curve ``|H_m| = 1`` along rays.

    ``angles`` and ``radii`` are parallel arrays; a ray may contribute more
    than one radius where it crosses the curve several times.
    """

    m: int
    angles: np.ndarray
    radii: np.ndarray
    ray_count: int

    @property
    def inner_bound(self) -> float:
        return 1.0 - 1.0 / self.m

    @property
    def outer_bound(self) -> float:
        return 1.0 + 2.0 / self.m

    z2 = Z2
    r2 = R2
    rt2 = RT2

    @property
    def level_curve(self):
        return list(zip(self.angles.tolist(), self.radii.tolist()))

    def outer_radius(self) -> np.ndarray:
        """Largest crossing on each ray, indexed by ray."""
        out = np.full(self.ray_count, -np.inf)
        idx = np.rint(self.angles / (2 * math.pi) * self.ray_count).astype(int) % self.ray_count
        np.maximum.at(out, idx, self.radii)
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["angle", "radius"])
            for a, r in zip(self.angles, self.radii):
                w.writerow([repr(float(a)), repr(float(r))])


def level_curve(m: int, angular_samples: int, grid: int = 64, tol: float = 1e-12,
                band: Optional[Tuple[float, float]] = None) -> PetalGeometry:
    """Radial bisection of ``|H_m(r e^{i theta})| - 1`` on ``[1 - 1/m, 1 + 2/m]``
    (or on ``band`` when given)."""
    if m > 1024:
        raise ValueError("level curves are computed for m <= 1024")
    if angular_samples < 8 * m:
        raise ValueError("need at least 8m angular samples")
    lo, hi = band if band is not None else (1.0 - 1.0 / m, 1.0 + 2.0 / m)
    theta = 2.0 * math.pi * np.arange(angular_samples) / angular_samples
    r = np.linspace(lo, hi, grid)
    rot = np.exp(1j * m * theta)

    def g(rr, tt_rot):
        u = rr**m * tt_rot
        return np.abs(u * (2.0 - u)) - 1.0

    vals = g(r[None, :], rot[:, None])
    change = np.sign(vals[:, :-1]) != np.sign(vals[:, 1:])
    if not np.all(change.any(axis=1)):
        bad = int(np.argmin(change.any(axis=1)))
        raise BracketFailure(f"no crossing of |H_{m}| = 1 on ray {theta[bad]:.6g}")
    ray, cell = np.nonzero(change)
    a = r[cell].copy()
    b = r[cell + 1].copy()
    ga = vals[ray, cell]
    rr = rot[ray]
    while np.max(b - a) > tol:
        mid = 0.5 * (a + b)
        gm = g(mid, rr)
        same = np.sign(gm) == np.sign(ga)
        a = np.where(same, mid, a)
        ga = np.where(same, gm, ga)
        b = np.where(same, b, mid)
    return PetalGeometry(m, theta[ray], 0.5 * (a + b), angular_samples)


def containment_check(m: int, samples: int = 4096) -> Tuple[CheckResult, CheckResult]:
    """|H_m| < 1 on |z| = 1 - 1/m and |H_m| > 1 on |z| = 1 + 2/m."""
    from .builder import circle_max, circle_min

    if m < 2:
        raise ValueError("m must be at least 2")
    samples = max(samples, 4096)
    ev = lambda z: H_eval(m, z)  # noqa: E731
    inner, _ = circle_max(ev, math.log1p(-1.0 / m), 2 * m, samples)
    outer, _ = circle_min(ev, math.log1p(2.0 / m), 2 * m, samples)
    n_used = int(max(samples, 16 * m))
    inner_res = CheckResult.compare(
        f"central disk inside |H_{m}|<1", "disk of radius 1-1/m lies in the central component",
        inner, 0.0, n_used,
    )
    outer_res = CheckResult.compare(
        f"outside of |z|=1+2/m has |H_{m}|>1", "exterior of radius 1+2/m lies in the unbounded component",
        0.0, outer, n_used,
    )
    return inner_res, outer_res


def zero_radius(level) -> Tuple[float, float]:
    """log radius of the zeros of F_k, exact and to first order.

    Zeros satisfy ``(z/R_k)^{n_k} = 2``, so ``log|z| = log R_k + ln2/n_k``;
    the first-order form is ``log R_k + log(1 + ln2/n_k)``.
    """
    n = level.n if isinstance(level.n, BigCount) else BigCount.of(level.n)
    q = math.exp(math.log(LN2) - n.log_value)
    return level.logR + q, level.logR + math.log1p(q)
