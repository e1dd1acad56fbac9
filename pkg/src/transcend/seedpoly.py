"""The seed polynomial p(z) = prod (z^2 - a_i^2) and the head factor F_0.

``F_0 = p_lambda^N`` is the N-fold iterate of ``p_lambda = lambda * p``.  It
has degree ``m = k0^N`` and leading coefficient ``lambda^m_star``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from .errors import ConvergenceFailure, NotFound
from .extrange import LogComplex, lc_add, lc_mul, lc_pow


@dataclass(frozen=True)
class PolySpec:
    """Positive, strictly increasing roots a_1 < ... < a_k' of the seed."""

    roots: tuple

    def __init__(self, roots: Sequence[float]):
        r = tuple(float(a) for a in roots)
        if not r:
            raise ValueError("PolySpec needs at least one root")
        if any(a <= 0 for a in r) or any(b <= a for a, b in zip(r, r[1:])):
            raise ValueError("roots must be positive and strictly increasing")
        object.__setattr__(self, "roots", r)
        # p(0) != 0 and p''(0) != 0; p'(0) = 0 holds by evenness
        if p_native(self, 0.0) == 0 or self.second_derivative_at_zero() == 0:
            raise ValueError("degenerate seed polynomial")

    @property
    def k0(self) -> int:
        return 2 * len(self.roots)

    def coefficients(self) -> np.ndarray:
        """Monic coefficients, highest degree first."""
        return np.poly(np.concatenate([np.array(self.roots), -np.array(self.roots)])).real

    def second_derivative_at_zero(self) -> float:
        # p(z) = prod(z^2 - a_i^2); p''(0) = 2 * sum_i prod_{j != i} (-a_j^2)
        sq = [-(a * a) for a in self.roots]
        total = 0.0
        for i in range(len(sq)):
            total += math.prod(sq[:i] + sq[i + 1:])
        return 2.0 * total

    def to_json(self) -> dict:
        return {"roots": [float.hex(a) for a in self.roots]}

    @classmethod
    def from_json(cls, d: dict) -> "PolySpec":
        return cls([float.fromhex(a) for a in d["roots"]])


@dataclass(frozen=True)
class HeadParams:
    lam: float
    N: int
    k0: int
    R: float
    R_star: float

    @property
    def m(self) -> int:
        return self.k0**self.N

    @property
    def m_star(self) -> int:
        return sum(self.k0**j for j in range(self.N))

    @property
    def log_lead(self) -> float:
        """log of the leading coefficient lambda^m_star."""
        return self.m_star * math.log(self.lam)

    def to_json(self) -> dict:
        return {
            "lambda": float.hex(self.lam),
            "N": self.N,
            "k0": self.k0,
            "R": float.hex(self.R),
            "R_star": float.hex(self.R_star),
        }

    @classmethod
    def from_json(cls, d: dict) -> "HeadParams":
        return cls(
            float.fromhex(d["lambda"]), int(d["N"]), int(d["k0"]),
            float.fromhex(d["R"]), float.fromhex(d["R_star"]),
        )


def p_native(spec: PolySpec, z, lam: float = 1.0):
    z = np.asarray(z)
    out = lam * np.ones_like(z, dtype=np.result_type(z, float))
    for a in spec.roots:
        out = out * (z * z - a * a)
    return out


def p_eval(spec: PolySpec, lam: float, z: LogComplex) -> LogComplex:
    """lambda * prod (z^2 - a_i^2) in log-polar form."""
    z2 = lc_pow(z, 2)
    out = LogComplex(math.log(lam), 0.0)
    for a in spec.roots:
        out = lc_mul(out, lc_add(z2, LogComplex(2.0 * math.log(a), math.pi)))
    return out


def F0_eval(head: HeadParams, spec: PolySpec, z: LogComplex) -> LogComplex:
    for _ in range(head.N):
        z = p_eval(spec, head.lam, z)
    return z


def leading_ratio_log(head: HeadParams, spec: PolySpec, log_r: float, samples: int) -> np.ndarray:
    """log |F_0(z) / (lambda^m_star z^m)| at equispaced points of |z| = e^log_r."""
    theta = 2.0 * math.pi * np.arange(samples) / samples
    v = F0_eval(head, spec, LogComplex(log_r, theta))
    return v.log_abs() - (head.log_lead + head.m * log_r)


def find_leading_radius(spec: PolySpec, lam: float, N: int, samples: int = 4096,
                        bounds=(0.5, 1.5), start: float = 32.0,
                        max_radius: float = 2.0**60) -> float:
    """Smallest R in start, 2*start, ... with the leading ratio inside
    ``bounds`` on circles of radius R, 2R and 4R."""
    if samples < 1024:
        raise ValueError("samples must be at least 1024")
    probe = HeadParams(lam, N, spec.k0, start, 0.0)
    lo, hi = math.log(bounds[0]), math.log(bounds[1])
    R = float(start)
    while R <= max_radius:
        ok = True
        for mult in (1.0, 2.0, 4.0):
            q = leading_ratio_log(probe, spec, math.log(R * mult), samples)
            if q.min() < lo or q.max() > hi:
                ok = False
                break
        if ok:
            return R
        R *= 2.0
    raise NotFound(f"no radius up to {max_radius:g} satisfies the leading-term bound")


def find_escape_radius(spec: PolySpec, samples: int = 1024, max_radius: float = 2.0**60) -> float:
    """Smallest power of two r >= 2 with |p(z)| > |z|^k0 / 2 on radii r, 2r, 4r."""
    theta = 2.0 * math.pi * np.arange(samples) / samples
    r = 2.0
    while r <= max_radius:
        ok = True
        for mult in (1.0, 2.0, 4.0):
            lr = math.log(r * mult)
            v = p_eval(spec, 1.0, LogComplex(lr, theta)).log_abs()
            if np.any(v <= spec.k0 * lr - math.log(2.0)):
                ok = False
                break
        if ok:
            return r
        r *= 2.0
    raise NotFound("no escape radius found")


def make_head(spec: PolySpec, lam: float = 10.0, N: int = 4, R: float | None = None,
              samples: int = 4096) -> HeadParams:
    if R is None:
        R = find_leading_radius(spec, lam, N, samples)
    return HeadParams(float(lam), int(N), spec.k0, float(R), find_escape_radius(spec))


def p_critical_points(spec: PolySpec) -> list:
    """Roots of p'.  Since p(z) = P(z^2), p'(z) = 2z P'(z^2): the critical
    points are 0 and the square roots of the roots of P'."""
    if spec.k0 > 64:
        raise ValueError("critical points only supported for k0 <= 64")
    P = np.poly(np.array(spec.roots) ** 2)
    u_roots = np.roots(np.polyder(P)) if len(P) > 2 else np.array([])
    pts = [0.0 + 0.0j]
    for u in u_roots:
        s = np.sqrt(complex(u))
        pts.extend([s, -s])
    coeffs = spec.coefficients()
    d1 = np.polyder(coeffs)
    d2 = np.polyder(d1)
    scale = float(np.max(np.abs(coeffs)))
    out = []
    for z in pts:
        if z != 0:
            for _ in range(50):
                dz = np.polyval(d1, z) / np.polyval(d2, z)
                z = z - dz
                if abs(dz) <= 1e-15 * max(1.0, abs(z)):
                    break
        if abs(np.polyval(d1, z)) > 1e-8 * scale:
            raise ConvergenceFailure(f"critical point {z} did not converge")
        if abs(z.imag) < 1e-14 * max(1.0, abs(z)):
            z = complex(z.real, 0.0)
        out.append(complex(z))
    return sorted(out, key=lambda w: (w.real, w.imag))


# ---------------------------------------------------------------------------
# high-precision jets, used by critical-point searches
# ---------------------------------------------------------------------------


def p_jet_mp(spec: PolySpec, lam, z):
    """(p_lambda(z), p_lambda'(z), p_lambda''(z)) in mpmath arithmetic."""
    v, d1, d2 = mpmath.mpf(lam), mpmath.mpf(0), mpmath.mpf(0)
    for a in spec.roots:
        q, q1, q2 = z * z - mpmath.mpf(a) ** 2, 2 * z, mpmath.mpf(2)
        v, d1, d2 = v * q, d1 * q + v * q1, d2 * q + 2 * d1 * q1 + v * q2
    return v, d1, d2


def F0_jet_mp(head: HeadParams, spec: PolySpec, z):
    """Value and first two derivatives of F_0 at z via the chain rule."""
    v, d1, d2 = z, mpmath.mpf(1), mpmath.mpf(0)
    for _ in range(head.N):
        p0, p1, p2 = p_jet_mp(spec, head.lam, v)
        v, d1, d2 = p0, p1 * d1, p2 * d1 * d1 + p1 * d2
    return v, d1, d2


def F0_second_derivative_at_zero(head: HeadParams, spec: PolySpec) -> float:
    """log |F_0''(0)|."""
    with mpmath.workdps(30):
        _, _, d2 = F0_jet_mp(head, spec, mpmath.mpf(0))
        return float(mpmath.log(abs(d2))) if d2 != 0 else -math.inf
