"""Numerical verification of the growth, mapping and geometry inequalities.

Every comparison is made in log form and produces a :class:`CheckResult`.
Sampled band checks deduct the truncation bound ``8/R_k`` adversarially
before the verdict, so a pass means every sampled point passes even if the
dropped tail of the product conspired against it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import mpmath
import numpy as np

from .builder import (
    Construction,
    _count_log_product,
    circle_max,
    circle_min,
    effective_degree,
    f_truncated,
)
from .chebgeom import H_eval, containment_check
from .errors import ConvergenceFailure, InfeasibleDegree, RangeExhausted
from .extrange import LN2, LogComplex, ModInterval
from .result import FAIL, PASS, SKIPPED, CheckResult
from .seedpoly import F0_jet_mp

DEFAULT_SEED = 0x5EED_CAFE
LOG4 = 2.0 * LN2

REF_LADDER = "ladder growth R_{k+1} >= 2 lambda R_k^2 >= 4 R_k^2"
REF_LOWER_A = "ladder lower bound via max|F_0| and min|F_j| (sqrt form)"
REF_LOWER_B = "ladder lower bound via max|F_0| and min|F_j| (product form)"
REF_UPPER = "ladder upper bound R_{k+1} <= 3/2 lambda^m* (2R_k)^{m_k} prod R_j^{-n_j l_j}"
REF_INDEX_RATIO = "degree bound m_{k-2} <= 2 log R_k / log R_{k-1}"
REF_INDEX_LOG2 = "degree bound m_{k-1} <= 2 log R_k / log 2"
REF_ANNULUS = "annulus images: A_{k+1} in f(V_k), inner boundary of V_k into B_k"
REF_BOUNDARY = "boundary images: f(outer boundary of A_k) in B_{k+1}"
REF_B = "band invariance f(B_k) in B_{k+1}"
REF_JULIA = "Julia set in A_k lies in V_k or the rescaled petals"
REF_MINMOD = "minimum modulus on |z| = 2R_k is at least 2^{n_k} (l_k = 1)"
REF_CRIT = "|H_{n_k}(z/R_k)| >= 3/4 at critical points of f in A_k off the petal centers"


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for one named sampling stream."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *stream])
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# annulus system
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnnulusSystem:
    """Log-radius bounds of the annuli A_k, B_k, V_k, U_k and the disk D_1."""

    logR: tuple  # log R_1 ... log R_{K+1} (last may be None)

    @classmethod
    def of(cls, c: Construction) -> "AnnulusSystem":
        return cls(tuple(lv.logR for lv in c.levels) + (c.logR_next,))

    def R(self, k: int) -> Optional[float]:
        return self.logR[k - 1] if 1 <= k <= len(self.logR) else None

    def A(self, k):
        return (self.R(k) - LOG4, self.R(k) + LOG4)

    def B(self, k):
        nxt = self.R(k + 1)
        return (self.R(k) + LOG4, None if nxt is None else nxt - LOG4)

    def V(self, k):
        return (self.R(k) + math.log(1.5), self.R(k) + math.log(2.5))

    def U(self, k):
        return (self.R(k) + math.log(1.25), self.R(k) + math.log(3.0))

    def D1(self):
        return self.R(1) - LOG4

    def tiles(self) -> bool:
        """4 R_k < R_{k+1} / 4 for every consecutive known pair."""
        known = [x for x in self.logR if x is not None]
        return all(b - a > 2 * LOG4 for a, b in zip(known, known[1:]))


# ---------------------------------------------------------------------------
# ladder inequalities
# ---------------------------------------------------------------------------


def check_ladder(c: Construction, allowance: float = 1e-9) -> List[CheckResult]:
    """Growth and degree inequalities for every level with R_{k+1} known.

    ``allowance`` widens each comparison by that relative amount of the
    compared magnitudes, to absorb rounding in the sampled maximum.
    """
    out: List[CheckResult] = []
    head = c.head
    lead = head.log_lead
    m = head.m

    def cmp(name, ref, lhs, rhs):
        slack = allowance * max(abs(lhs), abs(rhs))
        res = CheckResult.compare(name, ref, lhs, rhs)
        if res.verdict == FAIL and res.margin_log + slack >= 0:
            res = CheckResult(name, ref, res.lhs_log, res.rhs_log, res.margin_log, PASS, 0,
                              "within evaluation allowance")
        out.append(res)

    for k in range(1, c.K + 1):
        lv = c.level(k)
        prev = c.levels[: k - 1]
        nxt = c.logR(k + 1)
        try:
            nl_prev = [_count_log_product(p.n * p.l, 1.0) for p in prev]
            nl_k = _count_log_product(lv.n * lv.l, 1.0)
            nlR_prev = sum(_count_log_product(p.n * p.l, p.logR) for p in prev)
        except RangeExhausted:
            out.append(CheckResult.skipped(f"ladder k={k}", REF_LADDER, "counts exceed double range"))
            continue
        S_prev = sum(nl_prev)
        n_l_two_prev = sum(x - 2 * p.l for x, p in zip(nl_prev, prev))
        if nxt is not None:
            cmp(f"R_{k+1} >= 4 R_{k}^2", REF_LADDER, LOG4 + 2 * lv.logR, nxt)
            # sqrt form: 2^{sum (2 n_j - 2) l_j + (n_k - 2) l_k + m - 1} R_k^{S/2 + m}
            e2 = sum(2 * x - 2 * p.l for x, p in zip(nl_prev, prev)) + (nl_k - 2 * lv.l) + m - 1
            low_a = lead + e2 * LN2 + (S_prev / 2 + m) * lv.logR
            cmp(f"R_{k+1} lower bound (sqrt form)", REF_LOWER_A, low_a, nxt)
            # product form
            e2b = m - 1 + n_l_two_prev + (nl_k - 2 * lv.l)
            low_b = lead + e2b * LN2 + (m + S_prev) * lv.logR - nlR_prev
            cmp(f"R_{k+1} lower bound (product form)", REF_LOWER_B, low_b, nxt)
            # (m + S + nl_k)(log 2 + log R_k) - nl_k log R_k, without forming nl_k log R_k
            up = math.log(1.5) + lead + (m + S_prev) * (LN2 + lv.logR) + nl_k * LN2 - nlR_prev
            cmp(f"R_{k+1} upper bound", REF_UPPER, nxt, up)
        if k >= 2:
            S_prev2 = sum(nl_prev[:-1])
            ratio = 2 * lv.logR / c.level(k - 1).logR
            cmp(f"m_{k-2} <= 2 log R_{k}/log R_{k-1}", REF_INDEX_RATIO, math.log(m + S_prev2), math.log(ratio))
            cmp(f"m_{k-1} <= 2 log R_{k}/log 2", REF_INDEX_LOG2, math.log(m + S_prev), math.log(2 * lv.logR / LN2))
    return out


# ---------------------------------------------------------------------------
# sampled image checks
# ---------------------------------------------------------------------------


def _band_results(name, ref, lo_img, hi_img, tail, band, samples, partial=False):
    """Results for an image modulus range [lo_img, hi_img] against a band.

    ``tail`` is the relative truncation bound, deducted on both sides.
    """
    res = []
    lo_b, hi_b = band
    lo_cert = lo_img + math.log1p(-tail)
    hi_cert = hi_img + math.log1p(tail)
    res.append(CheckResult.compare(f"{name} lower", ref, lo_b, lo_cert, samples))
    if hi_b is not None:
        res.append(CheckResult.compare(f"{name} upper", ref, hi_cert, hi_b, samples))
    elif partial:
        res.append(CheckResult.skipped(f"{name} upper", ref, "partial: R_{k+2} beyond the ledger"))
    return res


def check_annulus_maps(c: Construction, samples: int = 4096,
                       levels: Optional[Sequence[int]] = None) -> List[CheckResult]:
    """Image bands of the circles (3/2)R_k, (5/2)R_k, R_k/4 and 4R_k."""
    sysA = AnnulusSystem.of(c)
    out: List[CheckResult] = []
    for k in (levels or range(1, c.K + 1)):
        lv = c.level(k)
        if not lv.n.is_exact:
            out.append(CheckResult.skipped(f"annulus maps k={k}", REF_ANNULUS, "n_k is log-only"))
            continue
        if c.logR(k + 1) is None:
            out.append(CheckResult.skipped(f"annulus maps k={k}", REF_ANNULUS, "R_{k+1} beyond the ledger"))
            continue
        tail = 8.0 * math.exp(-lv.logR)
        Bk = sysA.B(k)
        Bk1 = (sysA.R(k + 1) + LOG4, sysA.R(k + 2) - LOG4 if sysA.R(k + 2) is not None else None)
        partial = sysA.R(k + 2) is None
        ext = {}
        for tau in (1.5, 2.5, 0.25, 4.0):
            ev = lambda z, k=k, lv=lv: f_truncated(c, z, k, base=lv.logR)  # noqa: E731
            lt = math.log(tau)
            deg = effective_degree(c.head, c.levels[:k], lt, lv.logR)
            lo, _ = circle_min(ev, lt, deg, samples)
            hi, _ = circle_max(ev, lt, deg, samples)
            ext[tau] = (lo, hi, max(samples, 8 * min(deg, 10**7)))
        for tau, band, ref in ((1.5, Bk, REF_ANNULUS), (0.25, Bk, REF_BOUNDARY),
                               (2.5, Bk1, REF_ANNULUS), (4.0, Bk1, REF_BOUNDARY)):
            lo, hi, n = ext[tau]
            out += _band_results(f"f(|z|={tau:g}R_{k})", ref, lo, hi, tail, band, n,
                                 partial=band is Bk1 and partial)
        # surjectivity witness: images of the two boundary circles of V_k
        # bracket the annulus A_{k+1}
        gap = max((ext[1.5][1] + math.log1p(tail)) - (sysA.R(k + 1) - LOG4),
                  (sysA.R(k + 1) + LOG4) - (ext[2.5][0] + math.log1p(-tail)))
        out.append(CheckResult.compare(f"V_{k} boundary images bracket A_{k+1}", REF_ANNULUS,
                                       gap, 0.0, ext[1.5][2] + ext[2.5][2]))
    return out


def _eval_sampled(c, k_eval, base, offs, theta, evaluator):
    z = LogComplex(offs, theta)
    if evaluator is not None:
        v = evaluator(z.scale(base))
        tail = 0.0
    else:
        v = f_truncated(c, z, k_eval, base=base)
        tail = 8.0 * math.exp(-c.level(k_eval).logR)
    if isinstance(v, ModInterval):
        return v.lo_log, v.hi_log, tail
    la = v.log_abs()
    return la, la, tail


def check_B_invariance(c: Construction, samples: int = 1000, seed: int = DEFAULT_SEED,
                       evaluator: Optional[Callable] = None,
                       levels: Optional[Sequence[int]] = None) -> List[CheckResult]:
    """Random points of B_k (log-uniform radius, uniform angle) map into B_{k+1}.

    The two boundary circles of B_k are always included.  ``evaluator``
    replaces f (absolute points in, values out) for plumbing tests.
    """
    sysA = AnnulusSystem.of(c)
    out = []
    for k in (levels or range(1, c.K + 1)):
        if k + 1 > c.K or sysA.R(k + 2) is None:
            continue
        lv1 = c.level(k + 1)
        if not lv1.n.is_exact or not c.level(k).n.is_exact:
            out.append(CheckResult.skipped(f"f(B_{k}) in B_{k+1}", REF_B, "n is log-only"))
            continue
        g = rng_for(seed, 2, k)
        a, b = sysA.B(k)
        r = g.uniform(a, b, samples)
        r[:2] = (a, b)
        theta = g.uniform(0.0, 2.0 * math.pi, samples)
        base = lv1.logR
        lo, hi, tail = _eval_sampled(c, k + 1, base, r - base, theta, evaluator)
        band = sysA.B(k + 1)
        lo_c = float(np.min(lo)) + math.log1p(-tail)
        hi_c = float(np.max(hi)) + math.log1p(tail)
        r1 = CheckResult.compare(f"f(B_{k}) in B_{k+1} lower", REF_B, band[0], lo_c, samples)
        r2 = CheckResult.compare(f"f(B_{k}) in B_{k+1} upper", REF_B, hi_c, band[1], samples)
        worst = r1 if r1.margin_log <= r2.margin_log else r2
        out.append(CheckResult(f"f(B_{k}) in B_{k+1}", REF_B, worst.lhs_log, worst.rhs_log,
                               worst.margin_log, worst.verdict, samples))
    return out


def julia_free_regions(c: Construction, k: int):
    """Log-radius intervals of A_k outside V_k and the petal annulus."""
    lv = c.level(k)
    n = lv.n.exact_value
    R = lv.logR
    petal = (R + math.log1p(-1.0 / n), R + math.log1p(2.0 / n))
    return {
        "inner": (R - LOG4, petal[0]),
        "middle": (petal[1], R + math.log(1.5)),
        "outer": (R + math.log(2.5), R + LOG4),
    }


def check_julia_localization(c: Construction, samples: int = 4096, seed: int = DEFAULT_SEED,
                             levels: Optional[Sequence[int]] = None) -> List[CheckResult]:
    """Points of A_k off V_k and the petal annulus map into B_k or B_{k+1}.

    Per level: one overall result (B_k union B_{k+1}); the inner region must
    land in B_k and the outer region in B_{k+1}.
    """
    sysA = AnnulusSystem.of(c)
    out = []
    for k in (levels or range(1, c.K + 1)):
        if k + 1 > c.K:
            continue
        lv = c.level(k)
        if not lv.n.is_exact:
            out.append(CheckResult.skipped(f"Julia localization k={k}", REF_JULIA, "n_k is log-only"))
            continue
        regions = julia_free_regions(c, k)
        widths = np.array([max(0.0, b - a) for a, b in regions.values()])
        g = rng_for(seed, 3, k)
        counts = np.floor(widths / widths.sum() * samples).astype(int)
        counts[0] += samples - counts.sum()
        Bk, Bk1 = sysA.B(k), sysA.B(k + 1)
        worst_all = math.inf
        region_res = []
        for (name, (a, b)), cnt in zip(regions.items(), counts):
            if cnt <= 0:
                continue
            r = g.uniform(a, b, cnt)
            theta = g.uniform(0.0, 2.0 * math.pi, cnt)
            lo, hi, tail = _eval_sampled(c, k, lv.logR, r - lv.logR, theta, None)
            lo = lo + math.log1p(-tail)
            hi = hi + math.log1p(tail)

            def band_margin(band):
                m = np.minimum(lo - band[0], band[1] - hi if band[1] is not None else np.inf)
                return m

            m_k = band_margin(Bk)
            m_k1 = band_margin(Bk1) if Bk1[1] is not None else np.minimum(lo - Bk1[0], np.inf)
            either = np.maximum(m_k, m_k1)
            worst_all = min(worst_all, float(np.min(either)))
            if name == "inner":
                region_res.append(CheckResult.compare(
                    f"inner part of A_{k} maps into B_{k}", REF_JULIA, -float(np.min(m_k)), 0.0, int(cnt)))
            elif name == "outer":
                region_res.append(CheckResult.compare(
                    f"outer part of A_{k} maps into B_{k+1}", REF_JULIA, -float(np.min(m_k1)), 0.0, int(cnt)))
        out.append(CheckResult.compare(f"Julia localization k={k}", REF_JULIA, -worst_all, 0.0, samples))
        out += region_res
    return out


def check_min_modulus(c: Construction, samples: int = 4096,
                      levels: Optional[Sequence[int]] = None) -> List[CheckResult]:
    out = []
    for k in (levels or range(1, c.K + 1)):
        lv = c.level(k)
        name = f"min |f| on |z|=2R_{k} >= 2^n_{k}"
        if lv.l != 1:
            out.append(CheckResult.skipped(name, REF_MINMOD, "requires l_k = 1"))
            continue
        if not lv.n.is_exact:
            out.append(CheckResult.skipped(name, REF_MINMOD, "n_k is log-only"))
            continue
        ev = lambda z, k=k, lv=lv: f_truncated(c, z, k, base=lv.logR)  # noqa: E731
        deg = effective_degree(c.head, c.levels[:k], LN2, lv.logR)
        lo, _ = circle_min(ev, LN2, deg, samples)
        lo += math.log1p(-8.0 * math.exp(-lv.logR))
        out.append(CheckResult.compare(name, REF_MINMOD, lv.n.exact_value * LN2, lo,
                                       max(samples, 8 * min(deg, 10**7))))
    return out


# ---------------------------------------------------------------------------
# growth
# ---------------------------------------------------------------------------


def growth_order(c: Construction):
    """Per level: log log M(2R_k) / log 2R_k and the lower estimate
    log(n_k log 2) / log 2R_k from the minimum modulus bound.

    Entries are NaN where R_{k+1} is unknown.
    """
    rho_hat, rho_lower = [], []
    for k in range(1, c.K + 1):
        lv = c.level(k)
        nxt = c.logR(k + 1)
        d = LN2 + lv.logR
        rho_hat.append(math.log(nxt) / d if nxt is not None else math.nan)
        rho_lower.append((lv.n.log_value + math.log(LN2)) / d)
    return rho_hat, rho_lower


def liminf_criterion(c: Construction) -> List[float]:
    """log log M(2R_k) / log log 2R_k per level (NaN where unknown)."""
    out = []
    for k in range(1, c.K + 1):
        nxt = c.logR(k + 1)
        lv = c.level(k)
        out.append(math.log(nxt) / math.log(LN2 + lv.logR) if nxt is not None else math.nan)
    return out


# ---------------------------------------------------------------------------
# critical points
# ---------------------------------------------------------------------------


def _logderiv(c: Construction, k: int, z):
    """g = f_k'/f_k and g' at z (mpmath)."""
    v, d1, d2 = F0_jet_mp(c.head, c.spec, z)
    g = d1 / v
    gp = (d2 * v - d1 * d1) / (v * v)
    for lv in c.levels[:k]:
        n = lv.n.exact_value
        w = (z / mpmath.exp(lv.logR)) ** n
        t = 2 - w
        g += -lv.l * n * w / (z * t)
        gp += -lv.l * n * w * ((n - 1) * t + n * w) / (z * z * t * t)
    return g, gp


def critical_points_in_annulus(c: Construction, k: int, dps: int = 40, max_iter: int = 80):
    """Critical points of f_k in A_k, found by Newton on f_k'/f_k.

    Seeds come from the normal form (the n_k points where u^n = v with
    v = (2s + 2nl)/(s + 2nl), s = m_{k-1} - n_k l_k) plus rings of seeds
    across A_k.  Returns the points scaled by 1/R_k, as complex numbers,
    so that R_k itself never has to fit in a double.
    """
    lv = c.level(k)
    if not lv.n.is_exact or not lv.m_k.is_exact:
        raise InfeasibleDegree("critical points need exact degrees")
    if lv.m_k.exact_value > 2000:
        raise InfeasibleDegree(f"m_{k} = {lv.m_k.exact_value} exceeds 2000")
    n, l = lv.n.exact_value, lv.l
    s = lv.m_prev.exact_value - n * l
    seeds = []
    v = (2 * s + 2 * n * l) / (s + 2 * n * l)
    if v > 0:
        rad = v ** (1.0 / n)
        seeds += [rad * np.exp(1j * (2 * math.pi * j / n)) for j in range(n)]
    for tau in (0.3, 0.6, 0.9, 1.1, 1.3, 1.7, 2.2, 3.0, 3.7):
        cnt = 2 * n
        seeds += [tau * np.exp(1j * (2 * math.pi * (j + 0.5) / cnt)) for j in range(cnt)]
    found = []
    with mpmath.workdps(dps):
        R = mpmath.exp(lv.logR)
        for u0 in seeds:
            z = mpmath.mpc(u0) * R
            ok = False
            for _ in range(max_iter):
                g, gp = _logderiv(c, k, z)
                if gp == 0:
                    break
                dz = g / gp
                z = z - dz
                if abs(z) > 8 * R or abs(z) < R / 16:
                    break
                if abs(dz) <= 1e-25 * abs(z):
                    ok = True
                    break
            if not ok:
                continue
            g, _ = _logderiv(c, k, z)
            if abs(g * z) > 1e-15:
                continue
            u = complex(z / R)
            if not (0.25 <= abs(u) <= 4.0):
                continue
            if any(abs(u - q) <= 1e-9 for q in found):
                continue
            found.append(u)
    if not found:
        raise ConvergenceFailure(f"no critical points located in A_{k}")
    return sorted(found, key=lambda q: (round(abs(q), 9), math.atan2(q.imag, q.real)))


def check_critical_H_bound(c: Construction, k: int) -> List[CheckResult]:
    lv = c.level(k)
    name = f"|H| >= 3/4 at critical points in A_{k}"
    if not lv.n.is_exact:
        return [CheckResult.skipped(name, REF_CRIT, "n_k is log-only")]
    pts = critical_points_in_annulus(c, k)
    n = lv.n.exact_value
    hs = np.array([abs(H_eval(n, LogComplex.from_complex(u)).to_complex()) for u in pts])
    keep = hs > 1e-6  # petal centers (H = 0) are handled separately
    worst = float(np.min(np.log(hs[keep]))) if keep.any() else math.inf
    res = CheckResult.compare(name, REF_CRIT, math.log(0.75), worst, int(keep.sum()))
    count = CheckResult.compare(f"critical point count in A_{k} <= n_k l_k", REF_CRIT,
                                math.log(max(1, int(keep.sum()))), math.log(n * lv.l), int(keep.sum()))
    return [res, count]


# ---------------------------------------------------------------------------
# suite
# ---------------------------------------------------------------------------


def run_suite(c: Construction, samples: int = 4096, b_samples: int = 1000,
              seed: int = DEFAULT_SEED, cheb_ms: Sequence[int] = (8, 16, 32)) -> List[CheckResult]:
    results = check_ladder(c)
    results += check_annulus_maps(c, samples)
    results += check_B_invariance(c, b_samples, seed)
    results += check_julia_localization(c, samples, seed)
    results += check_min_modulus(c, samples)
    for m in cheb_ms:
        results += list(containment_check(m, samples))
    lv1 = c.level(1)
    if lv1.n.is_exact and lv1.m_k.is_exact and lv1.m_k.exact_value <= 2000:
        results += check_critical_H_bound(c, 1)
    return results


def summarize(results: Sequence[CheckResult]) -> dict:
    return {
        "pass": sum(r.verdict == PASS for r in results),
        "fail": sum(r.verdict == FAIL for r in results),
        "skipped": sum(r.verdict == SKIPPED for r in results),
    }


def report_json(results: Sequence[CheckResult], meta: dict) -> str:
    doc = {"format_version": 1, "config": meta, "summary": summarize(results),
           "results": [r.to_json() for r in results]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def format_table(results: Sequence[CheckResult]) -> str:
    w = max([len(r.name) for r in results] + [5])
    lines = [f"{'check':<{w}}  {'margin':>14}  verdict   reference"]
    for r in results:
        margin = "-" if math.isnan(r.margin_log) else f"{r.margin_log:14.6g}"
        lines.append(f"{r.name:<{w}}  {margin:>14}  {r.verdict:<8}  {r.lemma_ref}")
    return "\n".join(lines)
