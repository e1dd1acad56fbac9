"""The radius ladder R_k, the factors F_k and truncated evaluation of f.

``F_k(z) = (1 - (z/R_k)^{n_k} / 2)^{l_k}`` and ``f_k = F_0 F_1 ... F_k``.
The ladder starts at ``R_1 = 2R`` and continues with
``R_{k+1} = max |f_k|`` on the circle ``|z| = 2R_k``.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Union

import numpy as np

from .errors import (
    DepthCapped,
    OutOfRange,
    RangeExhausted,
    TolUnreachable,
    ValidationFailure,
)
from .extrange import (
    DOMINANCE,
    LN2,
    BigCount,
    LogComplex,
    ModInterval,
    lc_add,
    lc_mul,
    lc_pow,
    mi_mul,
    mi_one_minus_half,
    mi_pow,
)
from .seedpoly import F0_eval, F0_second_derivative_at_zero, HeadParams, PolySpec

log = logging.getLogger(__name__)

LOG_CAP = 1e300
FORMAT_VERSION = 1
Value = Union[LogComplex, ModInterval]


def thread_count() -> int:
    try:
        n = int(os.environ.get("TRANSCEND_THREADS", "0"))
    except ValueError:
        n = 0
    cpus = os.cpu_count() or 1
    return max(1, min(n, cpus) if n > 0 else cpus)


# ---------------------------------------------------------------------------
# sequence rules
# ---------------------------------------------------------------------------

N_KINDS = ("constant", "power", "tower", "logpower")
L_KINDS = ("one", "maxlog")


def _floor_exp(logx: float) -> BigCount:
    """floor(e^logx), tolerating round-off just below an integer."""
    return BigCount.from_log(logx)


@dataclass(frozen=True)
class SequenceRule:
    """How n_k and l_k are chosen from log R_k.

    * constant c: n_k = c
    * power s:    n_k = floor(R_k^s)
    * tower:      n_k = floor(R_k)^k
    * logpower s: n_k = floor((log R_k)^s)
    """

    n_kind: str = "constant"
    n_param: float = 8.0
    l_kind: str = "one"

    def __post_init__(self):
        if self.n_kind not in N_KINDS:
            raise ValueError(f"unknown n rule {self.n_kind!r}")
        if self.l_kind not in L_KINDS:
            raise ValueError(f"unknown l rule {self.l_kind!r}")

    def raw_n(self, k: int, logR: float) -> BigCount:
        if self.n_kind == "constant":
            return BigCount.of(int(self.n_param))
        if self.n_kind == "power":
            return _floor_exp(self.n_param * logR)
        if self.n_kind == "logpower":
            return _floor_exp(self.n_param * math.log(logR))
        # tower
        base = _floor_exp(logR)
        if base.is_exact:
            b = base.exact_value
            if k * math.log(b) < math.log(2.0**53) - 1e-9:
                return BigCount.of(b**k)
            return BigCount.from_log(k * math.log(b))
        return BigCount.from_log(k * base.log_value)

    def n(self, k: int, logR: float) -> BigCount:
        n = self.raw_n(k, logR)
        if n.is_exact and n.exact_value < 8:
            log.warning("rule gave n_%d = %d < 8; clamped to 8", k, n.exact_value)
            return BigCount.of(8)
        return n

    def l(self, k: int, logR: float) -> int:
        if self.l_kind == "one":
            return 1
        return max(1, int(math.floor(logR / LN2)))

    def to_json(self) -> dict:
        return {"n_kind": self.n_kind, "n_param": float.hex(float(self.n_param)), "l_kind": self.l_kind}

    @classmethod
    def from_json(cls, d: dict) -> "SequenceRule":
        return cls(d["n_kind"], float.fromhex(d["n_param"]), d["l_kind"])

    def describe(self) -> str:
        if self.n_kind == "tower":
            return f"tower, l={self.l_kind}"
        return f"{self.n_kind} {self.n_param:g}, l={self.l_kind}"


# ---------------------------------------------------------------------------
# ledger types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Level:
    k: int
    logR: float
    n: BigCount
    l: int
    m_k: BigCount
    logC: Optional[float]
    signC: int

    @property
    def m_prev(self) -> BigCount:
        """m_{k-1} = m_k - n_k l_k, as a BigCount (exact when m_k is)."""
        nl = self.n * self.l
        if self.m_k.is_exact and nl.is_exact:
            return BigCount.of(self.m_k.exact_value - nl.exact_value)
        if nl.is_exact or self.m_k.log_value - nl.log_value > 40:
            return BigCount.from_log(self.m_k.log_value + math.log1p(-math.exp(nl.log_value - self.m_k.log_value)))
        raise RangeExhausted("m_{k-1} is not resolvable from log-only counts")

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "logR": float.hex(self.logR),
            "n": self.n.to_json(),
            "l": str(self.l),
            "m_k": self.m_k.to_json(),
            "logC": None if self.logC is None else float.hex(self.logC),
            "signC": self.signC,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Level":
        return cls(
            int(d["k"]), float.fromhex(d["logR"]), BigCount.from_json(d["n"]), int(d["l"]),
            BigCount.from_json(d["m_k"]),
            None if d["logC"] is None else float.fromhex(d["logC"]), int(d["signC"]),
        )


@dataclass
class Construction:
    spec: PolySpec
    head: HeadParams
    rule: SequenceRule
    levels: List[Level]
    logR_next: Optional[float]
    capped: bool = False
    samples: int = 4096
    meta: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.levels)

    def logR(self, k: int) -> Optional[float]:
        """log R_k for 1 <= k <= K+1 (None when R_{K+1} is unknown)."""
        if 1 <= k <= self.K:
            return self.levels[k - 1].logR
        if k == self.K + 1:
            return self.logR_next
        raise IndexError(k)

    def level(self, k: int) -> Level:
        return self.levels[k - 1]

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "spec": self.spec.to_json(),
            "head": self.head.to_json(),
            "rule": self.rule.to_json(),
            "samples": self.samples,
            "levels": [lv.to_json() for lv in self.levels],
            "logR_next": None if self.logR_next is None else float.hex(self.logR_next),
            "capped": self.capped,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Construction":
        return cls(
            PolySpec.from_json(d["spec"]),
            HeadParams.from_json(d["head"]),
            SequenceRule.from_json(d["rule"]),
            [Level.from_json(x) for x in d["levels"]],
            None if d["logR_next"] is None else float.fromhex(d["logR_next"]),
            bool(d["capped"]),
            int(d.get("samples", 4096)),
        )


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _inv(z: LogComplex) -> LogComplex:
    return LogComplex(-z.log_mag, -z.arg, z.is_zero)


def _count_log_interval(n: BigCount, x: np.ndarray) -> ModInterval:
    """Interval for n*x (x a log-modulus) when n is known only by its log.

    Products that underflow toward -inf are kept as -inf; an overflow toward
    +inf raises RangeExhausted.
    """
    with np.errstate(over="ignore", divide="ignore"):
        mag = np.exp(n.log_value + np.log(np.abs(x)))
    if np.any(np.isinf(mag) & (x > 0)):
        raise RangeExhausted("power of a log-only count overflowed")
    v = np.sign(x) * mag
    slack = np.abs(v) * (abs(n.log_value) + 2.0) * 2.0**-52
    with np.errstate(invalid="ignore"):
        lo = np.where(np.isinf(v), v, v - slack)
        hi = np.where(np.isinf(v), v, v + slack)
    return ModInterval(np.nextafter(lo, -np.inf), np.nextafter(hi, np.inf))


def Fk_eval(level: Level, z: LogComplex, return_bound: bool = False, base: float = 0.0):
    """F_k(z) = (1 - w/2)^l with w = (z/R_k)^n.

    The point is ``e^base * z``.  Passing ``base = log R_k`` keeps the
    offset of ``z`` from ``R_k`` exact even when ``log R_k`` is so large that
    ``log R_k + log|z|`` would round it away.

    Entries with ``log|w| < -D`` are returned as exactly 1.  With
    ``return_bound`` a second array gives the bound ``l |w| / 2`` on the
    deviation from 1 that was dropped there (zero elsewhere).
    """
    x = (base - level.logR) + z.log_mag
    if level.n.is_exact:
        w = lc_pow(LogComplex(x, z.arg, z.is_zero), level.n)
        tiny = (w.log_abs() < -DOMINANCE)
        half_w = LogComplex(w.log_mag - LN2, w.arg + math.pi, w.is_zero | tiny)
        t = lc_add(LogComplex(np.zeros(w.shape)), half_w)
        out = lc_pow(t, BigCount.of(level.l))
        bound = level.l * np.exp(np.where(tiny & ~w.is_zero, w.log_mag - LN2, -np.inf))
    else:
        x = np.where(z.is_zero, -1.0, x)
        w = _count_log_interval(level.n, x)
        w = ModInterval(np.where(z.is_zero, -np.inf, w.lo_log), np.where(z.is_zero, -np.inf, w.hi_log))
        out = mi_pow(mi_one_minus_half(w), BigCount.of(level.l))
        bound = np.zeros(w.shape)
    return (out, bound) if return_bound else out


def combine(a: Value, b: Value) -> Value:
    if isinstance(a, LogComplex) and isinstance(b, LogComplex):
        return lc_mul(a, b)
    return mi_mul(a, b)


def f_truncated(c: Construction, z: LogComplex, k: int, base: float = 0.0) -> Value:
    """f_k at the point(s) e^base * z, i.e. F_0 F_1 ... F_k."""
    out: Value = F0_eval(c.head, c.spec, z.scale(base) if base else z)
    for j in range(1, k + 1):
        out = combine(out, Fk_eval(c.level(j), z, base=base))
    return out


def level_index(c: Construction, log_mod) -> np.ndarray:
    """Smallest k with |z| <= 4 R_k (K+1 when beyond the ledger)."""
    edges = np.array([lv.logR + 2 * LN2 for lv in c.levels])
    return np.searchsorted(edges, np.asarray(log_mod, dtype=np.float64), side="left") + 1


def tail_bound(c: Construction, k) -> np.ndarray:
    logR = np.array([lv.logR for lv in c.levels])
    return 8.0 * np.exp(-logR[np.asarray(k) - 1])


def f_eval(c: Construction, z: LogComplex, rel_tol: float = 0.5):
    """Evaluate f through the smallest level k with |z| <= 4 R_k.

    Returns ``(value, tail)`` where ``tail = 8/R_k`` bounds the relative
    error of the dropped factors.  The value is a ModInterval if any entry
    needed a log-only factor.
    """
    lm = z.log_abs()
    ks = level_index(c, lm)
    if np.any(ks > c.K):
        raise OutOfRange("point lies beyond 4 R_K")
    tail = tail_bound(c, ks)
    if np.any(tail > rel_tol):
        raise TolUnreachable(f"tail bound {float(np.max(tail)):.3g} exceeds rel_tol {rel_tol:g}")
    if ks.ndim == 0:
        return f_truncated(c, z, int(ks)), tail
    parts = {}
    for k in np.unique(ks):
        idx = ks == k
        parts[int(k)] = (idx, f_truncated(c, z[idx], int(k)))
    if all(isinstance(v, LogComplex) for _, v in parts.values()):
        lmag = np.zeros(ks.shape)
        arg = np.zeros(ks.shape)
        zero = np.zeros(ks.shape, dtype=bool)
        for idx, v in parts.values():
            lmag[idx], arg[idx], zero[idx] = v.log_mag, v.arg, v.is_zero
        return LogComplex(lmag, arg, zero), tail
    lo = np.zeros(ks.shape)
    hi = np.zeros(ks.shape)
    for idx, v in parts.values():
        iv = v if isinstance(v, ModInterval) else ModInterval.from_logcomplex(v)
        lo[idx], hi[idx] = iv.lo_log, iv.hi_log
    return ModInterval(lo, hi), tail


def epsilon_k(level: Level, C: float = 8.0) -> float:
    """C * (l_k (2/3)^n_k + 1/R_k)."""
    geo = level.l * math.exp(_neg_n_log_threehalves(level.n))
    return C * (geo + math.exp(-level.logR))


def _neg_n_log_threehalves(n: BigCount) -> float:
    if n.is_exact:
        return -n.exact_value * math.log(1.5)
    return -math.inf if n.log_value > 700 else -math.exp(n.log_value) * math.log(1.5)


def normal_form(c: Construction, k: int, z: LogComplex) -> LogComplex:
    """C_k (1/z)^{n_k l_k - m_{k-1}} H_{n_k}(z/R_k)^{l_k} for exact n_k."""
    from .chebgeom import H_eval

    lv = c.level(k)
    if lv.logC is None:
        raise RangeExhausted("normal-form constant is out of range")
    e = lv.n.require_exact() * lv.l - lv.m_prev.require_exact()
    zp = lc_pow(_inv(z), e) if e >= 0 else lc_pow(z, -e)
    h = H_eval(lv.n, z.scale(-lv.logR))
    const = LogComplex(lv.logC, 0.0 if lv.signC > 0 else math.pi)
    return lc_mul(lc_mul(const, zp), lc_pow(h, lv.l))


# ---------------------------------------------------------------------------
# circle extremes
# ---------------------------------------------------------------------------

_CHUNK = 1 << 18
_TOP = 8


def _reduce_log(v: Value, mode: str) -> np.ndarray:
    if isinstance(v, LogComplex):
        return v.log_abs()
    return v.hi_log if mode == "max" else v.lo_log


def circle_extreme(evaluator: Callable[[LogComplex], Value], log_radius: float,
                   degree_hint=0, samples: int = 4096, mode: str = "max",
                   tol: float = 1e-12):
    """Extreme of log|evaluator| on the circle |z| = e^log_radius.

    Samples ``max(samples, 8 min(degree_hint, 10^7))`` equispaced angles,
    then refines the best ``8`` local extremes by golden-section search on
    the angle.  Returns ``(log_value, angle)``.
    """
    if samples < 4096:
        raise ValueError("samples must be at least 4096")
    if mode not in ("max", "min"):
        raise ValueError(mode)
    deg = BigCount.of(degree_hint) if not isinstance(degree_hint, BigCount) else degree_hint
    deg_f = deg.as_float() if deg.is_exact else 1e7
    S = int(max(samples, 8 * min(deg_f, 1e7)))
    step = 2.0 * math.pi / S
    sgn = 1.0 if mode == "max" else -1.0

    def values(theta):
        return sgn * _reduce_log(evaluator(LogComplex(log_radius, theta)), mode)

    def chunk(start: int):
        stop = min(start + _CHUNK, S)
        idx = np.arange(start - 1, stop + 1)
        v = values(idx * step)
        core = v[1:-1]
        peak = (core >= v[:-2]) & (core >= v[2:])
        cand = np.nonzero(peak)[0]
        if cand.size == 0:
            cand = np.array([int(np.argmax(core))])
        vals = core[cand]
        order = np.lexsort((cand, -vals))[:_TOP]
        return [(float(vals[i]), start + int(cand[i])) for i in order]

    starts = range(0, S, _CHUNK)
    threads = thread_count()
    if threads > 1 and S > _CHUNK:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(chunk, starts))
    else:
        parts = [chunk(s) for s in starts]
    cands = sorted((c for p in parts for c in p), key=lambda t: (-t[0], t[1]))[:_TOP]

    # vectorized golden section on [theta - step, theta + step]
    centers = np.array([i for _, i in cands], dtype=np.float64) * step
    a = centers - step
    b = centers + step
    g = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - g * (b - a)
    x2 = a + g * (b - a)
    f1, f2 = values(x1), values(x2)
    while np.max(b - a) > tol:
        left = f1 >= f2
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        nx1 = np.where(left, b - g * (b - a), x2)
        nx2 = np.where(left, x1, a + g * (b - a))
        newpts = np.where(left, nx1, nx2)
        fn = values(newpts)
        f1, f2 = np.where(left, fn, f2), np.where(left, f1, fn)
        x1, x2 = nx1, nx2
    mids = 0.5 * (a + b)
    fm = values(mids)
    best_v = np.concatenate([[c[0] for c in cands], fm])
    best_t = np.concatenate([centers, mids])
    i = int(np.lexsort((best_t, -best_v))[0])
    return float(sgn * best_v[i]), float(np.remainder(best_t[i], 2.0 * math.pi))


def circle_max(evaluator, log_radius, degree_hint=0, samples=4096):
    return circle_extreme(evaluator, log_radius, degree_hint, samples, "max")


def circle_min(evaluator, log_radius, degree_hint=0, samples=4096):
    return circle_extreme(evaluator, log_radius, degree_hint, samples, "min")


def effective_degree(head: HeadParams, levels: List[Level], log_radius: float,
                     base: float = 0.0) -> int:
    """Oscillation count of |f_k| on the circle of log radius base + log_radius.

    A factor F_j whose ``|w_j| = (|z|/R_j)^{n_j}`` lies outside
    ``[e^-D, e^D]`` has a modulus that is constant around the circle to
    double precision, and so does not add to the degree.  Log-only factors
    never do.
    """
    d = head.m
    for lv in levels:
        if not lv.n.is_exact:
            continue
        x = (base - lv.logR) + log_radius
        if abs(lv.n.exact_value * x) > DOMINANCE + math.log(lv.l) + 1.0:
            continue
        nl = lv.n * lv.l
        if not nl.is_exact:
            return 10**7
        d += nl.exact_value
    return d


# ---------------------------------------------------------------------------
# build
# ---------------------------------------------------------------------------


def validate_params(spec: PolySpec, head: HeadParams) -> List[str]:
    """Violated explicit constraints (empty list when all hold)."""
    bad = []
    if head.m < 13:
        bad.append(f"m = k0^N = {head.m} must be >= 13")
    if not head.lam > 2:
        bad.append(f"lambda = {head.lam:g} must be > 2")
    if head.R < 32:
        bad.append(f"R = {head.R:g} must be >= 32")
    if head.N < 4:
        bad.append(f"N = {head.N} must be >= 4")
    if F0_second_derivative_at_zero(head, spec) <= math.log(2.0):
        bad.append("|F_0''(0)| must exceed 2")
    return bad


def level_constant(head: HeadParams, prev: List[Level], k: int, logR: float,
                   n: BigCount, l: int) -> Optional[float]:
    """log |C_k|, or None if it leaves the double range."""
    try:
        total = head.log_lead - (sum(lv.l for lv in prev) + l) * LN2
        total += _count_log_product(n * l, logR)
        for lv in prev:
            total -= _count_log_product(lv.n * lv.l, lv.logR)
    except RangeExhausted:
        return None
    return total if math.isfinite(total) and abs(total) < 1e306 else None


def _count_log_product(n: BigCount, x: float) -> float:
    if n.is_exact:
        return n.exact_value * x
    v = n.log_value + math.log(abs(x))
    if v > 700:
        raise RangeExhausted("count times log overflowed")
    return math.copysign(math.exp(v), x)


def build(spec: PolySpec, head: HeadParams, rule: SequenceRule, K: int,
          samples: int = 4096, strict: bool = False) -> Construction:
    """Run the construction to depth K (or until log R_{k+1} leaves range).

    A capped construction is returned with ``capped=True``; with
    ``strict=True`` DepthCapped is raised instead, carrying it as
    ``err.construction``.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    bad = validate_params(spec, head)
    if bad:
        raise ValidationFailure(bad)
    levels: List[Level] = []
    logR = math.log(2.0 * head.R)
    m_k = BigCount.of(head.m)
    capped = False
    logR_next: Optional[float] = None
    for k in range(1, K + 1):
        n = rule.n(k, logR)
        l = rule.l(k, logR)
        if l > logR / LN2 + 1e-12:
            raise ValidationFailure([f"l_{k} = {l} exceeds log R_{k} / log 2"])
        logC = level_constant(head, levels, k, logR, n, l)
        m_k = m_k + n * l
        sign = -1 if sum(lv.l for lv in levels) % 2 else 1
        levels.append(Level(k, logR, n, l, m_k, logC, sign))
        partial = Construction(spec, head, rule, list(levels), None, False, samples)
        try:
            nxt, _ = circle_max(lambda z: f_truncated(partial, z, k, base=logR), LN2,
                                effective_degree(head, levels, LN2, logR), samples)
        except RangeExhausted:
            nxt = math.inf
        if not (nxt <= LOG_CAP):
            capped = True
            logR_next = None
            break
        logR_next = nxt
        logR = nxt
    c = Construction(spec, head, rule, levels, logR_next, capped, samples)
    if capped:
        log.info("construction capped at depth %d", c.K)
        if strict:
            err = DepthCapped(f"log R_{c.K + 1} exceeds {LOG_CAP:g}")
            err.construction = c
            raise err
    return c
