"""Extended-range complex arithmetic in log-polar form.

Values of the constructed entire function grow doubly exponentially, so every
complex number is carried as ``(log|z|, arg z)``.  All containers here hold
numpy arrays (0-d for scalars) and every operation broadcasts, which is what
lets the sampling checks and the renderer evaluate whole circles or pixel
grids at once.

Three types live here:

* :class:`LogComplex`: a complex value (or array) with a zero mask.
* :class:`ModInterval`: bounds on ``log|z|`` when the argument is unknown,
  padded outward by one ulp per operation.
* :class:`BigCount`: a nonnegative integer that may only be known by its log.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import mpmath
import numpy as np

from .errors import IndeterminateSign, LogOnlyError, RangeExhausted, ZeroToLogOnlyPower

#: Adding a term smaller than the other by a factor e^-40 is a no-op.
DOMINANCE = 40.0
#: Counts at or above this are stored log-only (n*arg would be meaningless).
EXACT_LIMIT = 2**53

PI = math.pi
TWO_PI = 2.0 * math.pi
LN2 = math.log(2.0)

with mpmath.workprec(200):
    _tp = 2 * mpmath.pi
    _C1 = round(float(_tp) * 2**24) / 2**24
    _C2 = round(float((_tp - _C1) * 2**50)) / 2**50
    _C3 = float(_tp - _C1 - _C2)
del _tp

_SPLITTER = 134217729.0  # 2**27 + 1


def normalize_arg(a):
    """Map angles into (-pi, pi]; angles already in range are left untouched."""
    a = np.asarray(a, dtype=np.float64)
    r = PI - np.remainder(PI - a, TWO_PI)
    r = np.where(r <= -PI, PI, r)
    return np.where((a > -PI) & (a <= PI), a, r)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_product(a, b):
    """Dekker's error-free product: a*b == p + e exactly (barring overflow)."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _scaled_angle(n: float, arg):
    # n*arg mod 2pi using a compensated product and a three-part 2pi.
    p, e = two_product(np.float64(n), arg)
    k = np.rint(p / TWO_PI)
    r = ((p - k * _C1) - k * _C2) - k * _C3 + e
    return normalize_arg(r)


_EPS = 2.0**-52


def _pad_down(x):
    return np.nextafter(x, -np.inf)


def _pad_up(x):
    return np.nextafter(x, np.inf)


# ---------------------------------------------------------------------------
# BigCount
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BigCount:
    """A nonnegative count, exact below 2**53 and log-only above.

    ``log_value`` is always valid (``-inf`` for zero).  Counts at or beyond
    :data:`EXACT_LIMIT` are forced into ``log_only`` mode even when they would
    fit in a 64-bit integer, since multiplying such a count into an angle
    carries no information.
    """

    mode: str
    exact_value: int = 0
    log_value: float = -math.inf

    def __post_init__(self):
        if self.mode not in ("exact", "log_only"):
            raise ValueError(f"unknown BigCount mode {self.mode!r}")
        if self.mode == "exact" and not (0 <= self.exact_value < EXACT_LIMIT):
            raise ValueError("exact BigCount must lie in [0, 2**53)")

    @classmethod
    def of(cls, n) -> "BigCount":
        if isinstance(n, BigCount):
            return n
        n = int(n)
        if n < 0:
            raise ValueError("BigCount must be nonnegative")
        if n < EXACT_LIMIT:
            return cls("exact", n, math.log(n) if n > 0 else -math.inf)
        return cls("log_only", 0, math.log(n))

    @classmethod
    def from_log(cls, log_value: float) -> "BigCount":
        """Count known only through its natural log.

        Small enough values are rounded to the nearest integer when the log is
        within 1e-9 relative of an integer, and floored otherwise.
        """
        if not math.isfinite(log_value):
            raise RangeExhausted(f"count log {log_value} is not finite")
        if log_value < math.log(EXACT_LIMIT) - 1e-9:
            x = math.exp(log_value)
            r = round(x)
            n = r if abs(x - r) <= 1e-9 * max(1.0, x) else math.floor(x)
            if n < EXACT_LIMIT:
                return cls.of(n)
        return cls("log_only", 0, float(log_value))

    @property
    def is_exact(self) -> bool:
        return self.mode == "exact"

    def require_exact(self) -> int:
        if not self.is_exact:
            raise LogOnlyError(f"count e^{self.log_value:.6g} is only known in log form")
        return self.exact_value

    def as_float(self) -> float:
        """The count as a float; raises RangeExhausted beyond the double range."""
        if self.is_exact:
            return float(self.exact_value)
        try:
            return math.exp(self.log_value)
        except OverflowError:
            raise RangeExhausted(f"count e^{self.log_value:.6g} exceeds the double range") from None

    def __add__(self, other) -> "BigCount":
        other = BigCount.of(other)
        if self.is_exact and other.is_exact:
            return BigCount.of(self.exact_value + other.exact_value)
        return BigCount.from_log(float(np.logaddexp(self.log_value, other.log_value)))

    __radd__ = __add__

    def __mul__(self, other) -> "BigCount":
        other = BigCount.of(other)
        if self.is_exact and other.is_exact:
            return BigCount.of(self.exact_value * other.exact_value)
        return BigCount.from_log(self.log_value + other.log_value)

    __rmul__ = __mul__

    def __str__(self) -> str:
        if self.is_exact:
            return str(self.exact_value)
        return f"exp({self.log_value:.17g})"

    def to_json(self) -> dict:
        if self.is_exact:
            return {"mode": "exact", "value": self.exact_value}
        return {"mode": "log_only", "log": float.hex(self.log_value)}

    @classmethod
    def from_json(cls, d: dict) -> "BigCount":
        if d["mode"] == "exact":
            return cls.of(int(d["value"]))
        return cls("log_only", 0, float.fromhex(d["log"]))


def scale_by_count(n: BigCount, x):
    """Return n*x elementwise, staying in log space when n is log-only."""
    x = np.asarray(x, dtype=np.float64)
    if n.is_exact:
        out = float(n.exact_value) * x
    else:
        with np.errstate(divide="ignore", over="ignore"):
            out = np.sign(x) * np.exp(n.log_value + np.log(np.abs(x)))
    if np.any(np.isinf(out) & np.isfinite(x)):
        raise RangeExhausted("scaled log-modulus overflowed")
    return out


# ---------------------------------------------------------------------------
# LogComplex
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LogComplex:
    """Complex value(s) stored as log-modulus and argument.

    Entries flagged in ``is_zero`` are exact zeros; their ``log_mag`` and
    ``arg`` are stored as 0 and ignored.  Construction rejects non-finite
    log-moduli with :class:`RangeExhausted`.
    """

    log_mag: np.ndarray
    arg: np.ndarray
    is_zero: np.ndarray

    def __init__(self, log_mag, arg=0.0, is_zero=False):
        lm, ar, zz = np.broadcast_arrays(
            np.asarray(log_mag, dtype=np.float64),
            np.asarray(arg, dtype=np.float64),
            np.asarray(is_zero, dtype=bool),
        )
        if np.any(~np.isfinite(lm) & ~zz):
            raise RangeExhausted("log-modulus is not finite")
        lm = np.where(zz, 0.0, lm)
        ar = np.where(zz, 0.0, normalize_arg(ar))
        object.__setattr__(self, "log_mag", lm)
        object.__setattr__(self, "arg", ar)
        object.__setattr__(self, "is_zero", zz.copy())

    # construction helpers
    @classmethod
    def from_complex(cls, z) -> "LogComplex":
        z = np.asarray(z, dtype=np.complex128)
        zero = z == 0
        with np.errstate(divide="ignore"):
            lm = np.log(np.abs(np.where(zero, 1.0, z)))
        return cls(lm, np.angle(z), zero)

    @classmethod
    def from_polar(cls, log_mag, arg=0.0) -> "LogComplex":
        return cls(log_mag, arg, False)

    @classmethod
    def real(cls, x) -> "LogComplex":
        x = np.asarray(x, dtype=np.float64)
        return cls.from_complex(x.astype(np.complex128))

    @classmethod
    def zeros(cls, shape=()) -> "LogComplex":
        return cls(np.zeros(shape), 0.0, True)

    @classmethod
    def ones(cls, shape=()) -> "LogComplex":
        return cls(np.zeros(shape), 0.0, False)

    # array protocol
    @property
    def shape(self):
        return self.log_mag.shape

    @property
    def size(self) -> int:
        return self.log_mag.size

    def __len__(self):
        return len(self.log_mag)

    def __getitem__(self, idx) -> "LogComplex":
        return LogComplex(self.log_mag[idx], self.arg[idx], self.is_zero[idx])

    def to_complex(self):
        """Native complex value; overflows to inf/0 outside the double range."""
        with np.errstate(over="ignore", under="ignore"):
            mag = np.exp(self.log_mag)
        out = mag * np.exp(1j * self.arg)
        return np.where(self.is_zero, 0.0 + 0.0j, out)

    def log_abs(self):
        """log|z| with -inf at zeros."""
        return np.where(self.is_zero, -np.inf, self.log_mag)

    def scale(self, log_factor, turn=0.0) -> "LogComplex":
        """Multiply by e^(log_factor + i*turn) without touching zero entries."""
        return LogComplex(self.log_mag + log_factor, self.arg + turn, self.is_zero)

    def __mul__(self, other):
        return lc_mul(self, other)

    def __add__(self, other):
        return lc_add(self, other)

    def __neg__(self):
        return LogComplex(self.log_mag, self.arg + PI, self.is_zero)

    def __sub__(self, other):
        return lc_add(self, -other)

    def __repr__(self):
        if self.log_mag.ndim == 0:
            if self.is_zero:
                return "LogComplex(0)"
            return f"LogComplex(log_mag={float(self.log_mag)!r}, arg={float(self.arg)!r})"
        return f"LogComplex(shape={self.shape})"


ONE = LogComplex(0.0, 0.0)
ZERO = LogComplex.zeros()


def lc_mul(a: LogComplex, b: LogComplex) -> LogComplex:
    with np.errstate(over="ignore"):
        lm = a.log_mag + b.log_mag
    zero = a.is_zero | b.is_zero
    if np.any(~np.isfinite(lm) & ~zero):
        raise RangeExhausted("product log-modulus overflowed")
    return LogComplex(lm, a.arg + b.arg, zero)


def lc_add(a: LogComplex, b: LogComplex) -> LogComplex:
    """Complex sum evaluated in the frame of the larger operand.

    The result is ``big * (1 + small/big)`` with the ratio formed in native
    precision.  When the log-modulus gap exceeds :data:`DOMINANCE` the larger
    operand is returned unchanged.
    """
    la, lb = np.broadcast_arrays(a.log_abs(), b.log_abs())
    aa, ab = np.broadcast_arrays(a.arg, b.arg)
    a_big = la >= lb
    l_big = np.where(a_big, la, lb)
    l_small = np.where(a_big, lb, la)
    g_big = np.where(a_big, aa, ab)
    g_small = np.where(a_big, ab, aa)
    both_zero = np.isneginf(l_big)

    with np.errstate(invalid="ignore"):
        d = np.where(both_zero, -np.inf, l_small - l_big)
    dphi = normalize_arg(g_small - g_big)
    active = d >= -DOMINANCE
    rho = np.exp(np.where(active, d, -np.inf))
    rr = rho * np.cos(dphi)
    ri = rho * np.sin(dphi)
    # exact cancellation of equal and opposite operands
    cancel = active & (d == 0.0) & (dphi == PI)
    sr = 1.0 + rr
    with np.errstate(divide="ignore", invalid="ignore"):
        log_s = np.where(
            rho < 0.5,
            0.5 * np.log1p(2.0 * rr + rho * rho),
            np.log(np.hypot(sr, ri)),
        )
    dead = cancel | both_zero | np.isneginf(log_s)
    lm = np.where(dead, 0.0, l_big + np.where(active & ~dead, log_s, 0.0))
    arg = g_big + np.where(active & ~dead, np.arctan2(ri, sr), 0.0)
    return LogComplex(lm, arg, dead)


def lc_pow(a: LogComplex, n) -> Union[LogComplex, "ModInterval"]:
    """Raise to a nonnegative integer power.

    For an exact count the angle is multiplied with a compensated product, so
    its absolute error grows like n*ulp.  For a log-only count the argument is
    meaningless and a :class:`ModInterval` for the modulus is returned.
    """
    n = BigCount.of(n)
    if n.is_exact:
        k = n.exact_value
        if k == 0:
            return LogComplex.ones(a.shape)
        with np.errstate(over="ignore"):
            lm = float(k) * a.log_mag
        if np.any(~np.isfinite(lm) & ~a.is_zero):
            raise RangeExhausted("power log-modulus overflowed")
        return LogComplex(lm, _scaled_angle(float(k), a.arg), a.is_zero)
    if np.any(a.is_zero):
        raise ZeroToLogOnlyPower("zero raised to a log-only power")
    x = scale_by_count(n, a.log_mag)
    # relative uncertainty of n from its rounded log
    slack = np.abs(x) * (abs(n.log_value) + 2.0) * 2.0**-52
    return ModInterval(_pad_down(x - slack), _pad_up(x + slack))


# ---------------------------------------------------------------------------
# ModInterval
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ModInterval:
    """Bounds ``e^lo_log <= |z| <= e^hi_log`` for value(s) of unknown argument.

    ``lo_log`` may be ``-inf``, meaning "unknown, possibly zero".
    """

    lo_log: np.ndarray
    hi_log: np.ndarray

    def __init__(self, lo_log, hi_log):
        lo, hi = np.broadcast_arrays(
            np.asarray(lo_log, dtype=np.float64), np.asarray(hi_log, dtype=np.float64)
        )
        if np.any(np.isnan(lo) | np.isnan(hi)) or np.any(np.isposinf(hi)):
            raise RangeExhausted("interval bound is not finite")
        if np.any(lo > hi):
            raise ValueError("ModInterval requires lo_log <= hi_log")
        object.__setattr__(self, "lo_log", lo.copy())
        object.__setattr__(self, "hi_log", hi.copy())

    @classmethod
    def exact(cls, log_mag) -> "ModInterval":
        x = np.asarray(log_mag, dtype=np.float64)
        return cls(x, x)

    @classmethod
    def from_logcomplex(cls, z: LogComplex) -> "ModInterval":
        x = z.log_abs()
        return cls(x, x)

    @property
    def shape(self):
        return self.lo_log.shape

    def __getitem__(self, idx) -> "ModInterval":
        return ModInterval(self.lo_log[idx], self.hi_log[idx])

    def contains(self, log_mod, ulps: int = 0) -> np.ndarray:
        x = np.asarray(log_mod, dtype=np.float64)
        lo, hi = self.lo_log, self.hi_log
        for _ in range(ulps):
            lo, hi = _pad_down(lo), _pad_up(hi)
        return (lo <= x) & (x <= hi)

    def mid_log(self):
        """A representative log-modulus (the upper bound when lo is -inf)."""
        return np.where(np.isneginf(self.lo_log), self.hi_log, 0.5 * (self.lo_log + self.hi_log))

    def __repr__(self):
        if self.lo_log.ndim == 0:
            return f"ModInterval({float(self.lo_log)!r}, {float(self.hi_log)!r})"
        return f"ModInterval(shape={self.shape})"


def as_interval(x) -> ModInterval:
    if isinstance(x, ModInterval):
        return x
    return ModInterval.from_logcomplex(x)


def mi_mul(a, b) -> ModInterval:
    a, b = as_interval(a), as_interval(b)
    with np.errstate(over="ignore", invalid="ignore"):
        lo = _pad_down(a.lo_log + b.lo_log)
        hi = _pad_up(a.hi_log + b.hi_log)
    return ModInterval(lo, hi)


def mi_pow(a, n) -> ModInterval:
    a = as_interval(a)
    n = BigCount.of(n)
    if n.is_exact and n.exact_value == 0:
        return ModInterval.exact(np.zeros(a.shape))
    lo = scale_by_count(n, np.where(np.isneginf(a.lo_log), -1.0, a.lo_log))
    lo = np.where(np.isneginf(a.lo_log), -np.inf, lo)
    hi = scale_by_count(n, a.hi_log)
    if n.is_exact:
        return ModInterval(_pad_down(lo), _pad_up(hi))
    slack = (abs(n.log_value) + 2.0) * 2.0**-52
    with np.errstate(invalid="ignore"):
        lo = np.where(np.isneginf(lo), lo, lo - np.abs(lo) * slack)
    return ModInterval(_pad_down(lo), _pad_up(hi + np.abs(hi) * slack))


def mi_one_minus_half(w, strict: bool = False) -> ModInterval:
    """Bounds on |1 - w/2| from bounds on |w| via the triangle inequality.

    ``| |w|/2 - 1 | <= |1 - w/2| <= 1 + |w|/2``.  When the interval for
    ``|w|/2`` contains 1 the lower bound is zero: ``lo_log`` becomes ``-inf``,
    or :class:`IndeterminateSign` is raised if ``strict``.
    """
    w = as_interval(w)
    h_lo = w.lo_log - LN2
    h_hi = w.hi_log - LN2
    straddle = (h_lo <= 0.0) & (h_hi >= 0.0)
    if strict and np.any(straddle):
        raise IndeterminateSign("|w|/2 may equal 1; lower bound crosses zero")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        above = h_lo + np.log1p(-np.exp(-np.where(h_lo > 0, h_lo, 1.0)))
        below = np.log1p(-np.exp(np.where(h_hi < 0, h_hi, -1.0)))
        lo = np.where(h_lo > 0, above, np.where(h_hi < 0, below, -np.inf))
        hi = np.logaddexp(0.0, h_hi)
        # rounding in h = log|w| - ln2 is amplified by the slope of each branch
        dh_lo = _EPS * (np.abs(w.lo_log) + LN2)
        dh_hi = _EPS * (np.abs(w.hi_log) + LN2)
        slope_lo = np.where(h_lo > 0, 1.0 / -np.expm1(-np.abs(h_lo)),
                            np.exp(-np.abs(h_hi)) / -np.expm1(-np.abs(h_hi)))
        err_lo = np.where(np.isfinite(lo), dh_lo * slope_lo + 4 * _EPS * np.abs(lo), 0.0)
        err_hi = dh_hi / (1.0 + np.exp(-h_hi)) + 4 * _EPS * np.abs(hi)
    return ModInterval(_pad_down(lo - err_lo), _pad_up(hi + err_hi))


def interval_or_point(x):
    """Return (lo, hi) log-modulus arrays for a LogComplex or ModInterval."""
    if isinstance(x, ModInterval):
        return x.lo_log, x.hi_log
    la = x.log_abs()
    return la, la
