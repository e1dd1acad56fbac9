import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transcend.errors import IndeterminateSign, RangeExhausted, ZeroToLogOnlyPower
from transcend.extrange import (
    LN2,
    BigCount,
    LogComplex,
    ModInterval,
    lc_add,
    lc_mul,
    lc_pow,
    mi_mul,
    mi_one_minus_half,
    normalize_arg,
    two_product,
)

rng = np.random.default_rng(1234)


def close_arg(a, b, tol):
    d = np.abs(np.remainder(np.asarray(a) - np.asarray(b) + math.pi, 2 * math.pi) - math.pi)
    return np.all(d <= tol)


# --- BigCount ---------------------------------------------------------------

def test_bigcount_modes():
    assert BigCount.of(8).is_exact
    assert BigCount.of(2**53 - 1).is_exact
    assert not BigCount.of(2**53).is_exact
    big = BigCount.from_log(1000.0)
    assert not big.is_exact
    assert str(big).startswith("exp(")
    assert BigCount.from_log(math.log(12.0)).exact_value == 12


def test_bigcount_json_roundtrip():
    for n in (BigCount.of(17), BigCount.from_log(58.51572)):
        assert BigCount.from_json(n.to_json()) == n


def test_bigcount_arithmetic():
    assert (BigCount.of(3) + BigCount.of(4)).exact_value == 7
    assert (BigCount.of(3) * BigCount.of(4)).exact_value == 12
    s = BigCount.from_log(100.0) + BigCount.of(5)
    assert not s.is_exact and s.log_value == pytest.approx(100.0)


def test_bigcount_nonfinite():
    with pytest.raises(RangeExhausted):
        BigCount.from_log(math.inf)


# --- argument helpers -------------------------------------------------------

def test_normalize_arg_range():
    a = normalize_arg(np.array([-math.pi, math.pi, 3 * math.pi, -3 * math.pi + 1e-3, 0.0]))
    assert np.all(a > -math.pi) and np.all(a <= math.pi)
    assert a[0] == pytest.approx(math.pi)


def test_two_product_exact():
    a, b = 0.1, 3.0000000000000004
    hi, lo = two_product(a, b)
    with mp.workdps(60):
        exact = mp.mpf(a) * mp.mpf(b)
        assert float(exact - mp.mpf(hi)) == lo


# --- lc_mul -----------------------------------------------------------------

def test_mul_trivial():
    r = lc_mul(LogComplex(0.0, 0.0), LogComplex(LN2, math.pi / 2))
    assert r.log_mag == pytest.approx(LN2) and r.arg == pytest.approx(math.pi / 2)
    r = lc_mul(LogComplex(0.0, math.pi), LogComplex(0.0, math.pi))
    assert r.log_mag == 0.0 and abs(r.arg) < 1e-15
    assert lc_mul(LogComplex.zeros(), LogComplex(5.0, 1.0)).is_zero


def test_mul_matches_native():
    la, lb = rng.uniform(-100, 100, (2, 1000))
    ta, tb = rng.uniform(-math.pi, math.pi, (2, 1000))
    r = lc_mul(LogComplex(la, ta), LogComplex(lb, tb))
    za = np.exp(la + 1j * ta)
    zb = np.exp(lb + 1j * tb)
    zn = za * zb
    rel = np.abs(r.to_complex() - zn) / np.abs(zn)
    assert rel.max() <= 1e-12


def test_mul_overflow():
    with pytest.raises(RangeExhausted):
        lc_mul(LogComplex(1e308, 0.0), LogComplex(1e308, 0.0))


# --- lc_add -----------------------------------------------------------------

def test_add_trivial():
    r = lc_add(LogComplex.ones(), LogComplex.ones())
    assert r.log_mag == pytest.approx(LN2) and r.arg == 0.0
    a = LogComplex(3.0, 0.5)
    r = lc_add(a, LogComplex.zeros())
    assert r.log_mag == a.log_mag and r.arg == a.arg


def test_add_dominance():
    r = lc_add(LogComplex(100.0, 0.0), LogComplex(0.0, 0.0))
    exact = mp.log(mp.exp(100) + 1)
    assert abs(mp.mpf(float(r.log_mag)) - exact) / exact < 1e-16
    assert r.log_mag == 100.0


def test_add_cancellation():
    r = lc_add(LogComplex(2.0, 0.3), LogComplex(2.0, 0.3 - math.pi))
    assert r.is_zero


def test_add_matches_native():
    la = rng.uniform(-20, 20, 1000)
    lb = la + rng.uniform(-30, 30, 1000)
    ta, tb = rng.uniform(-math.pi, math.pi, (2, 1000))
    r = lc_add(LogComplex(la, ta), LogComplex(lb, tb))
    zn = np.exp(la + 1j * ta) + np.exp(lb + 1j * tb)
    scale = np.maximum(np.exp(la), np.exp(lb))
    assert (np.abs(r.to_complex() - zn) / scale).max() <= 1e-12


# --- lc_pow -----------------------------------------------------------------

def test_pow_trivial():
    r = lc_pow(LogComplex(0.0, math.pi / 4), BigCount.of(4))
    assert r.log_mag == 0.0 and r.arg == pytest.approx(math.pi)
    r = lc_pow(LogComplex(LN2, 0.0), BigCount.of(10))
    assert r.log_mag == pytest.approx(10 * LN2) and r.arg == 0.0


def test_pow_repeated_squaring_oracle():
    for _ in range(50):
        n = int(rng.integers(1, 10**6))
        r = float(rng.uniform(0.5, 1.5))
        # modulus by repeated squaring in native arithmetic, kept in range via frexp
        acc_m, acc_e = 1.0, 0
        b_m, b_e = math.frexp(r)
        k = n
        while k:
            if k & 1:
                acc_m, e = math.frexp(acc_m * b_m)
                acc_e += b_e + e
            b_m, e = math.frexp(b_m * b_m)
            b_e = 2 * b_e + e
            k >>= 1
        oracle = math.log(acc_m) + acc_e * LN2
        got = lc_pow(LogComplex(math.log(r), 0.0), BigCount.of(n)).log_mag
        assert abs(got - oracle) <= 1e-9 * max(1.0, abs(oracle))


def test_pow_large_exponent_angle():
    n = 10**12 + 7
    theta = 0.123456789
    r = lc_pow(LogComplex(0.0, theta), BigCount.of(n))
    with mp.workdps(50):
        exact = mp.fmod(mp.mpf(theta) * n, 2 * mp.pi)
    assert close_arg(r.arg, float(exact), 1e-3)


def test_pow_log_only():
    n = BigCount.from_log(60.0)
    v = lc_pow(LogComplex(-1e-30, 0.7), n)
    assert isinstance(v, ModInterval)
    exact = -1e-30 * math.exp(60.0)
    assert v.contains(exact)
    with pytest.raises(ZeroToLogOnlyPower):
        lc_pow(LogComplex.zeros(), n)


# --- intervals --------------------------------------------------------------

def test_one_minus_half_examples():
    iv = mi_one_minus_half(ModInterval.exact(-50.0))
    with mp.workdps(50):
        x = mp.exp(-50) / 2
        assert iv.contains(float(mp.log(1 - x)))
        assert iv.contains(float(mp.log(1 + x)))
    iv = mi_one_minus_half(ModInterval.exact(math.log(4.0)))
    assert float(iv.lo_log) == pytest.approx(0.0, abs=1e-14)
    assert float(iv.hi_log) == pytest.approx(math.log(3.0))


def test_one_minus_half_straddle():
    iv = mi_one_minus_half(ModInterval(math.log(1.5), math.log(2.5)))
    assert np.isneginf(iv.lo_log)
    with pytest.raises(IndeterminateSign):
        mi_one_minus_half(ModInterval(math.log(1.5), math.log(2.5)), strict=True)


def test_one_minus_half_native_oracle():
    w = np.exp(rng.uniform(-5, 3, 10_000) + 1j * rng.uniform(-math.pi, math.pi, 10_000))
    iv = mi_one_minus_half(ModInterval.from_logcomplex(LogComplex.from_complex(w)))
    assert np.all(iv.contains(np.log(np.abs(1 - w / 2)), ulps=2))


def test_mi_mul_outward():
    a = ModInterval(np.array([0.1]), np.array([0.3]))
    b = ModInterval(np.array([1.0]), np.array([2.0]))
    c = mi_mul(a, b)
    assert c.lo_log[0] <= 1.1 and c.hi_log[0] >= 2.3


# --- properties -------------------------------------------------------------

finite_log = st.floats(-300, 300)
angle = st.floats(-math.pi, math.pi)


@settings(max_examples=200, deadline=None)
@given(st.complex_numbers(min_magnitude=1e-100, max_magnitude=1e100, allow_nan=False, allow_infinity=False))
def test_roundtrip(z):
    back = LogComplex.from_complex(z).to_complex()
    assert abs(back - z) <= 1e-12 * abs(z)


@settings(max_examples=200, deadline=None)
@given(finite_log, angle, finite_log, angle, finite_log, angle)
def test_mul_associative(l1, t1, l2, t2, l3, t3):
    a, b, c = LogComplex(l1, t1), LogComplex(l2, t2), LogComplex(l3, t3)
    x = lc_mul(lc_mul(a, b), c)
    y = lc_mul(a, lc_mul(b, c))
    assert abs(x.log_mag - y.log_mag) <= 1e-10
    assert close_arg(x.arg, y.arg, 1e-10)


@settings(max_examples=200, deadline=None)
@given(finite_log, angle, finite_log, angle)
def test_add_commutes(l1, t1, l2, t2):
    a, b = LogComplex(l1, t1), LogComplex(l2, t2)
    x, y = lc_add(a, b), lc_add(b, a)
    if x.is_zero or y.is_zero:
        assert x.is_zero and y.is_zero
        return
    assert abs(x.log_mag - y.log_mag) <= 1e-12 * max(1.0, abs(x.log_mag))
    assert close_arg(x.arg, y.arg, 1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0, 5))
def test_interval_soundness(lo, width, extra):
    iv = ModInterval(lo, lo + abs(width) + extra)
    half = mi_one_minus_half(iv)
    with mp.workdps(40):
        for lm in np.linspace(float(iv.lo_log), float(iv.hi_log), 7):
            for t in np.linspace(-math.pi, math.pi, 9):
                val = abs(1 - mp.exp(mp.mpf(float(lm))) * mp.expj(t) / 2)
                if val > mp.mpf(10) ** -30:
                    assert half.contains(float(mp.log(val)))
