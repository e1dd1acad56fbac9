import math
from types import SimpleNamespace

import numpy as np
import pytest

from transcend.chebgeom import (
    RT2,
    Z2,
    H_eval,
    H_native,
    T2,
    chebyshev_consistency,
    containment_check,
    level_curve,
    one_minus_H_identity,
    zero_radius,
)
from transcend.errors import BracketFailure
from transcend.extrange import BigCount, LogComplex, ModInterval

rng = np.random.default_rng(11)


def disk(n, r):
    return r * np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * math.pi * rng.uniform(0, 1, n))


def test_H_trivial():
    assert H_eval(5, LogComplex.zeros()).is_zero
    assert H_eval(7, LogComplex.ones()).to_complex() == pytest.approx(1.0)
    assert H_eval(2, LogComplex.from_complex(1j)).to_complex() == pytest.approx(-3.0)


def test_H_matches_native():
    z = disk(2000, 1.5)
    for m in (2, 8, 32):
        got = H_eval(m, LogComplex.from_complex(z)).to_complex()
        assert np.allclose(got, H_native(m, z), rtol=1e-11, atol=1e-300)


def test_H_rotation_invariance():
    z = disk(500, 1.3)
    for m in (3, 8, 32):
        a = H_eval(m, LogComplex.from_complex(z))
        b = H_eval(m, LogComplex.from_complex(z).scale(0.0, 2 * math.pi / m))
        assert np.allclose(a.to_complex(), b.to_complex(), rtol=1e-10, atol=1e-12)


def test_H_log_only():
    v = H_eval(BigCount.from_log(50.0), LogComplex(-1e-25, 0.2))
    assert isinstance(v, ModInterval)


def test_constants():
    assert T2(Z2) == pytest.approx(0.0, abs=1e-15)
    assert RT2 == pytest.approx(2**-0.5)


def test_chebyshev_trivial():
    assert chebyshev_consistency(5, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert chebyshev_consistency(5, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert one_minus_H_identity(5, 0.0) == 0.0
    assert one_minus_H_identity(5, 1.0) == 0.0


def test_identities_random():
    z = disk(10_000, 2.0)
    for m in (2, 8, 32):
        assert chebyshev_consistency(m, z).max() <= 1e-12
        assert one_minus_H_identity(m, z).max() <= 1e-11
    with pytest.raises(ValueError):
        chebyshev_consistency(65, z)


def test_level_curve_bounds_and_symmetry():
    for m in (8, 16, 32):
        g = level_curve(m, 64 * m)
        assert np.all(g.radii >= g.inner_bound - 1e-9)
        assert np.all(g.radii <= g.outer_bound + 1e-9)
        # |H_m| = 1 on every recorded point
        vals = np.abs(H_native(m, g.radii * np.exp(1j * g.angles)))
        assert np.allclose(vals, 1.0, atol=1e-9)
        # the outer crossing repeats after a rotation by 2 pi / m
        out = g.outer_radius()
        shift = g.ray_count // m
        assert np.allclose(out, np.roll(out, shift), atol=1e-9)


def test_level_curve_petal_center_oracle():
    # on the ray theta = 0, z^m = r^m is real and |H| = 1 means r^m (2 - r^m) = 1, i.e. r = 1
    m = 8
    g = level_curve(m, 8 * m)
    on_axis = g.radii[g.angles == 0.0]
    assert np.any(np.abs(on_axis - 1.0) < 1e-9)
    # between petals (z^m = -r^m) the crossing solves r^m (2 + r^m) = 1
    mid = g.radii[np.isclose(g.angles, math.pi / m)]
    assert np.allclose(mid, (math.sqrt(2) - 1) ** (1 / m), atol=1e-9)


def test_level_curve_preconditions():
    with pytest.raises(ValueError):
        level_curve(8, 10)
    with pytest.raises(ValueError):
        level_curve(2048, 8 * 2048)


def test_bracket_failure():
    # a band strictly inside the central component has no crossing
    with pytest.raises(BracketFailure):
        level_curve(8, 64, band=(0.5, 0.8))


def test_containment_small_m():
    inner, outer = containment_check(2, 4096)
    assert inner.passed and outer.passed
    assert inner.lhs_log == pytest.approx(math.log(0.25 * 2.25), rel=1e-9)
    assert outer.rhs_log > 0


def test_containment_margins():
    for m in (8, 16, 32):
        inner, outer = containment_check(m, 4096)
        assert inner.passed and outer.passed
        assert inner.margin_log > 0 and outer.margin_log > 0


def test_zero_radius():
    exact, approx = zero_radius(SimpleNamespace(n=BigCount.of(1), logR=0.0))
    assert math.exp(exact) == pytest.approx(2.0)
    for n in (8, 64, 1024):
        exact, approx = zero_radius(SimpleNamespace(n=BigCount.of(n), logR=3.0))
        assert math.exp(exact - 3.0) == pytest.approx(2 ** (1 / n), rel=1e-14)
        assert abs(exact - approx) <= 1 / n**2
