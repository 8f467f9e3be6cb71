"""Series evaluation against an independent multiprecision oracle,
the quadrature cross-check, derivative and tail-bound identities."""

from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

from tpbessel.scalar import DomainError, Sign, from_exact, precision
from tpbessel.bessel import (
    bessel_derivative,
    bessel_i,
    bessel_i_quadrature,
    generating_partial_sum,
    tail_bound,
)

SEED = 20260819


def fx(v, bits=192):
    """Input ball tight enough for the enclosure targets below."""
    return from_exact(v, bits=bits)


def mpf(v) -> "mp.mpf":
    fr = Fraction(v)
    return mp.mpf(fr.numerator) / fr.denominator

# frozen oracle values, 30 significant digits (independent evaluation)
ORACLE = {
    (0, "1"): "1.26606587775200833559824462521",
    (1, "1"): "0.565159103992485027207696027609",
    (0, "2"): "2.27958530233606726743720444081",
    (1, "2"): "1.59063685463732906338225442450",
    (3, "2"): "0.212739959239852655272354393376",
    (5, "2"): "0.00982567932313170232080705063965",
    (2, "1.3"): "0.242617313360760268719488468925",
    (2, "1.5"): "0.337834618335680730673624915003",
    (0, "0.5"): "1.06348337074132351926318441545",
    (20, "20"): "3188.75032885361480155313050690",
}


def _contains_decimal(ball, dec: str, slack=Fraction(1, 10 ** 25)):
    v = Fraction(dec)
    return (Fraction(*ball.lower().as_integer_ratio()) - slack <= v
            <= Fraction(*ball.upper().as_integer_ratio()) + slack)


def test_series_against_frozen_oracle():
    for (j, x), dec in ORACLE.items():
        ball = bessel_i(j, fx(x), target_rad=Fraction(1, 10 ** 28))
        assert _contains_decimal(ball, dec), (j, x, ball)


def test_series_against_live_oracle():
    mp.mp.dps = 40
    rng = np.random.default_rng(SEED)
    for _ in range(40):
        j = int(rng.integers(0, 25))
        x = Fraction(int(rng.integers(1, 200)), 16)
        ball = bessel_i(j, fx(x), target_rad=Fraction(1, 10 ** 22))
        ref = mp.besseli(j, mpf(x))
        assert float(ball.lower()) - 1e-20 <= float(ref) <= float(ball.upper()) + 1e-20


def test_real_order_against_live_oracle():
    mp.mp.dps = 40
    for nu, x in ((Fraction(1, 2), 2), (Fraction(5, 2), 1), (0.25, 3), (1.75, Fraction(1, 2))):
        ball = bessel_i(nu, fx(x), target_rad=Fraction(1, 10 ** 18))
        ref = mp.besseli(mpf(nu), mpf(x))
        assert float(ball.lower()) - 1e-15 <= float(ref) <= float(ball.upper()) + 1e-15


def test_negative_integer_order_symmetry():
    with precision(96):
        a = bessel_i(-3, from_exact(2))
        b = bessel_i(3, from_exact(2))
    assert a.mid == b.mid and a.rad == b.rad


def test_zero_argument():
    assert bessel_i(0, from_exact(0)).mid == 1
    assert bessel_i(0, from_exact(0)).is_exact
    z = bessel_i(3, from_exact(0))
    assert z.mid == 0 and z.is_exact
    assert bessel_i(Fraction(1, 2), from_exact(0)).mid == 0


def test_domain_errors():
    with pytest.raises(DomainError):
        bessel_i(1, from_exact(-1))
    with pytest.raises(DomainError):
        bessel_i(-0.5, from_exact(1))         # negative real order
    with pytest.raises(DomainError):
        bessel_i(Fraction(-1, 2), from_exact(1))
    with pytest.raises(DomainError):
        bessel_i_quadrature(-1, from_exact(1))


def test_certified_positive_on_grid():
    for j in range(0, 11):
        for x in ("0.1", "1", "5"):
            assert bessel_i(j, from_exact(x)).sign() is Sign.POSITIVE


def test_monotone_in_argument():
    # the series has positive coefficients, so I_j grows with x
    for j in (0, 1, 4):
        lo = bessel_i(j, fx(1), target_rad=Fraction(1, 10 ** 15))
        hi = bessel_i(j, fx(2), target_rad=Fraction(1, 10 ** 15))
        assert lo.upper() < hi.lower()


def test_derivative_identity_and_oracle():
    # I_0' = I_1 is a literal half-sum collapse
    with precision(80):
        d0 = bessel_derivative(0, from_exact("1.5"))
        i1 = bessel_i(1, from_exact("1.5"))
    assert d0.contains(Fraction(*i1.mid.as_integer_ratio()))
    mp.mp.dps = 40
    rng = np.random.default_rng(SEED + 1)
    for _ in range(12):
        j = int(rng.integers(0, 9))
        x = Fraction(int(rng.integers(2, 60)), 8)
        ball = bessel_derivative(j, fx(x), target_rad=Fraction(1, 10 ** 18))
        ref = mp.diff(lambda t: mp.besseli(j, t), mpf(x))
        assert float(ball.lower()) - 1e-15 <= float(ref) <= float(ball.upper()) + 1e-15


def test_tail_bound_values():
    t = tail_bound(9, 3)
    assert t.contains(Fraction(3 ** 9, 362880))
    t2 = tail_bound(4, 2)
    assert t2.contains(Fraction(2, 3))       # 2^4/4! = 16/24


def test_tail_bound_preconditions():
    with pytest.raises(DomainError):
        tail_bound(4, 1)                     # R must exceed 1
    with pytest.raises(DomainError):
        tail_bound(3, 2)                     # needs j >= R^2


def test_tail_bound_dominates_function():
    # |I_4(z)| < 2^4/4! for 0 < z <= 2, checked on a coarse grid
    bound = Fraction(2, 3)
    for i in range(1, 51):
        z = Fraction(2 * i, 50)
        up = bessel_i(4, from_exact(z)).upper()
        assert Fraction(*up.as_integer_ratio()) < bound


def test_quadrature_contains_oracle():
    for (j, x), dec in ORACLE.items():
        if Fraction(x) == 0:
            continue
        ball = bessel_i_quadrature(j, from_exact(x), 256)
        assert _contains_decimal(ball, dec, slack=Fraction(0)), (j, x)


def test_quadrature_error_shrinks_quadratically():
    a = bessel_i_quadrature(2, from_exact("1.5"), 64)
    b = bessel_i_quadrature(2, from_exact("1.5"), 256)
    ratio = float(a.rad) / float(b.rad)
    assert 15.0 < ratio < 17.0               # certified bound scales as 1/n^2


def test_quadrature_overlaps_series():
    rng = np.random.default_rng(SEED + 2)
    for _ in range(20):
        j = int(rng.integers(0, 21))
        x = Fraction(int(rng.integers(1, 80)), 8)
        s = bessel_i(j, fx(x), target_rad=Fraction(1, 10 ** 18))
        q = bessel_i_quadrature(j, from_exact(x), 128)
        gap = abs(float(s.mid) - float(q.mid))
        assert gap <= float(s.rad) + float(q.rad)


def test_generating_partial_sum():
    mp.mp.dps = 40
    # z = 1 collapses the symmetric sum to e^y
    for y in ("0.5", "1", "5"):
        got = generating_partial_sum(from_exact(y), from_exact(1), 40)
        ref = mp.exp(mpf(y))
        assert abs(float(got.mid) - float(ref)) < 1e-12
    # z = -1 gives e^{-y}
    got = generating_partial_sum(from_exact(1), from_exact(-1), 40)
    assert abs(float(got.mid) - float(mp.exp(-1))) < 1e-12
    # generic z against the exponential identity e^{y(z+1/z)/2}
    got = generating_partial_sum(from_exact("0.5"), from_exact(2), 60)
    ref = mp.exp(mp.mpf("0.5") * (2 + mp.mpf(1) / 2) / 2)
    assert abs(float(got.mid) - float(ref)) < 1e-12
    with pytest.raises(DomainError):
        generating_partial_sum(from_exact(1), from_exact(0), 10)
