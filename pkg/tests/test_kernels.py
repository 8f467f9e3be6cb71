"""Kernel matrix builders: entry values against oracles, domain
validation, provenance-driven recomputation, serialization round trips."""

import json
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

from tpbessel.scalar import DomainError, Sign, from_exact, precision
from tpbessel.bessel import bessel_i
from tpbessel.kernels import (
    KernelMatrix,
    build_bessel_matrix,
    build_karlin_matrix,
    build_toeplitz_bessel,
    build_vandermonde,
    karlin_kappa,
    matrix_to_json_str,
)

SEED = 20260819


def mpf(v):
    fr = Fraction(v)
    return mp.mpf(fr.numerator) / fr.denominator


def test_bessel_matrix_values():
    M = build_bessel_matrix((0,), (1,), Fraction(1, 10 ** 20))
    mp.mp.dps = 40
    assert abs(float(M.entry(0, 0).mid) - float(mp.besseli(0, 1))) < 1e-15
    M2 = build_bessel_matrix((0, 1), (1, 2), Fraction(1, 10 ** 20))
    assert M2.shape == (2, 2)
    for i, x in enumerate((1, 2)):
        for j, k in enumerate((0, 1)):
            ref = float(mp.besseli(k, x))
            e = M2.entry(i, j)
            assert abs(float(e.mid) - ref) < 1e-15
            assert float(e.rad) <= 1e-20


def test_bessel_matrix_validation():
    with pytest.raises(DomainError, match="K_m"):
        build_bessel_matrix((1, 1), (0.5,), 1e-10)
    with pytest.raises(DomainError, match="K_m"):
        build_bessel_matrix((3, 1), (0.5,), 1e-10)
    with pytest.raises(DomainError, match="X_l"):
        build_bessel_matrix((1, 3), (2, 0.5), 1e-10)
    with pytest.raises(DomainError, match="X_l"):
        build_bessel_matrix((1, 3), (0,), 1e-10)


def test_target_rad_respected():
    M = build_bessel_matrix((0, 2, 5), ("0.5", "1.5", "3"), Fraction(1, 10 ** 30))
    for i in range(3):
        for j in range(3):
            assert M.entry(i, j).rad <= from_exact(Fraction(1, 10 ** 30)).upper()


def test_toeplitz_shift_structure():
    M = build_toeplitz_bessel(1, (0, 3), (0, 3), Fraction(1, 10 ** 20))
    assert M.shape == (4, 4)
    # constant along diagonals, and I_{-j} = I_j across the main diagonal
    for i in range(3):
        assert M.entry(i, i).mid == M.entry(i + 1, i + 1).mid
        assert M.entry(i, i + 1).mid == M.entry(i + 1, i).mid
    mp.mp.dps = 30
    assert abs(float(M.entry(0, 2).mid) - float(mp.besseli(2, 1))) < 1e-15
    with pytest.raises(DomainError):
        build_toeplitz_bessel(0, (0, 3), (0, 3), 1e-10)
    with pytest.raises(DomainError):
        build_toeplitz_bessel(-1, (0, 3), (0, 3), 1e-10)


def test_karlin_kappa_oracle():
    # kappa_3(1; 1) = e^{-2} I_3(2)
    mp.mp.dps = 40
    got = karlin_kappa(3, 1, 1, target_rad=Fraction(1, 10 ** 25))
    ref = mp.exp(-2) * mp.besseli(3, 2)
    assert abs(float(got.mid) - float(ref)) < 1e-20
    # zero cases
    assert karlin_kappa(3, 1, -2).mid == 0
    assert karlin_kappa(3, 1, 0).mid == 0
    e1 = karlin_kappa(0, 1, 0)
    assert abs(float(e1.mid) - float(mp.exp(-1))) < 1e-15
    with pytest.raises(DomainError):
        karlin_kappa(3, 0, 1)                # lambda must be positive
    with pytest.raises(DomainError):
        karlin_kappa(-1, 1, 1)


def test_karlin_kappa_half_integer_alpha():
    mp.mp.dps = 40
    got = karlin_kappa(Fraction(1, 2), 1, Fraction(9, 4),
                       target_rad=Fraction(1, 10 ** 20))
    x, lam = mp.mpf(9) / 4, mp.mpf(1)
    ref = mp.exp(-(x + lam)) * (x / lam) ** mp.mpf("0.25") * mp.besseli(0.5, 2 * mp.sqrt(x * lam))
    assert abs(float(got.mid) - float(ref)) < 1e-18


def test_karlin_matrix_pattern():
    M = build_karlin_matrix(3, 1, (1, 2, 3), (0, 1, 2), Fraction(1, 10 ** 20))
    # strictly above the anti-pattern x_i > y_j everywhere here, so all positive
    for i in range(3):
        for j in range(3):
            if Fraction(M.row_keys[i]) > Fraction(M.col_keys[j]):
                assert M.entry(i, j).sign() is Sign.POSITIVE
    # a matrix with x_i < y_j corners has exact zeros there
    M2 = build_karlin_matrix(3, 1, (1, 2), (2, 5), Fraction(1, 10 ** 20))
    assert M2.entry(0, 1).mid == 0 and M2.entry(0, 1).is_exact
    with pytest.raises(DomainError):
        build_karlin_matrix(1, 1, (1, 2), (0, 1), 1e-10)   # alpha must exceed 1 for TP use
    with pytest.raises(DomainError):
        build_karlin_matrix(3, 1, (2, 1), (0, 1), 1e-10)


def test_vandermonde_exact_and_real():
    M = build_vandermonde((1, 2, 3), (0, 1, 2), Fraction(1, 10 ** 20))
    for i, x in enumerate((1, 2, 3)):
        for j, y in enumerate((0, 1, 2)):
            assert M.entry(i, j).contains(Fraction(x) ** y)
    mp.mp.dps = 40
    M2 = build_vandermonde(("0.5", "2"), ("0.5", "1.5"), Fraction(1, 10 ** 18))
    for i, x in enumerate(("0.5", "2")):
        for j, y in enumerate(("0.5", "1.5")):
            ref = mp.power(mpf(x), mpf(y))
            e = M2.entry(i, j)
            assert float(e.lower()) - 1e-15 <= float(ref) <= float(e.upper()) + 1e-15
    with pytest.raises(DomainError):
        build_vandermonde((-1, 2), (0, 1), 1e-10)
    with pytest.raises(DomainError):
        build_vandermonde((1, 2), (1, 0), 1e-10)


def test_submatrix_selection():
    M = build_bessel_matrix((0, 1, 3), (1, 2, 4), Fraction(1, 10 ** 15))
    S = M.submatrix((0, 2), (1, 2))
    assert S.shape == (2, 2)
    assert S.entry(0, 0).mid == M.entry(0, 1).mid
    assert S.entry(1, 1).mid == M.entry(2, 2).mid
    assert S.row_keys == (M.row_keys[0], M.row_keys[2])
    with pytest.raises(DomainError):
        M.submatrix((2, 0), (0, 1))          # must be strictly increasing
    with pytest.raises(DomainError):
        M.submatrix((0, 3), (0, 1))          # out of range


def test_recomputed_tightens():
    M = build_bessel_matrix((0, 2), ("1.5",), Fraction(1, 10 ** 10))
    with precision(256):
        T = M.recomputed(256)
    for j in range(2):
        a, b = M.entry(0, j), T.entry(0, j)
        assert b.rad < a.rad
        # enclosures of the same value must overlap
        assert abs(float(a.mid) - float(b.mid)) <= float(a.rad) + float(b.rad)


def test_json_round_trip_preserves_provenance():
    M = build_bessel_matrix((0, 1), (1, "1.5"), Fraction(1, 10 ** 15))
    back = KernelMatrix.from_json(json.loads(matrix_to_json_str(M)))
    assert back.family == M.family
    assert back.shape == M.shape
    for i in range(2):
        for j in range(2):
            a, b = M.entry(i, j), back.entry(i, j)
            assert abs(float(a.mid) - float(b.mid)) <= float(a.rad) + float(b.rad)
    # provenance survives: recomputation from the deserialized form works
    T = back.recomputed(192)
    assert T.entry(0, 0).rad < Fraction(1, 10 ** 20)


def test_json_round_trip_all_families():
    mats = [
        build_toeplitz_bessel("0.5", (0, 2), (1, 3), Fraction(1, 10 ** 12)),
        build_karlin_matrix(3, 1, (1, 2), (0, 1), Fraction(1, 10 ** 12)),
        build_vandermonde((1, 2), (0, "0.5"), Fraction(1, 10 ** 12)),
        KernelMatrix.literal([[1, 2], ["1/3", 4]]),
    ]
    for M in mats:
        back = KernelMatrix.from_json(json.loads(matrix_to_json_str(M)))
        assert back.family == M.family and back.shape == M.shape
        if M.family != "explicit":
            assert back.entry_fn is not None


def test_literal_matrix_exact():
    M = KernelMatrix.literal([[1, 2], ["1/3", 4]])
    assert M.entry(0, 0).is_exact
    assert M.entry(1, 0).contains(Fraction(1, 3))
    with pytest.raises(DomainError):
        KernelMatrix.literal([[1, 2], [3]])


def test_csv_output():
    M = build_bessel_matrix((0, 1), (1,), Fraction(1, 10 ** 12))
    text = M.to_csv()
    lines = text.strip().splitlines()
    assert lines[0].startswith("#") and "lossy" in lines[0]
    assert "k=" in lines[1]
    assert len(lines) == 3


def test_entries_match_scalar_evaluator():
    rng = np.random.default_rng(SEED)
    ks = tuple(sorted(rng.choice(12, size=3, replace=False).tolist()))
    xs = tuple(sorted(rng.uniform(0.2, 6.0, size=3).tolist()))
    M = build_bessel_matrix(ks, xs, Fraction(1, 10 ** 18))
    for i, x in enumerate(xs):
        for j, k in enumerate(ks):
            direct = bessel_i(int(k), from_exact(x, bits=128),
                              target_rad=Fraction(1, 10 ** 18))
            gap = abs(float(M.entry(i, j).mid) - float(direct.mid))
            assert gap <= float(M.entry(i, j).rad) + float(direct.rad)
