import random
from fractions import Fraction

import pytest
import sympy
from mpmath import mp

from mm_belyi.errors import DependentRowsError, NoRelationError
from mm_belyi.lattice import IntegerLattice, algdep, field_membership, is_lll_reduced, lll_reduce, lll_reduce_with_transform
from mm_belyi.types import RecognitionConfig

X = sympy.Symbol("x")


def test_lll_reduces_and_transform_is_consistent():
    L = IntegerLattice(basis=((1, 0, 0, 1345), (0, 1, 0, 35), (0, 0, 1, 154)))
    reduced, h = lll_reduce_with_transform(L)
    assert is_lll_reduced(reduced)
    assert not is_lll_reduced(L)
    for row, coeffs in zip(reduced.basis, h, strict=True):
        assert row == tuple(sum(c * b[j] for c, b in zip(coeffs, L.basis, strict=True)) for j in range(L.dim))
    assert abs(sympy.Matrix(h).det()) == 1


def test_lll_short_vector():
    # vectors with last coordinate 0 are the relations a + 2b + 13c = 0
    L = IntegerLattice(basis=((1, 0, 0, 10**6), (0, 1, 0, 2 * 10**6), (0, 0, 1, 13 * 10**6)))
    reduced = lll_reduce(L)
    assert max(abs(c) for c in reduced.basis[0]) <= 13
    assert reduced.basis[0][3] == 0


def test_lll_rejects_bad_input():
    with pytest.raises(DependentRowsError):
        lll_reduce(IntegerLattice(basis=((1, 2), (2, 4))))
    with pytest.raises(ValueError, match="delta"):
        lll_reduce(IntegerLattice(basis=((1, 0), (0, 1))), delta=Fraction(1, 5))
    with pytest.raises(ValueError):
        IntegerLattice(basis=((1, 2), (3,)))


def test_algdep_sqrt2_plus_sqrt3():
    with mp.workprec(256):
        alpha = mp.sqrt(2) + mp.sqrt(3)
    result = algdep(alpha, 4, bits=256)
    assert result.polynomial == (1, 0, -10, 0, 1)
    assert result.certified_bits > 0


def test_algdep_rational():
    with mp.workprec(128):
        alpha = mp.mpf(3) / 7
    assert algdep(alpha, 1, bits=128).polynomial == (-3, 7)


def test_algdep_complex():
    with mp.workprec(256):
        alpha = (1 + mp.sqrt(-7)) / 2
    assert algdep(alpha, 2, bits=256).polynomial == (2, -1, 1)


def test_algdep_no_relation():
    with mp.workprec(128):
        alpha = mp.pi
    with pytest.raises(NoRelationError, match="pi"):
        algdep(alpha, 3, bits=128, label="pi")


def test_field_membership():
    with mp.workprec(256):
        beta = mp.sqrt(2) + mp.sqrt(3)
        tau = mp.sqrt(2)
    result = field_membership(tau, beta, (1, 0, -10, 0, 1), bits=256)
    assert result.coordinates == (0, Fraction(-9, 2), 0, Fraction(1, 2))


def test_height_bound():
    with mp.workprec(256):
        alpha = mp.sqrt(2) + mp.sqrt(3)
    with pytest.raises(NoRelationError):
        algdep(alpha, 4, bits=256, cfg=RecognitionConfig(max_height_bits=3))


def test_algdep_random_algebraic_numbers():
    rng = random.Random(0)
    bits = 672
    checked = 0
    while checked < 20:
        degree = rng.randint(2, 6)
        coeffs = [rng.randint(-9, 9) for _ in range(degree)] + [rng.randint(1, 5)]
        f = sympy.Poly(list(reversed(coeffs)), X)
        if coeffs[0] == 0 or not f.is_irreducible:
            continue
        with mp.workprec(bits):
            root = mp.polyroots(list(reversed(coeffs)), maxsteps=200, extraprec=bits)[0]
        result = algdep(root, degree, bits=bits)
        primitive = f.primitive()[1]
        if primitive.LC() < 0:
            primitive = -primitive
        assert result.polynomial == tuple(int(c) for c in reversed(primitive.all_coeffs())), coeffs
        checked += 1
