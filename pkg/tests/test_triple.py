import math
from fractions import Fraction

import pytest
import sympy

from mm_belyi.ansatz import build_ansatz
from mm_belyi.errors import DegreeMismatchError, GenusError
from mm_belyi.perm import CycleType, gamma0_triple, group_order
from mm_belyi.triple import (
    Verdict,
    analyze,
    genus_of,
    hsu_congruence_test,
    profile,
    profile_from_passport,
    psl2_order,
    validate_triple,
)

LEVEL7_PASSPORT = ("1^12 2^132", "3^92", "1^3 7^39")


def test_genus_formula():
    assert genus_of(1, 1, 1, 1) == 0
    assert genus_of(276, 12, 0, 42) == 0
    with pytest.raises(GenusError):
        genus_of(4, 0, 1, 1)


def test_passport_profile():
    p = profile_from_passport(*(CycleType.parse(s) for s in LEVEL7_PASSPORT))
    assert p.index == 276
    assert (p.e2, p.e3) == (12, 0)
    assert p.num_cusps == 42
    assert p.level == 7
    assert p.genus == 0
    assert p.principal_width == 1
    assert p.principal_point is None
    assert p.congruence == Verdict.UNDECIDED


def test_passport_ansatz():
    a = build_ansatz(profile_from_passport(*(CycleType.parse(s) for s in LEVEL7_PASSPORT)))
    assert [f.prefix for f in a.factors] == ["a", "b", "c", "d", "e"]
    assert a.num_unknowns == 277
    assert a.num_equations == 277
    assert str(a.normalization) == "3*a91 - 1*b1 - 7*c38 = 744"


def test_passport_degree_mismatch():
    with pytest.raises(DegreeMismatchError):
        profile_from_passport(CycleType.parse("2^2"), CycleType.parse("1 3"), CycleType.parse("5"))


def test_passport_rejects_long_cycles():
    with pytest.raises(GenusError, match="longer than 2"):
        profile_from_passport(CycleType.parse("1 3"), CycleType.parse("1 3"), CycleType.parse("4"))


def test_gamma0_profiles():
    # (N, e2, e3, cusps)
    for N, e2, e3, cusps in [(2, 1, 0, 2), (3, 0, 1, 2), (4, 0, 0, 3), (5, 2, 0, 2), (6, 0, 0, 4), (7, 0, 2, 2), (9, 0, 0, 4)]:
        p = profile(gamma0_triple(N))
        assert (p.e2, p.e3, p.num_cusps) == (e2, e3, cusps), N
        assert p.level == N
        assert p.genus == 0
        assert p.principal_width == 1


def _gamma0_counts(N):
    primes = sympy.primefactors(N)
    index = N * math.prod(p + 1 for p in primes) // math.prod(primes)
    e2 = 0 if N % 4 == 0 else math.prod(1 if p == 2 else 1 + sympy.legendre_symbol(-1 % p, p) for p in primes)
    e3 = 0 if N % 9 == 0 else math.prod(0 if p == 2 else 1 + sympy.legendre_symbol(-3 % p, p) for p in primes)
    cusps = sum(sympy.totient(math.gcd(d, N // d)) for d in sympy.divisors(N))
    genus = 1 + Fraction(index, 12) - Fraction(e2, 4) - Fraction(e3, 3) - Fraction(cusps, 2)
    return index, e2, e3, cusps, genus


def test_gamma0_profiles_match_classical_counts():
    genera = {}
    for N in range(1, 26):
        p = profile(gamma0_triple(N))
        index, e2, e3, cusps, genus = _gamma0_counts(N)
        assert (p.index, p.e2, p.e3, p.num_cusps, p.genus) == (index, e2, e3, cusps, genus), N
        genera[N] = p.genus
    assert genera[11] == 1
    assert [N for N, g in genera.items() if g == 0] == [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 13, 16, 18, 25]
    assert genera[22] == genera[23] == 2


def test_principal_point(index7_level12):
    p = profile(index7_level12)
    assert p.cusp_widths == (3, 4)
    assert p.principal_width == 3
    assert p.principal_point == 1
    assert p.level == 12


def test_psl2_order():
    assert [psl2_order(N) for N in (2, 3, 4, 5, 7, 12)] == [6, 12, 24, 60, 168, 576]


def test_gamma0_is_congruence():
    for N in range(1, 11):
        assert hsu_congruence_test(gamma0_triple(N)) == Verdict.CONGRUENCE, N


def test_index_obstruction(index7_level12):
    assert hsu_congruence_test(index7_level12) == Verdict.NONCONGRUENCE


def test_analyze(index7_level12, klein7):
    p = analyze(index7_level12)
    assert p.congruence == Verdict.NONCONGRUENCE
    assert (p.index, p.e2, p.e3, p.genus) == (7, 1, 1, 0)
    q = analyze(klein7)
    assert (q.e2, q.e3, q.cusp_widths) == (3, 1, (7,))
    assert q.congruence == Verdict.CONGRUENCE


def test_klein7_mirror_is_congruence(klein7):
    mirror = validate_triple(klein7.s0, ~klein7.s1)
    assert group_order(mirror.as_tuple()) == 168
    assert hsu_congruence_test(mirror) == Verdict.CONGRUENCE


def test_relation_failure_past_index_check(index9_level9):
    t = index9_level9
    assert profile(t).cusp_widths == (9,)
    assert psl2_order(9) % t.n == 0
    assert psl2_order(9) % group_order(t.as_tuple()) != 0
    assert hsu_congruence_test(t) == Verdict.NONCONGRUENCE
