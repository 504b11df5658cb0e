import itertools
from types import SimpleNamespace

import pytest

from mm_belyi.errors import (
    ConjugacySearchTimeoutError,
    DegreeMismatchError,
    EmptyGeneratorsError,
    NotBijectionError,
    NotTransitiveError,
    OrderViolationError,
)
from mm_belyi.perm import (
    CycleType,
    Permutation,
    PermutationTriple,
    compose,
    cycle_type,
    gamma0_triple,
    group_order,
    is_transitive,
    orbits,
    product,
    simultaneously_conjugate,
)
from mm_belyi.triple import validate_triple


def test_compose_applies_right_factor_first():
    p = Permutation.from_cycles(3, [(1, 2)])
    q = Permutation.from_cycles(3, [(2, 3)])
    assert compose(p, q).images == (2, 3, 1)
    assert (p * q)(2) == p(q(2))
    assert compose(q, p).images == (3, 1, 2)


def test_compose_degree_mismatch():
    with pytest.raises(DegreeMismatchError, match="3 != 4"):
        compose(Permutation.identity(3), Permutation.identity(4))


def test_not_bijection():
    with pytest.raises(NotBijectionError):
        Permutation(images=(1, 1, 2))


def test_inverse_power_order():
    p = Permutation.from_cycles(5, [(1, 2, 3), (4, 5)])
    assert (p * ~p).is_identity()
    assert p.order() == 6
    assert (p**6).is_identity()
    assert p**-1 == ~p
    assert str(p) == "(1 2 3)(4 5)"
    assert p.cycles() == [(1, 2, 3), (4, 5)]


def test_product():
    a = Permutation.from_cycles(3, [(1, 2)])
    b = Permutation.from_cycles(3, [(2, 3)])
    c = Permutation.from_cycles(3, [(1, 3)])
    assert product([a, b, c]) == a * (b * c)


def test_cycle_type():
    assert cycle_type(Permutation.from_cycles(4, [(1, 2, 3)])) == CycleType.parse("1 3")
    assert str(CycleType.parse("1^12 2^132")) == "1^12 2^132"
    assert CycleType.parse("1^3 7^39").degree == 276
    assert CycleType.parse("2^2 1^3").lengths() == [1, 1, 1, 2, 2]


def test_orbits_and_transitivity():
    a = Permutation.from_cycles(4, [(1, 2)])
    b = Permutation.from_cycles(4, [(3, 4)])
    assert orbits([a, b], 4) == [(1, 2), (3, 4)]
    assert not is_transitive([a, b], 4)
    assert is_transitive([Permutation.from_cycles(4, [(1, 2, 3, 4)])], 4)
    assert is_transitive([], 1)
    with pytest.raises(EmptyGeneratorsError):
        is_transitive([], 3)


def test_triple_invariants():
    s0 = Permutation.from_cycles(3, [(1, 2)])
    s1 = Permutation.from_cycles(3, [(1, 2, 3)])
    t = validate_triple(s0, s1)
    assert (t.s0 * t.s1 * t.sinf).is_identity()

    with pytest.raises(OrderViolationError, match="s1"):
        validate_triple(s0, Permutation.from_cycles(3, [(1, 2)]))
    with pytest.raises(NotTransitiveError):
        validate_triple(Permutation.from_cycles(4, [(1, 2)]), Permutation.identity(4))


def test_group_order():
    s3 = [Permutation.from_cycles(3, [(1, 2)]), Permutation.from_cycles(3, [(1, 2, 3)])]
    assert group_order(s3) == 6
    assert group_order([Permutation.identity(5)]) == 1
    s6 = [Permutation.from_cycles(6, [(1, 2)]), Permutation.from_cycles(6, [(1, 2, 3, 4, 5, 6)])]
    assert group_order(s6) == 720


def test_group_order_klein7(klein7):
    assert group_order([klein7.s0, klein7.s1]) == 168


def test_gamma0_triple_indices():
    # index of Gamma0(N) is N * prod(1 + 1/p)
    for N, index in [(1, 1), (2, 3), (3, 4), (4, 6), (5, 6), (6, 12), (7, 8), (8, 12), (9, 12), (10, 18)]:
        t = gamma0_triple(N)
        assert t.n == index
        assert t.sinf(1) == 1


def test_simultaneous_conjugacy():
    t = gamma0_triple(5)
    pi = Permutation.from_cycles(6, [(1, 4, 2), (3, 6)])
    conj = PermutationTriple(s0=pi * t.s0 * ~pi, s1=pi * t.s1 * ~pi, sinf=pi * t.sinf * ~pi)
    found = simultaneously_conjugate(t, conj)
    assert found is not None
    assert all(found * p * ~found == q for p, q in zip(t.as_tuple(), conj.as_tuple(), strict=True))


def test_simultaneous_conjugacy_different_cycle_types(klein7, index7_level12):
    assert simultaneously_conjugate(klein7, index7_level12) is None


def test_conjugacy_deadline_checked_while_propagating(monkeypatch):
    # one tick per clock read: the deadline passes after the first candidate is accepted for propagation
    ticks = itertools.count()
    monkeypatch.setattr("mm_belyi.perm.time", SimpleNamespace(monotonic=lambda: float(next(ticks))))
    t = gamma0_triple(7)
    with pytest.raises(ConjugacySearchTimeoutError, match="1.5 s"):
        simultaneously_conjugate(t, t, timeout=1.5)
