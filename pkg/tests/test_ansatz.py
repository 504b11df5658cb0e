import numpy as np
import pytest
from mpmath import mp
from pydantic import ValidationError

from mm_belyi.ansatz import (
    FactorRole,
    Gauge,
    NormalizationSpec,
    belyi_polynomials,
    build_ansatz,
    iter_coefficients,
    jacobian,
    normalization_equation,
    residual,
)
from mm_belyi.errors import GenusError
from mm_belyi.perm import gamma0_triple
from mm_belyi.triple import profile
from mm_belyi.types import DOUBLE
from mm_belyi.utils import mp_vector


def gamma0_ansatz(N):
    return build_ansatz(profile(gamma0_triple(N)))


def test_gamma0_symbols_and_normalization():
    a1, a2, a3 = gamma0_ansatz(1), gamma0_ansatz(2), gamma0_ansatz(3)
    assert a1.symbols == ("d0", "f0")
    assert str(a1.normalization) == "1*f0 = 744"
    assert a2.symbols == ("a0", "c0", "d0", "e0")
    assert str(a2.normalization) == "3*a0 - 2*c0 = 744"
    assert a3.symbols == ("a0", "c0", "e0", "e1", "f0")
    assert str(a3.normalization) == "3*a0 - 3*c0 + 1*f0 = 744"
    for a in (a1, a2, a3):
        assert a.num_unknowns == a.num_equations
        assert not a.affine


def test_affine_ansatz(klein7):
    a = build_ansatz(profile(klein7))
    assert [f.prefix for f in a.factors] == ["a", "d", "e", "f"]
    assert a.factor("a").role == FactorRole.ORDER3_CUBED
    assert a.normalization.kind == Gauge.AFFINE
    assert str(a.normalization) == "a1 = 0, f0 = 1"
    assert a.symbols[-1] == "scale"
    assert (a.num_unknowns, a.num_equations) == (9, 9)
    assert normalization_equation(a) == a.normalization


def test_affine_ansatz_with_cusp(index7_level12):
    a = build_ansatz(profile(index7_level12))
    c = a.factor("c")
    assert (c.degree, c.multiplicity) == (1, 4)
    assert str(a.normalization) == "a1 = 0, f0 = 1"
    assert (a.num_unknowns, a.num_equations) == (9, 9)


def test_genus_one_rejected():
    with pytest.raises(GenusError, match="genus 1"):
        gamma0_ansatz(11)


def test_normalization_spec_kinds():
    with pytest.raises(ValidationError):
        NormalizationSpec(kind=Gauge.HAUPTMODUL, gauge_fixes=(("a0", 0),))
    with pytest.raises(ValidationError):
        NormalizationSpec(kind=Gauge.AFFINE, gauge_fixes=(("a0", 0),))


def test_residual_vanishes_at_exact_solutions(gamma0_values):
    for N, values in gamma0_values.items():
        a = gamma0_ansatz(N)
        r = residual(a, [values[s] for s in a.symbols], bits=256)
        assert all(v == 0 for v in r), N


def test_belyi_polynomials_gamma0_2(gamma0_values):
    a = gamma0_ansatz(2)
    p3, p2, pc = belyi_polynomials(a, [gamma0_values[2][s] for s in a.symbols], bits=128)
    assert [int(c.real) for c in p3] == [232**3, 3 * 232**2, 3 * 232, 1]
    assert [int(c.real) for c in pc] == [576, -48, 1]
    assert len(p2) == 4


def test_residual_detects_wrong_value(gamma0_values):
    a = gamma0_ansatz(2)
    values = dict(gamma0_values[2], e0=-488)
    r = residual(a, [values[s] for s in a.symbols], bits=128)
    assert max(abs(v) for v in r) > 1


def test_residual_double_path(gamma0_values):
    a = gamma0_ansatz(3)
    x = np.array([gamma0_values[3][s] for s in a.symbols], dtype=DOUBLE)
    r = residual(a, x)
    assert r.dtype == DOUBLE
    assert np.max(np.abs(r)) < 1e-3


def _finite_difference_check(a, point, h_exp=-60, tol_exp=-40):
    with mp.workprec(256):
        x = mp_vector(point)
        J = jacobian(a, x)
        assert J.shape == (a.num_equations, a.num_unknowns)
        h = mp.ldexp(1, h_exp)
        for j in range(a.num_unknowns):
            up, down = x.copy(), x.copy()
            up[j] += h
            down[j] -= h
            column = (residual(a, up) - residual(a, down)) / (2 * h)
            for i in range(a.num_equations):
                assert abs(column[i] - J[i, j]) <= mp.ldexp(1, tol_exp) * max(1, abs(J[i, j])), (i, j)


def test_jacobian_matches_finite_differences_hauptmodul():
    a = gamma0_ansatz(3)
    _finite_difference_check(a, [mp.mpc(k + 1, k - 2) / 3 for k in range(a.num_unknowns)])


def test_jacobian_matches_finite_differences_affine(klein7):
    a = build_ansatz(profile(klein7))
    _finite_difference_check(a, [mp.mpc(2 - k, k) / 5 for k in range(a.num_unknowns)])


def test_jacobian_double_matches_multiprecision(index7_level12):
    a = build_ansatz(profile(index7_level12))
    point = [complex(0.1 * k, -0.2 * k + 0.3) for k in range(a.num_unknowns)]
    J_double = jacobian(a, np.array(point, dtype=DOUBLE))
    J_mp = jacobian(a, point, bits=128)
    assert J_double.dtype == DOUBLE
    assert np.max(np.abs(J_double - J_mp.astype(DOUBLE))) < 1e-9


def test_jacobian_threads(gamma0_values):
    a = gamma0_ansatz(3)
    x = [gamma0_values[3][s] for s in a.symbols]
    assert (jacobian(a, x, bits=128) == jacobian(a, x, bits=128, threads=3)).all()


def test_iter_coefficients():
    a = gamma0_ansatz(2)
    assert [s for s, _ in iter_coefficients(a, mp_vector(range(4)))] == ["a0", "c0", "d0", "e0"]
