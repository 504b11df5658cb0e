import numpy as np
import pytest
from mpmath import mp

from mm_belyi.ansatz import build_ansatz, jacobian
from mm_belyi.bigsolve import (
    is_generic,
    linear_solve,
    multistart_search,
    newton_refine,
    newton_solve,
    numerical_rank,
    pivot_rank,
    refine_solution,
    solution_from_values,
    solution_residual,
)
from mm_belyi.errors import PrecisionUnderflowError, RankDeficiencyError
from mm_belyi.perm import CycleType, gamma0_triple
from mm_belyi.triple import profile, profile_from_passport
from mm_belyi.types import DOUBLE, MultistartConfig, PrecisionConfig
from mm_belyi.utils import mp_vector


def gamma0_ansatz(N):
    return build_ansatz(profile(gamma0_triple(N)))


def test_precision_levels():
    assert PrecisionConfig(start_bits=128, target_bits=256).levels() == [128, 256]
    assert PrecisionConfig(start_bits=100, target_bits=1000, escalation=4).levels() == [100, 400, 1000]
    with pytest.raises(ValueError, match="start_bits"):
        PrecisionConfig(start_bits=512, target_bits=256)


def test_linear_solve_square():
    with mp.workprec(128):
        x, cond = linear_solve([[2, 1], [1, 3]], [3, 5])
        assert abs(x[0] - mp.mpf(4) / 5) < mp.ldexp(1, -120)
        assert abs(x[1] - mp.mpf(7) / 5) < mp.ldexp(1, -120)
        assert cond >= 1


def test_linear_solve_least_squares():
    with mp.workprec(128):
        x, _ = linear_solve([[1, 0], [0, 1], [1, 1]], [1, 2, 3])
        assert abs(x[0] - 1) < mp.ldexp(1, -110)
        assert abs(x[1] - 2) < mp.ldexp(1, -110)


def test_linear_solve_rank_deficient():
    with mp.workprec(128), pytest.raises(RankDeficiencyError):
        linear_solve([[1, 2], [2, 4]], [1, 2])


def test_linear_solve_rejects_near_singular():
    with mp.workprec(128):
        nearly = [[1, 1], [1, 1 + mp.ldexp(1, -100)]]
        with pytest.raises(RankDeficiencyError) as e:
            linear_solve(nearly, [2, 2])
        assert e.value.rank == 1
        x, cond = linear_solve([[1, 1], [1, 1 + mp.ldexp(1, -40)]], [2, 2])
        assert abs(x[0] - 2) < mp.ldexp(1, -60)
        assert abs(x[1]) < mp.ldexp(1, -60)
        assert cond > mp.ldexp(1, 39)


def test_ranks():
    with mp.workprec(128):
        singular = np.array([[1, 2, 3], [2, 4, 6], [0, 1, 1]], dtype=object)
        assert pivot_rank(singular, 128) == 2
        assert numerical_rank(singular, 128) == 2
        assert numerical_rank(np.eye(3, dtype=object), 128) == 3


def test_newton_solve_square_root():
    def residual_fn(x):
        return mp_vector([x[0] ** 2 - 2]), mp.mpf(1)

    def jacobian_fn(x):
        return np.array([[2 * x[0]]], dtype=object)

    x, norm, bits = newton_solve(residual_fn, jacobian_fn, [1.5], PrecisionConfig(start_bits=64, target_bits=256))
    assert bits == 256
    with mp.workprec(256):
        assert abs(x[0] - mp.sqrt(2)) < mp.ldexp(1, -200)
        assert norm <= mp.ldexp(1, -230)


def test_newton_refine_recovers_exact_solution(gamma0_values):
    a = gamma0_ansatz(2)
    exact = gamma0_values[2]
    x0 = [exact[s] + 0.001 * (k + 1) for k, s in enumerate(a.symbols)]
    sol = newton_refine(a, x0, PrecisionConfig(start_bits=128, target_bits=256))
    assert sol.precision_bits == 256
    assert sol.jacobian_rank_estimate == a.num_unknowns
    with mp.workprec(256):
        for s, v in exact.items():
            assert abs(sol.value(s) - v) < mp.ldexp(1, -200), s


def test_newton_refine_is_a_fixpoint(gamma0_values):
    a = gamma0_ansatz(2)
    exact = gamma0_values[2]
    x0 = [exact[s] + 0.001 * (k + 1) for k, s in enumerate(a.symbols)]
    sol = newton_refine(a, x0, PrecisionConfig(start_bits=128, target_bits=256))
    again = newton_refine(a, sol.coeffs, PrecisionConfig(start_bits=256, target_bits=256))
    assert again.precision_bits == 256
    with mp.workprec(256):
        bound = mp.ldexp(1, -int(0.9 * 256))
        for before, after in zip(sol.coeffs, again.coeffs, strict=True):
            assert abs(after - before) <= bound * max(1, abs(before))


def test_passport_jacobian_shape():
    a = build_ansatz(profile_from_passport(*(CycleType.parse(s) for s in ("1^12 2^132", "3^92", "1^3 7^39"))))
    rng = np.random.default_rng(5)
    x = (rng.standard_normal(a.num_unknowns) + 1j * rng.standard_normal(a.num_unknowns)) * 0.1
    J = jacobian(a, x.astype(DOUBLE))
    assert J.shape == (277, 277)
    assert J.dtype == DOUBLE


def test_refine_solution_climbs_precision(gamma0_3_solution, gamma0_values):
    sol = refine_solution(gamma0_3_solution, PrecisionConfig(start_bits=256, target_bits=512))
    assert sol.precision_bits == 512
    with mp.workprec(512):
        assert abs(sol.value("e0") - gamma0_values[3]["e0"]) < mp.ldexp(1, -450)


def test_solution_from_values_missing():
    with pytest.raises(ValueError, match="missing"):
        solution_from_values(gamma0_ansatz(2), {"a0": 232}, 128)


def test_solution_residual(gamma0_2_solution):
    assert gamma0_2_solution.residual_norm == 0
    assert all(v == 0 for v in solution_residual(gamma0_2_solution, 128))
    with pytest.raises(PrecisionUnderflowError):
        solution_residual(gamma0_2_solution, 512)


def test_is_generic(gamma0_values):
    a = gamma0_ansatz(2)
    exact = gamma0_values[2]
    assert is_generic(a, [exact[s] for s in a.symbols])
    collided = dict(exact, e0=exact["d0"])
    assert not is_generic(a, [collided[s] for s in a.symbols])


@pytest.mark.slow
def test_multistart_finds_gamma0_2(gamma0_values):
    a = gamma0_ansatz(2)
    solutions = multistart_search(a, 200, seed=0, cfg=PrecisionConfig(start_bits=128, target_bits=256))
    assert solutions
    exact = gamma0_values[2]
    with mp.workprec(256):
        assert any(all(abs(sol.value(s) - v) < mp.ldexp(1, -200) for s, v in exact.items()) for sol in solutions)


@pytest.mark.slow
def test_multistart_is_deterministic():
    a = gamma0_ansatz(3)
    cfg = PrecisionConfig(start_bits=128, target_bits=128)
    first = multistart_search(a, 50, seed=7, cfg=cfg)
    second = multistart_search(a, 50, seed=7, cfg=cfg, ms=MultistartConfig(threads=4))
    assert [s.coeffs for s in first] == [s.coeffs for s in second]


@pytest.mark.slow
def test_multistart_affine(klein7):
    a = build_ansatz(profile(klein7))
    solutions = multistart_search(a, 300, seed=1, cfg=PrecisionConfig(start_bits=128, target_bits=256))
    assert solutions
    for sol in solutions:
        assert abs(sol.value("a1")) < mp.ldexp(1, -200)
        assert abs(sol.value("f0") - 1) < mp.ldexp(1, -200)
        assert sol.residual_norm < mp.ldexp(1, -200)
