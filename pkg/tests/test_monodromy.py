import pytest
import sympy
from mpmath import mp
from pydantic import ValidationError

from mm_belyi.ansatz import build_ansatz
from mm_belyi.bigsolve import multistart_search
from mm_belyi.errors import ClusteredRootsError, DegreeLimitError
from mm_belyi.exactnf import certify_map
from mm_belyi.monodromy import Loop, fiber_at, loop_path, monodromy_triple, track_loop
from mm_belyi.perm import cycle_type, gamma0_triple, simultaneously_conjugate
from mm_belyi.triple import profile
from mm_belyi.types import PrecisionConfig, TrackingConfig


def test_loop_paths_start_and_end_at_base_point():
    for loop in Loop:
        path = loop_path(loop, -1000.0)
        assert abs(path(mp.mpf(0)) + 1000) < 1e-9
        assert abs(path(mp.mpf(1)) + 1000) < 1e-9


def test_loop_path_shapes():
    assert abs(loop_path(Loop.ZERO, -1000.0)(mp.mpf("0.25")) - mp.mpc(0, -1000)) < 1e-9
    assert abs(loop_path(Loop.J1728, -1000.0)(mp.mpf("0.5")) - 2456) < 1e-9
    assert abs(loop_path(Loop.INFINITY, -1000.0)(mp.mpf("0.5")) - 6912) < 1e-9


def test_tracking_config_base_point():
    with pytest.raises(ValidationError, match="base point"):
        TrackingConfig(base_point=100.0)
    with pytest.raises(ValidationError):
        TrackingConfig(base_point=-2000.0)


def test_fiber_of_j(gamma0_1_solution):
    fs = fiber_at(gamma0_1_solution, 0)
    assert fs.n == 1
    assert abs(fs.roots[0] + 744) < mp.ldexp(1, -100)


def test_fiber_gamma0_2(gamma0_2_solution):
    fs = fiber_at(gamma0_2_solution, -1000)
    assert fs.n == 3
    assert fs.separation > 1
    with mp.workprec(128):
        for x in fs.roots:
            value = (x + 232) ** 3 + 1000 * (x - 24) ** 2
            assert abs(value) < mp.ldexp(1, -80)


def test_fiber_over_critical_value(gamma0_2_solution):
    with pytest.raises(ClusteredRootsError):
        fiber_at(gamma0_2_solution, 0)


def test_local_monodromies_gamma0_2(gamma0_2_solution):
    fs = fiber_at(gamma0_2_solution, -1000)
    assert str(cycle_type(track_loop(gamma0_2_solution, fs, Loop.ZERO))) == "3^1"
    assert str(cycle_type(track_loop(gamma0_2_solution, fs, Loop.J1728))) == "1^1 2^1"
    assert str(cycle_type(track_loop(gamma0_2_solution, fs, Loop.INFINITY))) == "1^1 2^1"


def test_monodromy_of_j(gamma0_1_solution):
    t = monodromy_triple(gamma0_1_solution)
    assert t.n == 1
    assert all(p.is_identity() for p in t.as_tuple())


def test_monodromy_gamma0_2(gamma0_2_solution):
    t = monodromy_triple(gamma0_2_solution)
    assert (t.s0 * t.s1 * t.sinf).is_identity()
    assert simultaneously_conjugate(t, gamma0_triple(2)) is not None


def test_monodromy_gamma0_3_independent_of_base_point(gamma0_3_solution):
    first = monodromy_triple(gamma0_3_solution, TrackingConfig(base_point=-1000.0))
    second = monodromy_triple(gamma0_3_solution, TrackingConfig(base_point=-500.0))
    assert simultaneously_conjugate(first, gamma0_triple(3)) is not None
    assert simultaneously_conjugate(first, second) is not None


def test_monodromy_of_certified_map(gamma0_3_solution):
    t = monodromy_triple(certify_map(gamma0_3_solution))
    assert [str(cycle_type(p)) for p in t.as_tuple()] == ["2^2", "1^1 3^1", "1^1 3^1"]
    assert simultaneously_conjugate(t, gamma0_triple(3)) is not None


def test_degree_limit(gamma0_3_solution):
    with pytest.raises(DegreeLimitError, match="limit 2"):
        monodromy_triple(gamma0_3_solution, TrackingConfig(max_degree=2))


@pytest.mark.slow
def test_klein7_round_trip(klein7):
    a = build_ansatz(profile(klein7))
    solutions = multistart_search(a, 1000, seed=1, cfg=PrecisionConfig(start_bits=128, target_bits=512))
    matching = [sol for sol in solutions if simultaneously_conjugate(monodromy_triple(sol), klein7) is not None]
    assert matching
    m = certify_map(matching[0])
    assert m.field.degree == 2
    c0, c1, _ = m.field.coefficients
    disc = c1 * c1 - 4 * c0
    assert sympy.sqrt(disc).as_coeff_Mul()[1] == sympy.sqrt(-7)
    assert simultaneously_conjugate(monodromy_triple(m), klein7) is not None
