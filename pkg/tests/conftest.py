import pytest

from mm_belyi import Permutation, PermutationTriple, build_ansatz, gamma0_triple, profile, solution_from_values
from mm_belyi.triple import validate_triple

# Exact hauptmodul solutions of Gamma0(N), N = 1, 2, 3, unknowns named as build_ansatz names them.
GAMMA0_VALUES = {
    1: {"d0": -984, "f0": 744},
    2: {"a0": 232, "c0": -24, "d0": 40, "e0": -536},
    3: {"a0": 231, "c0": -12, "e0": -13707, "e1": -510, "f0": 15},
}


@pytest.fixture
def klein7() -> PermutationTriple:
    """Degree 7 triple with cycle types 1^3 2^2 / 1 3^2 / 7 and monodromy group of order 168."""
    s0 = Permutation.from_cycles(7, [(1, 2), (4, 5)])
    s1 = Permutation.from_cycles(7, [(2, 3, 4), (5, 6, 7)])
    return validate_triple(s0, s1)


@pytest.fixture
def index7_level12() -> PermutationTriple:
    """Index 7 with cusp widths 3 and 4; 7 does not divide |PSL2(Z/12)| = 576."""
    s0 = Permutation.from_cycles(7, [(1, 5), (3, 4), (6, 7)])
    s1 = Permutation.from_cycles(7, [(1, 2, 3), (4, 5, 6)])
    return validate_triple(s0, s1)


@pytest.fixture
def index9_level9() -> PermutationTriple:
    """Index 9 with one cusp of width 9; 9 divides |PSL2(Z/9)| = 324, the order of the monodromy group does not."""
    s0 = Permutation.from_cycles(9, [(2, 8), (3, 4), (5, 9), (6, 7)])
    s1 = Permutation.from_cycles(9, [(1, 2, 3), (4, 5, 6)])
    return validate_triple(s0, s1)


def exact_solution(N: int, bits: int = 256):
    a = build_ansatz(profile(gamma0_triple(N)))
    return solution_from_values(a, dict(GAMMA0_VALUES[N]), bits)


@pytest.fixture
def gamma0_2_solution():
    return exact_solution(2)


@pytest.fixture
def gamma0_3_solution():
    return exact_solution(3)


@pytest.fixture
def gamma0_1_solution():
    return exact_solution(1)


@pytest.fixture
def gamma0_values():
    return GAMMA0_VALUES
