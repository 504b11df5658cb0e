"""Subgroup data of a permutation triple: legitimacy, elliptic points, cusps, level, genus, congruence."""

from __future__ import annotations

import logging
import math
from enum import StrEnum
from fractions import Fraction

from pydantic import BaseModel, ConfigDict
from sympy import primefactors

from mm_belyi.errors import DegreeMismatchError, GenusError
from mm_belyi.perm import CycleType, Permutation, PermutationTriple, cycle_type

logger = logging.getLogger(__name__)


class Verdict(StrEnum):
    CONGRUENCE = "congruence"
    NONCONGRUENCE = "noncongruence"
    UNDECIDED = "undecided"


class SubgroupProfile(BaseModel):
    """
    Data of the subgroup defined by a triple (or by a passport of cycle types).

    ``principal_width`` is the smallest cusp width; ``principal_point`` is the smallest point label
    of the first sinf cycle of that width (None for passports).
    """

    model_config = ConfigDict(frozen=True)

    index: int
    e2: int
    e3: int
    cusp_widths: tuple[int, ...]
    num_cusps: int
    level: int
    genus: int
    congruence: Verdict = Verdict.UNDECIDED
    principal_width: int
    principal_point: int | None = None
    c0: CycleType
    c1: CycleType
    cinf: CycleType

    @property
    def order2_pairs(self) -> int:
        """Number of 2-cycles of s0."""
        return self.c0.count(2)

    @property
    def order3_triples(self) -> int:
        """Number of 3-cycles of s1."""
        return self.c1.count(3)


def validate_triple(s0: Permutation, s1: Permutation) -> PermutationTriple:
    """Build the triple with ``sinf = (s0 * s1)^-1`` and check orders and transitivity."""
    if s0.n != s1.n:
        raise DegreeMismatchError(s0.n, s1.n)
    return PermutationTriple(s0=s0, s1=s1, sinf=~(s0 * s1))


def genus_of(index: int, e2: int, e3: int, num_cusps: int) -> int:
    """Genus 1 + index/12 - e2/4 - e3/3 - cusps/2 in exact arithmetic; raises GenusError unless a nonnegative integer."""
    genus = 1 + Fraction(index, 12) - Fraction(e2, 4) - Fraction(e3, 3) - Fraction(num_cusps, 2)
    if genus.denominator != 1 or genus < 0:
        raise GenusError(genus, "not a nonnegative integer, the cycle data is inconsistent")
    return int(genus)


def profile_from_passport(c0: CycleType, c1: CycleType, cinf: CycleType) -> SubgroupProfile:
    """Profile from cycle types alone; the congruence verdict stays undecided."""
    n = c0.degree
    for c in (c1, cinf):
        if c.degree != n:
            raise DegreeMismatchError(n, c.degree)
    if any(length not in (1, 2) for length, _ in c0.parts):
        raise GenusError("?", f"s0 cycle type {c0} has cycles longer than 2")
    if any(length not in (1, 3) for length, _ in c1.parts):
        raise GenusError("?", f"s1 cycle type {c1} has cycles longer than 3")
    widths = tuple(cinf.lengths())
    e2, e3 = c0.count(1), c1.count(1)
    return SubgroupProfile(
        index=n,
        e2=e2,
        e3=e3,
        cusp_widths=widths,
        num_cusps=len(widths),
        level=math.lcm(*widths),
        genus=genus_of(n, e2, e3, len(widths)),
        principal_width=min(widths),
        c0=c0,
        c1=c1,
        cinf=cinf,
    )


def profile(t: PermutationTriple) -> SubgroupProfile:
    """Profile of a validated triple; congruence is left undecided (see ``hsu_congruence_test``)."""
    result = profile_from_passport(cycle_type(t.s0), cycle_type(t.s1), cycle_type(t.sinf))
    principal = min(t.sinf.cycles(), key=lambda c: (len(c), min(c)))
    logger.debug("principal cusp: width %d at point %d", len(principal), min(principal))
    return result.model_copy(update={"principal_point": min(principal)})


def psl2_order(N: int) -> int:
    """Order of PSL2(Z/N)."""
    order = Fraction(N**3)
    for p in primefactors(N):
        order *= 1 - Fraction(1, p * p)
    return int(order) // (2 if N > 2 else 1)


def parabolic_generators(t: PermutationTriple) -> tuple[Permutation, Permutation]:
    """
    Images of L = [[1,1],[0,1]] and R = [[1,0],[1,1]] under S -> s0, ST -> s1.

    L = S * (ST) and R = S * L^-1 * S^-1 in PSL2(Z).
    """
    lower = ~t.sinf
    return lower, t.s0 * ~lower * t.s0


def _odd_relations(L: Permutation, R: Permutation, N: int) -> bool:
    half = pow(2, -1, N)
    return ((R * R * L ** (-half)) ** 3).is_identity()


def _two_power_relations(L: Permutation, R: Permutation, N: int) -> bool:
    fifth = pow(5, -1, N)
    s = L**20 * R**fifth * L ** (-4) * ~R
    w = L * ~R * L
    return (
        (~w * s * w * s).is_identity()
        and (~s * R * s * R ** (-25)).is_identity()
        and (w * w * ~((s * R**5 * w) ** 3)).is_identity()
    )


def _mixed_relations(L: Permutation, R: Permutation, e: int, m: int) -> bool:
    N = e * m
    c = e * pow(e, -1, m) % N  # 0 mod e, 1 mod m
    d = m * pow(m, -1, e) % N  # 1 mod e, 0 mod m
    a, b, l2, r2 = L**c, R**c, L**d, R**d
    half = pow(2, -1, m)
    w = a * ~b * a
    odd_part = (
        (~a * ~r2 * a * r2).is_identity()
        and (w**4).is_identity()
        and (w * w * (~a * b) ** 3).is_identity()
        and (w * w * ~((b * b * a ** (-half)) ** 3)).is_identity()
    )
    return odd_part and _two_power_relations(l2, r2, e)


def hsu_congruence_test(t: PermutationTriple) -> Verdict:
    """
    Congruence verdict from the level N = lcm of cusp widths and the permutations of L and R.

    A subgroup of level N whose index does not divide |PSL2(Z/N)| cannot contain Gamma(N). Otherwise the
    relation set for N odd, N a power of 2, or N = e*m (e > 1 a power of 2, m > 1 odd) decides.
    """
    n = t.n
    N = math.lcm(*(len(c) for c in t.sinf.cycles()))
    if N == 1:
        return Verdict.CONGRUENCE
    if psl2_order(N) % n:
        logger.info("index %d does not divide |PSL2(Z/%d)|", n, N)
        return Verdict.NONCONGRUENCE
    L, R = parabolic_generators(t)
    e = N & -N
    m = N // e
    if e == 1:
        holds = _odd_relations(L, R, N)
    elif m == 1:
        holds = _two_power_relations(L, R, N)
    else:
        holds = _mixed_relations(L, R, e, m)
    return Verdict.CONGRUENCE if holds else Verdict.NONCONGRUENCE


def analyze(t: PermutationTriple) -> SubgroupProfile:
    """Profile with the congruence verdict filled in."""
    return profile(t).model_copy(update={"congruence": hsu_congruence_test(t)})
