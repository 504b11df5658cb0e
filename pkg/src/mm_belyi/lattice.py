"""
Integral LLL reduction and recognition of algebraic numbers from complex approximations.

Complex values enter a lattice as two scaled integer columns (real and imaginary part). Recognition is
progressive: the column scale grows 64, 128, ... bits up to the working precision minus a guard, the
unimodular transform of each stage is carried into the next, and the search stops as soon as a reduced
row that already appeared at the previous scale satisfies the relation to half the working precision.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from fractions import Fraction
from typing import Any

from mpmath import mp
from pydantic import BaseModel, ConfigDict, Field, field_validator

from mm_belyi.errors import DependentRowsError, NoRelationError
from mm_belyi.types import IntPoly, RatPoly, RecognitionConfig

logger = logging.getLogger(__name__)


class IntegerLattice(BaseModel):
    """Lattice spanned by integer row vectors."""

    model_config = ConfigDict(frozen=True)

    basis: tuple[tuple[int, ...], ...]

    @field_validator("basis")
    @classmethod
    def check_rows(cls, v: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
        if not v or not v[0]:
            raise ValueError("empty basis")
        if any(len(row) != len(v[0]) for row in v):
            raise ValueError("rows of different dimensions")
        return v

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def dim(self) -> int:
        return len(self.basis[0])


class RecognitionResult(BaseModel):
    """
    Outcome of a lattice recognition.

    ``polynomial`` is set by algdep, ``coordinates`` by field_membership. ``certified_bits`` is how far below
    the acceptance bound of 2^(-precision_bits/2) the relation holds.
    """

    model_config = ConfigDict(frozen=True)

    label: str
    precision_bits: int
    certified_bits: int = Field(gt=0)
    polynomial: IntPoly | None = None
    coordinates: RatPoly | None = None


def _dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v, strict=True))


def _integral_lll(rows: Sequence[Sequence[int]], delta: Fraction) -> tuple[list[list[int]], list[list[int]]]:
    """
    LLL on integer rows with exact integer Gram-Schmidt data.

    ``d[i + 1]`` is the Gram determinant of the first i + 1 rows and ``lam[k][j] = d[j + 1] * mu[k][j]``,
    so all updates are exact integer divisions. Returns the reduced rows and the unimodular transform H with
    reduced = H * rows.
    """
    n = len(rows)
    b = [list(r) for r in rows]
    h = [[int(i == j) for j in range(n)] for i in range(n)]
    p, q = delta.numerator, delta.denominator
    d = [1] + [0] * n
    lam = [[0] * n for _ in range(n)]

    def gram_schmidt(k: int) -> None:
        for j in range(k + 1):
            u = _dot(b[k], b[j])
            for i in range(j):
                u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
            if j < k:
                lam[k][j] = u
            else:
                if u == 0:
                    raise DependentRowsError(k)
                d[k + 1] = u

    def reduce(k: int, l: int) -> None:
        if 2 * abs(lam[k][l]) > d[l + 1]:
            r = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - r * y for x, y in zip(b[k], b[l], strict=True)]
            h[k] = [x - r * y for x, y in zip(h[k], h[l], strict=True)]
            lam[k][l] -= r * d[l + 1]
            for i in range(l):
                lam[k][i] -= r * lam[l][i]

    def swap(k: int, kmax: int) -> None:
        b[k], b[k - 1] = b[k - 1], b[k]
        h[k], h[k - 1] = h[k - 1], h[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        mu = lam[k][k - 1]
        big = (d[k - 1] * d[k + 1] + mu * mu) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - mu * t) // d[k]
            lam[i][k - 1] = (big * t + mu * lam[i][k]) // d[k + 1]
        d[k] = big

    gram_schmidt(0)
    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            gram_schmidt(k)
        reduce(k, k - 1)
        if q * (d[k + 1] * d[k - 1] + lam[k][k - 1] ** 2) < p * d[k] ** 2:
            swap(k, kmax)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                reduce(k, l)
            k += 1
    return b, h


def lll_reduce_with_transform(L: IntegerLattice, delta: Fraction = Fraction(99, 100)) -> tuple[IntegerLattice, tuple[tuple[int, ...], ...]]:
    """Reduced lattice and the unimodular H with reduced basis = H * input basis."""
    if not Fraction(1, 4) < delta < 1:
        raise ValueError(f"delta {delta} not in (1/4, 1)")
    rows, h = _integral_lll(L.basis, delta)
    return IntegerLattice(basis=tuple(tuple(r) for r in rows)), tuple(tuple(r) for r in h)


def lll_reduce(L: IntegerLattice, delta: Fraction = Fraction(99, 100)) -> IntegerLattice:
    return lll_reduce_with_transform(L, delta)[0]


def is_lll_reduced(L: IntegerLattice, delta: Fraction = Fraction(99, 100)) -> bool:
    """Size reduction and the Lovasz condition, checked with rational Gram-Schmidt."""
    stars: list[list[Fraction]] = []
    norms: list[Fraction] = []
    mu_prev = Fraction(0)
    for i, row in enumerate(L.basis):
        star = [Fraction(x) for x in row]
        for j in range(i):
            mu = sum((x * y for x, y in zip(row, stars[j], strict=True)), start=Fraction(0)) / norms[j]
            if abs(mu) > Fraction(1, 2):
                return False
            if j == i - 1:
                mu_prev = mu
            star = [x - mu * y for x, y in zip(star, stars[j], strict=True)]
        norm = sum(x * x for x in star)
        if norm == 0:
            return False
        if i > 0 and norm < (delta - mu_prev**2) * norms[i - 1]:
            return False
        stars.append(star)
        norms.append(norm)
    return True


def _scales(bits: int, cfg: RecognitionConfig) -> list[int]:
    top = max(16, bits - cfg.guard_bits)
    result = []
    s = min(cfg.first_scale_bits, top // 2)
    while s < top:
        result.append(s)
        s *= 2
    result.append(top)
    return result


def _normalized(row: Sequence[int]) -> tuple[int, ...]:
    sign = next((1 if c > 0 else -1 for c in row if c), 1)
    return tuple(sign * c for c in row)


def _find_relation(
    values: Sequence[Any],
    bits: int,
    cfg: RecognitionConfig,
    accept: Callable[[list[int]], bool],
    label: str,
    degree: int,
) -> tuple[list[int], int]:
    """
    Integer relation among ``values`` holding to 2^(-bits/2); returns it with its certified bits.

    A row is accepted only when it already appeared in the reduced basis of the previous column scale.
    """
    m = len(values)
    transform = [[int(i == j) for j in range(m)] for i in range(m)]
    previous: set[tuple[int, ...]] = set()
    with mp.workprec(bits + 32):
        vals = [mp.mpc(v) for v in values]
        bound = mp.ldexp(1, -(bits // 2))
        for s in _scales(bits, cfg):
            factor = mp.ldexp(1, s)
            rows = []
            for t in transform:
                z = mp.fsum(c * v for c, v in zip(t, vals, strict=True) if c) * factor
                rows.append([*t, int(mp.nint(z.real)), int(mp.nint(z.imag))])
            reduced, _ = _integral_lll(rows, cfg.delta)
            transform = [r[:m] for r in reduced]
            logger.debug("%s: column scale 2^%d, first row height %d", label, s, max(abs(c) for c in transform[0]))
            for candidate in transform:
                if not accept(candidate) or _normalized(candidate) not in previous:
                    continue
                height = max(abs(c) for c in candidate)
                if cfg.max_height_bits is not None and height.bit_length() > cfg.max_height_bits:
                    continue
                size = mp.sqrt(sum(c * c for c in candidate))
                error = abs(mp.fsum(c * v for c, v in zip(candidate, vals, strict=True) if c))
                if error < bound * size:
                    margin = bits - bits // 2 if error == 0 else int(mp.floor(-mp.log(error / size, 2))) - bits // 2
                    return candidate, max(1, margin)
            previous = {_normalized(t) for t in transform}
    raise NoRelationError(label, bits, degree)


def algdep(alpha: Any, maxdeg: int, bits: int | None = None, cfg: RecognitionConfig | None = None, label: str = "alpha") -> RecognitionResult:
    """
    Integer polynomial of degree at most ``maxdeg`` vanishing at ``alpha`` to 2^(-bits/2).

    The result has content 1 and a positive leading coefficient; it need not be irreducible.
    """
    cfg = cfg or RecognitionConfig()
    bits = bits or mp.prec
    with mp.workprec(bits + 32):
        a = mp.mpc(alpha)
        powers = [a**k for k in range(maxdeg + 1)]
    coeffs, margin = _find_relation(powers, bits, cfg, lambda c: any(c[1:]), label, maxdeg)
    while coeffs[-1] == 0:
        coeffs.pop()
    g = math.gcd(*coeffs)
    sign = 1 if coeffs[-1] > 0 else -1
    poly = tuple(sign * c // g for c in coeffs)
    logger.debug("%s: degree %d relation, %d certified bits", label, len(poly) - 1, margin)
    return RecognitionResult(label=label, precision_bits=bits, certified_bits=margin, polynomial=poly)


def field_membership(
    tau: Any,
    beta: Any,
    f: IntPoly,
    bits: int | None = None,
    cfg: RecognitionConfig | None = None,
    label: str = "tau",
) -> RecognitionResult:
    """Rational coordinates q with ``tau = sum(q[i] * beta^i)``, i < deg f, holding to 2^(-bits/2)."""
    cfg = cfg or RecognitionConfig()
    bits = bits or mp.prec
    degree = len(f) - 1
    with mp.workprec(bits + 32):
        b = mp.mpc(beta)
        values = [mp.mpc(tau)] + [b**k for k in range(degree)]
    coeffs, margin = _find_relation(values, bits, cfg, lambda c: c[0] != 0, label, degree)
    coordinates = tuple(Fraction(-c, coeffs[0]) for c in coeffs[1:])
    return RecognitionResult(label=label, precision_bits=bits, certified_bits=margin, coordinates=coordinates)
