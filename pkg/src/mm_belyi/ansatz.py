"""
Polynomial ansatz of a genus-zero Belyi map, its unknowns, residual system and Jacobian.

The map is ``Phi = c * p3 / pc = 1728 + c * p2 / pc`` with monic ``p3 = F * A^3`` (order-3 points),
``p2 = D * E^2`` (order-2 points) and ``pc = prod C_w^w`` over the non-principal cusps (the principal
cusp sits at infinity). In hauptmodul gauge ``c = 1`` and ``p3 - p2 - 1728 * pc = 0``; in affine gauge
``c = 1728 / scale`` and the equations read ``p3 - p2 - scale * pc = 0``.
"""

from __future__ import annotations

import contextlib
import logging
from collections import Counter
from collections.abc import Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from enum import StrEnum
from functools import cached_property

import numpy as np
from mpmath import mp
from pydantic import BaseModel, ConfigDict, Field, model_validator

from mm_belyi.errors import GenusError, InputError
from mm_belyi.triple import SubgroupProfile
from mm_belyi.types import DOUBLE, Matrix, Vector
from mm_belyi.utils import mp_vector, poly_pow, poly_product

logger = logging.getLogger(__name__)

J_CONSTANTS = (744, 196884)
CUSP_PREFIXES = ("c", "g", "h", "k", "m", "p", "q", "r", "s", "t", "u", "v", "w", "y", "z")
SCALE = "scale"


class FactorRole(StrEnum):
    ORDER3_SIMPLE = "order3-simple"
    ORDER3_CUBED = "order3-cubed"
    ORDER2_SIMPLE = "order2-simple"
    ORDER2_SQUARED = "order2-squared"
    CUSP = "cusp"

    @property
    def product(self) -> str:
        if self in (FactorRole.ORDER3_SIMPLE, FactorRole.ORDER3_CUBED):
            return "p3"
        if self in (FactorRole.ORDER2_SIMPLE, FactorRole.ORDER2_SQUARED):
            return "p2"
        return "pc"


class Gauge(StrEnum):
    HAUPTMODUL = "hauptmodul-gauge"
    AFFINE = "affine-gauge"


class FactorSpec(BaseModel):
    """Monic factor of degree ``degree`` raised to ``multiplicity``; coefficients are ``<prefix>0 .. <prefix>(degree-1)``."""

    model_config = ConfigDict(frozen=True)

    role: FactorRole
    degree: int = Field(ge=1)
    multiplicity: int = Field(ge=1)
    prefix: str

    def symbol(self, k: int) -> str:
        return f"{self.prefix}{k}"

    @property
    def subleading(self) -> str:
        """Symbol of the x^(degree-1) coefficient."""
        return self.symbol(self.degree - 1)


class NormalizationSpec(BaseModel):
    """
    Gauge condition appended to the coefficient equations.

    Hauptmodul gauge: ``sum(c * symbol) = 744`` from matching the q-expansion ``1/q + 744 + 196884 q``.
    Affine gauge: each (symbol, value) in ``gauge_fixes`` is pinned.
    """

    model_config = ConfigDict(frozen=True)

    kind: Gauge
    constants: tuple[int, int] = J_CONSTANTS
    linear_equation: tuple[tuple[int, str], ...] = ()
    gauge_fixes: tuple[tuple[str, int], ...] = ()

    @model_validator(mode="after")
    def check_kind(self) -> NormalizationSpec:
        if self.kind == Gauge.HAUPTMODUL and (not self.linear_equation or self.gauge_fixes):
            raise ValueError("hauptmodul gauge takes a linear equation only")
        if self.kind == Gauge.AFFINE and (self.linear_equation or len(self.gauge_fixes) != 2):
            raise ValueError("affine gauge takes two gauge fixes only")
        return self

    @property
    def rhs(self) -> int:
        return self.constants[0]

    def __str__(self) -> str:
        if self.kind == Gauge.AFFINE:
            return ", ".join(f"{symbol} = {value}" for symbol, value in self.gauge_fixes)
        parts = []
        for i, (c, symbol) in enumerate(self.linear_equation):
            if i == 0:
                parts.append(f"{c}*{symbol}")
            else:
                parts.append(f"{'-' if c < 0 else '+'} {abs(c)}*{symbol}")
        return " ".join(parts) + f" = {self.rhs}"


class BelyiAnsatz(BaseModel):
    """
    Factor structure and unknown ordering.

    Unknowns are the non-leading coefficients of the factors in factor order (factors sorted by prefix),
    constant term first, followed by ``scale`` in affine gauge.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    factors: tuple[FactorSpec, ...]
    principal_width: int = Field(ge=1)
    normalization: NormalizationSpec

    @model_validator(mode="after")
    def check_degrees(self) -> BelyiAnsatz:
        totals = Counter[str]()
        for f in self.factors:
            totals[f.role.product] += f.degree * f.multiplicity
        if totals["p3"] != self.n or totals["p2"] != self.n or totals["pc"] != self.n - self.principal_width:
            raise ValueError(f"factor degrees {dict(totals)} do not fit index {self.n}, principal width {self.principal_width}")
        if self.normalization.kind == Gauge.HAUPTMODUL and self.principal_width != 1:
            raise ValueError("hauptmodul gauge requires principal width 1")
        return self

    @property
    def affine(self) -> bool:
        return self.normalization.kind == Gauge.AFFINE

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        """Flat index of the constant coefficient of each factor."""
        result, pos = [], 0
        for f in self.factors:
            result.append(pos)
            pos += f.degree
        return tuple(result)

    @cached_property
    def symbols(self) -> tuple[str, ...]:
        names = [f.symbol(k) for f in self.factors for k in range(f.degree)]
        if self.affine:
            names.append(SCALE)
        return tuple(names)

    @cached_property
    def unknown_index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    @property
    def num_unknowns(self) -> int:
        return len(self.symbols)

    @property
    def num_equations(self) -> int:
        return self.n + (2 if self.affine else 1)

    def factor(self, prefix: str) -> FactorSpec:
        for f in self.factors:
            if f.prefix == prefix:
                return f
        raise KeyError(prefix)

    def factor_coefficients(self, coeffs: Vector, i: int) -> Vector:
        """Monic coefficient array of factor ``i`` (leading 1 appended)."""
        start = self.offsets[i]
        body = coeffs[start : start + self.factors[i].degree]
        one = mp.mpc(1) if coeffs.dtype == object else np.ones(1, dtype=DOUBLE)[0]
        return np.concatenate([body, np.array([one], dtype=coeffs.dtype)])

    def scale_value(self, coeffs: Vector) -> object:
        """The constant K' with residual p3 - p2 - K' * pc: 1728, or the ``scale`` unknown."""
        if self.affine:
            return coeffs[-1]
        return mp.mpf(1728) if coeffs.dtype == object else 1728.0


def _cusp_factors(widths: Sequence[int], principal: int) -> list[FactorSpec]:
    counts = Counter(widths)
    counts[principal] -= 1
    wide = sorted(w for w, k in counts.items() if k > 0 and w > 1)
    if len(wide) > len(CUSP_PREFIXES):
        raise InputError(f"{len(wide)} distinct cusp widths, at most {len(CUSP_PREFIXES)} supported")
    result = []
    if counts[1] > 0:
        result.append(FactorSpec(role=FactorRole.CUSP, degree=counts[1], multiplicity=1, prefix="b"))
    for w, prefix in zip(wide, CUSP_PREFIXES, strict=False):
        result.append(FactorSpec(role=FactorRole.CUSP, degree=counts[w], multiplicity=w, prefix=prefix))
    return result


def _normalization(factors: Sequence[FactorSpec], principal_width: int) -> NormalizationSpec:
    if principal_width == 1:
        equation = []
        for f in factors:
            if f.role.product == "p3":
                equation.append((f.multiplicity, f.subleading))
            elif f.role == FactorRole.CUSP:
                equation.append((-f.multiplicity, f.subleading))
        return NormalizationSpec(kind=Gauge.HAUPTMODUL, linear_equation=tuple(equation))

    numerator = [f for f in factors if f.role.product == "p3"]
    translation = max(numerator, key=lambda f: f.degree)  # first of maximal degree
    order = [FactorRole.ORDER3_SIMPLE, FactorRole.ORDER2_SIMPLE, FactorRole.ORDER2_SQUARED, FactorRole.CUSP]
    candidates = [f for role in order for f in factors if f.role == role and f is not translation]
    return NormalizationSpec(
        kind=Gauge.AFFINE,
        gauge_fixes=((translation.subleading, 0), (candidates[0].subleading, 1)),
    )


def build_ansatz(p: SubgroupProfile) -> BelyiAnsatz:
    """Factor structure from the cycle counts of a genus-zero profile."""
    if p.genus != 0:
        raise GenusError(p.genus, "the polynomial ansatz needs genus 0")
    factors = [
        FactorSpec(role=role, degree=degree, multiplicity=m, prefix=prefix)
        for role, degree, m, prefix in (
            (FactorRole.ORDER3_SIMPLE, p.e3, 1, "f"),
            (FactorRole.ORDER3_CUBED, p.order3_triples, 3, "a"),
            (FactorRole.ORDER2_SIMPLE, p.e2, 1, "d"),
            (FactorRole.ORDER2_SQUARED, p.order2_pairs, 2, "e"),
        )
        if degree > 0
    ]
    factors += _cusp_factors(p.cusp_widths, p.principal_width)
    factors.sort(key=lambda f: f.prefix)
    result = ansatz_from_factors(p.index, factors, p.principal_width)
    logger.info("ansatz: %d unknowns, %d equations, %s", result.num_unknowns, result.num_equations, result.normalization.kind)
    return result


def ansatz_from_factors(n: int, factors: Sequence[FactorSpec], principal_width: int) -> BelyiAnsatz:
    """Ansatz with the normalization implied by the factors and the principal width."""
    return BelyiAnsatz(
        n=n,
        factors=tuple(factors),
        principal_width=principal_width,
        normalization=_normalization(factors, principal_width),
    )


def normalization_equation(a: BelyiAnsatz) -> NormalizationSpec:
    return _normalization(a.factors, a.principal_width)


def _precision(bits: int | None) -> contextlib.AbstractContextManager[object]:
    return mp.workprec(bits) if bits is not None else contextlib.nullcontext()


def _as_coeffs(a: BelyiAnsatz, coeffs: Sequence[object] | Vector) -> Vector:
    if len(coeffs) != a.num_unknowns:
        raise ValueError(f"expected {a.num_unknowns} coefficients, got {len(coeffs)}")
    if isinstance(coeffs, np.ndarray) and coeffs.dtype == DOUBLE:
        return coeffs
    return mp_vector(coeffs)


def _members(a: BelyiAnsatz, product: str) -> list[int]:
    return [i for i, f in enumerate(a.factors) if f.role.product == product]


def _padded(p: Vector, length: int) -> Vector:
    zero = mp.mpc(0) if p.dtype == object else 0j
    out = np.full(length, zero, dtype=p.dtype)
    out[: len(p)] = p
    return out


def belyi_polynomials(a: BelyiAnsatz, coeffs: Sequence[object] | Vector, bits: int | None = None) -> tuple[Vector, Vector, Vector]:
    """Coefficient arrays (constant first) of p3, p2 and pc."""
    with _precision(bits):
        x = _as_coeffs(a, coeffs)
        powers = [poly_pow(a.factor_coefficients(x, i), f.multiplicity) for i, f in enumerate(a.factors)]
        double = x.dtype == DOUBLE
        p3, p2, pc = (poly_product([powers[i] for i in _members(a, name)], double=double) for name in ("p3", "p2", "pc"))
        return p3, p2, pc


def _normalization_rows(a: BelyiAnsatz, x: Vector) -> list[object]:
    idx = a.unknown_index
    spec = a.normalization
    if spec.kind == Gauge.HAUPTMODUL:
        return [sum((c * x[idx[s]] for c, s in spec.linear_equation), start=x[0] * 0) - spec.rhs]
    return [x[idx[s]] - value for s, value in spec.gauge_fixes]


def residual(a: BelyiAnsatz, coeffs: Sequence[object] | Vector, bits: int | None = None) -> Vector:
    """
    Coefficients of x^0 .. x^(n-1) of ``p3 - p2 - K' * pc``, then the normalization rows.

    Object-dtype input is evaluated in mpmath at ``bits`` (or the current precision); complex128 input in numpy.
    """
    return relative_residual(a, coeffs, bits)[0]


def relative_residual(a: BelyiAnsatz, coeffs: Sequence[object] | Vector, bits: int | None = None) -> tuple[Vector, object]:
    """Residual together with its scale max(1, max |coefficient of p3|)."""
    with _precision(bits):
        x = _as_coeffs(a, coeffs)
        p3, p2, pc = belyi_polynomials(a, x)
        k = a.scale_value(x)
        r = _padded(p3, a.n + 1) - _padded(p2, a.n + 1) - _padded(pc, a.n + 1) * k
        r = np.concatenate([r[: a.n], np.array(_normalization_rows(a, x), dtype=x.dtype)])
        if x.dtype == DOUBLE:
            return r, max(1.0, float(np.max(np.abs(p3))))
        return r, max(mp.mpf(1), max(abs(c) for c in p3))


def _column_base(a: BelyiAnsatz, powers: list[Vector], polys: list[Vector], i: int, double: bool) -> Vector:
    """m * F^(m-1) * (product of the other factors of F's product)."""
    f = a.factors[i]
    others = [powers[j] for j in _members(a, f.role.product) if j != i]
    base = poly_product([poly_pow(polys[i], f.multiplicity - 1), *others], double=double)
    return base * f.multiplicity


def jacobian(a: BelyiAnsatz, coeffs: Sequence[object] | Vector, bits: int | None = None, threads: int = 1) -> Matrix:
    """
    Derivative of ``residual`` with respect to the unknowns, shape (num_equations, num_unknowns).

    The column of coefficient k of factor F (multiplicity m, product P = F^m * G) is the coefficient vector of
    ``m * F^(m-1) * G * x^k``, signed + for p3, - for p2 and -K' for pc.
    """
    with _precision(bits):
        x = _as_coeffs(a, coeffs)
        double = x.dtype == DOUBLE
        polys = [a.factor_coefficients(x, i) for i in range(len(a.factors))]
        powers = [poly_pow(p, f.multiplicity) for p, f in zip(polys, a.factors, strict=True)]
        k = a.scale_value(x)
        zero = 0j if double else mp.mpc(0)
        J = np.full((a.num_equations, a.num_unknowns), zero, dtype=x.dtype)

        def work(i: int) -> Vector:
            return _column_base(a, powers, polys, i, double)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                bases = list(pool.map(work, range(len(a.factors))))
        else:
            bases = [work(i) for i in range(len(a.factors))]

        for i, (f, base) in enumerate(zip(a.factors, bases, strict=True)):
            sign = {"p3": 1, "p2": -1, "pc": -k}[f.role.product]
            column = base * sign
            for c in range(f.degree):
                rows = min(len(column), a.n - c)
                J[c : c + rows, a.offsets[i] + c] = column[:rows]

        idx = a.unknown_index
        if a.affine:
            pc = poly_product([powers[j] for j in _members(a, "pc")], double=double)
            J[: len(pc), idx[SCALE]] = -pc[: a.n]
            for row, (s, _) in enumerate(a.normalization.gauge_fixes, start=a.n):
                J[row, idx[s]] = zero + 1
        else:
            for c, s in a.normalization.linear_equation:
                J[a.n, idx[s]] = zero + c
        return J


def iter_coefficients(a: BelyiAnsatz, coeffs: Vector) -> Iterator[tuple[str, object]]:
    """Pairs (symbol, value) in unknown order."""
    yield from zip(a.symbols, coeffs, strict=True)
