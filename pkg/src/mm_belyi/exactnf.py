"""
Exact arithmetic in number fields Q[b]/(f) and exact certification of recognized Belyi maps.

Elements keep integer power-basis numerators over one shared positive denominator. Products are reduced
with sympy's dense ZZ[x] arithmetic (the defining polynomial is monic), inverses come from the extended
Euclidean algorithm over QQ.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from fractions import Fraction
from functools import cached_property
from typing import Any

import sympy
from mpmath import mp
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from sympy.polys.densearith import dup_mul, dup_rem
from sympy.polys.domains import QQ, ZZ
from sympy.polys.euclidtools import dup_discriminant, dup_invert
from sympy.polys.polyerrors import NotInvertible

from mm_belyi.ansatz import SCALE, BelyiAnsatz, Gauge, jacobian
from mm_belyi.bigsolve import NumericSolution, numerical_rank
from mm_belyi.errors import (
    FieldArithmeticError,
    IdentityFailureError,
    InsufficientPrecisionError,
    MissingEmbeddingError,
    NoRelationError,
    PoleError,
)
from mm_belyi.lattice import algdep, field_membership
from mm_belyi.types import IntPoly, RecognitionConfig, Vector
from mm_belyi.utils import mp_vector

logger = logging.getLogger(__name__)

_X = sympy.Symbol("x")
_Y = sympy.Symbol("y")


class NumberField(BaseModel):
    """Q[b]/(f) for a monic squarefree integer polynomial f, coefficients constant term first."""

    model_config = ConfigDict(frozen=True)

    coefficients: IntPoly

    @field_validator("coefficients")
    @classmethod
    def check_polynomial(cls, v: IntPoly) -> IntPoly:
        if len(v) < 2 or v[-1] != 1:
            raise ValueError("defining polynomial must be monic of degree >= 1")
        poly = sympy.Poly(list(reversed(v)), _X)
        if poly.gcd(poly.diff(_X)).degree() != 0:
            raise ValueError("defining polynomial is not squarefree")
        return v

    @classmethod
    def rationals(cls) -> NumberField:
        return cls(coefficients=(0, 1))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @cached_property
    def modulus_zz(self) -> list[Any]:
        return [ZZ(c) for c in reversed(self.coefficients)]

    @cached_property
    def modulus_qq(self) -> list[Any]:
        return [QQ(c) for c in reversed(self.coefficients)]

    def is_irreducible(self) -> bool:
        return bool(sympy.Poly(list(reversed(self.coefficients)), _X).is_irreducible)

    def element(self, coords: Sequence[Fraction | int]) -> FieldElement:
        """Element with the given power-basis coordinates (missing high coordinates are zero)."""
        if len(coords) > self.degree:
            raise ValueError(f"{len(coords)} coordinates for a degree {self.degree} field")
        fracs = [Fraction(c) for c in coords]
        den = math.lcm(*(q.denominator for q in fracs)) if fracs else 1
        return FieldElement(self, [int(q * den) for q in fracs], den)

    def __call__(self, value: FieldElement | Fraction | int) -> FieldElement:
        if isinstance(value, FieldElement):
            return value
        return self.element([value])

    @property
    def zero(self) -> FieldElement:
        return FieldElement(self, [])

    @property
    def one(self) -> FieldElement:
        return FieldElement(self, [1])

    @property
    def gen(self) -> FieldElement:
        """The class of b (for degree 1 this is the rational -f(0))."""
        if self.degree == 1:
            return FieldElement(self, [-self.coefficients[0]])
        return FieldElement(self, [0, 1])

    def roots(self, bits: int) -> list[Any]:
        """Complex roots of f at ``bits`` bits, sorted by (real, imaginary) part."""
        with mp.workprec(bits):
            try:
                roots = mp.polyroots(list(reversed(self.coefficients)), maxsteps=100 + 10 * self.degree, extraprec=bits)
            except mp.NoConvergence as e:
                raise InsufficientPrecisionError(bits, "roots of the defining polynomial did not converge") from e
            return sorted((mp.mpc(r) for r in roots), key=lambda r: (r.real, r.imag))

    def embedding(self, approx: complex | None, bits: int) -> Any:
        """The root of f nearest to ``approx`` (the first sorted root when None)."""
        roots = self.roots(bits)
        if approx is None:
            return roots[0]
        return min(roots, key=lambda r: abs(r - mp.mpc(approx)))


class FieldElement:
    """Element of a NumberField: ``sum(num[i] * b^i) / den`` with den > 0 and gcd(num, den) = 1."""

    __slots__ = ("den", "field", "num")

    def __init__(self, field: NumberField, num: Sequence[int], den: int = 1) -> None:
        if den == 0:
            raise FieldArithmeticError("zero denominator")
        if len(num) > field.degree:
            raise ValueError("numerator longer than the field degree")
        values = [int(c) for c in num] + [0] * (field.degree - len(num))
        if den < 0:
            values, den = [-c for c in values], -den
        g = math.gcd(den, *values)
        self.field = field
        self.num = tuple(c // g for c in values)
        self.den = den // g

    def _lift(self, other: object) -> FieldElement:
        if isinstance(other, FieldElement):
            if other.field.coefficients != self.field.coefficients:
                raise FieldArithmeticError("elements of different fields")
            return other
        if isinstance(other, int | Fraction):
            return self.field.element([other])
        return NotImplemented

    @property
    def coords(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, self.den) for c in self.num)

    def is_zero(self) -> bool:
        return not any(self.num)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other: object) -> bool:
        try:
            o = self._lift(other)
        except FieldArithmeticError:
            return False
        if o is NotImplemented:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self) -> int:
        return hash((self.field.coefficients, self.num, self.den))

    def __repr__(self) -> str:
        return f"FieldElement({[str(q) for q in self.coords]})"

    def __neg__(self) -> FieldElement:
        return FieldElement(self.field, [-c for c in self.num], self.den)

    def __add__(self, other: object) -> FieldElement:
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        num = [a * o.den + b * self.den for a, b in zip(self.num, o.num, strict=True)]
        return FieldElement(self.field, num, self.den * o.den)

    __radd__ = __add__

    def __sub__(self, other: object) -> FieldElement:
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: object) -> FieldElement:
        return (-self) + other

    def __mul__(self, other: object) -> FieldElement:
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        a = [ZZ(c) for c in reversed(self.num)]
        b = [ZZ(c) for c in reversed(o.num)]
        product = dup_rem(dup_mul(_strip(a), _strip(b), ZZ), self.field.modulus_zz, ZZ)
        return FieldElement(self.field, [int(c) for c in reversed(product)], self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> FieldElement:
        if self.is_zero():
            raise FieldArithmeticError("division by zero")
        a = _strip([QQ(c) for c in reversed(self.num)])
        try:
            inv = dup_invert(a, self.field.modulus_qq, QQ)
        except NotInvertible as e:
            raise FieldArithmeticError("element is a zero divisor, the defining polynomial is reducible") from e
        coords = [Fraction(int(QQ.numer(c)), int(QQ.denom(c))) * self.den for c in reversed(inv)]
        return self.field.element(coords)

    def __truediv__(self, other: object) -> FieldElement:
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other: object) -> FieldElement:
        return self.inverse() * other

    def __pow__(self, k: int) -> FieldElement:
        if k < 0:
            return self.inverse() ** (-k)
        result, base = self.field.one, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def numeric(self, beta: Any) -> Any:
        """Value under the embedding b -> beta at the current precision."""
        acc = mp.mpc(0)
        for c in reversed(self.num):
            acc = acc * beta + c
        return acc / self.den


def _strip(dup: list[Any]) -> list[Any]:
    i = 0
    while i < len(dup) and not dup[i]:
        i += 1
    return dup[i:]


def nf_arith(kind: str, a: FieldElement, b: FieldElement | None = None) -> FieldElement:
    """``add``, ``mul`` or ``inv``."""
    if kind == "inv":
        return a.inverse()
    if b is None:
        raise ValueError(f"{kind} needs two operands")
    if kind == "add":
        return a + b
    if kind == "mul":
        return a * b
    raise ValueError(f"unknown operation {kind}")


type NfPoly = tuple[FieldElement, ...]
"""Polynomial over a number field, constant term first, no trailing zeros (the zero polynomial is empty)."""


def nf_poly(field: NumberField, coeffs: Iterable[FieldElement | Fraction | int]) -> NfPoly:
    return _trim(tuple(field(c) for c in coeffs))


def _trim(p: Sequence[FieldElement]) -> NfPoly:
    end = len(p)
    while end and p[end - 1].is_zero():
        end -= 1
    return tuple(p[:end])


def poly_add(p: NfPoly, q: NfPoly) -> NfPoly:
    if len(p) < len(q):
        p, q = q, p
    return _trim(tuple(a + q[i] if i < len(q) else a for i, a in enumerate(p)))


def poly_scale(p: NfPoly, c: FieldElement) -> NfPoly:
    return _trim(tuple(a * c for a in p))


def poly_sub(p: NfPoly, q: NfPoly) -> NfPoly:
    return poly_add(p, tuple(-a for a in q))


def poly_mul(p: NfPoly, q: NfPoly) -> NfPoly:
    if not p or not q:
        return ()
    field = p[0].field
    out = [field.zero] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a.is_zero():
            continue
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return _trim(out)


def poly_pow(p: NfPoly, k: int, field: NumberField) -> NfPoly:
    result: NfPoly = (field.one,)
    for _ in range(k):
        result = poly_mul(result, p)
    return result


def poly_derivative(p: NfPoly) -> NfPoly:
    return _trim(tuple(c * k for k, c in enumerate(p) if k > 0))


def poly_divmod(p: NfPoly, q: NfPoly) -> tuple[NfPoly, NfPoly]:
    if not q:
        raise FieldArithmeticError("polynomial division by zero")
    field = q[0].field
    lead_inv = q[-1].inverse()
    rem = list(p)
    quo = [field.zero] * max(0, len(p) - len(q) + 1)
    while len(rem) >= len(q) and rem:
        shift = len(rem) - len(q)
        c = rem[-1] * lead_inv
        quo[shift] = c
        for i, b in enumerate(q):
            rem[shift + i] = rem[shift + i] - c * b
        rem = list(_trim(rem[:-1]))
    return _trim(quo), _trim(rem)


def poly_gcd(p: NfPoly, q: NfPoly) -> NfPoly:
    """Monic gcd over the field."""
    while q:
        p, q = q, poly_divmod(p, q)[1]
    if not p:
        return ()
    return poly_scale(p, p[-1].inverse())


def poly_eval(p: NfPoly, x: FieldElement) -> FieldElement:
    acc = x.field.zero
    for c in reversed(p):
        acc = acc * x + c
    return acc


def int_poly_in(field: NumberField, g: IntPoly) -> NfPoly:
    return nf_poly(field, g)


def poly_discriminant(f: IntPoly) -> int:
    """Discriminant (-1)^(d(d-1)/2) Res(f, f') / lc(f) of an integer polynomial (constant term first)."""
    if len(f) < 3:
        raise ValueError("discriminant needs degree >= 2")
    return int(dup_discriminant([ZZ(c) for c in reversed(f)], ZZ))


class DiscriminantReport(BaseModel):
    """
    Whether a stated discriminant divides the polynomial discriminant with a square quotient.

    The stated value is taken up to sign: ``square`` looks at |quotient|, ``same_sign`` records whether the signs agree.
    """

    model_config = ConfigDict(frozen=True)

    discriminant: int
    stated: int
    divides: bool
    quotient: int | None
    square: bool
    same_sign: bool


def discriminant_consistency(f: IntPoly, stated: int) -> DiscriminantReport:
    disc = poly_discriminant(f)
    divides = stated != 0 and disc % stated == 0
    quotient = disc // stated if divides else None
    square = quotient is not None and math.isqrt(abs(quotient)) ** 2 == abs(quotient)
    same_sign = quotient is not None and quotient > 0
    return DiscriminantReport(discriminant=disc, stated=stated, divides=divides, quotient=quotient, square=square, same_sign=same_sign)


def root_in_field(g: IntPoly, field: NumberField, beta: Any, bits: int, cfg: RecognitionConfig | None = None) -> FieldElement | None:
    """
    A root of g lying in the field (embedded by b -> beta), verified exactly; None when no complex root of g is in it.

    Raises InsufficientPrecisionError when the roots of g cannot be computed at ``bits``.
    """
    cfg = cfg or RecognitionConfig()
    with mp.workprec(bits):
        try:
            roots = mp.polyroots(list(reversed(g)), maxsteps=100 + 10 * len(g), extraprec=bits)
        except mp.NoConvergence as e:
            raise InsufficientPrecisionError(bits, "roots of g did not converge") from e
        beta = mp.mpc(beta)
    exact_g = int_poly_in(field, g)
    for k, rho in enumerate(sorted((mp.mpc(r) for r in roots), key=lambda r: (r.real, r.imag))):
        try:
            result = field_membership(rho, beta, field.coefficients, bits, cfg, label=f"root {k}")
        except NoRelationError:
            continue
        candidate = field.element(result.coordinates or ())
        if poly_eval(exact_g, candidate).is_zero():
            return candidate
        logger.debug("root %d: recognized coordinates fail the exact check", k)
    return None


class Moebius(BaseModel):
    """x -> (alpha x + beta) / (gamma x + delta) over a number field."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha: FieldElement
    beta: FieldElement
    gamma: FieldElement
    delta: FieldElement

    @model_validator(mode="after")
    def check_nondegenerate(self) -> Moebius:
        if (self.alpha * self.delta - self.beta * self.gamma).is_zero():
            raise ValueError("degenerate Moebius transform")
        return self

    @classmethod
    def identity(cls, field: NumberField) -> Moebius:
        return cls(alpha=field.one, beta=field.zero, gamma=field.zero, delta=field.one)


class DescentSpec(BaseModel):
    """A coefficient transform w with scalars (k3, k2, kc) exhibiting a map over a subfield."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    w: Moebius
    k3: FieldElement
    k2: FieldElement
    kc: FieldElement
    subfield: NumberField


def moebius_coeff_action(p: Sequence[FieldElement], w: Moebius) -> NfPoly:
    """Apply w to every coefficient; the degree is unchanged."""
    result = []
    for i, c in enumerate(p):
        den = w.gamma * c + w.delta
        if den.is_zero():
            raise PoleError(i)
        result.append((w.alpha * c + w.beta) / den)
    return tuple(result)


def subfield_coordinates(c: FieldElement, generator: FieldElement, degree: int) -> tuple[Fraction, ...] | None:
    """Rational q with c = sum(q[i] * generator^i), i < degree, or None when c is not in Q(generator)."""
    powers = [generator**i for i in range(degree)]
    matrix = sympy.Matrix([[sympy.Rational(p.coords[row].numerator, p.coords[row].denominator) for p in powers] for row in range(c.field.degree)])
    rhs = sympy.Matrix([sympy.Rational(q.numerator, q.denominator) for q in c.coords])
    try:
        solution, params = matrix.gauss_jordan_solve(rhs)
    except ValueError:
        return None
    if params.shape[0]:
        solution = solution.subs(dict.fromkeys(params, 0))
    return tuple(Fraction(int(v.p), int(v.q)) for v in solution)


def _nullspace(columns: Sequence[NfPoly], field: NumberField) -> list[list[FieldElement]]:
    """Basis of {k : sum(k[j] * columns[j]) = 0} by reduced row echelon form over the field."""
    width = len(columns)
    height = max((len(c) for c in columns), default=0)
    rows = [[columns[j][i] if i < len(columns[j]) else field.zero for j in range(width)] for i in range(height)]
    pivots: list[int] = []
    r = 0
    for col in range(width):
        pivot = next((i for i in range(r, len(rows)) if not rows[i][col].is_zero()), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = rows[r][col].inverse()
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][col].is_zero():
                factor = rows[i][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r], strict=True)]
        pivots.append(col)
        r += 1
    basis = []
    for free in (c for c in range(width) if c not in pivots):
        vector = [field.zero] * width
        vector[free] = field.one
        for i, col in enumerate(pivots):
            vector[col] = -rows[i][free]
        basis.append(vector)
    return basis


def descent_check(
    p3t: NfPoly,
    p2t: NfPoly,
    pct: NfPoly,
    subfield: NumberField,
    generator: FieldElement | None,
) -> tuple[FieldElement, FieldElement, FieldElement] | None:
    """
    Scalars (k3, k2, kc), first nonzero entry 1, with ``k3 * p3t + k2 * p2t + kc * pct = 0``.

    ``generator`` is the image in the big field of the subfield's generator (for instance from root_in_field).
    Returns None when a coefficient is outside the subfield or the only solution is zero.
    """
    if generator is None:
        raise MissingEmbeddingError
    if not poly_eval(int_poly_in(generator.field, subfield.coefficients), generator).is_zero():
        raise MissingEmbeddingError
    for p in (p3t, p2t, pct):
        for c in p:
            if subfield_coordinates(c, generator, subfield.degree) is None:
                logger.info("coefficient outside the subfield")
                return None
    basis = _nullspace([p3t, p2t, pct], generator.field)
    if not basis:
        return None
    lead = next(v for v in basis[0] if not v.is_zero())
    k3, k2, kc = (v / lead for v in basis[0])
    return k3, k2, kc


def descend(
    p3: NfPoly,
    p2: NfPoly,
    pc: NfPoly,
    w: Moebius,
    subfield: NumberField,
    generator: FieldElement | None,
) -> DescentSpec | None:
    """Apply w to the coefficients of the three polynomials and run descent_check on the result."""
    p3t, p2t, pct = (moebius_coeff_action(p, w) for p in (p3, p2, pc))
    scalars = descent_check(p3t, p2t, pct, subfield, generator)
    if scalars is None:
        return None
    k3, k2, kc = scalars
    return DescentSpec(w=w, k3=k3, k2=k2, kc=kc, subfield=subfield)


class CertifiedBelyiMap(BaseModel):
    """
    Exact Belyi map over a number field.

    ``factors`` holds the monic factor polynomials in ansatz order; p3, p2 and pc are their declared products.
    ``embedding`` is a decimal approximation (real, imaginary) of the root of the defining polynomial that the
    numeric solution used; ``precision_bits`` is the recognition precision.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    field: NumberField
    embedding: tuple[str, str]
    precision_bits: int
    ansatz: BelyiAnsatz
    factors: tuple[NfPoly, ...]
    scale: FieldElement
    certificate: tuple[tuple[str, str], ...] = ()

    def _product(self, name: str) -> NfPoly:
        result: NfPoly = (self.field.one,)
        for f, p in zip(self.ansatz.factors, self.factors, strict=True):
            if f.role.product == name:
                result = poly_mul(result, poly_pow(p, f.multiplicity, self.field))
        return result

    @property
    def p3(self) -> NfPoly:
        return self._product("p3")

    @property
    def p2(self) -> NfPoly:
        return self._product("p2")

    @property
    def pc(self) -> NfPoly:
        return self._product("pc")

    def beta(self, bits: int) -> Any:
        return self.field.embedding(complex(float(self.embedding[0]), float(self.embedding[1])), bits)

    def numeric_coefficients(self, bits: int) -> Vector:
        """Values of the ansatz unknowns at ``bits`` under the recorded embedding."""
        beta = self.beta(bits)
        with mp.workprec(bits):
            values = [c.numeric(beta) for f, p in zip(self.ansatz.factors, self.factors, strict=True) for c in p[: f.degree]]
            if self.ansatz.affine:
                values.append(self.scale.numeric(beta))
            return mp_vector(values)


def _exact_unknowns(m: CertifiedBelyiMap) -> dict[str, FieldElement]:
    values = {f.symbol(k): p[k] for f, p in zip(m.ansatz.factors, m.factors, strict=True) for k in range(f.degree)}
    if m.ansatz.affine:
        values[SCALE] = m.scale
    return values


def _predicates(m: CertifiedBelyiMap) -> list[tuple[str, bool]]:
    a, field = m.ansatz, m.field
    results: list[tuple[str, bool]] = []
    monic = all(len(p) == f.degree + 1 and p[-1] == 1 for f, p in zip(a.factors, m.factors, strict=True))
    results.append(("monic_factors", monic))
    p3, p2, pc = m.p3, m.p2, m.pc
    results.append(("degrees", len(p3) - 1 == a.n and len(p2) - 1 == a.n and len(pc) - 1 == a.n - a.principal_width))
    k = m.scale if a.affine else field(1728)
    results.append(("identity", not poly_sub(poly_sub(p3, p2), poly_scale(pc, k))))

    values = _exact_unknowns(m)
    spec = a.normalization
    if spec.kind == Gauge.HAUPTMODUL:
        total = field.zero
        for c, s in spec.linear_equation:
            total = total + values[s] * c
        results.append(("normalization", total == spec.rhs))
    else:
        results.append(("normalization", all(values[s] == v for s, v in spec.gauge_fixes)))

    squarefree = all(poly_gcd(p, poly_derivative(p)) == (field.one,) for p in m.factors)
    results.append(("squarefree_factors", squarefree))
    coprime = all(
        poly_gcd(m.factors[i], m.factors[j]) == (field.one,) for i in range(len(m.factors)) for j in range(i + 1, len(m.factors))
    )
    results.append(("coprime_factors", coprime))
    if a.affine:
        results.append(("nonzero_scale", not m.scale.is_zero()))

    bits = 2 * m.precision_bits
    with mp.workprec(bits):
        x = m.numeric_coefficients(bits)
        rank = numerical_rank(jacobian(a, x), bits)
    results.append(("jacobian_full_rank", rank == a.num_unknowns))
    return results


def verify_map(m: CertifiedBelyiMap) -> tuple[tuple[str, str], ...]:
    """Re-run every predicate on a certified map; raises IdentityFailureError naming the first failure."""
    outcomes = _predicates(m)
    for name, ok in outcomes:
        if not ok:
            raise IdentityFailureError(name)
    logger.info("all %d predicates pass", len(outcomes))
    return tuple((name, "pass") for name, _ in outcomes)


_DEGREE_LADDER = (1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 36, 48, 64)


def minimal_polynomial(value: Any, bits: int, cfg: RecognitionConfig, label: str = "value") -> IntPoly:
    """Irreducible integer polynomial of ``value``: algdep at growing degree bounds, then the vanishing factor."""
    for d in (d for d in _DEGREE_LADDER if d <= cfg.max_field_degree):
        try:
            relation = algdep(value, d, bits, cfg, label)
        except NoRelationError:
            continue
        poly = sympy.Poly(list(reversed(relation.polynomial or ())), _X)
        _, factors = poly.factor_list()
        with mp.workprec(bits):
            v = mp.mpc(value)
            best = min((f for f, _ in factors), key=lambda f: abs(mp.polyval([int(c) for c in f.all_coeffs()], v)))
        coeffs = [int(c) for c in reversed(best.all_coeffs())]
        sign = 1 if coeffs[-1] > 0 else -1
        return tuple(sign * c for c in coeffs)
    raise NoRelationError(label, bits, cfg.max_field_degree)


def _monic_field(m: IntPoly, root: Any) -> tuple[NumberField, Any]:
    """Field of a root of m, generated by lc(m) * root, whose minimal polynomial is monic integral."""
    d = len(m) - 1
    lead = m[-1]
    if d == 1:
        return NumberField.rationals(), mp.mpc(0)
    monic = tuple(m[i] * lead ** (d - 1 - i) for i in range(d)) + (1,)
    return NumberField(coefficients=monic), root * lead


def _compositum(field: NumberField, beta: Any, m: IntPoly, value: Any, bits: int) -> tuple[NumberField, Any]:
    """Primitive element beta + k * value of Q(beta, value) for the smallest k >= 1 giving a squarefree resultant."""
    f_y = sympy.Poly(list(reversed(field.coefficients)), _Y)
    for k in range(1, 64):
        shifted = sum(c * (_X - k * _Y) ** i for i, c in enumerate(m))
        res = sympy.Poly(sympy.resultant(f_y.as_expr(), shifted, _Y), _X)
        if res.gcd(res.diff(_X)).degree() != 0:
            continue
        with mp.workprec(bits):
            theta = value + k * beta
            _, factors = res.factor_list()
            best = min((f for f, _ in factors), key=lambda f: abs(mp.polyval([int(c) for c in f.all_coeffs()], theta)))
        coeffs = tuple(int(c) for c in reversed(best.all_coeffs()))
        if coeffs[-1] < 0:
            coeffs = tuple(-c for c in coeffs)
        return _monic_field(coeffs, theta)
    raise FieldArithmeticError("no primitive element found for the compositum")


def _probe_order(sol: NumericSolution, count: int) -> list[int]:
    """Constant terms of the factors first, then the remaining unknowns, ``count`` in total."""
    a = sol.ansatz
    first = list(a.offsets)
    if a.affine:
        first.append(a.num_unknowns - 1)
    rest = [i for i in range(a.num_unknowns) if i not in first]
    return (first + rest)[:count]


def _propose_field(sol: NumericSolution, cfg: RecognitionConfig) -> tuple[NumberField, Any]:
    bits = sol.precision_bits
    best: tuple[IntPoly, Any] | None = None
    for i in _probe_order(sol, cfg.probe_coefficients):
        m = minimal_polynomial(sol.coeffs[i], bits, cfg, label=sol.ansatz.symbols[i])
        logger.debug("%s has degree %d", sol.ansatz.symbols[i], len(m) - 1)
        if best is None or len(m) > len(best[0]):
            best = (m, sol.coeffs[i])
    assert best is not None  # noqa: S101
    return _monic_field(*best)


def certify_map(sol: NumericSolution, cfg: RecognitionConfig | None = None) -> CertifiedBelyiMap:
    """
    Recognize every coefficient in one number field and certify the resulting exact map.

    The field is proposed from the probed coefficient of largest algebraic degree and enlarged to a compositum
    when a coefficient is not in it. The certificate lists every predicate; any failure raises IdentityFailureError.
    """
    cfg = cfg or RecognitionConfig()
    bits = sol.precision_bits
    if bits < cfg.min_bits:
        raise InsufficientPrecisionError(bits, f"recognition needs at least {cfg.min_bits} bits")
    a = sol.ansatz
    field, beta = _propose_field(sol, cfg)
    logger.info("proposed field of degree %d", field.degree)

    values: list[FieldElement] = []
    i = 0
    while i < a.num_unknowns:
        tau = sol.coeffs[i]
        try:
            result = field_membership(tau, beta, field.coefficients, bits, cfg, label=a.symbols[i])
            values.append(field.element(result.coordinates or ()))
            i += 1
        except NoRelationError:
            m = minimal_polynomial(tau, bits, cfg, label=a.symbols[i])
            previous = field.degree
            field, beta = _compositum(field, beta, m, tau, bits)
            if field.degree <= previous or field.degree > cfg.max_field_degree:
                raise
            logger.info("%s outside the field, enlarged to degree %d", a.symbols[i], field.degree)
            values, i = [], 0

    factors = []
    for f, offset in zip(a.factors, a.offsets, strict=True):
        factors.append((*values[offset : offset + f.degree], field.one))
    scale = values[-1] if a.affine else field(1728)
    with mp.workprec(64):
        embedding = (mp.nstr(mp.mpc(beta).real, 30), mp.nstr(mp.mpc(beta).imag, 30))
    certified = CertifiedBelyiMap(
        field=field,
        embedding=embedding,
        precision_bits=bits,
        ansatz=a,
        factors=tuple(factors),
        scale=scale,
    )
    return certified.model_copy(update={"certificate": verify_map(certified)})
