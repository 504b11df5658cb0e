"""
Text codecs for every artifact: triples, passports, profile reports, ansatz dumps, numeric solutions,
integer polynomials and certified maps.

Every ``format_*`` output parses back with the matching ``parse_*`` and formats again to the same text.
Blank lines and ``#`` lines are ignored by the parsers, so reproducibility headers can precede any artifact.
"""

from __future__ import annotations

from collections.abc import Iterator

from mpmath import mp
from pydantic import ValidationError

from mm_belyi.ansatz import BelyiAnsatz, FactorRole, FactorSpec, ansatz_from_factors
from mm_belyi.bigsolve import NumericSolution, solution_from_values
from mm_belyi.errors import FormatError, InputError, NotBijectionError
from mm_belyi.exactnf import CertifiedBelyiMap, FieldElement, NfPoly, NumberField
from mm_belyi.perm import CycleType, Permutation, PermutationTriple
from mm_belyi.triple import SubgroupProfile, validate_triple
from mm_belyi.types import IntPoly
from mm_belyi.utils import content_lines, expect_key, format_fraction, format_mpf, parse_fraction, parse_int

type Lines = Iterator[tuple[int, list[str]]]
"""Content lines with their 1-based line numbers."""


def _next(lines: Lines, what: str, source: str) -> tuple[int, list[str]]:
    try:
        return next(lines)
    except StopIteration:
        raise FormatError(0, f"unexpected end of file, expected {what}", source) from None


def _end(lines: Lines, source: str) -> None:
    extra = next(lines, None)
    if extra is not None:
        raise FormatError(extra[0], f"unexpected line '{' '.join(extra[1])}'", source)


# triples and passports


def format_triple(t: PermutationTriple) -> str:
    rows = [f"n {t.n}"]
    for name, p in zip(("s0", "s1", "sinf"), t.as_tuple(), strict=True):
        rows.append(f"{name} {' '.join(map(str, p.images))}")
    return "\n".join(rows) + "\n"


def _permutation(tokens: list[str], n: int, lineno: int, source: str) -> Permutation:
    images = tuple(parse_int(tok, lineno, source) for tok in tokens)
    if len(images) != n:
        raise FormatError(lineno, f"expected {n} images, got {len(images)}", source)
    try:
        return Permutation(images=images)
    except NotBijectionError as e:
        raise FormatError(lineno, str(e), source) from e


def parse_triple(text: str, source: str = "<input>") -> PermutationTriple:
    """
    Parse ``n <degree>`` / ``s0 <images>`` / ``s1 <images>`` / optional ``sinf <images>`` (1-based images).

    A missing sinf is computed as (s0 * s1)^-1. Raises FormatError naming the offending line, or the
    InputError of the failed triple invariant.
    """
    lines = content_lines(text)
    lineno, tokens = _next(lines, "'n'", source)
    n = parse_int(expect_key(tokens, "n", lineno, source, arity=1)[0], lineno, source)
    perms = []
    for key in ("s0", "s1"):
        lineno, tokens = _next(lines, f"'{key}'", source)
        perms.append(_permutation(expect_key(tokens, key, lineno, source), n, lineno, source))
    s0, s1 = perms
    last = next(lines, None)
    if last is None:
        return validate_triple(s0, s1)
    lineno, tokens = last
    sinf = _permutation(expect_key(tokens, "sinf", lineno, source), n, lineno, source)
    _end(lines, source)
    try:
        return PermutationTriple(s0=s0, s1=s1, sinf=sinf)
    except ValidationError as e:
        raise FormatError(lineno, "s0 * s1 * sinf is not the identity", source) from e


def format_passport(c0: CycleType, c1: CycleType, cinf: CycleType) -> str:
    return f"n {c0.degree}\nc0 {c0}\nc1 {c1}\ncinf {cinf}\n"


def parse_passport(text: str, source: str = "<input>") -> tuple[CycleType, CycleType, CycleType]:
    """Parse ``n`` / ``c0`` / ``c1`` / ``cinf`` lines with cycle types written ``1^12 2^132``."""
    lines = content_lines(text)
    lineno, tokens = _next(lines, "'n'", source)
    n = parse_int(expect_key(tokens, "n", lineno, source, arity=1)[0], lineno, source)
    result = []
    for key in ("c0", "c1", "cinf"):
        lineno, tokens = _next(lines, f"'{key}'", source)
        rest = expect_key(tokens, key, lineno, source)
        try:
            ct = CycleType.parse(" ".join(rest))
        except (ValueError, ValidationError) as e:
            raise FormatError(lineno, f"bad cycle type '{' '.join(rest)}'", source) from e
        if ct.degree != n:
            raise FormatError(lineno, f"cycle type of degree {ct.degree}, expected {n}", source)
        result.append(ct)
    _end(lines, source)
    return result[0], result[1], result[2]


def is_passport(text: str) -> bool:
    """True when the first content line after ``n`` starts with ``c0``."""
    keys = [tokens[0] for _, tokens in content_lines(text)]
    return len(keys) > 1 and keys[1] == "c0"


# reports


def format_profile(p: SubgroupProfile, a: BelyiAnsatz | None = None) -> str:
    """Stable ``key value`` report; the ansatz summary lines are added for genus 0."""
    rows = [
        f"index {p.index}",
        f"e2 {p.e2}",
        f"e3 {p.e3}",
        f"cusps {p.num_cusps}",
        f"cusp_widths {CycleType.from_lengths(p.cusp_widths)}",
        f"level {p.level}",
        f"genus {p.genus}",
        f"congruence {p.congruence}",
        f"principal_width {p.principal_width}",
    ]
    if p.principal_point is not None:
        rows.append(f"principal_point {p.principal_point}")
    if a is not None:
        rows += [f"unknowns {a.num_unknowns}", f"equations {a.num_equations}", f"normalization {a.normalization}"]
    return "\n".join(rows) + "\n"


# ansatz


def format_ansatz(a: BelyiAnsatz) -> str:
    """Header, one ``role degree multiplicity prefix`` line per factor, the counts and the normalization."""
    rows = [f"n {a.n}", f"principal_width {a.principal_width}", f"gauge {a.normalization.kind}"]
    rows += [f"factor {f.role} {f.degree} {f.multiplicity} {f.prefix}" for f in a.factors]
    rows += [f"unknowns {a.num_unknowns}", f"equations {a.num_equations}", f"normalization {a.normalization}"]
    return "\n".join(rows) + "\n"


def _parse_ansatz(lines: Lines, source: str) -> BelyiAnsatz:
    lineno, tokens = _next(lines, "'n'", source)
    n = parse_int(expect_key(tokens, "n", lineno, source, arity=1)[0], lineno, source)
    lineno, tokens = _next(lines, "'principal_width'", source)
    h = parse_int(expect_key(tokens, "principal_width", lineno, source, arity=1)[0], lineno, source)
    lineno, tokens = _next(lines, "'gauge'", source)
    gauge = expect_key(tokens, "gauge", lineno, source, arity=1)[0]
    factors = []
    while True:
        lineno, tokens = _next(lines, "'factor' or 'unknowns'", source)
        if tokens[0] != "factor":
            break
        role, degree, multiplicity, prefix = expect_key(tokens, "factor", lineno, source, arity=4)
        try:
            factors.append(
                FactorSpec(
                    role=FactorRole(role),
                    degree=parse_int(degree, lineno, source),
                    multiplicity=parse_int(multiplicity, lineno, source),
                    prefix=prefix,
                )
            )
        except (ValueError, ValidationError) as e:
            raise FormatError(lineno, f"bad factor: {e}", source) from e
    try:
        a = ansatz_from_factors(n, factors, h)
    except (ValueError, ValidationError, IndexError) as e:
        raise FormatError(lineno, f"inconsistent ansatz: {e}", source) from e
    checks = [
        ("unknowns", str(a.num_unknowns), lineno, tokens),
        ("equations", str(a.num_equations), *_next(lines, "'equations'", source)),
        ("normalization", str(a.normalization), *_next(lines, "'normalization'", source)),
    ]
    for key, expected, at, toks in checks:
        value = " ".join(expect_key(toks, key, at, source))
        if value != expected:
            raise FormatError(at, f"{key} '{value}' does not match the factors ('{expected}')", source)
    if gauge != a.normalization.kind:
        raise FormatError(0, f"gauge {gauge} does not match principal width {h}", source)
    return a


def parse_ansatz(text: str, source: str = "<input>") -> BelyiAnsatz:
    lines = content_lines(text)
    a = _parse_ansatz(lines, source)
    _end(lines, source)
    return a


# numeric solutions


def format_solution(sol: NumericSolution) -> str:
    """``precision_bits``, ``unknowns`` and one ``symbol re im`` line per unknown with P * 0.3 + 1 digits."""
    bits = sol.precision_bits
    rows = [f"precision_bits {bits}", f"unknowns {sol.ansatz.num_unknowns}"]
    for symbol, c in zip(sol.ansatz.symbols, sol.coeffs, strict=True):
        z = mp.mpc(c)
        rows.append(f"{symbol} {format_mpf(z.real, bits)} {format_mpf(z.imag, bits)}")
    return "\n".join(rows) + "\n"


def parse_solution(text: str, a: BelyiAnsatz, source: str = "<input>") -> NumericSolution:
    """Parse a solution file for the unknowns of ``a``; the residual is recomputed at the file precision."""
    lines = content_lines(text)
    lineno, tokens = _next(lines, "'precision_bits'", source)
    bits = parse_int(expect_key(tokens, "precision_bits", lineno, source, arity=1)[0], lineno, source)
    if bits < 53:
        raise FormatError(lineno, f"precision {bits} below 53 bits", source)
    lineno, tokens = _next(lines, "'unknowns'", source)
    count = parse_int(expect_key(tokens, "unknowns", lineno, source, arity=1)[0], lineno, source)
    if count != a.num_unknowns:
        raise FormatError(lineno, f"{count} unknowns, the ansatz has {a.num_unknowns}", source)
    values = {}
    with mp.workprec(bits):
        for symbol in a.symbols:
            lineno, tokens = _next(lines, f"'{symbol}'", source)
            re, im = expect_key(tokens, symbol, lineno, source, arity=2)
            try:
                values[symbol] = mp.mpc(mp.mpf(re), mp.mpf(im))
            except ValueError as e:
                raise FormatError(lineno, f"bad number in '{' '.join(tokens)}'", source) from e
    _end(lines, source)
    return solution_from_values(a, values, bits)


# integer polynomials


def format_int_poly(p: IntPoly) -> str:
    return "\n".join([f"deg {len(p) - 1}", *map(str, p)]) + "\n"


def _parse_int_poly(lines: Lines, source: str) -> IntPoly:
    lineno, tokens = _next(lines, "'deg'", source)
    degree = parse_int(expect_key(tokens, "deg", lineno, source, arity=1)[0], lineno, source)
    coeffs = []
    for _ in range(degree + 1):
        lineno, tokens = _next(lines, "coefficient", source)
        if len(tokens) != 1:
            raise FormatError(lineno, "expected one integer coefficient", source)
        coeffs.append(parse_int(tokens[0], lineno, source))
    return tuple(coeffs)


def parse_int_poly(text: str, source: str = "<input>") -> IntPoly:
    """Parse ``deg k`` followed by k + 1 integer lines, constant term first."""
    lines = content_lines(text)
    p = _parse_int_poly(lines, source)
    _end(lines, source)
    return p


# certified maps


def _coefficient_line(c: FieldElement) -> str:
    return " ".join(format_fraction(q) for q in c.coords)


def format_certified_map(m: CertifiedBelyiMap) -> str:
    """
    Precision, embedding and ansatz, then ``field deg D`` with D + 1 integer lines, then one ``poly <prefix> deg k``
    block per factor (k + 1 lines of D rationals ``num/den``), ``poly scale deg 0`` in affine gauge, and the certificate.
    """
    rows = [f"precision_bits {m.precision_bits}", f"embedding {m.embedding[0]} {m.embedding[1]}"]
    rows.append(format_ansatz(m.ansatz).rstrip("\n"))
    rows.append(f"field deg {m.field.degree}")
    rows += [str(c) for c in m.field.coefficients]
    blocks: list[tuple[str, NfPoly]] = [(f.prefix, p) for f, p in zip(m.ansatz.factors, m.factors, strict=True)]
    if m.ansatz.affine:
        blocks.append(("scale", (m.scale,)))
    for name, p in blocks:
        rows.append(f"poly {name} deg {len(p) - 1}")
        rows += [_coefficient_line(c) for c in p]
    rows.append("certificate")
    rows += [f"{name}: {outcome}" for name, outcome in m.certificate]
    return "\n".join(rows) + "\n"


def _parse_nf_poly(lines: Lines, name: str, field: NumberField, source: str) -> NfPoly:
    lineno, tokens = _next(lines, f"'poly {name}'", source)
    rest = expect_key(tokens, "poly", lineno, source, arity=3)
    if rest[0] != name or rest[1] != "deg":
        raise FormatError(lineno, f"expected 'poly {name} deg <k>'", source)
    degree = parse_int(rest[2], lineno, source)
    coeffs = []
    for _ in range(degree + 1):
        lineno, tokens = _next(lines, "coefficient", source)
        if len(tokens) != field.degree:
            raise FormatError(lineno, f"expected {field.degree} rationals, got {len(tokens)}", source)
        coeffs.append(field.element([parse_fraction(tok, lineno, source) for tok in tokens]))
    return tuple(coeffs)


def parse_certified_map(text: str, source: str = "<input>") -> CertifiedBelyiMap:
    """Parse a certified map file; the recorded certificate is kept as written (``verify_map`` re-checks it)."""
    lines = content_lines(text)
    lineno, tokens = _next(lines, "'precision_bits'", source)
    bits = parse_int(expect_key(tokens, "precision_bits", lineno, source, arity=1)[0], lineno, source)
    lineno, tokens = _next(lines, "'embedding'", source)
    re, im = expect_key(tokens, "embedding", lineno, source, arity=2)
    a = _parse_ansatz(lines, source)
    lineno, tokens = _next(lines, "'field deg'", source)
    rest = expect_key(tokens, "field", lineno, source, arity=2)
    if rest[0] != "deg":
        raise FormatError(lineno, "expected 'field deg <D>'", source)
    degree = parse_int(rest[1], lineno, source)
    coefficients = []
    for _ in range(degree + 1):
        lineno, tokens = _next(lines, "field coefficient", source)
        coefficients.append(parse_int(tokens[0], lineno, source))
    try:
        field = NumberField(coefficients=tuple(coefficients))
    except ValidationError as e:
        raise FormatError(lineno, f"bad defining polynomial: {e.errors()[0]['msg']}", source) from e
    factors = tuple(_parse_nf_poly(lines, f.prefix, field, source) for f in a.factors)
    scale = _parse_nf_poly(lines, "scale", field, source)[0] if a.affine else field(1728)
    lineno, tokens = _next(lines, "'certificate'", source)
    expect_key(tokens, "certificate", lineno, source, arity=0)
    certificate = []
    for lineno, tokens in lines:
        if len(tokens) != 2 or not tokens[0].endswith(":"):
            raise FormatError(lineno, "expected '<predicate>: <outcome>'", source)
        certificate.append((tokens[0][:-1], tokens[1]))
    try:
        return CertifiedBelyiMap(
            field=field,
            embedding=(re, im),
            precision_bits=bits,
            ansatz=a,
            factors=factors,
            scale=scale,
            certificate=tuple(certificate),
        )
    except (ValidationError, InputError) as e:
        raise FormatError(0, f"inconsistent certified map: {e}", source) from e
