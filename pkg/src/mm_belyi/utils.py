"""Polynomial helpers on coefficient arrays and line-oriented text parsing."""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Sequence
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mp

from mm_belyi.errors import FormatError
from mm_belyi.types import DOUBLE, Vector


def mp_vector(values: Iterable[object]) -> Vector:
    """Object array of mpc at the current working precision."""
    return np.array([mp.mpc(v) for v in values], dtype=object)


def as_double(v: Vector) -> Vector:
    return np.array([complex(x) for x in v], dtype=DOUBLE)


def poly_mul(a: Vector, b: Vector) -> Vector:
    """
    Product of constant-first coefficient arrays.

    complex128 arrays use numpy convolution; object arrays sum each output coefficient with ``mpmath.fdot``
    so every coefficient is rounded once.
    """
    if a.dtype != object:
        return np.convolve(a, b)
    if len(a) < len(b):
        a, b = b, a
    out = np.empty(len(a) + len(b) - 1, dtype=object)
    for k in range(len(out)):
        lo = max(0, k - len(b) + 1)
        hi = min(k, len(a) - 1)
        out[k] = mp.fdot(a[lo : hi + 1], b[k - hi : k - lo + 1][::-1])
    return out


def poly_pow(a: Vector, m: int) -> Vector:
    result = np.ones(1, dtype=a.dtype) if a.dtype != object else mp_vector([1])
    for _ in range(m):
        result = poly_mul(result, a)
    return result


def poly_product(factors: Sequence[Vector], double: bool = False) -> Vector:
    """Product of the given polynomials (the constant 1 when empty)."""
    result = np.ones(1, dtype=DOUBLE) if double else mp_vector([1])
    for f in factors:
        result = poly_mul(result, f)
    return result


def poly_eval(a: Sequence[object] | Vector, x: object) -> object:
    """Horner evaluation of a constant-first coefficient sequence."""
    acc: object = 0
    for c in reversed(list(a)):
        acc = acc * x + c  # type: ignore[operator]
    return acc


def poly_derivative(a: Vector) -> Vector:
    if len(a) == 1:
        return a[:1] * 0
    return np.array([a[k] * k for k in range(1, len(a))], dtype=a.dtype)


def max_abs(v: Iterable[object]) -> object:
    """Max-norm of a vector of mpmath or python numbers (0 for an empty vector)."""
    return max((abs(x) for x in v), default=mp.mpf(0))  # type: ignore[arg-type]


def decimal_digits(bits: int) -> int:
    """Decimal digits that carry ``bits`` binary digits."""
    return math.ceil(bits * math.log10(2)) + 1


def format_mpf(x: mpmath.mpf, bits: int) -> str:
    with mp.workprec(bits):
        return mpmath.nstr(x, decimal_digits(bits), strip_zeros=False)


def format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def parse_fraction(token: str, line: int, source: str = "<input>") -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError) as e:
        raise FormatError(line, f"bad rational '{token}'", source) from e


def parse_int(token: str, line: int, source: str = "<input>") -> int:
    try:
        return int(token)
    except ValueError as e:
        raise FormatError(line, f"bad integer '{token}'", source) from e


def content_lines(text: str) -> Iterator[tuple[int, list[str]]]:
    """Yield (1-based line number, tokens) for every line that is neither blank nor a ``#`` comment."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line.split()


def expect_key(tokens: list[str], key: str, lineno: int, source: str = "<input>", arity: int | None = None) -> list[str]:
    """Check the leading keyword of a line and return the remaining tokens."""
    if tokens[0] != key:
        raise FormatError(lineno, f"expected '{key}', got '{tokens[0]}'", source)
    rest = tokens[1:]
    if arity is not None and len(rest) != arity:
        raise FormatError(lineno, f"'{key}' takes {arity} value(s), got {len(rest)}", source)
    return rest
