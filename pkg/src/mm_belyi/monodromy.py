"""
Monodromy of a computed Belyi map by continuation of the fiber over three loops.

The fiber over y is the root set of ``G(x, y) = 1728 * p3(x) - y * K' * pc(x)`` where K' is 1728 in
hauptmodul gauge and the ``scale`` unknown in affine gauge. All loops start at the base point y0 on the
negative real axis and are counterclockwise around 0 and 1728, clockwise around infinity, so that
``m1728 * m0 * minf`` is the identity; the recovered triple is (s0, s1, sinf) = (m1728, m0, minf).
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from enum import StrEnum
from typing import Any

from mpmath import mp
from pydantic import BaseModel, ConfigDict

from mm_belyi.ansatz import BelyiAnsatz, belyi_polynomials
from mm_belyi.bigsolve import NumericSolution
from mm_belyi.errors import ClusteredRootsError, DegreeLimitError, PathTrackingError
from mm_belyi.exactnf import CertifiedBelyiMap
from mm_belyi.perm import Permutation, PermutationTriple
from mm_belyi.types import TrackingConfig, Vector
from mm_belyi.utils import poly_derivative, poly_eval

logger = logging.getLogger(__name__)

INFINITY_RADIUS = 4 * 1728
MAX_STEP = 1 / 16

type BelyiMapLike = CertifiedBelyiMap | NumericSolution
"""Anything monodromy can be computed from: a certified exact map or a numeric solution."""


class Loop(StrEnum):
    ZERO = "around-0"
    J1728 = "around-1728"
    INFINITY = "around-inf"


class FiberState(BaseModel):
    """Roots of the fiber over ``base_point``, labeled 1..n in (real, imaginary) order."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    base_point: Any
    roots: tuple[Any, ...]
    precision_bits: int
    separation: Any

    @property
    def n(self) -> int:
        return len(self.roots)


class _Fiber:
    """G and its x-derivative for one map at the current precision."""

    def __init__(self, ansatz: BelyiAnsatz, coeffs: Vector, bits: int) -> None:
        p3, _, pc = belyi_polynomials(ansatz, coeffs, bits)
        self.n = ansatz.n
        self.p3, self.pc = p3, pc
        self.dp3, self.dpc = poly_derivative(p3), poly_derivative(pc)
        self.k = ansatz.scale_value(coeffs)

    def coefficients(self, y: Any) -> list[Any]:
        """Coefficients of G(., y), constant first."""
        out = [1728 * c for c in self.p3]
        for i, c in enumerate(self.pc):
            out[i] -= y * self.k * c
        return out

    def value(self, x: Any, y: Any) -> Any:
        return 1728 * poly_eval(self.p3, x) - y * self.k * poly_eval(self.pc, x)

    def dx(self, x: Any, y: Any) -> Any:
        return 1728 * poly_eval(self.dp3, x) - y * self.k * poly_eval(self.dpc, x)

    def dy(self, x: Any) -> Any:
        return -self.k * poly_eval(self.pc, x)


def _map_data(m: BelyiMapLike, bits: int) -> tuple[BelyiAnsatz, Vector]:
    if isinstance(m, CertifiedBelyiMap):
        return m.ansatz, m.numeric_coefficients(bits)
    return m.ansatz, m.vector()


def _min_separation(roots: Sequence[Any]) -> Any:
    if len(roots) < 2:
        return mp.inf
    return min(abs(roots[i] - roots[j]) for i in range(len(roots)) for j in range(i + 1, len(roots)))


def _separation_bound(roots: Sequence[Any], bits: int) -> Any:
    return mp.ldexp(1, -(bits // 4)) * max(mp.mpf(1), max(abs(r) for r in roots))


def _fiber_roots(fiber: _Fiber, y0: Any, bits: int) -> tuple[list[Any], Any]:
    coeffs = fiber.coefficients(y0)
    try:
        roots = mp.polyroots(list(reversed(coeffs)), maxsteps=200 + 20 * fiber.n, extraprec=bits)
    except mp.NoConvergence as e:
        raise ClusteredRootsError(0, mp.ldexp(1, -(bits // 4))) from e
    roots = sorted((mp.mpc(r) for r in roots), key=lambda r: (r.real, r.imag))
    separation = _min_separation(roots)
    bound = _separation_bound(roots, bits)
    if separation <= bound:
        raise ClusteredRootsError(mp.nstr(separation, 5), mp.nstr(bound, 5))
    return roots, separation


def fiber_at(m: BelyiMapLike, y0: complex | Any, bits: int = 128) -> FiberState:
    """
    All n roots of ``Phi(x) = y0`` at ``bits`` bits, pairwise separated by more than 2^(-bits/4) (relative).

    Raises ClusteredRootsError when y0 is (numerically) a critical value.
    """
    ansatz, coeffs = _map_data(m, bits)
    with mp.workprec(bits):
        fiber = _Fiber(ansatz, coeffs, bits)
        y = mp.mpc(y0)
        roots, separation = _fiber_roots(fiber, y, bits)
    logger.debug("fiber over %s: %d roots, separation %s", y0, len(roots), mp.nstr(separation, 5))
    return FiberState(base_point=y, roots=tuple(roots), precision_bits=bits, separation=separation)


def _arc(center: float, radius: float, start: float, turn: float) -> Callable[[Any], Any]:
    """Circle arc from angle ``start`` through ``turn`` half-turns (positive is counterclockwise)."""
    return lambda s: center + radius * mp.expjpi(start + turn * s)


def _segment(a: float, b: float) -> Callable[[Any], Any]:
    return lambda s: a + (b - a) * s


def _chain(*pieces: tuple[float, Callable[[Any], Any]]) -> Callable[[Any], Any]:
    """Concatenate paths parameterized on [0, 1]; ``pieces`` are (fraction of t, path)."""

    def path(t: Any) -> Any:
        start = mp.mpf(0)
        for fraction, piece in pieces:
            if t <= start + fraction:
                return piece((t - start) / fraction)
            start += fraction
        return pieces[-1][1](mp.mpf(1))

    return path


def loop_path(loop: Loop, base_point: float) -> Callable[[Any], Any]:
    """The loop as a function of t in [0, 1], angles in units of pi."""
    r = -base_point
    if loop == Loop.ZERO:
        return _arc(0, r, 1, 2)
    if loop == Loop.J1728:
        return _chain(
            (0.25, _arc(0, r, 1, -1)),
            (0.5, _arc(1728, 1728 - r, 1, 2)),
            (0.25, _arc(0, r, 0, 1)),
        )
    return _chain(
        (0.25, _segment(base_point, -INFINITY_RADIUS)),
        (0.5, _arc(0, INFINITY_RADIUS, 1, -2)),
        (0.25, _segment(-INFINITY_RADIUS, base_point)),
    )


def _correct(fiber: _Fiber, x: Any, y: Any, cfg: TrackingConfig, tol: Any) -> Any | None:
    for _ in range(cfg.corrector_iterations):
        d = fiber.dx(x, y)
        if d == 0:
            return None
        delta = fiber.value(x, y) / d
        x -= delta
        if abs(delta) <= tol * max(1, abs(x)):
            return x
    return None


def _step(fiber: _Fiber, xs: list[Any], y: Any, y_next: Any, cfg: TrackingConfig, tol: Any) -> list[Any] | None:
    """Euler predictor and Newton corrector for every root; None when a root fails or jumps."""
    predicted = []
    for x in xs:
        d = fiber.dx(x, y)
        if d == 0:
            return None
        predicted.append(x - fiber.dy(x) / d * (y_next - y))
    guard = _min_separation(predicted) / 4
    corrected = []
    for x in predicted:
        c = _correct(fiber, x, y_next, cfg, tol)
        if c is None or abs(c - x) >= guard:
            return None
        corrected.append(c)
    if len(corrected) > 1 and _min_separation(corrected) <= guard:
        return None
    return corrected


def track_loop(m: BelyiMapLike, fs: FiberState, loop: Loop, cfg: TrackingConfig | None = None) -> Permutation:
    """
    Continue every fiber root along ``loop`` and match end roots to start roots.

    Image of label i is the label of the root where the path starting at root i ends. The step size halves
    on corrector failure or path jumping and doubles after ``clean_steps_to_grow`` clean steps.
    """
    cfg = cfg or TrackingConfig()
    bits = fs.precision_bits
    ansatz, coeffs = _map_data(m, bits)
    path = loop_path(loop, float(mp.re(fs.base_point)))
    with mp.workprec(bits):
        fiber = _Fiber(ansatz, coeffs, bits)
        tol = mp.ldexp(1, -(bits // 2))
        xs = list(fs.roots)
        t, h, clean = mp.mpf(0), mp.mpf(cfg.initial_step), 0
        y = path(t)
        steps = 0
        while t < 1:
            h = min(h, 1 - t)
            y_next = path(t + h)
            result = _step(fiber, xs, y, y_next, cfg, tol)
            if result is None:
                h /= 2
                clean = 0
                if h < cfg.min_step:
                    raise PathTrackingError(loop.value, mp.nstr(t, 8))
                continue
            xs, t, y = result, t + h, y_next
            steps += 1
            clean += 1
            if clean >= cfg.clean_steps_to_grow:
                h, clean = min(2 * h, mp.mpf(MAX_STEP)), 0
        logger.debug("%s: %d steps", loop.value, steps)
        return _match(xs, fs, loop)


def _match(ends: Sequence[Any], fs: FiberState, loop: Loop) -> Permutation:
    radius = fs.separation / 4
    images = []
    for x in ends:
        j = min(range(fs.n), key=lambda k: abs(fs.roots[k] - x))
        if abs(fs.roots[j] - x) >= radius:
            raise PathTrackingError(loop.value, 1)
        images.append(j)
    if len(set(images)) != fs.n:
        raise PathTrackingError(loop.value, 1)
    return Permutation.from_zero_based(tuple(images))


def monodromy_triple(m: BelyiMapLike, cfg: TrackingConfig | None = None) -> PermutationTriple:
    """
    Permutation triple (s0, s1, sinf) = (loop around 1728, loop around 0, loop around infinity).

    Fiber labels follow FiberState order. Raises DegreeLimitError above ``cfg.max_degree``.
    """
    cfg = cfg or TrackingConfig()
    n = m.ansatz.n
    if n > cfg.max_degree:
        raise DegreeLimitError(n, cfg.max_degree)
    fs = fiber_at(m, cfg.base_point, cfg.bits)
    m0 = track_loop(m, fs, Loop.ZERO, cfg)
    m1728 = track_loop(m, fs, Loop.J1728, cfg)
    minf = track_loop(m, fs, Loop.INFINITY, cfg)
    logger.info("monodromy of degree %d recovered", n)
    return PermutationTriple(s0=m1728, s1=m0, sinf=minf)
