"""
Arbitrary-precision Newton solving of the ansatz system.

A solve walks the precision ladder of ``PrecisionConfig``: damped Newton at each level, escalating once the
relative residual is below 2^(-0.4 * bits) and accepting at the target level below 2^(-0.9 * bits).
``multistart_search`` finds starting points with a double-precision stage in numpy first.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Any

import numpy as np
from mpmath import mp
from pydantic import BaseModel, ConfigDict

from mm_belyi.ansatz import SCALE, BelyiAnsatz, belyi_polynomials, jacobian, relative_residual
from mm_belyi.errors import (
    DivergenceError,
    IterationBudgetError,
    PrecisionUnderflowError,
    RankDeficiencyError,
    SolveError,
)
from mm_belyi.types import DOUBLE, Matrix, MultistartConfig, PrecisionConfig, Vector
from mm_belyi.utils import mp_vector

logger = logging.getLogger(__name__)

type ResidualFn = Callable[[Vector], tuple[Vector, Any]]
"""Residual vector and its relative scale at a point."""

type JacobianFn = Callable[[Vector], Matrix]
"""Jacobian matrix at a point."""


class NumericSolution(BaseModel):
    """Coefficient values of every unknown of ``ansatz`` at ``precision_bits`` bits (mpmath mpc)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    ansatz: BelyiAnsatz
    precision_bits: int
    coeffs: tuple[Any, ...]
    residual_norm: Any
    jacobian_rank_estimate: int | None = None

    def vector(self) -> Vector:
        return np.array(self.coeffs, dtype=object)

    def value(self, symbol: str) -> Any:
        return self.coeffs[self.ansatz.unknown_index[symbol]]


def _norm(r: Vector) -> Any:
    return max(abs(v) for v in r)


def _threshold(bits: int, exponent: float) -> Any:
    return mp.ldexp(1, -int(exponent * bits))


def linear_solve(A: Matrix | Any, b: Vector | Sequence[Any]) -> tuple[Vector, Any]:
    """
    Solve ``A x = b`` at the current precision; returns x and a condition estimate.

    Square systems use LU with partial pivoting, overdetermined ones a Householder QR least-squares solve.
    The condition estimate is the ratio of the largest to the smallest pivot magnitude; a pivot at or below
    2^(-prec/2) times the largest one raises RankDeficiencyError, the same cutoff as ``pivot_rank``.
    """
    M = A if isinstance(A, mp.matrix) else mp.matrix([list(row) for row in A])
    rows, cols = M.rows, M.cols
    if rows < cols:
        raise ValueError(f"underdetermined system {rows}x{cols}")
    rhs = mp.matrix([mp.mpc(v) for v in b])
    try:
        if rows == cols:
            lu, perm = mp.LU_decomp(M, use_cache=False)
            triangular = lu
            y = mp.L_solve(lu, rhs, perm)
        else:
            Q, R = mp.qr(M, mode="skinny")
            triangular = R
            y = Q.H * rhs
        pivots = [abs(triangular[i, i]) for i in range(cols)]
        cutoff = max(pivots) * mp.ldexp(1, -(mp.prec // 2))
        if min(pivots) <= cutoff:
            raise RankDeficiencyError(cols, sum(1 for p in pivots if p > cutoff))
        x = mp.U_solve(triangular, y)
    except ZeroDivisionError as e:
        raise RankDeficiencyError(cols) from e
    return mp_vector(x[i] for i in range(cols)), max(pivots) / min(pivots)


def pivot_rank(A: Matrix, bits: int) -> int:
    """Rank estimate: LU pivots larger than 2^(-bits/2) times the largest one."""
    M = mp.matrix([list(row) for row in A])
    try:
        lu, _ = mp.LU_decomp(M, use_cache=False)
    except ZeroDivisionError:
        return min(M.rows, M.cols) - 1
    pivots = [abs(lu[i, i]) for i in range(min(M.rows, M.cols))]
    bound = max(pivots) * mp.ldexp(1, -bits // 2)
    return sum(1 for p in pivots if p > bound)


def numerical_rank(A: Matrix, bits: int) -> int:
    """Rank from singular values larger than 2^(-bits/2) times the largest one."""
    M = mp.matrix([list(row) for row in A])
    sigma = mp.svd_c(M, compute_uv=False)
    values = [abs(sigma[i]) for i in range(len(sigma))]
    bound = max(values) * mp.ldexp(1, -bits // 2)
    return sum(1 for s in values if s > bound)


def _line_search(residual_fn: ResidualFn, x: Vector, step: Vector, norm: Any, cfg: PrecisionConfig, bits: int) -> tuple[Vector, Any]:
    damping = mp.mpf(1)
    while damping >= cfg.damping_floor:
        trial = x + step * damping
        r, scale = residual_fn(trial)
        trial_norm = _norm(r) / scale
        if trial_norm < norm:
            if damping < 1:
                logger.debug("damping %s accepted", mp.nstr(damping, 5))
            return trial, trial_norm
        damping /= 2
    raise DivergenceError(mp.nstr(norm, 8), bits)


def newton_solve(residual_fn: ResidualFn, jacobian_fn: JacobianFn, x0: Sequence[Any] | Vector, cfg: PrecisionConfig) -> tuple[Vector, Any, int]:
    """
    Damped Newton (Gauss-Newton for overdetermined systems) along the precision ladder.

    Returns the final point, its relative residual norm and the final precision in bits.
    """
    levels = cfg.levels()
    x = np.array(list(x0), dtype=object)
    norm: Any = None
    for level, bits in enumerate(levels):
        final = level == len(levels) - 1
        with mp.workprec(bits):
            x = mp_vector(x)
            threshold = _threshold(bits, cfg.accept_exponent if final else cfg.escalate_exponent)
            r, scale = residual_fn(x)
            norm = _norm(r) / scale
            for iteration in itertools.count():
                logger.debug("%d bits, iteration %d: residual %s", bits, iteration, mp.nstr(norm, 5))
                if norm <= threshold:
                    break
                if iteration >= cfg.max_iterations:
                    raise IterationBudgetError(bits, cfg.max_iterations)
                step, _ = linear_solve(jacobian_fn(x), -r)
                x, norm = _line_search(residual_fn, x, step, norm, cfg, bits)
                r, scale = residual_fn(x)
            logger.info("precision level %d bits reached, residual %s", bits, mp.nstr(norm, 5))
    return x, norm, levels[-1]


def newton_refine(a: BelyiAnsatz, x0: Sequence[Any] | Vector, cfg: PrecisionConfig | None = None) -> NumericSolution:
    """Refine a starting point for the ansatz system to ``cfg.target_bits``."""
    cfg = cfg or PrecisionConfig()
    if len(x0) != a.num_unknowns:
        raise ValueError(f"expected {a.num_unknowns} starting values, got {len(x0)}")
    x, norm, bits = newton_solve(
        lambda v: relative_residual(a, v),
        lambda v: jacobian(a, v, threads=cfg.threads),
        x0,
        cfg,
    )
    with mp.workprec(bits):
        rank = pivot_rank(jacobian(a, x, threads=cfg.threads), bits)
    logger.info("accepted solution at %d bits, residual %s, rank estimate %d/%d", bits, mp.nstr(norm, 5), rank, a.num_unknowns)
    return NumericSolution(ansatz=a, precision_bits=bits, coeffs=tuple(x), residual_norm=norm, jacobian_rank_estimate=rank)


def refine_solution(sol: NumericSolution, cfg: PrecisionConfig | None = None) -> NumericSolution:
    return newton_refine(sol.ansatz, sol.coeffs, cfg)


def solution_from_values(a: BelyiAnsatz, values: Mapping[str, Any], bits: int) -> NumericSolution:
    """NumericSolution from given values (exact rationals, integers or mpmath numbers) of every unknown."""
    missing = set(a.symbols) - set(values)
    if missing:
        raise ValueError(f"missing values for {sorted(missing)}")
    with mp.workprec(bits):
        x = mp_vector(values[s] for s in a.symbols)
        r, scale = relative_residual(a, x)
        return NumericSolution(ansatz=a, precision_bits=bits, coeffs=tuple(x), residual_norm=_norm(r) / scale)


def solution_residual(sol: NumericSolution, bits: int) -> Vector:
    """Residual of a solution evaluated at ``bits``; the solution must carry at least that precision."""
    if bits > sol.precision_bits:
        raise PrecisionUnderflowError(bits, sol.precision_bits)
    return relative_residual(sol.ansatz, sol.coeffs, bits)[0]


def _double_norm(a: BelyiAnsatz, x: Vector) -> float:
    r, scale = relative_residual(a, x)
    if not np.all(np.isfinite(r)):
        return float("inf")
    return float(np.max(np.abs(r))) / float(scale)


def _low_precision_newton(a: BelyiAnsatz, x: Vector, ms: MultistartConfig) -> Vector | None:
    """Damped least-squares Newton in complex128; None when the start does not converge."""
    with np.errstate(all="ignore"):
        norm = _double_norm(a, x)
        for _ in range(ms.low_iterations):
            if norm < ms.low_tolerance:
                return x
            if not np.isfinite(norm):
                return None
            r, _ = relative_residual(a, x)
            J = jacobian(a, x)
            if not np.all(np.isfinite(J)):
                return None
            step = np.linalg.lstsq(J, -r, rcond=None)[0]
            damping = 1.0
            while damping >= 2.0**-20:
                trial = x + damping * step
                trial_norm = _double_norm(a, trial)
                if trial_norm < norm:
                    x, norm = trial, trial_norm
                    break
                damping /= 2
            else:
                return None
        return x if norm < ms.low_tolerance else None


def _random_start(a: BelyiAnsatz, rng: np.random.Generator, radius: float) -> Vector:
    """Monic factors with roots uniform in the disc of the given radius; gauge coordinates pinned."""
    parts = []
    for f in a.factors:
        roots = radius * np.sqrt(rng.random(f.degree)) * np.exp(2j * np.pi * rng.random(f.degree))
        parts.append(np.poly(roots)[::-1][:-1])
    x = np.concatenate(parts).astype(DOUBLE)
    if not a.affine:
        return x
    idx = a.unknown_index
    x = np.append(x, 1.0 + 0j)
    for symbol, value in a.normalization.gauge_fixes:
        x[idx[symbol]] = value
    with np.errstate(all="ignore"):
        p3, p2, pc = belyi_polynomials(a, x)
        diff = np.zeros(a.n + 1, dtype=DOUBLE)
        diff[: len(p3)] += p3
        diff[: len(p2)] -= p2
        den = np.vdot(pc, pc)
        x[idx[SCALE]] = np.vdot(pc, diff[: len(pc)]) / den if den else 1.0
    return x


def _all_roots(a: BelyiAnsatz, x: Vector) -> Vector:
    return np.concatenate([np.roots(a.factor_coefficients(x, i)[::-1]) for i in range(len(a.factors))])


def is_generic(a: BelyiAnsatz, x: Vector, separation: float = 1e-6) -> bool:
    """All factor roots pairwise separated: simple factors squarefree, numerator and cusp factors coprime."""
    roots = _all_roots(a, np.array([complex(v) for v in x], dtype=DOUBLE))
    if len(roots) < 2:
        return True
    size = max(1.0, float(np.max(np.abs(roots))))
    gaps = np.abs(roots[:, None] - roots[None, :])
    np.fill_diagonal(gaps, np.inf)
    return bool(np.min(gaps) > separation * size)


def _distance(x: Sequence[Any], y: Sequence[Any]) -> float:
    scale = max(1.0, max(abs(complex(v)) for v in x))
    return max(abs(complex(u) - complex(v)) for u, v in zip(x, y, strict=True)) / scale


def _dedup[T](items: Sequence[T], key: Callable[[T], Sequence[Any]], bits: int) -> list[T]:
    result: list[T] = []
    for item in items:
        if all(_distance(key(item), key(other)) >= 2.0**-bits for other in result):
            result.append(item)
    return result


def _canonical_key(sol: NumericSolution) -> tuple[Any, ...]:
    return (sol.residual_norm, *((c.real, c.imag) for c in sol.coeffs))


def multistart_search(
    a: BelyiAnsatz,
    budget: int,
    seed: int,
    cfg: PrecisionConfig | None = None,
    ms: MultistartConfig | None = None,
) -> list[NumericSolution]:
    """
    Solution classes found from ``budget`` random starts.

    Starts are drawn from ``numpy.random.default_rng(seed)`` before any work is distributed, refined in complex128,
    deduplicated, filtered for genericity and escalated with ``newton_refine``. The result is sorted canonically
    (residual norm, then coefficients) and depends only on (seed, budget, configs).
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    cfg = cfg or PrecisionConfig()
    ms = ms or MultistartConfig()
    radius = ms.radius or (2.0 if a.affine else 1000.0)
    rng = np.random.default_rng(seed)
    starts = [_random_start(a, rng, radius) for _ in range(budget)]

    def work(x: Vector) -> Vector | None:
        return _low_precision_newton(a, x, ms)

    if ms.threads > 1:
        with ThreadPoolExecutor(max_workers=ms.threads) as pool:
            converged = list(pool.map(work, starts))
    else:
        converged = [work(x) for x in starts]

    survivors = [x for x in converged if x is not None and is_generic(a, x, ms.separation)]
    survivors = _dedup(survivors, lambda v: v, ms.dedup_bits)
    logger.info("multistart: %d of %d starts converged to %d generic candidates", sum(x is not None for x in converged), budget, len(survivors))

    solutions: list[NumericSolution] = []
    for x in survivors:
        try:
            sol = newton_refine(a, x, cfg)
        except SolveError as e:
            logger.debug("candidate dropped during escalation: %s", e)
            continue
        if is_generic(a, sol.coeffs, ms.separation) and all(
            _distance(sol.coeffs, other.coeffs) >= 2.0**-ms.dedup_bits for other in solutions
        ):
            solutions.append(sol)
        if ms.max_classes is not None and len(solutions) >= ms.max_classes:
            break
    solutions.sort(key=_canonical_key)
    logger.info("multistart: %d solution classes", len(solutions))
    return solutions
