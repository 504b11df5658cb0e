"""
Permutations on {1..n} and the permutation-group algorithms the pipeline needs.

Composition order is fixed everywhere: ``compose(p, q)`` (also ``p * q``) applies ``q`` first,
then ``p``, i.e. ``(p * q)(i) == p(q(i))``.
"""

from __future__ import annotations

import logging
import math
import time
from collections import Counter, deque
from collections.abc import Iterable, Sequence
from functools import cached_property, reduce

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from mm_belyi.errors import (
    ConjugacySearchTimeoutError,
    DegreeMismatchError,
    EmptyGeneratorsError,
    NotBijectionError,
    NotTransitiveError,
    OrderViolationError,
)

logger = logging.getLogger(__name__)

type _Perm0 = tuple[int, ...]
"""0-based image tuple used inside the group algorithms."""


class Permutation(BaseModel):
    """
    Bijection of {1..n} given by its 1-based image list.

    ``images[i - 1]`` is the image of point ``i``.
    """

    model_config = ConfigDict(frozen=True)

    images: tuple[int, ...]

    @field_validator("images")
    @classmethod
    def check_bijection(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if not v or sorted(v) != list(range(1, len(v) + 1)):
            raise NotBijectionError(v)
        return v

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls.model_construct(images=tuple(range(1, n + 1)))

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> Permutation:
        """Build from disjoint cycles, e.g. ``from_cycles(3, [(1, 2, 3)])``."""
        images = list(range(1, n + 1))
        for cycle in cycles:
            for k, point in enumerate(cycle):
                images[point - 1] = cycle[(k + 1) % len(cycle)]
        return cls(images=tuple(images))

    @classmethod
    def from_zero_based(cls, p: _Perm0) -> Permutation:
        return cls.model_construct(images=tuple(i + 1 for i in p))

    @property
    def n(self) -> int:
        return len(self.images)

    @cached_property
    def zero_based(self) -> _Perm0:
        return tuple(i - 1 for i in self.images)

    def __call__(self, point: int) -> int:
        return self.images[point - 1]

    def __mul__(self, other: Permutation) -> Permutation:
        return compose(self, other)

    def __invert__(self) -> Permutation:
        return Permutation.from_zero_based(_inv(self.zero_based))

    def __pow__(self, k: int) -> Permutation:
        return Permutation.from_zero_based(_pow(self.zero_based, k))

    def is_identity(self) -> bool:
        return all(img == i for i, img in enumerate(self.images, start=1))

    def cycles(self) -> list[tuple[int, ...]]:
        """Cycles including fixed points, each starting at its smallest point, ordered by that point."""
        seen: set[int] = set()
        result: list[tuple[int, ...]] = []
        for start in range(1, self.n + 1):
            if start in seen:
                continue
            cycle = [start]
            seen.add(start)
            point = self(start)
            while point != start:
                cycle.append(point)
                seen.add(point)
                point = self(point)
            result.append(tuple(cycle))
        return result

    def order(self) -> int:
        return math.lcm(*(len(c) for c in self.cycles()))

    def __str__(self) -> str:
        moved = [c for c in self.cycles() if len(c) > 1]
        if not moved:
            return "()"
        return "".join("(" + " ".join(map(str, c)) + ")" for c in moved)


class CycleType(BaseModel):
    """Multiset of cycle lengths, stored as sorted ``(length, count)`` pairs."""

    model_config = ConfigDict(frozen=True)

    parts: tuple[tuple[int, int], ...]

    @field_validator("parts")
    @classmethod
    def normalize(cls, v: tuple[tuple[int, int], ...]) -> tuple[tuple[int, int], ...]:
        counts: Counter[int] = Counter()
        for length, count in v:
            if length < 1 or count < 0:
                raise ValueError(f"invalid cycle part {length}^{count}")
            counts[length] += count
        return tuple(sorted((length, count) for length, count in counts.items() if count > 0))

    @classmethod
    def from_lengths(cls, lengths: Iterable[int]) -> CycleType:
        return cls(parts=tuple(Counter(lengths).items()))

    @classmethod
    def parse(cls, text: str) -> CycleType:
        """Parse ``"1^12 2^132"``; a bare ``"7"`` means one cycle of length 7."""
        parts = []
        for token in text.split():
            length, _, count = token.partition("^")
            parts.append((int(length), int(count) if count else 1))
        return cls(parts=tuple(parts))

    @property
    def degree(self) -> int:
        return sum(length * count for length, count in self.parts)

    @property
    def num_cycles(self) -> int:
        return sum(count for _, count in self.parts)

    def count(self, length: int) -> int:
        return dict(self.parts).get(length, 0)

    def lengths(self) -> list[int]:
        return [length for length, count in self.parts for _ in range(count)]

    def __str__(self) -> str:
        return " ".join(f"{length}^{count}" for length, count in self.parts)


class PermutationTriple(BaseModel):
    """
    Triple (s0, s1, sinf) with s0^2 = s1^3 = s0*s1*sinf = 1 generating a transitive group.

    Construction validates all invariants; use ``triple.validate_triple`` to build one from (s0, s1).
    """

    model_config = ConfigDict(frozen=True)

    s0: Permutation
    s1: Permutation
    sinf: Permutation

    @model_validator(mode="after")
    def check_legitimate(self) -> PermutationTriple:
        n = self.s0.n
        for p in (self.s1, self.sinf):
            if p.n != n:
                raise DegreeMismatchError(n, p.n)
        if not (self.s0 * self.s0).is_identity():
            raise OrderViolationError("s0", 2, self.s0.order())
        if not (self.s1 * self.s1 * self.s1).is_identity():
            raise OrderViolationError("s1", 3, self.s1.order())
        if not (self.s0 * self.s1 * self.sinf).is_identity():
            raise ValueError("s0*s1*sinf is not the identity")
        parts = orbits([self.s0, self.s1], n)
        if len(parts) > 1:
            raise NotTransitiveError(parts)
        return self

    @property
    def n(self) -> int:
        return self.s0.n

    def as_tuple(self) -> tuple[Permutation, Permutation, Permutation]:
        return self.s0, self.s1, self.sinf


def _inv(p: _Perm0) -> _Perm0:
    result = [0] * len(p)
    for i, img in enumerate(p):
        result[img] = i
    return tuple(result)


def _mul(p: _Perm0, q: _Perm0) -> _Perm0:
    return tuple(map(p.__getitem__, q))


def _pow(p: _Perm0, k: int) -> _Perm0:
    if k < 0:
        p, k = _inv(p), -k
    result = tuple(range(len(p)))
    while k:
        if k & 1:
            result = _mul(result, p)
        p = _mul(p, p)
        k >>= 1
    return result


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Return ``p * q``: apply ``q`` first, then ``p``."""
    if p.n != q.n:
        raise DegreeMismatchError(p.n, q.n)
    return Permutation.from_zero_based(_mul(p.zero_based, q.zero_based))


def product(perms: Sequence[Permutation]) -> Permutation:
    """``perms[0] * perms[1] * ...``; the last one is applied first."""
    return reduce(compose, perms)


def cycle_type(p: Permutation) -> CycleType:
    return CycleType.from_lengths(len(c) for c in p.cycles())


def orbits(gens: Sequence[Permutation], n: int) -> list[tuple[int, ...]]:
    """Orbit partition of {1..n} under the generated group, each orbit sorted."""
    seen: set[int] = set()
    result = []
    for start in range(1, n + 1):
        if start in seen:
            continue
        orbit = {start}
        queue = deque([start])
        while queue:
            point = queue.popleft()
            for g in gens:
                image = g(point)
                if image not in orbit:
                    orbit.add(image)
                    queue.append(image)
        seen |= orbit
        result.append(tuple(sorted(orbit)))
    return result


def is_transitive(gens: Sequence[Permutation], n: int) -> bool:
    """True iff the orbit of point 1 under the generated group is {1..n}."""
    if not gens:
        if n > 1:
            raise EmptyGeneratorsError(n)
        return True
    for g in gens:
        if g.n != n:
            raise DegreeMismatchError(n, g.n)
    return len(orbits(gens, n)) == 1


class _StabilizerChain:
    """Deterministic Schreier-Sims; base points are chosen as the smallest moved point."""

    def __init__(self, gens: Sequence[_Perm0], n: int) -> None:
        self.n = n
        self.identity: _Perm0 = tuple(range(n))
        self.base: list[int] = []
        self.strong: list[list[_Perm0]] = []
        self.transversals: list[dict[int, _Perm0]] = []
        self.inverses: list[dict[int, _Perm0]] = []
        gens = [g for g in dict.fromkeys(gens) if g != self.identity]
        for g in gens:
            if all(g[b] == b for b in self.base):
                self.base.append(next(i for i in range(n) if g[i] != i))
        for level in range(len(self.base)):
            self.strong.append([g for g in gens if all(g[b] == b for b in self.base[:level])])
            self.transversals.append({})
            self.inverses.append({})
            self._rebuild(level)
        self._build()

    def _rebuild(self, level: int) -> None:
        root = self.base[level]
        transversal = {root: self.identity}
        queue = deque([root])
        while queue:
            point = queue.popleft()
            for g in self.strong[level]:
                image = g[point]
                if image not in transversal:
                    transversal[image] = _mul(g, transversal[point])
                    queue.append(image)
        self.transversals[level] = transversal
        self.inverses[level] = {}

    def _inverse_rep(self, level: int, point: int) -> _Perm0:
        cache = self.inverses[level]
        if point not in cache:
            cache[point] = _inv(self.transversals[level][point])
        return cache[point]

    def _strip(self, h: _Perm0, start: int) -> tuple[_Perm0, int]:
        for level in range(start, len(self.base)):
            image = h[self.base[level]]
            if image not in self.transversals[level]:
                return h, level
            h = _mul(self._inverse_rep(level, image), h)
        return h, len(self.base)

    def _build(self) -> None:
        level = len(self.base) - 1
        while level >= 0:
            extended = self._check_level(level)
            level = extended if extended is not None else level - 1

    def _check_level(self, level: int) -> int | None:
        """Sift all Schreier generators of ``level``; on failure extend the chain and return the level to resume from."""
        transversal = self.transversals[level]
        for point, rep in list(transversal.items()):
            for s in list(self.strong[level]):
                image = s[point]
                moved = _mul(s, rep)
                if moved == transversal[image]:
                    continue
                h, stop = self._strip(_mul(self._inverse_rep(level, image), moved), level + 1)
                if stop == len(self.base) and h == self.identity:
                    continue
                if stop == len(self.base):
                    self.base.append(next(i for i in range(self.n) if h[i] != i))
                    self.strong.append([])
                    self.transversals.append({})
                    self.inverses.append({})
                for target in range(level + 1, stop + 1):
                    self.strong[target].append(h)
                    self._rebuild(target)
                logger.debug("stabilizer chain: new strong generator at levels %d..%d", level + 1, stop)
                return stop
        return None

    def order(self) -> int:
        return math.prod(len(t) for t in self.transversals)


def group_order(gens: Sequence[Permutation]) -> int:
    """Exact order of the group generated by ``gens`` (deterministic Schreier-Sims)."""
    if not gens:
        return 1
    n = gens[0].n
    for g in gens:
        if g.n != n:
            raise DegreeMismatchError(n, g.n)
    chain = _StabilizerChain([g.zero_based for g in gens], n)
    logger.debug("stabilizer chain base %s", [b + 1 for b in chain.base])
    return chain.order()


def _point_signature(triple: PermutationTriple, point: int) -> tuple[int, int, int]:
    return _cycle_length(triple.s0, point), _cycle_length(triple.s1, point), _cycle_length(triple.sinf, point)


def _cycle_length(p: Permutation, point: int) -> int:
    length, current = 1, p(point)
    while current != point:
        length += 1
        current = p(current)
    return length


def simultaneously_conjugate(a: PermutationTriple, b: PermutationTriple, timeout: float = 60.0) -> Permutation | None:
    """
    Find pi with ``pi * a_i * pi^-1 == b_i`` for i in (0, 1, inf), or None.

    The search fixes the image of point 1 among points with the same cycle-length signature and
    propagates along the generators; transitivity makes the propagation determine pi completely.
    Raises ConjugacySearchTimeoutError when ``timeout`` seconds pass before the search finishes.
    """
    if a.n != b.n:
        raise DegreeMismatchError(a.n, b.n)
    if any(cycle_type(p) != cycle_type(q) for p, q in zip(a.as_tuple(), b.as_tuple(), strict=True)):
        return None
    n = a.n
    deadline = time.monotonic() + timeout
    signature = _point_signature(a, 1)
    gens_a = (a.s0, a.s1)
    gens_b = (b.s0, b.s1)
    for candidate in range(1, n + 1):
        if time.monotonic() > deadline:
            raise ConjugacySearchTimeoutError(timeout)
        if _point_signature(b, candidate) != signature:
            continue
        images = _propagate(gens_a, gens_b, n, candidate, deadline, timeout)
        if images is None:
            continue
        pi = Permutation(images=tuple(images[1:]))
        if all(pi * p * ~pi == q for p, q in zip(a.as_tuple(), b.as_tuple(), strict=True)):
            return pi
    return None


def _propagate(
    gens_a: Sequence[Permutation], gens_b: Sequence[Permutation], n: int, start: int, deadline: float, timeout: float
) -> list[int] | None:
    images = [0] * (n + 1)
    used = [False] * (n + 1)
    images[1] = start
    used[start] = True
    queue = deque([1])
    while queue:
        if time.monotonic() > deadline:
            raise ConjugacySearchTimeoutError(timeout)
        point = queue.popleft()
        for ga, gb in zip(gens_a, gens_b, strict=True):
            source, target = ga(point), gb(images[point])
            if images[source]:
                if images[source] != target:
                    return None
                continue
            if used[target]:
                return None
            images[source] = target
            used[target] = True
            queue.append(source)
    return images


def _projective_line(N: int) -> list[tuple[int, int]]:
    """Points of P^1(Z/N) as canonical column vectors (a, c); (1, 0) first."""
    units = [u for u in range(N) if math.gcd(u, N) == 1]
    points = {
        min(((u * a) % N, (u * c) % N) for u in units)
        for a in range(N)
        for c in range(N)
        if math.gcd(math.gcd(a, c), N) == 1
    }
    return sorted(points, key=lambda v: (v != (1, 0), v))


def gamma0_triple(N: int) -> PermutationTriple:
    """
    Coset triple of Gamma0(N): the action of S = [[0,-1],[1,0]] and ST = [[0,-1],[1,1]] on P^1(Z/N).

    Point 1 is (1:0), whose stabilizer is Gamma0(N); sinf is the action of T^-1 with T = [[1,1],[0,1]].
    """
    if N < 1:
        raise ValueError(f"level must be positive, got {N}")
    if N == 1:
        one = Permutation.identity(1)
        return PermutationTriple(s0=one, s1=one, sinf=one)
    points = _projective_line(N)
    units = [u for u in range(N) if math.gcd(u, N) == 1]
    canonical = {((u * a) % N, (u * c) % N): (a, c) for a, c in points for u in units}
    label = {p: i for i, p in enumerate(points, start=1)}

    def act(m: tuple[int, int, int, int]) -> Permutation:
        alpha, beta, gamma, delta = m
        return Permutation(
            images=tuple(label[canonical[((alpha * a + beta * c) % N, (gamma * a + delta * c) % N)]] for a, c in points)
        )

    s0 = act((0, -1, 1, 0))
    s1 = act((0, -1, 1, 1))
    return PermutationTriple(s0=s0, s1=s1, sinf=act((1, -1, 0, 1)))
