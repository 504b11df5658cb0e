"""
Custom exceptions for mm-belyi library.

Every failure of the pipeline maps onto one of five families (input, solve, recognition,
verification, round trip). Each family carries the process exit code used by the CLI.
"""

from collections.abc import Sequence


class BelyiError(Exception):
    """Base class for all mm-belyi errors."""

    exit_code = 1


class InputError(BelyiError):
    """Invalid combinatorial input or malformed file."""

    exit_code = 2


class DegreeMismatchError(InputError):
    """
    Raised when permutations of different degrees are combined.

    Attributes:
        left: degree of the first operand
        right: degree of the second operand
    """

    def __init__(self, left: int, right: int) -> None:
        self.left = left
        self.right = right
        super().__init__(f"degree mismatch: {left} != {right}")


class NotBijectionError(InputError):
    """Raised when an image list is not a bijection on {1..n}."""

    def __init__(self, images: Sequence[int]) -> None:
        self.images = tuple(images)
        super().__init__(f"images are not a bijection on 1..{len(self.images)}")


class EmptyGeneratorsError(InputError):
    """Raised when a group is requested from an empty generator list on more than one point."""

    def __init__(self, n: int) -> None:
        self.n = n
        super().__init__(f"empty generator list on {n} points")


class OrderViolationError(InputError):
    """
    Raised when a generator of a triple has the wrong order.

    Attributes:
        generator: "s0" or "s1"
        expected: order that must divide
        actual: order found
    """

    def __init__(self, generator: str, expected: int, actual: int) -> None:
        self.generator = generator
        self.expected = expected
        self.actual = actual
        super().__init__(f"order of {generator} is {actual}, must divide {expected}")


class NotTransitiveError(InputError):
    """
    Raised when the generated group is not transitive.

    Attributes:
        orbits: orbit partition of {1..n}
    """

    def __init__(self, orbits: Sequence[Sequence[int]]) -> None:
        self.orbits = tuple(tuple(o) for o in orbits)
        super().__init__(f"group is not transitive, orbits: {[list(o) for o in self.orbits]}")


class GenusError(InputError):
    """Raised when the genus is not a nonnegative integer, or is not zero where required."""

    def __init__(self, genus: object, reason: str) -> None:
        self.genus = genus
        super().__init__(f"genus {genus}: {reason}")


class FormatError(InputError):
    """
    Raised when a text artifact cannot be parsed.

    Attributes:
        line: 1-based line number (0 when the error concerns the whole file)
    """

    def __init__(self, line: int, message: str, source: str = "<input>") -> None:
        self.line = line
        self.source = source
        super().__init__(f"{source}:{line}: {message}")


class DegreeLimitError(InputError):
    """Raised when a map is too large for monodromy continuation under the configured limit."""

    def __init__(self, degree: int, limit: int) -> None:
        self.degree = degree
        self.limit = limit
        super().__init__(f"degree {degree} exceeds the monodromy limit {limit}")


class SolveError(BelyiError):
    """Numerical solving failed."""

    exit_code = 3


class DivergenceError(SolveError):
    """Raised when damping reaches its floor without decreasing the residual."""

    def __init__(self, residual: object, bits: int) -> None:
        self.residual = residual
        self.bits = bits
        super().__init__(f"residual not decreased at damping floor (residual {residual}, {bits} bits)")


class RankDeficiencyError(SolveError):
    """
    Raised when a linear system is rank deficient at working precision.

    Attributes:
        rank: estimated numerical rank (or None when unknown)
        size: number of columns
    """

    def __init__(self, size: int, rank: int | None = None) -> None:
        self.size = size
        self.rank = rank
        super().__init__(f"matrix is rank deficient (rank {rank if rank is not None else '?'} < {size})")


class IterationBudgetError(SolveError):
    """Raised when Newton exhausts its iteration budget at some precision level."""

    def __init__(self, bits: int, iterations: int) -> None:
        self.bits = bits
        self.iterations = iterations
        super().__init__(f"no convergence after {iterations} iterations at {bits} bits")


class PrecisionUnderflowError(SolveError):
    """Raised when the requested output precision exceeds the precision of the input data."""

    def __init__(self, requested: int, available: int) -> None:
        self.requested = requested
        self.available = available
        super().__init__(f"requested {requested} bits from {available}-bit input")


class ClusteredRootsError(SolveError):
    """Raised when fiber roots are not separated, i.e. the base value is too close to a critical value."""

    def __init__(self, separation: object, bound: object) -> None:
        self.separation = separation
        self.bound = bound
        super().__init__(f"fiber roots clustered: separation {separation} below {bound}")


class PathTrackingError(SolveError):
    """Raised when root continuation cannot proceed above the minimal step size."""

    def __init__(self, loop: str, t: object) -> None:
        self.loop = loop
        self.t = t
        super().__init__(f"path tracking failed on loop {loop} at t={t}")


class ConjugacySearchTimeoutError(SolveError):
    """Raised when the simultaneous conjugacy search exceeds its time limit."""

    def __init__(self, seconds: float) -> None:
        self.seconds = seconds
        super().__init__(f"conjugacy search exceeded {seconds} s")


class RecognitionError(BelyiError):
    """Algebraic recognition failed."""

    exit_code = 4


class NoRelationError(RecognitionError):
    """
    Raised when lattice reduction finds no relation within bounds.

    Attributes:
        label: which value was being recognized
        bits: working precision
        degree: degree bound used
    """

    def __init__(self, label: str, bits: int, degree: int) -> None:
        self.label = label
        self.bits = bits
        self.degree = degree
        super().__init__(f"no relation for {label} at {bits} bits, degree bound {degree}")


class DependentRowsError(RecognitionError):
    """Raised when lattice basis rows are linearly dependent."""

    def __init__(self, row: int) -> None:
        self.row = row
        super().__init__(f"lattice row {row} depends on the previous rows")


class InsufficientPrecisionError(RecognitionError):
    """Raised when roots cannot be separated or recognized at the given precision."""

    def __init__(self, bits: int, reason: str) -> None:
        self.bits = bits
        super().__init__(f"precision {bits} bits insufficient: {reason}")


class VerificationError(BelyiError):
    """Exact verification failed."""

    exit_code = 5


class IdentityFailureError(VerificationError):
    """Raised when an exact predicate of a certified map fails."""

    def __init__(self, predicate: str, detail: str = "") -> None:
        self.predicate = predicate
        self.detail = detail
        super().__init__(f"predicate {predicate} failed" + (f": {detail}" if detail else ""))


class PoleError(VerificationError):
    """Raised when a Moebius transform hits its pole on a coefficient."""

    def __init__(self, index: int) -> None:
        self.index = index
        super().__init__(f"coefficient {index} is the pole of the transform")


class MissingEmbeddingError(VerificationError):
    """Raised when a subfield check has no verified embedding."""

    def __init__(self) -> None:
        super().__init__("no verified embedding of the subfield supplied")


class FieldArithmeticError(VerificationError):
    """Raised on division by zero or when the defining polynomial turns out reducible."""


class RoundTripError(BelyiError):
    """Raised when the recovered monodromy triple is not conjugate to the input triple."""

    exit_code = 6

    def __init__(self, classes: int) -> None:
        self.classes = classes
        super().__init__(f"none of {classes} solution classes reproduces the input triple")
