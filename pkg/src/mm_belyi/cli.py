"""
Command line entry point: ``mm-belyi <subcommand> [flags] <inputs>``.

Artifacts go to ``--out`` or stdout behind a ``# key value`` reproducibility header; logging goes to stderr.
Exit codes come from the ``exit_code`` of the raised BelyiError (0 on success).
"""

from __future__ import annotations

import argparse
import hashlib
import importlib.metadata
import logging
import sys
from enum import StrEnum
from fractions import Fraction
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, model_validator

from mm_belyi.ansatz import BelyiAnsatz, build_ansatz
from mm_belyi.bigsolve import NumericSolution, multistart_search, refine_solution
from mm_belyi.errors import BelyiError, FormatError, InputError, RoundTripError, SolveError
from mm_belyi.exactnf import CertifiedBelyiMap, certify_map, verify_map
from mm_belyi.formats import (
    format_ansatz,
    format_certified_map,
    format_profile,
    format_solution,
    format_triple,
    is_passport,
    parse_certified_map,
    parse_passport,
    parse_solution,
    parse_triple,
)
from mm_belyi.monodromy import monodromy_triple
from mm_belyi.perm import PermutationTriple, simultaneously_conjugate
from mm_belyi.triple import SubgroupProfile, analyze, profile_from_passport
from mm_belyi.types import MultistartConfig, PrecisionConfig, RecognitionConfig, TrackingConfig

logger = logging.getLogger(__name__)


class Subcommand(StrEnum):
    ANALYZE = "analyze"
    ANSATZ = "ansatz"
    SOLVE = "solve"
    RECOGNIZE = "recognize"
    VERIFY = "verify"
    MONODROMY = "monodromy"
    ROUNDTRIP = "roundtrip"


_INPUTS = {
    Subcommand.ANALYZE: 1,
    Subcommand.ANSATZ: 1,
    Subcommand.SOLVE: 1,
    Subcommand.RECOGNIZE: 2,
    Subcommand.VERIFY: 1,
    Subcommand.MONODROMY: 1,
    Subcommand.ROUNDTRIP: 1,
}


class PipelineConfig(BaseModel):
    """Flags of one run; every numeric knob has a validated range and the default shown by ``--help``."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    subcommand: Subcommand
    inputs: tuple[Path, ...]
    prec_bits: int = Field(default=256, ge=96, le=2**20)
    delta: Fraction = Fraction(99, 100)
    starts: int = Field(default=1000, ge=1, le=10**7)
    seed: int = Field(default=0, ge=0)
    out: Path | None = None
    threads: int = Field(default=1, ge=1, le=256)
    verbosity: int = Field(default=0, ge=0)
    guess: Path | None = None
    max_monodromy_degree: int = Field(default=64, ge=1)
    timeout: float = Field(default=60.0, gt=0)

    @model_validator(mode="after")
    def check_inputs(self) -> PipelineConfig:
        expected = _INPUTS[self.subcommand]
        if len(self.inputs) != expected:
            raise ValueError(f"{self.subcommand} takes {expected} input file(s), got {len(self.inputs)}")
        if not Fraction(1, 4) < self.delta < 1:
            raise ValueError(f"delta {self.delta} not in (1/4, 1)")
        return self

    def precision(self) -> PrecisionConfig:
        return PrecisionConfig(start_bits=min(128, self.prec_bits), target_bits=self.prec_bits, threads=self.threads)

    def multistart(self) -> MultistartConfig:
        return MultistartConfig(threads=self.threads)

    def recognition(self) -> RecognitionConfig:
        return RecognitionConfig(delta=self.delta)

    def tracking(self) -> TrackingConfig:
        return TrackingConfig(max_degree=self.max_monodromy_degree)


class PipelineResult(BaseModel):
    """Exit status and the artifact text (header included); ``partial`` marks artifacts of a failed run."""

    model_config = ConfigDict(frozen=True)

    exit_code: int
    text: str
    partial: bool = False


def _version() -> str:
    try:
        return importlib.metadata.version("mm-belyi")
    except importlib.metadata.PackageNotFoundError:
        return "unknown"


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from e


def header(cfg: PipelineConfig, partial: bool = False) -> str:
    """Reproducibility header: version, subcommand, seed, precision and the sha256 of every input."""
    rows = [
        f"# mm-belyi {_version()}",
        f"# subcommand {cfg.subcommand}",
        f"# seed {cfg.seed}",
        f"# precision_bits {cfg.prec_bits}",
    ]
    for path in cfg.inputs:
        digest = hashlib.sha256(path.read_bytes()).hexdigest() if path.exists() else "missing"
        rows.append(f"# input {path.name} sha256 {digest}")
    rows.append(f"# status {'partial' if partial else 'complete'}")
    return "\n".join(rows) + "\n"


def parse_triple_file(text: str, source: str = "<input>") -> PermutationTriple:
    """Validated triple from a triple file; FormatError names the line, triple invariants raise their InputError."""
    t = parse_triple(text, source)
    logger.debug("%s: triple of degree %d", source, t.n)
    return t


def _load_profile(path: Path) -> tuple[SubgroupProfile, PermutationTriple | None]:
    text = _read(path)
    if is_passport(text):
        return profile_from_passport(*parse_passport(text, str(path))), None
    t = parse_triple_file(text, str(path))
    return analyze(t), t


def _analyze(cfg: PipelineConfig) -> str:
    p, _ = _load_profile(cfg.inputs[0])
    return format_profile(p, build_ansatz(p) if p.genus == 0 else None)


def _ansatz(cfg: PipelineConfig) -> BelyiAnsatz:
    p, _ = _load_profile(cfg.inputs[0])
    return build_ansatz(p)


def _solutions(cfg: PipelineConfig, a: BelyiAnsatz) -> list[NumericSolution]:
    if cfg.guess is not None:
        guess = parse_solution(_read(cfg.guess), a, str(cfg.guess))
        return [refine_solution(guess, cfg.precision())]
    solutions = multistart_search(a, cfg.starts, cfg.seed, cfg.precision(), cfg.multistart())
    if not solutions:
        raise SolveError(f"no solution from {cfg.starts} starts with seed {cfg.seed}")
    return solutions


def _solve(cfg: PipelineConfig) -> str:
    solutions = _solutions(cfg, _ansatz(cfg))
    if len(solutions) > 1:
        logger.info("%d solution classes, writing the first", len(solutions))
    return format_solution(solutions[0])


def _recognize(cfg: PipelineConfig) -> str:
    a = _ansatz(cfg)
    sol = parse_solution(_read(cfg.inputs[1]), a, str(cfg.inputs[1]))
    return format_certified_map(certify_map(sol, cfg.recognition()))


def _load_map(path: Path) -> CertifiedBelyiMap:
    return parse_certified_map(_read(path), str(path))


def _verify(cfg: PipelineConfig) -> str:
    certificate = verify_map(_load_map(cfg.inputs[0]))
    return "\n".join(["verified pass", *(f"{name}: {outcome}" for name, outcome in certificate)]) + "\n"


def _monodromy(cfg: PipelineConfig) -> str:
    return format_triple(monodromy_triple(_load_map(cfg.inputs[0]), cfg.tracking()))


def _roundtrip(cfg: PipelineConfig) -> PipelineResult:
    """Solve, certify, re-parse and verify, then compare the monodromy of each class with the input triple."""
    p, t = _load_profile(cfg.inputs[0])
    if t is None:
        raise FormatError(0, "roundtrip needs a permutation triple, not a passport", str(cfg.inputs[0]))
    a = build_ansatz(p)
    solutions = _solutions(cfg, a)
    first: str | None = None
    for k, sol in enumerate(solutions):
        text = format_certified_map(certify_map(sol, cfg.recognition()))
        reparsed = parse_certified_map(text)
        verify_map(reparsed)
        if format_certified_map(reparsed) != text:
            raise FormatError(0, "certified map does not round-trip through its text format")
        first = first or text
        recovered = monodromy_triple(reparsed, cfg.tracking())
        if simultaneously_conjugate(recovered, t, cfg.timeout) is not None:
            logger.info("solution class %d reproduces the input triple", k)
            report = format_profile(p, a) + f"matched_class {k}\nfield_degree {reparsed.field.degree}\n"
            return PipelineResult(exit_code=0, text=report + text)
        logger.info("solution class %d is a passport-mate, monodromy differs", k)
    if first is None:
        raise RoundTripError(len(solutions))
    return PipelineResult(exit_code=RoundTripError.exit_code, text=first, partial=True)


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """Run one subcommand; BelyiError propagates to the caller."""
    logger.info("%s on %s", cfg.subcommand, ", ".join(map(str, cfg.inputs)))
    match cfg.subcommand:
        case Subcommand.ANALYZE:
            return PipelineResult(exit_code=0, text=_analyze(cfg))
        case Subcommand.ANSATZ:
            return PipelineResult(exit_code=0, text=format_ansatz(_ansatz(cfg)))
        case Subcommand.SOLVE:
            return PipelineResult(exit_code=0, text=_solve(cfg))
        case Subcommand.RECOGNIZE:
            return PipelineResult(exit_code=0, text=_recognize(cfg))
        case Subcommand.VERIFY:
            return PipelineResult(exit_code=0, text=_verify(cfg))
        case Subcommand.MONODROMY:
            return PipelineResult(exit_code=0, text=_monodromy(cfg))
        case Subcommand.ROUNDTRIP:
            return _roundtrip(cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mm-belyi",
        description="Genus-zero Belyi maps of modular subgroups from permutation triples",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("subcommand", choices=[s.value for s in Subcommand])
    parser.add_argument("inputs", nargs="+", type=Path, help="triple/passport file; recognize also takes a solution file")
    parser.add_argument("--prec-bits", type=int, default=256, help="target working precision in bits")
    parser.add_argument("--seed", type=int, default=0, help="multistart random seed")
    parser.add_argument("--starts", type=int, default=1000, help="multistart budget")
    parser.add_argument("--delta", type=Fraction, default=Fraction(99, 100), help="LLL parameter in (1/4, 1)")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for Jacobian columns and multistart")
    parser.add_argument("--out", type=Path, default=None, help="artifact file (stdout when omitted)")
    parser.add_argument("--guess", type=Path, default=None, help="solution file used as the Newton start")
    parser.add_argument("--max-monodromy-degree", type=int, default=64, help="largest degree tracked by monodromy")
    parser.add_argument("--timeout", type=float, default=60.0, help="simultaneous conjugacy search limit in seconds")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug (stderr)")
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        cfg = PipelineConfig(
            subcommand=args.subcommand,
            inputs=tuple(args.inputs),
            prec_bits=args.prec_bits,
            delta=args.delta,
            starts=args.starts,
            seed=args.seed,
            out=args.out,
            threads=args.threads,
            verbosity=args.verbose,
            guess=args.guess,
            max_monodromy_degree=args.max_monodromy_degree,
            timeout=args.timeout,
        )
    except ValueError as e:
        logger.error("invalid arguments: %s", e)  # noqa: TRY400
        return InputError.exit_code
    try:
        result = run_pipeline(cfg)
    except BelyiError as e:
        logger.error("%s: %s", type(e).__name__, e)  # noqa: TRY400
        return e.exit_code
    text = header(cfg, result.partial) + result.text
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        cfg.out.write_text(text)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
