"""Type definitions and configuration models for mm-belyi library."""

from __future__ import annotations

from fractions import Fraction
from typing import Any

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

type Vector = npt.NDArray[Any]
"""1-d coefficient or value array: dtype object holding mpmath numbers, or complex128 for the double-precision stage."""

type Matrix = npt.NDArray[Any]
"""2-d array with the same dtype convention as Vector."""

type IntPoly = tuple[int, ...]
"""Integer polynomial, constant term first."""

type RatPoly = tuple[Fraction, ...]
"""Rational polynomial, constant term first."""

DOUBLE = np.dtype(np.complex128)


class PrecisionConfig(BaseModel):
    """
    Precision ladder of the Newton solver.

    Residual norms are relative (divided by max(1, max |coefficient of p3|)). A level escalates once the
    residual drops below 2^(-escalate_exponent * bits); the last level accepts below 2^(-accept_exponent * bits).
    """

    model_config = ConfigDict(frozen=True)

    start_bits: int = Field(default=128, ge=53, le=2**20)
    target_bits: int = Field(default=256, ge=53, le=2**20)
    escalation: int = Field(default=2, ge=2)
    damping_floor: float = Field(default=2.0**-20, gt=0, lt=1)
    max_iterations: int = Field(default=100, ge=1)
    accept_exponent: float = Field(default=0.9, gt=0, lt=1)
    escalate_exponent: float = Field(default=0.4, gt=0, lt=1)
    threads: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def check_ladder(self) -> PrecisionConfig:
        if self.start_bits > self.target_bits:
            raise ValueError(f"start_bits {self.start_bits} > target_bits {self.target_bits}")
        if self.escalate_exponent >= self.accept_exponent:
            raise ValueError("escalate_exponent must be below accept_exponent")
        return self

    def levels(self) -> list[int]:
        """Precision levels from start to target, each `escalation` times the previous one."""
        result = [self.start_bits]
        while result[-1] < self.target_bits:
            result.append(min(self.target_bits, result[-1] * self.escalation))
        return result


class MultistartConfig(BaseModel):
    """Random-start search. ``radius`` None means 1000 in hauptmodul gauge and 2 in affine gauge."""

    model_config = ConfigDict(frozen=True)

    radius: float | None = Field(default=None, gt=0)
    low_iterations: int = Field(default=40, ge=1)
    low_tolerance: float = Field(default=1e-10, gt=0)
    dedup_bits: int = Field(default=20, ge=1)
    separation: float = Field(default=1e-6, gt=0)
    max_classes: int | None = Field(default=None, ge=1)
    threads: int = Field(default=1, ge=1)


class RecognitionConfig(BaseModel):
    """Lattice recognition and exact certification."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    delta: Fraction = Fraction(99, 100)
    guard_bits: int = Field(default=16, ge=1)
    first_scale_bits: int = Field(default=64, ge=8)
    min_bits: int = Field(default=96, ge=32)
    max_field_degree: int = Field(default=48, ge=1)
    max_height_bits: int | None = Field(default=None, ge=1)
    probe_coefficients: int = Field(default=8, ge=1)

    @model_validator(mode="after")
    def check_delta(self) -> RecognitionConfig:
        if not Fraction(1, 4) < self.delta < 1:
            raise ValueError(f"delta {self.delta} not in (1/4, 1)")
        return self


class TrackingConfig(BaseModel):
    """
    Fiber continuation along the three standard loops.

    The base point lies on the negative real axis inside (-1728, 0); loops around 0 and 1728 stay within
    |y| = |base_point| and |y - 1728| = 1728 - |base_point|, the loop around infinity is a circle of radius 6912.
    """

    model_config = ConfigDict(frozen=True)

    base_point: float = -1000.0
    bits: int = Field(default=128, ge=53)
    max_degree: int = Field(default=64, ge=1)
    initial_step: float = Field(default=1 / 64, gt=0, le=1)
    min_step: float = Field(default=2.0**-40, gt=0)
    clean_steps_to_grow: int = Field(default=4, ge=1)
    corrector_iterations: int = Field(default=6, ge=1)

    @model_validator(mode="after")
    def check_base_point(self) -> TrackingConfig:
        if not -1728 < self.base_point < 0:
            raise ValueError(f"base point {self.base_point} not in (-1728, 0)")
        return self
