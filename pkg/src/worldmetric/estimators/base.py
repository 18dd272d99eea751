"""Program framing shared by every estimator.

Every estimate is the exact length of a decodable program::

    tag (8 bits) | mode (1 bit) | body

Mode ``0`` stores the input verbatim (the literal table); mode ``1`` stores
the estimator's compressed payload.  The container length is known to the
decoder, so neither mode spends bits on the input length.  The encoder keeps
whichever is shorter, so no estimate ever exceeds ``len(x) + 9``.
"""

from __future__ import annotations

from dataclasses import dataclass

TAG_BITS = 8
MODE_BITS = 1
HEADER_BITS = TAG_BITS + MODE_BITS


class EstimatorError(ValueError):
    """Unknown estimator name or version."""


@dataclass(frozen=True)
class EstimatorId:
    name: str
    version: int = 1

    def __str__(self) -> str:
        return f"{self.name}/v{self.version}"


@dataclass(frozen=True)
class ComplexityEstimate:
    """Upper-bound program length in bits for one input string."""

    bits: float
    estimator: EstimatorId
    input_length: int

    def __post_init__(self):
        if self.bits < 0:
            raise ValueError("complexity estimate cannot be negative")
