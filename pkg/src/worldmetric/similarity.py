"""Normalized similarity between world-states and distance-to-probability maps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .estimators import EstimatorId, estimate_conditional_k, estimate_k, resolve
from .worldstate import BitString

# Compression-based normalized distances can overshoot 1 slightly.
EPS_EST = 0.2


@dataclass(frozen=True)
class SimilarityScore:
    value: float
    estimator: EstimatorId
    k_x: float = 0.0
    k_y: float = 0.0
    k_x_given_y: float = 0.0
    k_y_given_x: float = 0.0


def similarity(x: BitString, y: BitString, estimator: EstimatorId | str | None = None) -> SimilarityScore:
    """max(K(x|y), K(y|x)) / max(K(x), K(y)); 0 for identical, ~1 for unrelated."""
    if not x.length and not y.length:
        raise ValueError("similarity is undefined for two empty strings")
    e = resolve(estimator)
    kx = estimate_k(x, e).bits
    ky = estimate_k(y, e).bits
    kxy = estimate_conditional_k(x, y, e).bits
    kyx = estimate_conditional_k(y, x, e).bits
    value = max(kxy, kyx) / max(kx, ky)
    return SimilarityScore(value, e, kx, ky, kxy, kyx)


def _exp_neg(d: float) -> float:
    return math.exp(-d)


CONVERSIONS: dict[str, Callable[[float], float]] = {
    "exp": _exp_neg,
    "inverse": lambda d: 1.0 / (1.0 + d),
}


@dataclass(frozen=True)
class ProbabilityVector:
    entries: tuple[tuple[str, float], ...]

    def as_dict(self) -> dict[str, float]:
        return dict(self.entries)

    def __getitem__(self, key: str) -> float:
        return self.as_dict()[key]


def to_probabilities(distances: Iterable[tuple[str, float]] | Sequence[float],
                     conversion: str = "exp") -> ProbabilityVector:
    """Map distances to a normalized distribution, smaller distance = larger mass.

    Accepts ``(id, distance)`` pairs or bare distances (ids become their
    positions).  The conversion must be strictly decreasing; ``exp`` applies
    ``exp(-d)``.
    """
    items = list(distances)
    if not items:
        raise ValueError("need at least one distance")
    if not isinstance(items[0], tuple):
        items = [(str(i), d) for i, d in enumerate(items)]
    try:
        f = CONVERSIONS[conversion]
    except KeyError:
        raise ValueError(f"unknown conversion {conversion!r}") from None
    for key, d in items:
        if not math.isfinite(d):
            raise ValueError(f"distance for {key!r} is not finite")
    # shift by the minimum so exp never underflows to an all-zero vector
    shift = min(d for _, d in items) if conversion == "exp" else 0.0
    raw = [(key, f(d - shift)) for key, d in items]
    total = math.fsum(v for _, v in raw)
    return ProbabilityVector(tuple((key, v / total) for key, v in raw))


def conversion_values(distances: Sequence[float], conversion: str = "exp") -> list[float]:
    """Unnormalized conversion values (exp(-d) by default)."""
    f = CONVERSIONS[conversion]
    return [f(d) for d in distances]
