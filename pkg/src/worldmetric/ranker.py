"""Rank counterfactual world-states against an actual one.

Candidates whose simplest environment differs too much from the actual
world's (``delta_si > tau_env``) are flagged incompatible and left out of
the distribution; the rest are ordered by similarity distance alone and
mapped to probabilities with ``exp(-d)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from . import ctm
from .estimators import EstimatorId, estimate_k, header_constant, resolve
from .rng import generator_bits
from .similarity import similarity, to_probabilities
from .worldstate import BitString, Field, Scenario, WorldState, digitalize

TAU_ENV = 0.25
TIE_EPS = 0.05
CTM_STATES = 2
CTM_STEPS = 1000
# compression gain (bits) still counted as incompressible by limit_check
LIMIT_SLACK = 8


@dataclass(frozen=True)
class RankingRequest:
    actual: WorldState
    candidates: tuple[WorldState, ...]
    estimator: EstimatorId | str | None = None
    ctm_states: int = CTM_STATES
    ctm_steps: int = CTM_STEPS
    tau_env: float = TAU_ENV
    tie_eps: float = TIE_EPS

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not self.candidates:
            raise ValueError("a ranking request needs at least one candidate")
        for name in ("tau_env", "tie_eps"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        object.__setattr__(self, "estimator", resolve(self.estimator))


@dataclass(frozen=True)
class RankedEntry:
    label: str
    distance: float | None
    delta_si: float
    probability: float
    compatible: bool


@dataclass(frozen=True)
class CounterfactualRanking:
    actual: str
    entries: tuple[RankedEntry, ...]
    plurality_classes: tuple[tuple[str, ...], ...]
    parameters: dict = field(default_factory=dict)

    @property
    def compatible(self) -> tuple[RankedEntry, ...]:
        return tuple(e for e in self.entries if e.compatible)

    def entry(self, label: str) -> RankedEntry:
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)


def _distribution(request: RankingRequest) -> ctm.CtmDistribution:
    return ctm.cached_distribution(request.ctm_states, request.ctm_steps)


def plurality_classes(entries: Sequence[tuple[str, float]], tie_eps: float = TIE_EPS) -> list[list[str]]:
    """Group (label, distance) pairs into chains of neighbours at most ``tie_eps`` apart.

    On a line, transitive closure of "gap <= eps" is exactly a split at every
    sorted gap wider than eps.
    """
    ordered = sorted(entries, key=lambda e: (e[1], e[0]))
    classes: list[list[str]] = []
    previous = None
    for label, d in ordered:
        if previous is None or d - previous > tie_eps:
            classes.append([])
        classes[-1].append(label)
        previous = d
    return classes


def rank(request: RankingRequest, distribution: ctm.CtmDistribution | None = None) -> CounterfactualRanking:
    """Score, filter and order the request's candidates.

    ``distribution`` overrides the in-process CTM table (for example one read
    from a cache file); it must match the request's class parameters.
    """
    dist = _distribution(request) if distribution is None else distribution
    if (dist.states, dist.step_budget) != (request.ctm_states, request.ctm_steps):
        raise ValueError(f"distribution is for n={dist.states}, budget={dist.step_budget}; "
                         f"request wants n={request.ctm_states}, budget={request.ctm_steps}")
    x = request.actual.payload
    scored = []
    for cand in request.candidates:
        dsi = ctm.delta_si(x, cand.payload, dist)
        ok = dsi <= request.tau_env
        distance = similarity(x, cand.payload, request.estimator).value if ok else None
        scored.append((cand.label, distance, dsi, ok))

    compatible = [(label, d) for label, d, _, ok in scored if ok]
    probs = to_probabilities(compatible).as_dict() if compatible else {}
    entries = [RankedEntry(label, d, dsi, probs.get(label, 0.0), ok) for label, d, dsi, ok in scored]
    entries.sort(key=lambda e: (not e.compatible, e.distance if e.compatible else 0.0, e.label))
    classes = plurality_classes(compatible, request.tie_eps)
    params = {
        "estimator": str(request.estimator),
        "ctm_states": request.ctm_states,
        "ctm_steps": request.ctm_steps,
        "tau_env": request.tau_env,
        "tie_eps": request.tie_eps,
    }
    return CounterfactualRanking(request.actual.label, tuple(entries),
                                 tuple(tuple(c) for c in classes), params)


def difference_region(actual: WorldState, candidate: WorldState) -> BitString:
    """Candidate bits where it departs from the actual world.

    With matching manifests this is the concatenation of every field whose
    bits differ; otherwise the span from the first to the last differing
    bit (payload length differences count as differences).
    """
    a, c = actual.payload.bits, candidate.payload.bits
    layout = [(s.name, s.offset, s.width) for s in actual.manifest]
    if layout and layout == [(s.name, s.offset, s.width) for s in candidate.manifest] and len(a) == len(c):
        return BitString("".join(c[off:off + w] for _, off, w in layout if a[off:off + w] != c[off:off + w]))
    diffs = [i for i in range(max(len(a), len(c)))
             if i >= len(a) or i >= len(c) or a[i] != c[i]]
    if not diffs:
        return BitString()
    return BitString(c[diffs[0]:diffs[-1] + 1])


def limit_check(actual: WorldState, candidates: Sequence[WorldState],
                estimator: EstimatorId | str | None = None, slack: int = LIMIT_SLACK) -> dict:
    """Flag candidates whose whole difference from the actual world is incompressible."""
    e = resolve(estimator)
    header = header_constant(e)
    rows = []
    for cand in candidates:
        region = difference_region(actual, cand)
        k = estimate_k(region, e).bits
        gain = region.length + header - k
        rows.append({
            "label": cand.label,
            "region_bits": region.length,
            "k": k,
            "gain": gain,
            "at_limit": region.length > 0 and gain <= slack,
        })
    return {"estimator": str(e), "slack": slack, "candidates": rows,
            "at_limit": [r["label"] for r in rows if r["at_limit"]]}


# -- the binary lottery ----------------------------------------------------

DEFAULT_TICKET = (71, 43, 66, 87, 99)
DEFAULT_DRAWN = (71, 43, 66, 87, 100)
# The rest of the world, identical across every lottery outcome.  Without it
# the world is 80 bits and compressor noise of a few bits dominates S.
BACKGROUND_BITS = 1024


def _check_numbers(numbers: Sequence[int], what: str) -> tuple[int, ...]:
    numbers = tuple(numbers)
    if len(numbers) != 5:
        raise ValueError(f"a {what} has five numbers, got {len(numbers)}")
    for v in numbers:
        if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v <= 255:
            raise ValueError(f"{what} numbers must lie in [0, 255], got {v!r}")
    return numbers


def lottery_world(ticket: Sequence[int], drawn: Sequence[int], label: str | None = None,
                  background_bits: int = BACKGROUND_BITS) -> WorldState:
    """World-state holding a fixed background, the ticket (t1..t5) and the draw (n1..n5).

    The background (``rest``) comes from the default generator seed and the
    ticket is the same in every counterfactual, so only the draw tells
    outcomes apart.
    """
    ticket = _check_numbers(ticket, "ticket")
    drawn = _check_numbers(drawn, "draw")
    label = label or "draw-" + "-".join(f"{v:03d}" for v in drawn)
    fields = []
    if background_bits:
        fields.append(Field("rest", "bits", generator_bits(background_bits).bits, width=background_bits))
    fields += [Field(f"t{i + 1}", "uint", v, width=8) for i, v in enumerate(ticket)]
    fields += [Field(f"n{i + 1}", "uint", v, width=8) for i, v in enumerate(drawn)]
    return digitalize(Scenario(label, tuple(fields)))


def lottery_worlds(ticket: Sequence[int], drawn: Sequence[int]) -> list[WorldState]:
    """Every possible result of the final draw.

    The first four numbers cannot be drawn again, leaving 252 of 256 values
    for the last one; the realised draw is one of these worlds.
    """
    head = list(_check_numbers(drawn, "draw")[:4])
    return [lottery_world(ticket, head + [v]) for v in range(256) if v not in head]


def number_distances(numbers: Sequence[int], estimator: EstimatorId | str | None = None) -> list[dict]:
    """Per-number distance: the share of its 8 bits (plus header) a compressor can save."""
    e = resolve(estimator)
    header = header_constant(e)
    rows = []
    for v in numbers:
        bits = BitString.from_int(v, 8)
        k = estimate_k(bits, e).bits
        rows.append({"value": v, "bits": bits.bits, "k": k,
                     "distance": max(0.0, 1.0 - k / (bits.length + header))})
    probs = to_probabilities([(str(i), r["distance"]) for i, r in enumerate(rows)]).as_dict()
    for i, r in enumerate(rows):
        r["exp"] = math.exp(-r["distance"])
        r["probability"] = probs[str(i)]
    return rows


def lottery_demo(ticket: Sequence[int] = DEFAULT_TICKET, drawn: Sequence[int] = DEFAULT_DRAWN,
                 estimator: EstimatorId | str | None = None, ctm_states: int = CTM_STATES,
                 ctm_steps: int = CTM_STEPS, tau_env: float = TAU_ENV,
                 tie_eps: float = TIE_EPS, distribution: ctm.CtmDistribution | None = None) -> dict:
    """Rank every outcome of the last draw against the realised one."""
    ticket = _check_numbers(ticket, "ticket")
    drawn = _check_numbers(drawn, "draw")
    if len(set(drawn)) != 5:
        raise ValueError(f"drawn numbers must be distinct, got {list(drawn)}")
    actual = lottery_world(ticket, drawn)
    worlds = lottery_worlds(ticket, drawn)
    ranking = rank(RankingRequest(actual, tuple(worlds), estimator, ctm_states, ctm_steps,
                                  tau_env, tie_eps), distribution)
    winning = [w.label for w in worlds
               if all(w.region(f"t{i}") == w.region(f"n{i}") for i in range(1, 6))]
    notes = []
    if ticket == drawn:
        notes.append("actual world is the winning world")
    if ticket[:4] == drawn[:4] and ticket[4] != drawn[4]:
        notes.append(f"the ticket wins only in the world whose last number is {ticket[4]}")
    return {
        "ticket": list(ticket),
        "drawn": list(drawn),
        "actual": actual.label,
        "actual_is_winning": ticket == drawn,
        "winning_worlds": winning,
        "notes": notes,
        "numbers": number_distances(drawn, estimator),
        "ticket_numbers": number_distances(ticket, estimator),
        "ranking": ranking,
    }
