"""Coding Theorem Method over small two-symbol Turing machines.

Machine model
-------------
* two symbols, blank ``0``; a one-way tape starting at cell 0;
* ``n`` working states plus HALT; the start state is 0;
* every transition writes, moves one cell and changes state, halting
  transitions included; moving left of cell 0 crashes the machine and it
  contributes nothing;
* the output of a halted machine is the content of every cell the head
  visited, read left to right.

Machines are indexed in mixed radix over their ``2n`` transition entries,
entry ``(state, symbol)`` at position ``2 * state + symbol`` (most
significant first).  Each entry digit ``d`` in ``[0, 4(n + 1))`` unpacks as
``write = d // (2(n + 1))``, ``move = d // (n + 1) % 2`` (0 = L, 1 = R),
``next = d % (n + 1)`` with ``next == n`` meaning HALT.

Canonical encoding
------------------
``gamma(n)`` followed by each entry as ``write | move | next`` with
``next`` in ``ceil(log2(n + 1))`` bits.  Every machine of a class has the
same encoding length, and the machine index orders machines by the integer
value of their encoding.

A world-state ``x`` is produced by a machine when the halted tape, read for
``len(x)`` cells, equals ``x`` and everything beyond is blank.  Visited
cells past ``len(x)`` must therefore be zero, and cells of ``x`` past the
visited region must be zero too.
"""

from __future__ import annotations

import hashlib
import random
import struct
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .codes import gamma_encode, gamma_length, uint_encode, width_for
from .worldstate import BitString

DEFAULT_CAP = 1 << 26
# The literal-table program: one flag bit plus the string itself.
LITERAL_OVERHEAD = 1
FORMAT_VERSION = 1
MAGIC = b"WMCTM"
_MODEL = "tm/2-symbol/one-way/blank0/halt-moves/crash-left/visited-output/gamma+fixed"


class CtmCapError(ValueError):
    """The requested machine class is larger than the enumeration cap."""


class CacheError(ValueError):
    """A distribution cache file is truncated, corrupt or for another class."""


@dataclass(frozen=True)
class MachineSpec:
    """A complete transition table.

    ``table[2 * state + symbol]`` is ``(write, move, next)``; ``next ==
    states`` means HALT and ``move`` is 0 for left, 1 for right.
    """

    states: int
    table: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.states < 1:
            raise ValueError("a machine needs at least one state")
        if len(self.table) != 2 * self.states:
            raise ValueError(f"{self.states}-state table needs {2 * self.states} entries, "
                             f"got {len(self.table)}")
        for write, move, nxt in self.table:
            if write not in (0, 1) or move not in (0, 1) or not 0 <= nxt <= self.states:
                raise ValueError(f"bad transition entry {(write, move, nxt)}")

    @classmethod
    def from_index(cls, states: int, index: int) -> MachineSpec:
        radix = 4 * (states + 1)
        digits = []
        for _ in range(2 * states):
            index, d = divmod(index, radix)
            digits.append(d)
        if index:
            raise ValueError("machine index outside its class")
        digits.reverse()
        return cls(states, tuple(_unpack(d, states) for d in digits))

    @property
    def index(self) -> int:
        radix = 4 * (self.states + 1)
        value = 0
        for write, move, nxt in self.table:
            value = value * radix + (write * 2 + move) * (self.states + 1) + nxt
        return value

    def encoding(self) -> str:
        width = width_for(self.states + 1)
        parts = [gamma_encode(self.states)]
        for write, move, nxt in self.table:
            parts.append(f"{write}{move}{uint_encode(nxt, width)}")
        return "".join(parts)

    @property
    def encoding_bits(self) -> int:
        return encoding_bits(self.states)

    def run(self, step_budget: int) -> str | None:
        return _run(self.table, self.states, step_budget)


def _unpack(d: int, states: int) -> tuple[int, int, int]:
    return d // (2 * (states + 1)), d // (states + 1) % 2, d % (states + 1)


def encoding_bits(states: int) -> int:
    """K(w) for every machine of the ``states``-state class."""
    return gamma_length(states) + 2 * states * (2 + width_for(states + 1))


def class_size(states: int) -> int:
    return (4 * (states + 1)) ** (2 * states)


def class_hash(states: int, step_budget: int) -> bytes:
    text = f"{_MODEL}|v{FORMAT_VERSION}|n={states}|budget={step_budget}"
    return hashlib.sha256(text.encode()).digest()


def _run(table, states: int, step_budget: int) -> str | None:
    tape = bytearray(1)
    pos = state = 0
    for _ in range(step_budget):
        write, move, nxt = table[2 * state + tape[pos]]
        tape[pos] = write
        if move:
            pos += 1
            if pos == len(tape):
                tape.append(0)
        else:
            pos -= 1
            if pos < 0:
                return None
        if nxt == states:
            return tape.decode("latin-1").translate(_TO_TEXT)
        state = nxt
    return None


_TO_TEXT = str.maketrans({"\x00": "0", "\x01": "1"})


def _blank_key(bits: str) -> str:
    """Tape content up to its last 1; equal keys mean equal halted tapes."""
    return bits.rstrip("0")


@dataclass
class CtmDistribution:
    """Outputs of one machine class with their exact algorithmic weights.

    ``weights`` maps an output string to the sum of ``2**-K(w)`` over every
    machine that halts with that output; ``first_machine`` keeps the lowest
    machine index per output.
    """

    states: int
    step_budget: int
    weights: dict[str, Fraction]
    first_machine: dict[str, int]
    machines: int
    halting: int
    complete: bool = True
    _by_tape: dict = field(default=None, init=False, repr=False, compare=False)

    def __eq__(self, other):
        if not isinstance(other, CtmDistribution):
            return NotImplemented
        return (self.states, self.step_budget, self.weights, self.first_machine,
                self.machines, self.halting, self.complete) == (
                other.states, other.step_budget, other.weights, other.first_machine,
                other.machines, other.halting, other.complete)

    @property
    def encoding_bits(self) -> int:
        return encoding_bits(self.states)

    def export(self) -> dict[str, float]:
        return {k: float(v) for k, v in self.weights.items()}

    def tape_index(self) -> dict[str, tuple[int, Fraction]]:
        """Blank-stripped tape -> (lowest machine index, summed weight)."""
        if self._by_tape is None:
            index = {}
            for out, weight in self.weights.items():
                key = _blank_key(out)
                first = self.first_machine[out]
                if key in index:
                    best, total = index[key]
                    index[key] = (min(best, first), total + weight)
                else:
                    index[key] = (first, weight)
            self._by_tape = index
        return self._by_tape


def _tally(states: int, step_budget: int, indices: Iterable[int]):
    weights: dict[str, int] = defaultdict(int)
    first: dict[str, int] = {}
    halting = 0
    radix = 4 * (states + 1)
    entries = [_unpack(d, states) for d in range(radix)]
    width = 2 * states
    for index in indices:
        digits = []
        rest = index
        for _ in range(width):
            rest, d = divmod(rest, radix)
            digits.append(entries[d])
        digits.reverse()
        # exact shortcut: with no HALT entry the machine cannot halt
        if all(e[2] != states for e in digits):
            continue
        out = _run(digits, states, step_budget)
        if out is None:
            continue
        halting += 1
        weights[out] += 1
        if out not in first or index < first[out]:
            first[out] = index
    return dict(weights), first, halting


def _merge(parts, states: int):
    unit = Fraction(1, 1 << encoding_bits(states))
    counts: dict[str, int] = defaultdict(int)
    first: dict[str, int] = {}
    halting = 0
    for w, f, h in parts:
        halting += h
        for out, c in w.items():
            counts[out] += c
        for out, i in f.items():
            if out not in first or i < first[out]:
                first[out] = i
    return {out: c * unit for out, c in counts.items()}, first, halting


def _tally_range(args):
    states, step_budget, start, stop = args
    return _tally(states, step_budget, range(start, stop))


def enumerate_class(states: int, step_budget: int, *, cap: int = DEFAULT_CAP,
                    order: Sequence[int] | None = None, workers: int = 1) -> CtmDistribution:
    """Run every machine of the class and accumulate exact output weights.

    ``order`` replays a permutation of the machine indices (the result does
    not depend on it); ``workers > 1`` partitions the index range across
    processes.
    """
    if states < 1:
        raise ValueError("states must be >= 1")
    if step_budget < 1:
        raise ValueError("step_budget must be >= 1")
    total = class_size(states)
    if total > cap:
        raise CtmCapError(f"{states}-state class has {total} machines, above the cap of {cap}")
    if order is not None:
        parts = [_tally(states, step_budget, order)]
    elif workers > 1:
        bounds = [total * k // workers for k in range(workers + 1)]
        jobs = [(states, step_budget, a, b) for a, b in zip(bounds, bounds[1:])]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_tally_range, jobs))
    else:
        parts = [_tally(states, step_budget, range(total))]
    weights, first, halting = _merge(parts, states)
    return CtmDistribution(states, step_budget, weights, first, total, halting)


def shuffled_order(states: int, seed: int = 0) -> list[int]:
    order = list(range(class_size(states)))
    random.Random(seed).shuffle(order)
    return order


@lru_cache(maxsize=8)
def cached_distribution(states: int, step_budget: int) -> CtmDistribution:
    """Process-wide memo of :func:`enumerate_class` for repeated ranking calls."""
    return enumerate_class(states, step_budget)


@dataclass(frozen=True)
class EnvironmentMatch:
    """The simplest environment found for a string.

    ``machine`` is None for the literal-table program; ``program_bits`` is
    K(w) for a machine, ``len(x) + LITERAL_OVERHEAD`` for the literal.
    """

    machine: MachineSpec | None
    program_bits: int
    fallback: bool

    @property
    def weight(self) -> Fraction:
        return Fraction(1, 1 << self.program_bits)


def simplest_environment(x: BitString, dist: CtmDistribution) -> EnvironmentMatch:
    """Highest-weight program producing ``x``.

    Among enumerated machines whose halted tape reads as ``x`` the lowest
    index wins (all share one encoding length).  The literal table is used
    when no machine produces ``x`` or when it is strictly shorter.
    """
    literal = x.length + LITERAL_OVERHEAD
    hit = dist.tape_index().get(_blank_key(x.bits))
    if hit is None or dist.encoding_bits > literal:
        return EnvironmentMatch(None, literal, True)
    return EnvironmentMatch(MachineSpec.from_index(dist.states, hit[0]), dist.encoding_bits, False)


def algorithmic_probability(x: BitString, dist: CtmDistribution) -> Fraction:
    """Total weight of enumerated machines producing ``x`` (not used for ranking)."""
    hit = dist.tape_index().get(_blank_key(x.bits))
    return hit[1] if hit else Fraction(0)


def delta_si(x: BitString, y: BitString, dist: CtmDistribution) -> float:
    """Gap between the simplest environments of two strings, in [0, 1).

    ``|log2 weight(x) - log2 weight(y)|`` divided by the longest literal
    program; 0 when both are generated equally simply.
    """
    bx = simplest_environment(x, dist).program_bits
    by = simplest_environment(y, dist).program_bits
    return abs(bx - by) / (max(x.length, y.length) + LITERAL_OVERHEAD)


# -- cache file ------------------------------------------------------------

_HEAD = struct.Struct(">5sHHI32sQQI")
_REC = struct.Struct(">I")


def dumps(dist: CtmDistribution) -> bytes:
    """Serialise a distribution; records sorted by (length, bits)."""
    out = bytearray(_HEAD.pack(MAGIC, FORMAT_VERSION, dist.states, dist.step_budget,
                               class_hash(dist.states, dist.step_budget),
                               dist.machines, dist.halting, len(dist.weights)))
    for bits in sorted(dist.weights, key=lambda b: (len(b), b)):
        weight = dist.weights[bits]
        numerator, denominator = weight.numerator, weight.denominator
        exponent = denominator.bit_length() - 1
        if denominator != 1 << exponent:
            raise ValueError("weight is not dyadic")
        packed = int(bits, 2).to_bytes((len(bits) + 7) // 8, "big") if bits else b""
        num = numerator.to_bytes(max(1, (numerator.bit_length() + 7) // 8), "big")
        out += _REC.pack(len(bits)) + packed
        out += struct.pack(">H", len(num)) + num
        out += struct.pack(">IQ", exponent, dist.first_machine[bits])
    out += hashlib.sha256(out).digest()
    return bytes(out)


def loads(data: bytes, states: int | None = None, step_budget: int | None = None) -> CtmDistribution:
    if len(data) < _HEAD.size + 32:
        raise CacheError("cache file truncated")
    body, digest = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CacheError("cache checksum mismatch (truncated or corrupt)")
    magic, version, n, budget, chash, machines, halting, count = _HEAD.unpack_from(body)
    if magic != MAGIC or version != FORMAT_VERSION:
        raise CacheError("not a distribution cache of this format version")
    if chash != class_hash(n, budget):
        raise CacheError("machine-class hash mismatch")
    if (states is not None and states != n) or (step_budget is not None and step_budget != budget):
        raise CacheError(f"cache holds class n={n}, budget={budget}")
    weights, first = {}, {}
    pos = _HEAD.size
    try:
        for _ in range(count):
            (length,) = _REC.unpack_from(body, pos)
            pos += _REC.size
            nbytes = (length + 7) // 8
            bits = format(int.from_bytes(body[pos:pos + nbytes], "big"), f"0{length}b") if length else ""
            pos += nbytes
            (numlen,) = struct.unpack_from(">H", body, pos)
            pos += 2
            numerator = int.from_bytes(body[pos:pos + numlen], "big")
            pos += numlen
            exponent, index = struct.unpack_from(">IQ", body, pos)
            pos += 12
            weights[bits] = Fraction(numerator, 1 << exponent)
            first[bits] = index
    except struct.error:
        raise CacheError("cache records truncated") from None
    if pos != len(body):
        raise CacheError("trailing bytes after cache records")
    return CtmDistribution(n, budget, weights, first, machines, halting)


def cache_path(directory: str | Path, states: int, step_budget: int) -> Path:
    """Content-addressed file name for a class."""
    tag = class_hash(states, step_budget).hex()[:12]
    return Path(directory) / f"ctm-n{states}-s{step_budget}-{tag}.bin"


def write_cache(dist: CtmDistribution, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(dumps(dist))
    tmp.replace(path)
    return path


def read_cache(path: str | Path, states: int | None = None,
               step_budget: int | None = None) -> CtmDistribution:
    return loads(Path(path).read_bytes(), states, step_budget)
