"""Bit-level LZ77 with an unbounded window.

The payload alternates literal runs and back-references::

    delta(r + 1) | r raw bits | offset - 1 | delta(length - 1) | delta(r' + 1) | ...

The offset field is ceil(log2(pos)) bits wide, where ``pos`` is the number
of bits decoded so far, so a reference can reach anywhere in the history.
References may overlap their own output, which makes periodic strings
cheap.  Parsing stops when the payload is exhausted, after either a literal
run or a reference.

This is the default estimator: unlike RLE, LZ78 and order-0 coding it can
copy long repeated blocks, which is what conditional estimates need.
"""

from __future__ import annotations

from functools import lru_cache

from ..codes import BitReader, delta_encode, delta_length, uint_encode, width_for

NAME = "LZ77"
VERSION = 1
TAG = 0x41

MIN_MATCH = 2


def _worth_taking(pos: int) -> int:
    """Shortest reference at ``pos`` that is cheaper than coding the bits literally."""
    return _worth_taking_for_width(width_for(pos))


@lru_cache(maxsize=None)
def _worth_taking_for_width(w: int) -> int:
    length = MIN_MATCH
    # reference cost plus one bit for the (possibly empty) literal run after it
    while length <= w + delta_length(length - MIN_MATCH + 1) + 1:
        length += 1
    return length


def _extend(s: str, i: int, j: int, have: int) -> int:
    """Length of the common run of s[j:] and s[i:], knowing the first ``have`` bits agree."""
    limit = len(s) - i
    good, step = have, max(1, have)
    while good < limit:
        trial = min(limit, good + step)
        if s[j + good:j + trial] == s[i + good:i + trial]:
            good = trial
            step *= 2
        elif step == 1:
            break
        else:
            step //= 2
    return good


def _longest_by_find(s: str, i: int, need: int) -> tuple[int, int]:
    if i + need > len(s):
        return 0, 0
    src = s.find(s[i:i + need], 0, i - 1 + need)
    if src < 0:
        return 0, 0
    return _extend(s, i, src, need), src


class _Matcher:
    """Finds the longest earlier occurrence of s[i:...] (overlap allowed).

    Candidates come from an index of GRAM-bit substrings by start position,
    filled lazily up to the current position; short searches near the start
    of the string fall back to ``str.find``.
    """

    GRAM = 16

    def __init__(self, s: str):
        self.s = s
        self.index: dict[str, list[int]] = {}
        self.filled = 0

    def longest(self, i: int, need: int) -> tuple[int, int]:
        s, k = self.s, self.GRAM
        if need < k:
            return _longest_by_find(s, i, need)
        if i + need > len(s):
            return 0, 0
        stop = min(i, len(s) - k + 1)
        for j in range(self.filled, stop):
            self.index.setdefault(s[j:j + k], []).append(j)
        self.filled = max(self.filled, stop)
        best, src = 0, 0
        target = s[i:i + need]
        for j in self.index.get(s[i:i + k], ()):
            if s[j:j + need] != target:
                continue
            length = _extend(s, i, j, need)
            if length > best:
                best, src = length, j
                if i + best == len(s):
                    break
        return best, src


def parse(bits: str) -> list[tuple[str, tuple[int, int] | None]]:
    """Greedy parse into (literal run, (offset, length) or None) pairs."""
    tokens = []
    matcher = _Matcher(bits)
    literal_start = 0
    i = 1
    n = len(bits)
    while i < n:
        length, src = matcher.longest(i, _worth_taking(i))
        if length:
            tokens.append((bits[literal_start:i], (i - src, length)))
            i += length
            literal_start = i
        else:
            i += 1
    if literal_start < n:
        tokens.append((bits[literal_start:], None))
    return tokens


def encode(bits: str) -> str | None:
    if not bits:
        return None
    out = []
    pos = 0
    for literal, ref in parse(bits):
        out.append(delta_encode(len(literal) + 1))
        out.append(literal)
        pos += len(literal)
        if ref is not None:
            offset, length = ref
            out.append(uint_encode(offset - 1, width_for(pos)))
            out.append(delta_encode(length - MIN_MATCH + 1))
            pos += length
    return "".join(out)


def decode(payload: str) -> str:
    reader = BitReader(payload)
    out = []
    pos = 0
    while not reader.exhausted():
        literal = reader.read(reader.read_delta() - 1)
        out.append(literal)
        pos += len(literal)
        if reader.exhausted():
            break
        if pos == 0:
            raise ValueError("back-reference before any output")
        offset = reader.read_uint(width_for(pos)) + 1
        length = reader.read_delta() + MIN_MATCH - 1
        text = "".join(out)
        # an overlapping copy repeats the last `offset` bits
        period = text[pos - offset:]
        out = [text, (period * (length // offset + 1))[:length]]
        pos += length
    return "".join(out)
