"""Order-0 adaptive binary arithmetic coder.

The model starts from counts (1, 1) and adds one per coded bit, so the
ideal code length of a string with ``k0`` zeros and ``k1`` ones is
``log2((n + 1)! / (k0! k1!))``.  The integer coder (Witten-Neal-Cleary
scaling with pending underflow bits) gets within two bits of that figure.
Payload: gamma(n + 1) followed by the arithmetic code.
"""

from __future__ import annotations

from ..codes import BitReader, gamma_encode

NAME = "ENTROPY0"
VERSION = 1
TAG = 0x31

PRECISION = 48
FULL = 1 << PRECISION
HALF = FULL >> 1
QUARTER = HALF >> 1
MASK = FULL - 1


def _split(low: int, high: int, c0: int, c1: int) -> int:
    """Last value of the '0' sub-interval."""
    span = high - low + 1
    return low + span * c0 // (c0 + c1) - 1


def encode(bits: str) -> str | None:
    if not bits:
        return None
    out = [gamma_encode(len(bits) + 1)]
    low, high, pending = 0, MASK, 0
    c0 = c1 = 1

    def emit(bit: str):
        nonlocal pending
        out.append(bit)
        if pending:
            out.append(("1" if bit == "0" else "0") * pending)
            pending = 0

    for b in bits:
        mid = _split(low, high, c0, c1)
        if b == "0":
            high = mid
            c0 += 1
        else:
            low = mid + 1
            c1 += 1
        while True:
            if high < HALF:
                emit("0")
            elif low >= HALF:
                emit("1")
                low -= HALF
                high -= HALF
            elif low >= QUARTER and high < HALF + QUARTER:
                pending += 1
                low -= QUARTER
                high -= QUARTER
            else:
                break
            low = (low << 1) & MASK
            high = ((high << 1) & MASK) | 1
    pending += 1
    emit("0" if low < QUARTER else "1")
    return "".join(out)


def decode(payload: str) -> str:
    reader = BitReader(payload)
    n = reader.read_gamma() - 1
    code_bits = payload[reader.pos:]
    cursor = 0

    def next_bit() -> int:
        nonlocal cursor
        bit = 1 if cursor < len(code_bits) and code_bits[cursor] == "1" else 0
        cursor += 1
        return bit

    value = 0
    for _ in range(PRECISION):
        value = (value << 1) | next_bit()
    low, high = 0, MASK
    c0 = c1 = 1
    out = []
    for _ in range(n):
        mid = _split(low, high, c0, c1)
        if value <= mid:
            out.append("0")
            high = mid
            c0 += 1
        else:
            out.append("1")
            low = mid + 1
            c1 += 1
        while True:
            if high < HALF:
                pass
            elif low >= HALF:
                low -= HALF
                high -= HALF
                value -= HALF
            elif low >= QUARTER and high < HALF + QUARTER:
                low -= QUARTER
                high -= QUARTER
                value -= QUARTER
            else:
                break
            low = (low << 1) & MASK
            high = ((high << 1) & MASK) | 1
            value = ((value << 1) & MASK) | next_bit()
    return "".join(out)
