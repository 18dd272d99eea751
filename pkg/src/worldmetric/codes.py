"""Universal integer codes and a bit reader shared by the estimators and CTM."""

from __future__ import annotations


def gamma_encode(n: int) -> str:
    """Elias-gamma code of a positive integer, as a '0'/'1' string."""
    if n < 1:
        raise ValueError(f"gamma code needs n >= 1, got {n}")
    body = bin(n)[2:]
    return "0" * (len(body) - 1) + body


def gamma_length(n: int) -> int:
    if n < 1:
        raise ValueError(f"gamma code needs n >= 1, got {n}")
    return 2 * n.bit_length() - 1


def uint_encode(value: int, width: int) -> str:
    """Fixed-width big-endian binary."""
    if width == 0:
        if value:
            raise ValueError(f"{value} does not fit in 0 bits")
        return ""
    if value < 0 or value >> width:
        raise ValueError(f"{value} does not fit in {width} bits")
    return format(value, f"0{width}b")


def width_for(count: int) -> int:
    """Bits needed to index ``count`` distinct values (0 for count <= 1)."""
    return (count - 1).bit_length() if count > 1 else 0


class BitReader:
    """Sequential reader over a '0'/'1' string.

    Raises ``EOFError`` when asked for bits past the end.
    """

    def __init__(self, bits: str, pos: int = 0):
        self.bits = bits
        self.pos = pos

    @property
    def remaining(self) -> int:
        return len(self.bits) - self.pos

    def exhausted(self) -> bool:
        return self.pos >= len(self.bits)

    def read(self, width: int) -> str:
        if width > self.remaining:
            raise EOFError(f"need {width} bits at offset {self.pos}, have {self.remaining}")
        chunk = self.bits[self.pos:self.pos + width]
        self.pos += width
        return chunk

    def read_uint(self, width: int) -> int:
        return int(self.read(width), 2) if width else 0

    def read_gamma(self) -> int:
        zeros = 0
        while True:
            if self.exhausted():
                raise EOFError(f"truncated gamma code at offset {self.pos}")
            if self.bits[self.pos] == "1":
                break
            zeros += 1
            self.pos += 1
        return int(self.read(zeros + 1), 2)

    def read_delta(self) -> int:
        width = self.read_gamma() - 1
        return int("1" + self.read(width), 2)


def delta_encode(n: int) -> str:
    """Elias-delta code: gamma(bit length) then the value without its leading 1."""
    if n < 1:
        raise ValueError(f"delta code needs n >= 1, got {n}")
    body = bin(n)[3:]
    return gamma_encode(len(body) + 1) + body


def delta_length(n: int) -> int:
    if n < 1:
        raise ValueError(f"delta code needs n >= 1, got {n}")
    return n.bit_length() - 1 + gamma_length(n.bit_length())
