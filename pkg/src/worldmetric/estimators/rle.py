"""Run-length coder: first bit, then every run length Elias-gamma coded."""

from __future__ import annotations

from itertools import groupby

from ..codes import BitReader, gamma_encode

NAME = "RLE"
VERSION = 1
TAG = 0x11


def encode(bits: str) -> str | None:
    if not bits:
        return None
    out = [bits[0]]
    for _, run in groupby(bits):
        out.append(gamma_encode(sum(1 for _ in run)))
    return "".join(out)


def decode(payload: str) -> str:
    reader = BitReader(payload)
    symbol = reader.read(1)
    out = []
    while not reader.exhausted():
        out.append(symbol * reader.read_gamma())
        symbol = "1" if symbol == "0" else "0"
    return "".join(out)
