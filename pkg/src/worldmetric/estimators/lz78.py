"""LZ78 over the binary alphabet.

Each phrase is emitted as (dictionary index, next bit).  The index uses
ceil(log2(dictionary size)) bits, where the dictionary starts with the empty
phrase only.  If the input ends inside a known phrase, a final bare index
is emitted; the decoder recognises it because the payload runs out before
the extension bit.
"""

from __future__ import annotations

from ..codes import BitReader, uint_encode, width_for

NAME = "LZ78"
VERSION = 1
TAG = 0x21


def parse(bits: str) -> list[tuple[int, str]]:
    """Phrase list as (prefix index, extension bit); bit is '' for a trailing phrase."""
    table = {"": 0}
    phrases = []
    current = ""
    for c in bits:
        nxt = current + c
        if nxt in table:
            current = nxt
            continue
        phrases.append((table[current], c))
        table[nxt] = len(table)
        current = ""
    if current:
        phrases.append((table[current], ""))
    return phrases


def encode(bits: str) -> str | None:
    if not bits:
        return None
    out = []
    for size, (index, c) in enumerate(parse(bits), start=1):
        out.append(uint_encode(index, width_for(size)))
        out.append(c)
    return "".join(out)


def decode(payload: str) -> str:
    reader = BitReader(payload)
    table = [""]
    out = []
    while not reader.exhausted():
        index = reader.read_uint(width_for(len(table)))
        if index >= len(table):
            raise ValueError(f"phrase index {index} beyond dictionary of {len(table)}")
        if reader.exhausted():
            out.append(table[index])
            break
        phrase = table[index] + reader.read(1)
        table.append(phrase)
        out.append(phrase)
    return "".join(out)
