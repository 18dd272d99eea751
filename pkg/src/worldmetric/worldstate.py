"""World-states as canonical bitstrings.

A :class:`Scenario` is an ordered record of typed fields.  ``digitalize``
packs it into a :class:`WorldState`: the payload is every field's
fixed-width big-endian encoding, concatenated in declaration order with no
padding, and the manifest remembers where each field lives so the encoding
can be inverted exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .codes import BitReader, gamma_encode, gamma_length, uint_encode, width_for

FIELD_KINDS = ("uint", "bool", "bits", "enum")


class ScenarioError(ValueError):
    """A scenario field is malformed or its value does not fit its width."""

    def __init__(self, message: str, field_name: str | None = None):
        self.field_name = field_name
        if field_name is not None:
            message = f"field {field_name!r}: {message}"
        super().__init__(message)


class StructuralError(ValueError):
    """A world-state manifest is inconsistent with its payload."""


@dataclass(frozen=True)
class BitString:
    """Immutable sequence of binary digits, stored as a '0'/'1' string."""

    bits: str = ""

    def __post_init__(self):
        if not isinstance(self.bits, str):
            raise TypeError(f"BitString wants a str of 0/1, got {type(self.bits).__name__}")
        if self.bits.strip("01"):
            raise ValueError("BitString accepts only the characters '0' and '1'")

    @classmethod
    def from_int(cls, value: int, width: int) -> BitString:
        return cls(uint_encode(value, width))

    @classmethod
    def from_bools(cls, values: Iterable[bool | int]) -> BitString:
        return cls("".join("1" if v else "0" for v in values))

    @property
    def length(self) -> int:
        return len(self.bits)

    def to_int(self) -> int:
        return int(self.bits, 2) if self.bits else 0

    def flip(self, index: int) -> BitString:
        b = self.bits
        return BitString(b[:index] + ("1" if b[index] == "0" else "0") + b[index + 1:])

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return BitString(self.bits[item])
        return int(self.bits[item])

    def __add__(self, other: BitString) -> BitString:
        if not isinstance(other, BitString):
            return NotImplemented
        return BitString(self.bits + other.bits)

    def __str__(self) -> str:
        return self.bits


EMPTY = BitString()


@dataclass(frozen=True)
class Field:
    """One typed scenario field.

    ``width`` is required for ``uint`` and optional for ``bits`` (where it
    must match the value's length); ``cardinality`` is required for ``enum``
    and the value is the symbol's index in declaration order.
    """

    name: str
    kind: str
    value: int | bool | str
    width: int | None = None
    cardinality: int | None = None

    def bit_width(self) -> int:
        if self.kind == "uint":
            return self.width
        if self.kind == "bool":
            return 1
        if self.kind == "bits":
            return len(self.value)
        return width_for(self.cardinality)

    def validate(self) -> None:
        name, kind, value = self.name, self.kind, self.value
        if kind not in FIELD_KINDS:
            raise ScenarioError(f"unknown type {kind!r} (expected one of {', '.join(FIELD_KINDS)})", name)
        if kind == "uint":
            if not isinstance(self.width, int) or isinstance(self.width, bool) or self.width < 0:
                raise ScenarioError("uint needs a non-negative integer width", name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ScenarioError(f"uint value must be a non-negative integer, got {value!r}", name)
            if value >> self.width:
                raise ScenarioError(f"value {value} overflows {self.width} bits", name)
        elif kind == "bool":
            if not isinstance(value, bool):
                raise ScenarioError(f"bool value must be true/false, got {value!r}", name)
        elif kind == "bits":
            if not isinstance(value, str) or value.strip("01"):
                raise ScenarioError("bits value must be a string of 0/1 characters", name)
            if self.width is not None and self.width != len(value):
                raise ScenarioError(f"declared width {self.width} but value has {len(value)} bits", name)
        else:
            card = self.cardinality
            if not isinstance(card, int) or isinstance(card, bool) or card < 1:
                raise ScenarioError("enum needs a positive integer cardinality", name)
            if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value < card:
                raise ScenarioError(f"enum index {value!r} outside [0, {card})", name)

    def encode(self) -> str:
        if self.kind == "uint":
            return uint_encode(self.value, self.width)
        if self.kind == "bool":
            return "1" if self.value else "0"
        if self.kind == "bits":
            return self.value
        return uint_encode(self.value, width_for(self.cardinality))


@dataclass(frozen=True)
class Scenario:
    label: str
    fields: tuple[Field, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))

    def replace_value(self, name: str, value) -> Scenario:
        """Copy of this scenario with one field's value swapped."""
        new = [Field(f.name, f.kind, value, f.width, f.cardinality) if f.name == name else f
               for f in self.fields]
        if all(f.name != name for f in self.fields):
            raise KeyError(name)
        return Scenario(self.label, tuple(new))


@dataclass(frozen=True)
class FieldSlot:
    """Manifest entry: where one field lives inside the payload."""

    name: str
    kind: str
    offset: int
    width: int
    cardinality: int | None = None


@dataclass(frozen=True)
class WorldState:
    payload: BitString
    label: str
    manifest: tuple[FieldSlot, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "manifest", tuple(self.manifest))
        check_manifest(self.manifest, self.payload.length)

    @classmethod
    def raw(cls, label: str, bits: BitString | str) -> WorldState:
        """World-state over an unstructured bitstring (one ``bits`` field)."""
        if isinstance(bits, str):
            bits = BitString(bits)
        return cls(bits, label, (FieldSlot("payload", "bits", 0, bits.length),))

    def region(self, name: str) -> BitString:
        for slot in self.manifest:
            if slot.name == name:
                return self.payload[slot.offset:slot.offset + slot.width]
        raise KeyError(name)


def check_manifest(manifest: Sequence[FieldSlot], payload_length: int) -> None:
    """Regions must be disjoint, in bounds, and widths must suit their kinds."""
    spans = []
    for slot in manifest:
        if slot.offset < 0 or slot.width < 0 or slot.offset + slot.width > payload_length:
            raise StructuralError(
                f"field {slot.name!r} claims bits [{slot.offset}, {slot.offset + slot.width}) "
                f"of a {payload_length}-bit payload")
        if slot.kind == "bool" and slot.width != 1:
            raise StructuralError(f"bool field {slot.name!r} must be 1 bit wide")
        if slot.kind == "enum" and (slot.cardinality is None or width_for(slot.cardinality) != slot.width):
            raise StructuralError(f"enum field {slot.name!r} width does not match its cardinality")
        if slot.kind not in FIELD_KINDS:
            raise StructuralError(f"field {slot.name!r} has unknown kind {slot.kind!r}")
        spans.append((slot.offset, slot.offset + slot.width, slot.name))
    spans.sort()
    for (_, end, a), (start, _, b) in zip(spans, spans[1:]):
        if start < end:
            raise StructuralError(f"fields {a!r} and {b!r} overlap")


def digitalize(scenario: Scenario) -> WorldState:
    chunks = []
    manifest = []
    offset = 0
    seen = set()
    for f in scenario.fields:
        f.validate()
        if f.name in seen:
            raise ScenarioError("duplicate field name", f.name)
        seen.add(f.name)
        bits = f.encode()
        manifest.append(FieldSlot(f.name, f.kind, offset, len(bits),
                                  f.cardinality if f.kind == "enum" else None))
        chunks.append(bits)
        offset += len(bits)
    return WorldState(BitString("".join(chunks)), scenario.label, tuple(manifest))


def undigitalize(world: WorldState) -> Scenario:
    check_manifest(world.manifest, world.payload.length)
    bits = world.payload.bits
    fields = []
    for slot in world.manifest:
        chunk = bits[slot.offset:slot.offset + slot.width]
        if slot.kind == "uint":
            fields.append(Field(slot.name, "uint", int(chunk, 2) if chunk else 0, width=slot.width))
        elif slot.kind == "bool":
            fields.append(Field(slot.name, "bool", chunk == "1"))
        elif slot.kind == "bits":
            fields.append(Field(slot.name, "bits", chunk, width=slot.width))
        else:
            index = int(chunk, 2) if chunk else 0
            if index >= slot.cardinality:
                raise StructuralError(f"enum field {slot.name!r} holds index {index} >= {slot.cardinality}")
            fields.append(Field(slot.name, "enum", index, cardinality=slot.cardinality))
    return Scenario(world.label, tuple(fields))


def join(x: BitString, y: BitString) -> BitString:
    """Self-delimiting concatenation: gamma(len(x) + 1), then x, then y.

    The +1 shift lets the empty string be delimited (gamma has no code for 0).
    """
    return BitString(gamma_encode(x.length + 1) + x.bits + y.bits)


def join_overhead(left_length: int) -> int:
    return gamma_length(left_length + 1)


def split_join(z: BitString) -> tuple[BitString, BitString]:
    reader = BitReader(z.bits)
    try:
        n = reader.read_gamma() - 1
        left = reader.read(n)
    except EOFError as exc:
        raise StructuralError(f"not a joined string: {exc}") from None
    return BitString(left), BitString(z.bits[reader.pos:])
