"""Byte layouts for packing annotations into fixed-width genomes.

Two standard layouts:

* tagged (12 bytes): founder tag u16 | deposit counter u16 | 64 x 1-bit
  surface.  Used by neutral runs where lineage identity is the payload.
* fitness (16 bytes): fitness float32 | deposit counter u32 | 64 x 1-bit
  surface.  Used by selection runs.

All integers little endian.  Within the surface region, slot k occupies
bits [k*w, (k+1)*w) of the region interpreted as one little-endian
integer, i.e. slot 0 sits in the lowest bits of the first byte.  Other
slot counts and differentia widths pack the same way, so the codec also
serves non-standard surfaces.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass


@dataclass(frozen=True)
class GenomeLayout:
    """Field geometry for one genome wire format."""

    kind: str  # "tagged" or "fitness"
    slot_count: int = 64
    differentia_bits: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("tagged", "fitness"):
            raise ValueError(f"unknown layout kind {self.kind!r}")
        if not 1 <= self.differentia_bits <= 8:
            raise ValueError(f"differentia_bits must be 1..8, got {self.differentia_bits}")
        if self.slot_count < 1:
            raise ValueError("slot_count must be positive")

    @property
    def header_bytes(self) -> int:
        return 2 if self.kind == "tagged" else 4

    @property
    def counter_bytes(self) -> int:
        return 2 if self.kind == "tagged" else 4

    @property
    def counter_capacity(self) -> int:
        return 1 << (8 * self.counter_bytes)

    @property
    def surface_bytes(self) -> int:
        return (self.slot_count * self.differentia_bits + 7) // 8

    @property
    def total_bytes(self) -> int:
        return self.header_bytes + self.counter_bytes + self.surface_bytes


TAGGED = GenomeLayout("tagged")
FITNESS = GenomeLayout("fitness")


@dataclass(frozen=True)
class GenomeFields:
    """Decoded contents of one genome."""

    counter: int
    surface: tuple[int, ...]
    founder_tag: int | None = None
    fitness: float | None = None


def pack_genome(layout: GenomeLayout, fields: GenomeFields) -> bytes:
    """Encode ``fields`` per ``layout``; strict about ranges and presence."""
    if not 0 <= fields.counter < layout.counter_capacity:
        raise ValueError(
            f"counter {fields.counter} does not fit in {layout.counter_bytes} bytes"
        )
    if len(fields.surface) != layout.slot_count:
        raise ValueError(
            f"expected {layout.slot_count} surface values, got {len(fields.surface)}"
        )
    w = layout.differentia_bits
    acc = 0
    for k, v in enumerate(fields.surface):
        if not 0 <= v < (1 << w):
            raise ValueError(f"slot {k} value {v} out of range for {w} bit(s)")
        acc |= v << (k * w)
    surface = acc.to_bytes(layout.surface_bytes, "little")
    if layout.kind == "tagged":
        if fields.founder_tag is None:
            raise ValueError("tagged layout requires founder_tag")
        if not 0 <= fields.founder_tag < (1 << 16):
            raise ValueError(f"founder_tag {fields.founder_tag} does not fit in 16 bits")
        head = struct.pack("<HH", fields.founder_tag, fields.counter)
    else:
        if fields.fitness is None:
            raise ValueError("fitness layout requires fitness")
        head = struct.pack("<fI", fields.fitness, fields.counter)
    return head + surface


def unpack_genome(layout: GenomeLayout, blob: bytes) -> GenomeFields:
    """Decode ``blob`` per ``layout``; length must match exactly."""
    if len(blob) != layout.total_bytes:
        raise ValueError(
            f"genome is {len(blob)} bytes; {layout.kind} layout with "
            f"{layout.slot_count} slots needs {layout.total_bytes}"
        )
    if layout.kind == "tagged":
        tag, counter = struct.unpack_from("<HH", blob)
        fitness = None
    else:
        fitness, counter = struct.unpack_from("<fI", blob)
        tag = None
    w = layout.differentia_bits
    acc = int.from_bytes(blob[layout.header_bytes + layout.counter_bytes :], "little")
    mask = (1 << w) - 1
    surface = tuple((acc >> (k * w)) & mask for k in range(layout.slot_count))
    return GenomeFields(counter=counter, surface=surface, founder_tag=tag, fitness=fitness)
