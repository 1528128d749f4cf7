"""Bitset helpers on plain Python integers.

A set over a dense index range [0, width) is stored as an int whose bit j
is set iff index j is a member.  Arbitrary-precision ints make intersection
and union single operations and ``int.bit_count`` gives popcounts without
any lookup-table setup, so the same representation serves 7-attribute toy
contexts and 1682-column rating matrices.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator


def full_mask(width: int) -> int:
    """All ``width`` low bits set."""
    return (1 << width) - 1


def mask_from_indices(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        if i < 0:
            raise ValueError(f"negative index {i} in bitset")
        mask |= 1 << i
    return mask


def iter_indices(mask: int) -> Iterator[int]:
    """Yield set-bit positions in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def indices(mask: int) -> list[int]:
    return list(iter_indices(mask))


def mask_from_row(row: Iterable) -> int:
    """Pack a 0/1 (or truthy) sequence into a mask, index 0 at bit 0."""
    mask = 0
    for j, cell in enumerate(row):
        if cell:
            mask |= 1 << j
    return mask


def row_from_mask(mask: int, width: int) -> list[int]:
    """Unpack a mask into a 0/1 list of the given width."""
    return [(mask >> j) & 1 for j in range(width)]
