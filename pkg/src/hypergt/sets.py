"""Node sets as integer bitmasks.

Python ints give arbitrary-width masks, so subset/intersection tests cost one
machine-word op per 64 nodes regardless of n.
"""

from __future__ import annotations

from typing import Iterable, Iterator


def mask_of(nodes: Iterable[int]) -> int:
    m = 0
    for v in nodes:
        m |= 1 << v
    return m


def nodes_of(mask: int) -> tuple[int, ...]:
    return tuple(iter_bits(mask))


def iter_bits(mask: int) -> Iterator[int]:
    v = 0
    while mask:
        if mask & 1:
            yield v
        mask >>= 1
        v += 1


def full_mask(n: int) -> int:
    return (1 << n) - 1


def bit_count(mask: int) -> int:
    return mask.bit_count()


def is_subset(a: int, b: int) -> bool:
    """True iff every bit of a is set in b."""
    return a & ~b == 0
