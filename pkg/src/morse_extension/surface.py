"""Demigenus/orientability labels of level-surface components.

A label is a pair ``(g, o)``: ``g`` is the demigenus of the surface with its
boundary circles capped off (``2 - chi``), ``o`` is 1 for non-orientable and 0
for orientable.  Legal pairs are (0, 0), (odd, 1) and (even >= 2, 0 or 1).

The option functions return every label a component may carry just below a
critical point of the given type, starting from the label just above it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal


def lambda_valid(g: int, o: int) -> bool:
    if isinstance(g, bool) or not isinstance(g, int) or o not in (0, 1) or g < 0:
        return False
    if g == 0:
        return o == 0
    if g % 2 == 1:
        return o == 1
    return True


@dataclass(frozen=True, order=True)
class SurfaceClass:
    g: int
    o: int

    def __post_init__(self) -> None:
        if not lambda_valid(self.g, self.o):
            raise ValueError(f"({self.g},{self.o}) is not a legal demigenus/orientability pair")

    def __str__(self) -> str:
        return f"({self.g},{self.o})"

    def as_list(self) -> list[int]:
        return [self.g, self.o]


DISC = SurfaceClass(0, 0)


@dataclass(frozen=True)
class BoundedClass:
    b: int
    cls: SurfaceClass


def join(a: SurfaceClass, b: SurfaceClass) -> SurfaceClass:
    """Label of the boundary-connected sum of two components."""
    return SurfaceClass(a.g + b.g, a.o | b.o)


def split_options(c: SurfaceClass) -> frozenset[tuple[SurfaceClass, SurfaceClass]]:
    """Unordered splittings of ``c`` into two components, as sorted pairs."""
    out = set()
    for g1 in range(c.g // 2 + 1):
        g2 = c.g - g1
        for o1 in (0, 1):
            for o2 in (0, 1):
                if (o1 | o2) != c.o or not (lambda_valid(g1, o1) and lambda_valid(g2, o2)):
                    continue
                pair = sorted((SurfaceClass(g1, o1), SurfaceClass(g2, o2)))
                out.add((pair[0], pair[1]))
    return frozenset(out)


def genus_add_options(c: SurfaceClass) -> frozenset[SurfaceClass]:
    return frozenset(SurfaceClass(c.g + 2, o) for o in {c.o, 1} if lambda_valid(c.g + 2, o))


def genus_remove_options(c: SurfaceClass) -> frozenset[SurfaceClass]:
    if c.g < 2:
        raise ValueError(f"cannot remove a handle from {c}: demigenus below 2")
    return frozenset(SurfaceClass(c.g - 2, o) for o in {0, c.o} if lambda_valid(c.g - 2, o))


def crosscap_add(c: SurfaceClass) -> SurfaceClass:
    return SurfaceClass(c.g + 1, 1)


def crosscap_remove_options(c: SurfaceClass) -> frozenset[SurfaceClass]:
    # Cutting one cross-cap lowers the demigenus by one; the remainder may be
    # orientable only when its demigenus is even.
    if c.o != 1:
        raise ValueError(f"cannot remove a cross-cap from orientable {c}")
    return frozenset(SurfaceClass(c.g - 1, o) for o in (0, 1) if lambda_valid(c.g - 1, o))


@dataclass(frozen=True)
class SurfaceType:
    """Position of a compact connected surface in the classification.

    ``orientable``: a disc with ``boundary - 1`` holes and ``handles`` handles;
    ``odd_nonorientable``: that surface summed with a projective plane;
    ``even_nonorientable``: that surface summed with a Klein bottle.
    """

    kind: Literal["orientable", "odd_nonorientable", "even_nonorientable"]
    handles: int
    boundary: int


def classify(b: int, c: SurfaceClass) -> SurfaceType:
    if b < 0:
        raise ValueError("boundary count must be nonnegative")
    if c.o == 0:
        return SurfaceType("orientable", c.g // 2, b)
    if c.g % 2 == 1:
        return SurfaceType("odd_nonorientable", (c.g - 1) // 2, b)
    return SurfaceType("even_nonorientable", (c.g - 2) // 2, b)


def euler_characteristic(b: int, c: SurfaceClass) -> int:
    return 2 - c.g - b
