"""Support regions, L1/L2 block classes, and in-region slab/rectangle enumeration."""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence, Union

from .dist import BlockPartition, BlockValue, Point, as_point, format_rat, parse_rat
from .errors import EnumerationTooLarge, InvalidIndices, InvalidRegion

DEFAULT_RECT_CAP = 200_000


class BlockClass(Enum):
    L1 = "L1"
    L2 = "L2"


def classify_block(value: BlockValue, threshold: Fraction = Fraction(1)) -> BlockClass:
    # closed box: a coordinate equal to the threshold is still L1
    return BlockClass.L2 if any(x > threshold for x in value) else BlockClass.L1


def is_zero(value: BlockValue) -> bool:
    return all(x == 0 for x in value)


def _check_threshold(threshold: Fraction) -> Fraction:
    threshold = parse_rat(threshold)
    if threshold <= 0:
        raise InvalidRegion("threshold must be positive")
    return threshold


@dataclass(frozen=True)
class EHRegion:
    """[0, inf)^d minus the closed box [0, threshold]^d."""

    threshold: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "threshold", _check_threshold(self.threshold))


@dataclass(frozen=True)
class CrossRegion:
    """Union of the arms: one block in L2, every other block exactly zero."""

    partition: BlockPartition
    threshold: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "threshold", _check_threshold(self.threshold))


@dataclass(frozen=True)
class ExplicitSet:
    points: frozenset

    def __post_init__(self):
        pts = frozenset(as_point(p) for p in self.points)
        if not pts:
            raise InvalidRegion("explicit region must be nonempty")
        if len({len(p) for p in pts}) != 1:
            raise InvalidRegion("explicit region mixes dimensions")
        object.__setattr__(self, "points", pts)


Region = Union[EHRegion, CrossRegion, ExplicitSet]


def region_contains(region: Region, point: Point) -> bool:
    if isinstance(region, EHRegion):
        return any(x > region.threshold for x in point)
    if isinstance(region, CrossRegion):
        part = region.partition
        if len(point) != part.dimension:
            raise InvalidIndices(f"point dimension {len(point)} != {part.dimension}")
        blocks = [blk for blk in part.split(point) if blk]
        active = [blk for blk in blocks if not is_zero(blk)]
        return (
            len(active) == 1
            and classify_block(active[0], region.threshold) is BlockClass.L2
        )
    if isinstance(region, ExplicitSet):
        dim = len(next(iter(region.points)))
        if len(point) != dim:
            raise InvalidIndices(f"point dimension {len(point)} != {dim}")
        return tuple(point) in region.points
    raise TypeError(f"unknown region {region!r}")


def region_threshold(region: Region) -> Fraction:
    return getattr(region, "threshold", Fraction(1))


@dataclass(frozen=True, order=True)
class Slab:
    """The 2x2x1 rectangle {a, a2} x {b} x {c, c2}, with a < a2 and c < c2."""

    a: BlockValue
    a2: BlockValue
    b: BlockValue
    c: BlockValue
    c2: BlockValue

    def corners(self, partition: BlockPartition) -> tuple:
        """Points (a,b,c), (a2,b,c2), (a,b,c2), (a2,b,c): diagonal first, then anti-diagonal."""
        j = partition.join
        return (
            j(self.a, self.b, self.c),
            j(self.a2, self.b, self.c2),
            j(self.a, self.b, self.c2),
            j(self.a2, self.b, self.c),
        )

    def as_rectangle(self) -> "Rectangle":
        return Rectangle((self.a, self.a2), (self.b,), (self.c, self.c2))


@dataclass(frozen=True, order=True)
class Rectangle:
    S_A: tuple
    S_B: tuple
    S_C: tuple

    def __post_init__(self):
        for name in ("S_A", "S_B", "S_C"):
            vals = tuple(sorted(set(getattr(self, name))))
            if not vals:
                raise InvalidRegion(f"{name} must be nonempty")
            object.__setattr__(self, name, vals)

    @property
    def size(self) -> int:
        return len(self.S_A) + len(self.S_B) + len(self.S_C)

    def contains(self, a: BlockValue, b: BlockValue, c: BlockValue) -> bool:
        return a in self.S_A and b in self.S_B and c in self.S_C

    def points(self, partition: BlockPartition) -> list:
        return [
            partition.join(a, b, c) for a in self.S_A for b in self.S_B for c in self.S_C
        ]


def _observed(support: Iterable[Point], partition: BlockPartition) -> tuple:
    seen: tuple = (set(), set(), set())
    for p in support:
        for s, v in zip(seen, partition.split(p)):
            s.add(v)
    return tuple(sorted(s) for s in seen)


def enumerate_slabs(
    support: Iterable[Point], partition: BlockPartition, region: Region
) -> list:
    """Every slab over observed block values whose four corners lie in the region."""
    A, B, C = _observed(support, partition)
    out = []
    for b in B:
        inside = {
            (a, c) for a in A for c in C if region_contains(region, partition.join(a, b, c))
        }
        for a, a2 in combinations(A, 2):
            for c, c2 in combinations(C, 2):
                if {(a, c), (a, c2), (a2, c), (a2, c2)} <= inside:
                    out.append(Slab(a, a2, b, c, c2))
    return sorted(out)


def rect_cap_from_env(default: int = DEFAULT_RECT_CAP) -> int:
    raw = os.environ.get("XCI_RECT_CAP")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise InvalidRegion(f"XCI_RECT_CAP is not an integer: {raw!r}") from None


def _nonempty_subsets(values: Sequence) -> list:
    return [
        combo for r in range(1, len(values) + 1) for combo in combinations(values, r)
    ]


def enumerate_rectangles(
    support: Iterable[Point],
    partition: BlockPartition,
    region: Region,
    cap: int | None = None,
) -> list:
    """All in-region product rectangles over observed block values.

    Sorted by total cardinality, then canonically.  Raises
    :class:`EnumerationTooLarge` when the raw subset count exceeds ``cap``.
    """
    if cap is None:
        cap = rect_cap_from_env()
    A, B, C = _observed(support, partition)
    count = (2 ** len(A) - 1) * (2 ** len(B) - 1) * (2 ** len(C) - 1)
    if count > cap:
        raise EnumerationTooLarge(count, cap)
    inside = {
        (a, b, c)
        for a in A
        for b in B
        for c in C
        if region_contains(region, partition.join(a, b, c))
    }
    out = []
    for s_b in _nonempty_subsets(B):
        for s_a in _nonempty_subsets(A):
            allowed = [
                c for c in C if all((a, b, c) in inside for a in s_a for b in s_b)
            ]
            for s_c in _nonempty_subsets(allowed):
                out.append(Rectangle(s_a, s_b, s_c))
    out.sort(key=lambda r: (r.size, r.S_A, r.S_B, r.S_C))
    return out


# -- JSON ---------------------------------------------------------------------


def region_to_dict(region: Region) -> dict:
    if isinstance(region, EHRegion):
        return {"type": "eh", "threshold": format_rat(region.threshold)}
    if isinstance(region, CrossRegion):
        return {"type": "cross", "threshold": format_rat(region.threshold)}
    return {
        "type": "explicit",
        "points": [[format_rat(c) for c in p] for p in sorted(region.points)],
    }


def region_from_dict(data: dict, partition: BlockPartition | None = None) -> Region:
    """Parse region JSON.  A cross region takes its blocks from ``partition``."""
    kind = data.get("type") if isinstance(data, dict) else None
    if kind == "eh":
        return EHRegion(parse_rat(data.get("threshold", "1")))
    if kind == "cross":
        if partition is None:
            raise InvalidRegion("cross region needs a partition")
        return CrossRegion(partition, parse_rat(data.get("threshold", "1")))
    if kind == "explicit":
        points = data.get("points")
        if not isinstance(points, list):
            raise InvalidRegion("explicit region needs a 'points' list")
        return ExplicitSet(frozenset(as_point(p) for p in points))
    raise InvalidRegion(f"unknown region description {data!r}")
