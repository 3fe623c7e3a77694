"""Finite discrete distributions with exact rational masses.

Points are tuples of :class:`fractions.Fraction`; masses are Fractions that
sum to exactly one.  Nothing in here ever touches a float.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as _cartesian
from types import MappingProxyType
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

from .errors import InvalidDistribution, InvalidIndices, InvalidPartition, ZeroProbabilityEvent

Rat = Fraction
Point = tuple  # tuple[Fraction, ...]
BlockValue = tuple  # tuple[Fraction, ...], possibly empty for B = {}
RatLike = Union[Fraction, int, str]

_RAT_RE = re.compile(r"^-?\d+(/\d+)?$")


def parse_rat(text: RatLike) -> Fraction:
    """Parse ``"p/q"`` or an integer string into a Fraction.

    Decimal and exponent notations are rejected so that files stay bit-exact.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool):
        raise InvalidDistribution(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str) or not _RAT_RE.match(text.strip()):
        raise InvalidDistribution(f"not a rational string: {text!r}")
    try:
        return Fraction(text.strip())
    except ZeroDivisionError:
        raise InvalidDistribution(f"zero denominator: {text!r}") from None


def format_rat(value: Fraction) -> str:
    return str(Fraction(value))


def as_point(coords: Iterable[RatLike]) -> Point:
    return tuple(parse_rat(c) for c in coords)


class FiniteDistribution:
    """Immutable map from points in [0, inf)^d to positive rational masses.

    Zero masses passed to the constructor are dropped.  With ``normalize=True``
    the masses are rescaled to sum to one, otherwise they must already do so.
    """

    __slots__ = ("dimension", "_atoms")

    def __init__(
        self,
        atoms: Mapping[Sequence[RatLike], RatLike],
        dimension: int | None = None,
        *,
        normalize: bool = False,
    ):
        clean: dict[Point, Fraction] = {}
        for raw_point, raw_mass in atoms.items():
            point = as_point(raw_point)
            mass = parse_rat(raw_mass)
            if dimension is None:
                dimension = len(point)
            if len(point) != dimension:
                raise InvalidDistribution(
                    f"point {raw_point} has dimension {len(point)}, expected {dimension}"
                )
            if any(c < 0 for c in point):
                raise InvalidDistribution(f"negative coordinate in {raw_point}")
            if mass < 0:
                raise InvalidDistribution(f"negative mass {mass} at {raw_point}")
            if mass == 0:
                continue
            clean[point] = clean.get(point, Fraction(0)) + mass
        if dimension is None or dimension < 1:
            raise InvalidDistribution("cannot infer a positive dimension from an empty atom map")
        total = sum(clean.values(), Fraction(0))
        if total == 0:
            raise InvalidDistribution("distribution has no positive mass")
        if normalize:
            clean = {p: m / total for p, m in clean.items()}
        elif total != 1:
            raise InvalidDistribution(f"masses sum to {total}, not 1")
        self.dimension = dimension
        self._atoms = MappingProxyType(dict(sorted(clean.items())))

    @property
    def atoms(self) -> Mapping[Point, Fraction]:
        return self._atoms

    @property
    def support(self) -> frozenset:
        return frozenset(self._atoms)

    def mass(self, point: Sequence[RatLike]) -> Fraction:
        return self._atoms.get(as_point(point), Fraction(0))

    def prob(self, event: Callable[[Point], bool]) -> Fraction:
        return sum((m for p, m in self._atoms.items() if event(p)), Fraction(0))

    def items(self):
        return self._atoms.items()

    def __iter__(self) -> Iterator[Point]:
        return iter(self._atoms)

    def __len__(self) -> int:
        return len(self._atoms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteDistribution):
            return NotImplemented
        return equals(self, other)

    def __hash__(self) -> int:
        return hash((self.dimension, tuple(self._atoms.items())))

    def __reduce__(self):
        # mappingproxy is not picklable; rebuild from a plain dict
        return (FiniteDistribution, (dict(self._atoms), self.dimension))

    def __repr__(self) -> str:
        body = ", ".join(
            f"({', '.join(map(str, p))}): {m}" for p, m in self._atoms.items()
        )
        return f"FiniteDistribution(d={self.dimension}, {{{body}}})"


def point_mass(point: Sequence[RatLike]) -> FiniteDistribution:
    return FiniteDistribution({tuple(point): 1})


def equals(d1: FiniteDistribution, d2: FiniteDistribution) -> bool:
    return d1.dimension == d2.dimension and dict(d1.atoms) == dict(d2.atoms)


def marginal(dist: FiniteDistribution, indices: Sequence[int]) -> FiniteDistribution:
    """Pushforward onto the coordinates ``indices`` (0-based, kept in the given order)."""
    indices = tuple(indices)
    if not indices or any(not 0 <= i < dist.dimension for i in indices):
        raise InvalidIndices(f"bad index set {indices} for dimension {dist.dimension}")
    if len(set(indices)) != len(indices):
        raise InvalidIndices(f"repeated index in {indices}")
    out: dict[Point, Fraction] = {}
    for p, m in dist.items():
        q = tuple(p[i] for i in indices)
        out[q] = out.get(q, Fraction(0)) + m
    return FiniteDistribution(out, len(indices))


def condition(dist: FiniteDistribution, event: Callable[[Point], bool]) -> FiniteDistribution:
    kept = {p: m for p, m in dist.items() if event(p)}
    total = sum(kept.values(), Fraction(0))
    if total == 0:
        raise ZeroProbabilityEvent("conditioning event has probability zero")
    return FiniteDistribution({p: m / total for p, m in kept.items()}, dist.dimension)


def condition_on_set(dist: FiniteDistribution, points: Iterable[Point]) -> FiniteDistribution:
    members = frozenset(as_point(p) for p in points)
    return condition(dist, members.__contains__)


def product(dists: Sequence[FiniteDistribution]) -> FiniteDistribution:
    """Independent joint law; coordinates are concatenated in factor order."""
    dists = list(dists)
    if len(dists) < 2:
        raise InvalidIndices("product needs at least two factors")
    out: dict[Point, Fraction] = {}
    for combo in _cartesian(*(list(d.items()) for d in dists)):
        point = tuple(c for p, _ in combo for c in p)
        mass = Fraction(1)
        for _, m in combo:
            mass *= m
        out[point] = mass
    return FiniteDistribution(out, sum(d.dimension for d in dists))


@dataclass(frozen=True)
class BlockPartition:
    """Split of the 0-based coordinate indices into blocks A, B, C.

    Use :meth:`parse` for the 1-based text form ``"A=1;B=;C=2,3"``.
    """

    A: tuple
    B: tuple
    C: tuple

    def __post_init__(self):
        for name in ("A", "B", "C"):
            object.__setattr__(self, name, tuple(int(i) for i in getattr(self, name)))
        if not self.A or not self.C:
            raise InvalidPartition("blocks A and C must be nonempty")
        every = self.A + self.B + self.C
        if len(set(every)) != len(every):
            raise InvalidPartition("blocks overlap")
        if set(every) != set(range(len(every))):
            raise InvalidPartition(f"blocks do not cover 1..{len(every)}")

    @property
    def dimension(self) -> int:
        return len(self.A) + len(self.B) + len(self.C)

    def check(self, dimension: int) -> None:
        if dimension != self.dimension:
            raise InvalidPartition(
                f"partition covers {self.dimension} coordinates, distribution has {dimension}"
            )

    def blocks(self) -> tuple:
        return (self.A, self.B, self.C)

    def split(self, point: Point) -> tuple:
        return (
            tuple(point[i] for i in self.A),
            tuple(point[i] for i in self.B),
            tuple(point[i] for i in self.C),
        )

    def join(self, a: BlockValue, b: BlockValue, c: BlockValue) -> Point:
        coords: list = [None] * self.dimension
        for idx, vals in ((self.A, a), (self.B, b), (self.C, c)):
            if len(vals) != len(idx):
                raise InvalidPartition("block value length does not match block size")
            for i, v in zip(idx, vals):
                coords[i] = v
        return tuple(coords)

    def swapped(self) -> "BlockPartition":
        return BlockPartition(self.C, self.B, self.A)

    @classmethod
    def parse(cls, text: str) -> "BlockPartition":
        parts: dict[str, tuple] = {"A": (), "B": (), "C": ()}
        for chunk in filter(None, (s.strip() for s in text.split(";"))):
            name, sep, body = chunk.partition("=")
            name = name.strip().upper()
            if not sep or name not in parts:
                raise InvalidPartition(f"cannot parse partition chunk {chunk!r}")
            try:
                parts[name] = tuple(int(s) - 1 for s in body.split(",") if s.strip())
            except ValueError:
                raise InvalidPartition(f"non-integer index in {chunk!r}") from None
        return cls(parts["A"], parts["B"], parts["C"])

    @classmethod
    def default(cls, dimension: int) -> "BlockPartition":
        if dimension == 2:
            return cls((0,), (), (1,))
        if dimension == 3:
            return cls((0,), (1,), (2,))
        raise InvalidPartition(f"no default partition for dimension {dimension}")

    def __str__(self) -> str:
        fmt = lambda idx: ",".join(str(i + 1) for i in idx)  # noqa: E731
        return f"A={fmt(self.A)};B={fmt(self.B)};C={fmt(self.C)}"


def block_project(dist: FiniteDistribution, partition: BlockPartition) -> dict:
    """Re-index atoms as ``{(a, b, c): mass}`` block triples."""
    partition.check(dist.dimension)
    return {partition.split(p): m for p, m in dist.items()}


def assemble(triples: Mapping[tuple, Fraction], partition: BlockPartition) -> FiniteDistribution:
    """Inverse of :func:`block_project`."""
    return FiniteDistribution(
        {partition.join(a, b, c): m for (a, b, c), m in triples.items()}, partition.dimension
    )


def block_values(dist: FiniteDistribution, partition: BlockPartition) -> tuple:
    """Sorted observed values of each block, as ``(A_values, B_values, C_values)``."""
    partition.check(dist.dimension)
    seen: tuple = (set(), set(), set())
    for p in dist:
        for s, v in zip(seen, partition.split(p)):
            s.add(v)
    return tuple(sorted(s) for s in seen)


# -- JSON ---------------------------------------------------------------------


def dist_to_dict(dist: FiniteDistribution) -> dict:
    return {
        "dimension": dist.dimension,
        "atoms": [
            {"coords": [format_rat(c) for c in p], "mass": format_rat(m)}
            for p, m in dist.items()
        ],
    }


def dist_from_dict(data: Mapping) -> FiniteDistribution:
    try:
        dimension = data["dimension"]
        raw_atoms = data["atoms"]
    except (KeyError, TypeError):
        raise InvalidDistribution("distribution JSON needs 'dimension' and 'atoms'") from None
    if not isinstance(dimension, int) or isinstance(dimension, bool) or dimension < 1:
        raise InvalidDistribution(f"bad dimension {dimension!r}")
    if not isinstance(raw_atoms, list) or not raw_atoms:
        raise InvalidDistribution("'atoms' must be a nonempty list")
    atoms: dict[Point, Fraction] = {}
    for entry in raw_atoms:
        try:
            point = as_point(entry["coords"])
            mass = parse_rat(entry["mass"])
        except (KeyError, TypeError):
            raise InvalidDistribution(f"malformed atom {entry!r}") from None
        if point in atoms:
            raise InvalidDistribution(f"duplicate point {entry['coords']}")
        if mass <= 0:
            raise InvalidDistribution(f"nonpositive mass at {entry['coords']}")
        atoms[point] = mass
    return FiniteDistribution(atoms, dimension)


def dumps(dist: FiniteDistribution) -> str:
    return json.dumps(dist_to_dict(dist), indent=2) + "\n"


def loads(text: str) -> FiniteDistribution:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidDistribution(f"invalid JSON: {exc}") from None
    return dist_from_dict(data)
