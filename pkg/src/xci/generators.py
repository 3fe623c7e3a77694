"""Seeded families of test laws: restricted products, slab perturbations,
cross-supported laws and the discretised two-Pareto axes example.

All randomness goes through :class:`random.Random`; masses are bounded
integers over a common denominator, normalised exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as cartesian
from typing import Mapping, Optional, Sequence, Union

from .dist import BlockPartition, FiniteDistribution, as_point, parse_rat
from .errors import (
    EmptyRegionOnGrid,
    GeneratorError,
    MassWouldGoNonpositive,
    SlabNotInSupport,
)
from .geometry import CrossRegion, EHRegion, Region, Slab, region_contains

MAX_WEIGHT = 9

L1_POOL = (Fraction(0), Fraction(1, 2), Fraction(1))
L2_POOL = (Fraction(3, 2), Fraction(2), Fraction(5, 2), Fraction(3), Fraction(4), Fraction(5), Fraction(6))


@dataclass(frozen=True)
class GridSpec:
    """Per-coordinate sorted lists of distinct nonnegative rationals."""

    values: tuple

    def __post_init__(self):
        vals = tuple(tuple(parse_rat(v) for v in coord) for coord in self.values)
        for coord in vals:
            if not coord or list(coord) != sorted(set(coord)) or coord[0] < 0:
                raise GeneratorError(f"grid coordinate {coord} must be distinct, sorted, >= 0")
        object.__setattr__(self, "values", vals)

    @property
    def dimension(self) -> int:
        return len(self.values)

    def points(self) -> list:
        return list(cartesian(*self.values))

    def block_values(self, indices: Sequence[int]) -> list:
        return list(cartesian(*(self.values[i] for i in indices)))

    @classmethod
    def random(
        cls,
        rng: random.Random,
        dimension: int,
        sizes: tuple = (2, 3),
        threshold: Fraction = Fraction(1),
    ) -> "GridSpec":
        """Each coordinate gets one value at or below ``threshold`` and one above."""
        low = [v * threshold for v in L1_POOL]
        high = [v * threshold for v in L2_POOL]
        coords = []
        for _ in range(dimension):
            n = rng.randint(*sizes)
            chosen = {rng.choice(low), rng.choice(high)}
            while len(chosen) < n:
                chosen.add(rng.choice(low + high))
            coords.append(sorted(chosen))
        return cls(tuple(coords))


def random_law(rng: random.Random, values: Sequence, max_weight: int = MAX_WEIGHT) -> dict:
    weights = [rng.randint(1, max_weight) for _ in values]
    total = sum(weights)
    return {v: Fraction(w, total) for v, w in zip(values, weights)}


def gen_product_ci(
    seed: Union[int, str, random.Random],
    grid: GridSpec,
    partition: BlockPartition,
    region: Region,
    *,
    a_law: Optional[Mapping] = None,
    c_law: Optional[Mapping] = None,
    b_law: Optional[Mapping] = None,
) -> FiniteDistribution:
    """Restriction to ``region`` of w(a,b,c) = m(b) f_b(a) g_b(c) on the grid.

    Fixed block laws may be supplied; otherwise f_b, g_b and m are drawn per
    B value.  Block-law keys are block-value tuples.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    if grid.dimension != partition.dimension:
        raise GeneratorError("grid and partition dimensions differ")
    A = grid.block_values(partition.A)
    B = grid.block_values(partition.B)
    C = grid.block_values(partition.C)
    m = dict(b_law) if b_law is not None else random_law(rng, B)
    atoms = {}
    for b in B:
        f = a_law if a_law is not None else random_law(rng, A)
        g = c_law if c_law is not None else random_law(rng, C)
        for a, c in cartesian(A, C):
            point = partition.join(a, b, c)
            if region_contains(region, point):
                mass = m.get(b, 0) * f.get(a, 0) * g.get(c, 0)
                if mass:
                    atoms[point] = mass
    if not atoms:
        raise EmptyRegionOnGrid("region contains no grid point with positive mass")
    return FiniteDistribution(atoms, grid.dimension, normalize=True)


def gen_perturbed(
    Y: FiniteDistribution,
    slab: Slab,
    epsilon: Fraction,
    partition: BlockPartition,
    *,
    balanced: bool = True,
) -> FiniteDistribution:
    """Shift mass on the slab corners by +-epsilon.

    Balanced mode adds epsilon on (a,b,c), (a',b,c') and removes it from
    (a,b,c'), (a',b,c), keeping the slice's row and column sums.  Unbalanced
    mode only moves epsilon from (a,b,c') to (a,b,c).
    """
    epsilon = Fraction(epsilon)
    corners = slab.corners(partition)
    if any(p not in Y.atoms for p in corners):
        raise SlabNotInSupport(f"slab corners {corners} not all in the support")
    if balanced:
        delta = {corners[0]: epsilon, corners[1]: epsilon, corners[2]: -epsilon, corners[3]: -epsilon}
    else:
        delta = {corners[0]: epsilon, corners[2]: -epsilon}
    atoms = dict(Y.atoms)
    for p, d in delta.items():
        atoms[p] += d
        if atoms[p] <= 0:
            raise MassWouldGoNonpositive(f"mass at {p} would become {atoms[p]}")
    return FiniteDistribution(atoms, Y.dimension)


def _random_arm_values(rng: random.Random, size: int, count: int, threshold: Fraction) -> list:
    pool = [v * threshold for v in L1_POOL + L2_POOL]
    high = [v * threshold for v in L2_POOL]
    chosen: set = set()
    attempts = 0
    while len(chosen) < count:
        attempts += 1
        if attempts > 10_000:
            raise GeneratorError(f"cannot draw {count} distinct arm values of size {size}")
        coords = [rng.choice(pool) for _ in range(size)]
        coords[rng.randrange(size)] = rng.choice(high)
        chosen.add(tuple(coords))
    return sorted(chosen)


def gen_cross(
    seed: Union[int, str, random.Random],
    partition: BlockPartition,
    arms: Mapping[str, Union[int, Sequence]],
    threshold: Fraction = Fraction(1),
    *,
    uniform: bool = False,
) -> FiniteDistribution:
    """Random law on a cross support.

    ``arms`` maps block names "A", "B", "C" to an atom count or an explicit
    list of block values (each must classify L2).  ``uniform`` puts equal
    mass on every atom.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    threshold = Fraction(threshold)
    region = CrossRegion(partition, threshold)
    zero = {n: tuple(Fraction(0) for _ in idx) for n, idx in zip("ABC", partition.blocks())}
    points = []
    for name, arm in arms.items():
        if name not in "ABC" or not zero.get(name):
            if arm:
                raise GeneratorError(f"no block {name!r} to host an arm")
            continue
        size = len(zero[name])
        if isinstance(arm, int):
            if arm < 0:
                raise GeneratorError("arm atom count must be nonnegative")
            values = _random_arm_values(rng, size, arm, threshold) if arm else []
        else:
            values = [as_point(v) for v in arm]
        for v in values:
            blocks = dict(zero)
            blocks[name] = v
            point = partition.join(blocks["A"], blocks["B"], blocks["C"])
            if not region_contains(region, point):
                raise GeneratorError(f"arm value {v} for block {name} is not in L2")
            points.append(point)
    if not points:
        raise GeneratorError("cross law needs at least one arm atom")
    if len(set(points)) != len(points):
        raise GeneratorError("duplicate arm atoms")
    if uniform:
        return FiniteDistribution({p: Fraction(1, len(points)) for p in points}, partition.dimension)
    arm_weights = {name: rng.randint(1, MAX_WEIGHT) for name in "ABC"}
    atoms = {}
    for p in points:
        name = next(n for n, v in zip("ABC", partition.split(p)) if v and any(v))
        atoms[p] = Fraction(arm_weights[name] * rng.randint(1, MAX_WEIGHT))
    return FiniteDistribution(atoms, partition.dimension, normalize=True)


def pareto_cell_probabilities(tail_grid: Sequence) -> dict:
    """P(X in [x_i, x_{i+1}) | X >= x_1) for standard Pareto X; last cell open."""
    xs = sorted(parse_rat(x) for x in tail_grid)
    if len(set(xs)) != len(xs) or not xs or xs[0] <= 1:
        raise GeneratorError("tail grid values must be distinct and > 1")
    survival = [1 / x for x in xs] + [Fraction(0)]
    return {x: (survival[i] - survival[i + 1]) * xs[0] for i, x in enumerate(xs)}


def gen_pareto_axes(tail_grid: Sequence, arm_weight: Fraction) -> FiniteDistribution:
    """Two-axis law: (x, 0) w.p. arm_weight * cell(x), (0, x) w.p. (1 - arm_weight) * cell(x)."""
    arm_weight = parse_rat(arm_weight)
    if not 0 < arm_weight <= 1:
        raise GeneratorError("arm weight must lie in (0, 1]")
    cells = pareto_cell_probabilities(tail_grid)
    atoms = {}
    for x, q in cells.items():
        atoms[(x, Fraction(0))] = arm_weight * q
        atoms[(Fraction(0), x)] = (1 - arm_weight) * q
    return FiniteDistribution(atoms, 2)


def default_region(name: str, partition: BlockPartition, threshold: Fraction = Fraction(1)) -> Region:
    if name == "eh":
        return EHRegion(threshold)
    if name == "cross":
        return CrossRegion(partition, threshold)
    raise GeneratorError(f"unknown region name {name!r}")
