"""Exact decision procedures for plain, exceedance (EH), inner and outer CI.

Every negative verdict carries a certificate that can be re-evaluated
against the input with :meth:`Certificate.recheck`.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .dist import BlockPartition, FiniteDistribution, block_project, condition, format_rat
from .errors import SupportOutsideRegion, ZeroProbabilityEvent
from .geometry import (
    Rectangle,
    Region,
    Slab,
    enumerate_rectangles,
    enumerate_slabs,
    region_contains,
)

NOTIONS = ("plain", "eh", "inner", "inner-bf", "outer")


def _fmt(value: tuple) -> list:
    return [format_rat(x) for x in value]


def _ci_sides(triples: dict, a, b, c) -> tuple:
    """(P(a,b,c) * P(b), P(a,b) * P(b,c)) for a block-projected law."""
    p_b = p_ab = p_bc = Fraction(0)
    for (a2, b2, c2), m in triples.items():
        if b2 != b:
            continue
        p_b += m
        if a2 == a:
            p_ab += m
        if c2 == c:
            p_bc += m
    return triples.get((a, b, c), Fraction(0)) * p_b, p_ab * p_bc


@dataclass(frozen=True)
class ViolatingTriple:
    a: tuple
    b: tuple
    c: tuple
    lhs: Fraction
    rhs: Fraction

    def recheck(self, dist: FiniteDistribution, partition: BlockPartition) -> bool:
        lhs, rhs = _ci_sides(block_project(dist, partition), self.a, self.b, self.c)
        return lhs != rhs

    def to_dict(self) -> dict:
        return {
            "type": "triple",
            "a": _fmt(self.a),
            "b": _fmt(self.b),
            "c": _fmt(self.c),
            "lhs": format_rat(self.lhs),
            "rhs": format_rat(self.rhs),
        }


@dataclass(frozen=True)
class ExceedanceViolation:
    """Plain CI fails after conditioning on ``Y_k > threshold`` (k is 0-based)."""

    k: int
    threshold: Fraction
    triple: ViolatingTriple

    def recheck(self, dist: FiniteDistribution, partition: BlockPartition) -> bool:
        try:
            cond = condition(dist, lambda p: p[self.k] > self.threshold)
        except ZeroProbabilityEvent:
            return False
        return self.triple.recheck(cond, partition)

    def to_dict(self) -> dict:
        return {
            "type": "exceedance",
            "coordinate": self.k + 1,
            "threshold": format_rat(self.threshold),
            "triple": self.triple.to_dict(),
        }


@dataclass(frozen=True)
class ViolatingSlab:
    slab: Slab
    minor: Fraction

    def recheck(
        self,
        dist: FiniteDistribution,
        partition: BlockPartition,
        region: Optional[Region] = None,
    ) -> bool:
        corners = self.slab.corners(partition)
        if region is not None and not all(region_contains(region, p) for p in corners):
            return False
        m = [dist.mass(p) for p in corners]
        return m[0] * m[1] - m[2] * m[3] != 0

    def to_dict(self) -> dict:
        s = self.slab
        return {
            "type": "slab",
            "a": _fmt(s.a),
            "aPrime": _fmt(s.a2),
            "b": _fmt(s.b),
            "c": _fmt(s.c),
            "cPrime": _fmt(s.c2),
            "minor": format_rat(self.minor),
        }


@dataclass(frozen=True)
class ViolatingRectangle:
    rectangle: Rectangle
    triple: ViolatingTriple

    def recheck(
        self,
        dist: FiniteDistribution,
        partition: BlockPartition,
        region: Optional[Region] = None,
    ) -> bool:
        pts = self.rectangle.points(partition)
        if region is not None and not all(region_contains(region, p) for p in pts):
            return False
        members = frozenset(pts)
        try:
            cond = condition(dist, members.__contains__)
        except ZeroProbabilityEvent:
            return False
        return self.triple.recheck(cond, partition)

    def to_dict(self) -> dict:
        r = self.rectangle
        return {
            "type": "rectangle",
            "S_A": [_fmt(v) for v in r.S_A],
            "S_B": [_fmt(v) for v in r.S_B],
            "S_C": [_fmt(v) for v in r.S_C],
            "triple": self.triple.to_dict(),
        }


@dataclass(frozen=True)
class InconsistentCycle:
    """Closed walk a0-c0-a1-c1-... through observed cells of one B-slice.

    ``cells`` lists (a, c) pairs in walk order; consecutive cells share an A
    or C value alternately.  ``ratio`` is the alternating product
    cells[0] / cells[1] * cells[2] / ... which must equal 1 for a consistent
    rank-1 pattern.
    """

    b: tuple
    cells: tuple
    ratio: Fraction

    def recheck(self, dist: FiniteDistribution, partition: BlockPartition) -> bool:
        triples = block_project(dist, partition)
        n = len(self.cells)
        if n < 4 or n % 2:
            return False
        for i, (a, c) in enumerate(self.cells):
            a2, c2 = self.cells[(i + 1) % n]
            if (a, self.b, c) not in triples:
                return False
            # cell i shares its C value with cell i+1 when i is even, its A value when odd
            if (c != c2) if i % 2 == 0 else (a != a2):
                return False
        ratio = Fraction(1)
        for i, (a, c) in enumerate(self.cells):
            m = triples[(a, self.b, c)]
            ratio = ratio * m if i % 2 == 0 else ratio / m
        return ratio != 1

    def to_dict(self) -> dict:
        return {
            "type": "cycle",
            "b": _fmt(self.b),
            "cells": [{"a": _fmt(a), "c": _fmt(c)} for a, c in self.cells],
            "ratio": format_rat(self.ratio),
        }


Certificate = Union[
    ViolatingTriple, ExceedanceViolation, ViolatingSlab, ViolatingRectangle, InconsistentCycle
]


@dataclass(frozen=True)
class CIVerdict:
    notion: str
    holds: bool
    certificate: Optional[Certificate] = None

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        return {
            "notion": self.notion,
            "holds": self.holds,
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
        }


def _require_in_region(dist: FiniteDistribution, region: Region) -> None:
    for p in dist:
        if not region_contains(region, p):
            raise SupportOutsideRegion(p)


def _plain(triples: dict) -> Optional[ViolatingTriple]:
    A, B, C = (sorted({t[i] for t in triples}) for i in range(3))
    p_b: dict = defaultdict(Fraction)
    p_ab: dict = defaultdict(Fraction)
    p_bc: dict = defaultdict(Fraction)
    for (a, b, c), m in triples.items():
        p_b[b] += m
        p_ab[a, b] += m
        p_bc[b, c] += m
    for b in B:
        for a in A:
            for c in C:
                lhs = triples.get((a, b, c), Fraction(0)) * p_b[b]
                rhs = p_ab[a, b] * p_bc[b, c]
                if lhs != rhs:
                    return ViolatingTriple(a, b, c, lhs, rhs)
    return None


def check_plain_ci(dist: FiniteDistribution, partition: BlockPartition) -> CIVerdict:
    """Y_A independent of Y_C given Y_B, checked cell by cell."""
    bad = _plain(block_project(dist, partition))
    return CIVerdict("plain", bad is None, bad)


def check_eh_ci(
    dist: FiniteDistribution, partition: BlockPartition, threshold: Fraction = Fraction(1)
) -> CIVerdict:
    """Plain CI given Y_B after conditioning on each exceedance Y_k > threshold.

    Exceedance events of probability zero impose nothing and are skipped.
    """
    partition.check(dist.dimension)
    threshold = Fraction(threshold)
    for k in range(dist.dimension):
        try:
            cond = condition(dist, lambda p, k=k: p[k] > threshold)
        except ZeroProbabilityEvent:
            continue
        bad = _plain(block_project(cond, partition))
        if bad is not None:
            return CIVerdict("eh", False, ExceedanceViolation(k, threshold, bad))
    return CIVerdict("eh", True)


def check_inner_ci(
    dist: FiniteDistribution, partition: BlockPartition, region: Region
) -> CIVerdict:
    """Inner CI via vanishing 2x2 minors on every in-region slab."""
    partition.check(dist.dimension)
    _require_in_region(dist, region)
    for slab in enumerate_slabs(dist.support, partition, region):
        m = [dist.mass(p) for p in slab.corners(partition)]
        minor = m[0] * m[1] - m[2] * m[3]
        if minor != 0:
            return CIVerdict("inner", False, ViolatingSlab(slab, minor))
    return CIVerdict("inner", True)


def check_inner_ci_bruteforce(
    dist: FiniteDistribution,
    partition: BlockPartition,
    region: Region,
    cap: Optional[int] = None,
) -> CIVerdict:
    """Definition-level inner CI: plain CI given every positive in-region rectangle."""
    partition.check(dist.dimension)
    _require_in_region(dist, region)
    triples = block_project(dist, partition)
    for rect in enumerate_rectangles(dist.support, partition, region, cap):
        sub = {t: m for t, m in triples.items() if rect.contains(*t)}
        total = sum(sub.values(), Fraction(0))
        if total == 0:
            continue
        bad = _plain({t: m / total for t, m in sub.items()})
        if bad is not None:
            return CIVerdict("inner-bf", False, ViolatingRectangle(rect, bad))
    return CIVerdict("inner-bf", True)


# -- rank-1 completion --------------------------------------------------------


@dataclass
class RankOneFit:
    """Spanning-forest factorisation ``cells[a, c] == f[a] * g[c]`` of one slice."""

    f: dict
    g: dict
    tree_edges: list
    conflict: Optional[tuple] = None  # (cycle cells, alternating ratio)
    components: int = 0


def _tree_path(parent: dict, node) -> list:
    path = [node]
    while parent[node] is not None:
        node = parent[node]
        path.append(node)
    return path


def fit_rank_one(cells: dict, a_values, c_values) -> RankOneFit:
    """Propagate f, g along a Kruskal forest over canonically ordered edges.

    Isolated values and component roots get factor 1.  The first non-tree edge
    (in edge order) that breaks ``f * g == mass`` yields the conflict cycle.
    """
    nodes = [("A", a) for a in a_values] + [("C", c) for c in c_values]
    uf = {n: n for n in nodes}

    def find(n):
        while uf[n] != n:
            uf[n] = uf[uf[n]]
            n = uf[n]
        return n

    edges = sorted(cells)
    tree: list = []
    adj: dict = defaultdict(list)
    for a, c in edges:
        ra, rc = find(("A", a)), find(("C", c))
        if ra != rc:
            uf[ra] = rc
            tree.append((a, c))
            adj["A", a].append(("C", c))
            adj["C", c].append(("A", a))

    f: dict = {}
    g: dict = {}
    parent: dict = {}
    components = 0
    for root in nodes:  # A nodes first, each in sorted order
        if root in parent:
            continue
        components += 1
        parent[root] = None
        (f if root[0] == "A" else g)[root[1]] = Fraction(1)
        queue = deque([root])
        while queue:
            node = queue.popleft()
            for nxt in sorted(adj[node]):
                if nxt in parent:
                    continue
                parent[nxt] = node
                if node[0] == "A":
                    g[nxt[1]] = cells[node[1], nxt[1]] / f[node[1]]
                else:
                    f[nxt[1]] = cells[nxt[1], node[1]] / g[node[1]]
                queue.append(nxt)

    fit = RankOneFit(f, g, tree, components=components)
    tree_set = set(tree)
    for a, c in edges:
        if (a, c) in tree_set or f[a] * g[c] == cells[a, c]:
            continue
        up_a = _tree_path(parent, ("A", a))
        up_c = _tree_path(parent, ("C", c))
        common = set(up_a) & set(up_c)
        head = [n for n in up_a if n not in common]
        tail = [n for n in up_c if n not in common]
        lca = next(n for n in up_a if n in common)
        walk = head + [lca] + tail[::-1]  # ("A", a) ... ("C", c)
        cyc = []
        for n1, n2 in zip(walk, walk[1:] + walk[:1]):
            pair = (n1[1], n2[1]) if n1[0] == "A" else (n2[1], n1[1])
            cyc.append(pair)
        ratio = Fraction(1)
        for i, cell in enumerate(cyc):
            ratio = ratio * cells[cell] if i % 2 == 0 else ratio / cells[cell]
        fit.conflict = (tuple(cyc), ratio)
        break
    return fit


def slices(dist: FiniteDistribution, partition: BlockPartition) -> dict:
    """``{b: {(a, c): mass}}`` over observed B-values."""
    out: dict = defaultdict(dict)
    for (a, b, c), m in block_project(dist, partition).items():
        out[b][a, c] = m
    return dict(sorted(out.items()))


def check_outer_ci(dist: FiniteDistribution, partition: BlockPartition) -> CIVerdict:
    """Outer CI with the region taken as supp(dist).

    Holds iff every B-slice pattern admits a positive rank-1 completion,
    i.e. every cycle of observed cells has alternating product 1.
    """
    partition.check(dist.dimension)
    for b, cells in slices(dist, partition).items():
        a_vals = sorted({a for a, _ in cells})
        c_vals = sorted({c for _, c in cells})
        fit = fit_rank_one(cells, a_vals, c_vals)
        if fit.conflict is not None:
            cyc, ratio = fit.conflict
            return CIVerdict("outer", False, InconsistentCycle(b, cyc, ratio))
    return CIVerdict("outer", True)


def recheck_certificate(
    verdict: CIVerdict,
    dist: FiniteDistribution,
    partition: BlockPartition,
    region: Optional[Region] = None,
) -> bool:
    """True iff a negative verdict's certificate is a genuine violation on ``dist``."""
    cert = verdict.certificate
    if verdict.holds or cert is None:
        return False
    if isinstance(cert, (ViolatingSlab, ViolatingRectangle)):
        return cert.recheck(dist, partition, region)
    return cert.recheck(dist, partition)
