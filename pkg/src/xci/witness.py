"""Outer-independence witnesses: distributions W on a product support with
(W | W in supp Y) = Y and W_A independent of W_C given W_B.

Three builders are provided: the normalising-constant extension for EH-type
supports, the zero-or-arm mixture for cross supports, and a generic builder
based on per-slice rank-1 completion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as cartesian
from typing import Optional

from .checks import check_eh_ci, check_outer_ci, check_plain_ci, fit_rank_one, slices
from .dist import (
    BlockPartition,
    FiniteDistribution,
    block_project,
    block_values,
    condition,
    dist_to_dict,
    format_rat,
)
from .errors import (
    CornerMassZero,
    IncompleteGridSupport,
    OuterCheckFailed,
    PreconditionEHFailed,
    SupportNotCross,
    SupportOutsideRegion,
    VerificationFailed,
    ZeroProbabilityEvent,
)
from .geometry import BlockClass, CrossRegion, EHRegion, classify_block, region_contains


@dataclass(frozen=True)
class WitnessReport:
    dimension_ok: bool
    product_support: bool
    conditional_law: bool
    ci: bool

    @property
    def ok(self) -> bool:
        return self.dimension_ok and self.product_support and self.conditional_law and self.ci

    def to_dict(self) -> dict:
        return {
            "dimension_ok": self.dimension_ok,
            "product_support": self.product_support,
            "conditional_law": self.conditional_law,
            "ci": self.ci,
        }


@dataclass
class Witness:
    w: FiniteDistribution
    method: str
    lam: Optional[Fraction] = None
    lambda_closed_form: Optional[Fraction] = None
    p_params: Optional[tuple] = None  # (p_A, p_B or None, p_C)
    arm_masses: Optional[tuple] = None  # (alpha,) or (alpha_1, alpha_2)
    support_mass: Optional[Fraction] = None  # P(W in supp Y)
    verified: bool = False
    report: Optional[WitnessReport] = None
    extras: dict = field(default_factory=dict)

    @property
    def lambda_agrees(self) -> Optional[bool]:
        if self.lam is None:
            return None
        return self.lam == self.lambda_closed_form

    def to_dict(self) -> dict:
        out = dist_to_dict(self.w)
        out["method"] = self.method
        if self.lam is not None:
            out["lambda"] = format_rat(self.lam)
            out["lambdaClosedForm"] = (
                None if self.lambda_closed_form is None else format_rat(self.lambda_closed_form)
            )
        if self.p_params is not None:
            out["p"] = [None if p is None else format_rat(p) for p in self.p_params]
            out["alpha"] = [format_rat(a) for a in self.arm_masses]
        if self.support_mass is not None:
            out["supportMass"] = format_rat(self.support_mass)
        out["verified"] = self.verified
        if self.report is not None:
            out["report"] = self.report.to_dict()
        return out


def is_product_support(support, partition: BlockPartition) -> bool:
    triples = {partition.split(p) for p in support}
    axes = [{t[i] for t in triples} for i in range(3)]
    return len(triples) == len(axes[0]) * len(axes[1]) * len(axes[2])


def verify_witness(
    w: Witness | FiniteDistribution, Y: FiniteDistribution, partition: BlockPartition
) -> WitnessReport:
    """Exact check of the three outer-independence clauses for candidate ``w``."""
    dist = w.w if isinstance(w, Witness) else w
    if dist.dimension != Y.dimension or partition.dimension != Y.dimension:
        return WitnessReport(False, False, False, False)
    product_ok = is_product_support(dist.support, partition) and Y.support <= dist.support
    try:
        law_ok = condition(dist, Y.support.__contains__) == Y
    except ZeroProbabilityEvent:
        law_ok = False
    ci_ok = check_plain_ci(dist, partition).holds
    report = WitnessReport(True, product_ok, law_ok, ci_ok)
    if isinstance(w, Witness):
        w.report = report
        w.verified = report.ok
    return report


def _finish(witness: Witness, Y: FiniteDistribution, partition: BlockPartition) -> Witness:
    report = verify_witness(witness, Y, partition)
    if not report.ok:
        raise VerificationFailed(
            f"{witness.method} witness failed verification: {report.to_dict()}",
            certificate=report,
        )
    return witness


# -- EH-type supports ---------------------------------------------------------


def _aggregate(triples: dict, threshold: Fraction, ka, kb, kc) -> Fraction:
    return sum(
        (
            m
            for (a, b, c), m in triples.items()
            if classify_block(a, threshold) is ka
            and classify_block(b, threshold) is kb
            and classify_block(c, threshold) is kc
        ),
        Fraction(0),
    )


def prop1_closed_form_lambda(
    Y: FiniteDistribution, partition: BlockPartition, threshold: Fraction = Fraction(1)
) -> Optional[Fraction]:
    """1 / (1 + P(L1,L1,L2) P(L2,L1,L1) / P(L2,L1,L2)), blocks ordered (A, B, C).

    With B empty every B value is the empty tuple, which classifies L1, so
    the B aggregate drops out.  Returns None when the corner term is zero but
    the numerator is not.
    """
    L1, L2 = BlockClass.L1, BlockClass.L2
    triples = block_project(Y, partition)
    x = _aggregate(triples, threshold, L1, L1, L2)
    y = _aggregate(triples, threshold, L2, L1, L1)
    z = _aggregate(triples, threshold, L2, L1, L2)
    if x * y == 0:
        return Fraction(1)
    if z == 0:
        return None
    return 1 / (1 + x * y / z)


def build_prop1_witness(
    Y: FiniteDistribution, partition: BlockPartition, threshold: Fraction = Fraction(1)
) -> Witness:
    """Extend Y from the EH region to the full grid product.

    Cells with some block in L2 keep mass lambda * y; each all-L1 cell of
    slice b gets lambda * y(a, b, L2_C) * y(L2_A, b, c) / y(L2_A, b, L2_C).
    lambda comes from normalisation; the aggregated closed form is recorded
    alongside it in ``lambda_closed_form``.
    """
    threshold = Fraction(threshold)
    partition.check(Y.dimension)
    eh = check_eh_ci(Y, partition, threshold)
    if not eh.holds:
        raise PreconditionEHFailed("Y fails exceedance CI", certificate=eh.certificate)
    region = EHRegion(threshold)
    for p in Y:
        if not region_contains(region, p):
            raise SupportOutsideRegion(p)

    A, B, C = block_values(Y, partition)
    triples = block_project(Y, partition)
    for a, b, c in cartesian(A, B, C):
        if (a, b, c) not in triples and region_contains(region, partition.join(a, b, c)):
            raise IncompleteGridSupport(
                f"in-region grid cell {partition.join(a, b, c)} has no mass"
            )

    cls = lambda v: classify_block(v, threshold)  # noqa: E731
    L1, L2 = BlockClass.L1, BlockClass.L2
    a1 = [a for a in A if cls(a) is L1]
    a2 = [a for a in A if cls(a) is L2]
    c1 = [c for c in C if cls(c) is L1]
    c2 = [c for c in C if cls(c) is L2]

    unnorm = dict(triples)
    for b in B:
        if cls(b) is L2 or not a1 or not c1:
            continue
        corner = sum((triples.get((a, b, c), Fraction(0)) for a in a2 for c in c2), Fraction(0))
        if corner == 0:
            raise CornerMassZero(f"P(Y_A in L2, Y_B = {b}, Y_C in L2) is zero")
        row = {a: sum((triples.get((a, b, c), Fraction(0)) for c in c2), Fraction(0)) for a in a1}
        col = {c: sum((triples.get((a, b, c), Fraction(0)) for a in a2), Fraction(0)) for c in c1}
        for a in a1:
            for c in c1:
                unnorm[a, b, c] = row[a] * col[c] / corner

    total = sum(unnorm.values(), Fraction(0))
    lam = 1 / total
    w = FiniteDistribution(
        {partition.join(*t): lam * m for t, m in unnorm.items()}, Y.dimension
    )
    witness = Witness(
        w,
        "prop1",
        lam=lam,
        lambda_closed_form=prop1_closed_form_lambda(Y, partition, threshold),
        support_mass=lam,
    )
    return _finish(witness, Y, partition)


# -- cross supports -----------------------------------------------------------


def cross_arms(
    Y: FiniteDistribution, partition: BlockPartition, threshold: Fraction = Fraction(1)
) -> dict:
    """``{block_name: {block_value: mass}}`` for the arms of a cross-supported law."""
    region = CrossRegion(partition, threshold)
    names = [n for n, idx in zip("ABC", partition.blocks()) if idx]
    arms: dict = {n: {} for n in names}
    for p, m in Y.items():
        if not region_contains(region, p):
            raise SupportNotCross(f"point {p} is not on a cross arm")
        for n, v in zip("ABC", partition.split(p)):
            if v and any(x != 0 for x in v):
                arms[n][v] = arms[n].get(v, Fraction(0)) + m
    return arms


def prop2_alpha_conditions(p: tuple) -> tuple:
    """Arm masses implied by mixture weights ``p = (p_A, p_B or None, p_C)``."""
    p_a, p_b, p_c = p
    if p_b is None:
        num = p_a * (1 - p_c)
        return (num / (num + (1 - p_a) * p_c),)
    t_a = p_a * (1 - p_b) * (1 - p_c)
    t_b = (1 - p_a) * p_b * (1 - p_c)
    t_c = (1 - p_a) * (1 - p_b) * p_c
    den = t_a + t_b + t_c
    return (t_a / den, t_b / den)


def build_prop2_witness(
    Y: FiniteDistribution, partition: BlockPartition, threshold: Fraction = Fraction(1)
) -> Witness:
    """Independent blocks, each zero w.p. 1 - p_k, else Y's law on arm k.

    p_k = alpha_k / (1 + alpha_k), so the odds p_k / (1 - p_k) equal the arm
    masses.  All L1 mass of a factor sits at the zero block value.
    """
    threshold = Fraction(threshold)
    partition.check(Y.dimension)
    arms = cross_arms(Y, partition, threshold)
    alpha = {n: sum(arm.values(), Fraction(0)) for n, arm in arms.items()}
    p = {n: a / (1 + a) for n, a in alpha.items()}

    factors = []
    for n, idx in zip("ABC", partition.blocks()):
        if not idx:
            factors.append({(): Fraction(1)})
            continue
        law = {tuple(Fraction(0) for _ in idx): 1 - p[n]}
        for v, m in arms[n].items():
            law[v] = p[n] * m / alpha[n]
        factors.append({v: m for v, m in law.items() if m})

    atoms = {}
    for (a, ma), (b, mb), (c, mc) in cartesian(*(f.items() for f in factors)):
        atoms[partition.join(a, b, c)] = ma * mb * mc
    w = FiniteDistribution(atoms, Y.dimension)

    p_params = (p["A"], p.get("B"), p["C"])
    arm_masses = (alpha["A"],) if "B" not in alpha else (alpha["A"], alpha["B"])
    witness = Witness(
        w,
        "prop2",
        p_params=p_params,
        arm_masses=arm_masses,
        support_mass=w.prob(Y.support.__contains__),
    )
    witness.extras["factors"] = factors
    _finish(witness, Y, partition)
    if prop2_alpha_conditions(p_params) != arm_masses:
        raise VerificationFailed("mixture weights do not reproduce the arm masses")
    if not blocks_independent(w, partition):
        raise VerificationFailed("witness blocks are not mutually independent")
    return witness


def blocks_independent(dist: FiniteDistribution, partition: BlockPartition) -> bool:
    """True iff the law of (W_A, W_B, W_C) is the product of its block marginals."""
    triples = block_project(dist, partition)
    margs: list = [{}, {}, {}]
    for t, m in triples.items():
        for i in range(3):
            margs[i][t[i]] = margs[i].get(t[i], Fraction(0)) + m
    for a, b, c in cartesian(*(sorted(mg) for mg in margs)):
        if triples.get((a, b, c), Fraction(0)) != margs[0][a] * margs[1][b] * margs[2][c]:
            return False
    return True


# -- generic -------------------------------------------------------------------


def build_outer_witness_generic(Y: FiniteDistribution, partition: BlockPartition) -> Witness:
    """Per-slice rank-1 completion over the product of observed block values."""
    partition.check(Y.dimension)
    verdict = check_outer_ci(Y, partition)
    if not verdict.holds:
        raise OuterCheckFailed("pattern is not rank-1 completable", certificate=verdict.certificate)
    A, B, C = block_values(Y, partition)
    per_b = slices(Y, partition)
    unnorm = {}
    for b in B:
        fit = fit_rank_one(per_b.get(b, {}), A, C)
        for a in A:
            for c in C:
                unnorm[a, b, c] = fit.f[a] * fit.g[c]
    total = sum(unnorm.values(), Fraction(0))
    w = FiniteDistribution(
        {partition.join(*t): m / total for t, m in unnorm.items()}, Y.dimension
    )
    witness = Witness(w, "generic", support_mass=1 / total)
    return _finish(witness, Y, partition)


BUILDERS = {
    "prop1": lambda Y, part, t: build_prop1_witness(Y, part, t),
    "prop2": lambda Y, part, t: build_prop2_witness(Y, part, t),
    "generic": lambda Y, part, t: build_outer_witness_generic(Y, part),
}
