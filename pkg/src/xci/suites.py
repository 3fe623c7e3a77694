"""Seeded equivalence suites for EH-grid and cross supports.

Each trial derives its own ``random.Random`` from ``f"{seed}-{shape}-{i}"``
so trials are independent of execution order and can run in a process pool.
"""

from __future__ import annotations

import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .checks import (
    CIVerdict,
    ViolatingSlab,
    check_eh_ci,
    check_inner_ci,
    check_inner_ci_bruteforce,
    check_outer_ci,
    recheck_certificate,
)
from .dist import BlockPartition, FiniteDistribution, dist_to_dict, format_rat
from .errors import EnumerationTooLarge, OuterCheckFailed, XCIError
from .generators import GridSpec, gen_cross, gen_perturbed, gen_product_ci
from .geometry import CrossRegion, EHRegion, Region, enumerate_slabs, region_to_dict
from .witness import build_outer_witness_generic, build_prop1_witness, build_prop2_witness

NOTIONS = ("eh", "inner", "outer")


@dataclass
class InstanceResult:
    trial: int
    family: str
    dist: FiniteDistribution
    partition: BlockPartition
    region: Region
    verdicts: dict
    witness_ok: Optional[bool] = None
    lambda_agrees: Optional[bool] = None
    certificates_ok: bool = True
    generic_ok: bool = True
    injected_slab_ok: Optional[bool] = None
    notes: list = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return len({self.verdicts[n].holds for n in NOTIONS}) == 1

    @property
    def all_true(self) -> bool:
        return all(self.verdicts[n].holds for n in NOTIONS)

    def dump(self) -> dict:
        return {
            "trial": self.trial,
            "family": self.family,
            "partition": str(self.partition),
            "region": region_to_dict(self.region),
            "distribution": dist_to_dict(self.dist),
            "verdicts": {n: v.to_dict() for n, v in self.verdicts.items()},
            "witnessOk": self.witness_ok,
            "lambdaAgrees": self.lambda_agrees,
            "certificatesOk": self.certificates_ok,
            "genericOk": self.generic_ok,
            "notes": self.notes,
        }


@dataclass
class SuiteReport:
    shape: str
    seed: str
    trials: int
    results: list
    elapsed: float = 0.0
    expect_all_true: bool = False

    def _bad(self, r: InstanceResult) -> bool:
        return (
            not r.agree
            or (self.expect_all_true and not r.all_true)
            or r.witness_ok is False
            or not r.certificates_ok
            or not r.generic_ok
            or r.injected_slab_ok is False
        )

    @property
    def tallies(self) -> dict:
        rs = self.results
        return {
            "instances": len(rs),
            "agreements": sum(r.agree for r in rs),
            "disagreements": sum(not r.agree for r in rs),
            "ciTrue": sum(r.all_true for r in rs),
            "witnessFailures": sum(r.witness_ok is False for r in rs),
            "certificateFailures": sum(not r.certificates_ok for r in rs),
            "genericContractFailures": sum(not r.generic_ok for r in rs),
            "injectedSlabFailures": sum(r.injected_slab_ok is False for r in rs),
            "lambdaMismatches": sum(r.lambda_agrees is False for r in rs),
        }

    @property
    def ok(self) -> bool:
        return not any(self._bad(r) for r in self.results)

    def to_dict(self) -> dict:
        return {
            "shape": self.shape,
            "seed": self.seed,
            "trials": self.trials,
            "ok": self.ok,
            "tallies": self.tallies,
            "elapsedSeconds": round(self.elapsed, 3),
            "failures": [r.dump() for r in self.results if self._bad(r)],
            "lambdaMismatches": [
                r.dump() for r in self.results if r.lambda_agrees is False
            ],
        }


def evaluate(
    dist: FiniteDistribution,
    partition: BlockPartition,
    region: Region,
    threshold: Fraction,
    *,
    with_bruteforce: bool = False,
) -> dict:
    verdicts = {
        "eh": check_eh_ci(dist, partition, threshold),
        "inner": check_inner_ci(dist, partition, region),
        "outer": check_outer_ci(dist, partition),
    }
    if with_bruteforce:
        try:
            verdicts["inner-bf"] = check_inner_ci_bruteforce(dist, partition, region)
        except EnumerationTooLarge:
            pass
    return verdicts


def _audit(result: InstanceResult) -> None:
    """Certificate re-evaluation and the generic-builder contract."""
    for name, verdict in result.verdicts.items():
        if not verdict.holds and not recheck_certificate(
            verdict, result.dist, result.partition, result.region
        ):
            result.certificates_ok = False
            result.notes.append(f"{name} certificate does not recheck")
    outer: CIVerdict = result.verdicts["outer"]
    try:
        w = build_outer_witness_generic(result.dist, result.partition)
        result.generic_ok = outer.holds and w.verified
    except OuterCheckFailed as exc:
        result.generic_ok = (not outer.holds) and exc.certificate == outer.certificate
    except XCIError as exc:
        result.generic_ok = False
        result.notes.append(f"generic builder: {exc}")
    if not result.generic_ok:
        result.notes.append("generic builder contract violated")


def _perturb(rng: random.Random, Y: FiniteDistribution, partition, region) -> tuple:
    slabs = enumerate_slabs(Y.support, partition, region)
    slab = rng.choice(slabs)
    corners = slab.corners(partition)
    room = min(Y.mass(corners[2]), Y.mass(corners[3]))
    eps = room * Fraction(rng.randint(1, 3), 4)
    return gen_perturbed(Y, slab, eps, partition), slab


def eh_trial(args: tuple) -> list:
    seed, i, dim, sizes, threshold, with_bf = args
    rng = random.Random(f"{seed}-eh-{i}")
    partition = BlockPartition.default(dim)
    region = EHRegion(threshold)
    while True:
        grid = GridSpec.random(rng, dim, sizes, threshold)
        Y = gen_product_ci(rng, grid, partition, region)
        if enumerate_slabs(Y.support, partition, region):
            break
    Z, slab = _perturb(rng, Y, partition, region)
    out = []
    for family, dist in (("product-ci", Y), ("perturbed", Z)):
        r = InstanceResult(
            i, family, dist, partition, region,
            evaluate(dist, partition, region, threshold, with_bruteforce=with_bf),
        )
        if family == "perturbed":
            r.injected_slab_ok = ViolatingSlab(slab, Fraction(0)).recheck(dist, partition, region)
        if r.all_true:
            try:
                w = build_prop1_witness(dist, partition, threshold)
                r.witness_ok = w.verified
                r.lambda_agrees = w.lambda_agrees
            except XCIError as exc:
                r.witness_ok = False
                r.notes.append(f"prop1 builder: {type(exc).__name__}: {exc}")
        _audit(r)
        out.append(r)
    return out


def cross_trial(args: tuple) -> list:
    seed, i, dims, max_arm, threshold, with_bf = args
    rng = random.Random(f"{seed}-cross-{i}")
    dim = rng.choice(dims)
    partition = BlockPartition.default(dim)
    names = [n for n, idx in zip("ABC", partition.blocks()) if idx]
    if rng.random() < 0.25:
        arms = {n: 0 for n in names}
        arms[rng.choice(names)] = rng.randint(1, max_arm)
    else:
        arms = {n: rng.randint(1, max_arm) for n in names}
    dist = gen_cross(rng, partition, arms, threshold, uniform=rng.random() < 0.2)
    region = CrossRegion(partition, threshold)
    r = InstanceResult(
        i, "cross", dist, partition, region,
        evaluate(dist, partition, region, threshold, with_bruteforce=with_bf),
    )
    try:
        w = build_prop2_witness(dist, partition, threshold)
        r.witness_ok = w.verified
        r.notes.append(
            "p=" + ",".join("-" if p is None else format_rat(p) for p in w.p_params)
        )
    except XCIError as exc:
        r.witness_ok = False
        r.notes.append(f"prop2 builder: {type(exc).__name__}: {exc}")
    _audit(r)
    return [r]


def _run(fn, jobs_args: list, jobs: int) -> list:
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(fn, jobs_args))
    else:
        chunks = [fn(a) for a in jobs_args]
    return [r for chunk in chunks for r in chunk]


def run_eh_suite(
    trials: int,
    seed: int | str = 1,
    *,
    dim: int = 2,
    sizes: Optional[tuple] = None,
    threshold: Fraction = Fraction(1),
    with_bruteforce: bool = False,
    jobs: int = 1,
) -> SuiteReport:
    """One restricted product and one perturbation of it per trial."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if sizes is None:
        sizes = (2, 4) if dim == 2 else (2, 3)
    start = time.perf_counter()
    args = [(seed, i, dim, sizes, Fraction(threshold), with_bruteforce) for i in range(trials)]
    results = _run(eh_trial, args, jobs)
    return SuiteReport("eh", str(seed), trials, results, time.perf_counter() - start)


def run_cross_suite(
    trials: int,
    seed: int | str = 1,
    *,
    dims: tuple = (2, 3),
    max_arm: int = 5,
    threshold: Fraction = Fraction(1),
    with_bruteforce: bool = False,
    jobs: int = 1,
) -> SuiteReport:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    start = time.perf_counter()
    args = [(seed, i, dims, max_arm, Fraction(threshold), with_bruteforce) for i in range(trials)]
    results = _run(cross_trial, args, jobs)
    return SuiteReport(
        "cross", str(seed), trials, results, time.perf_counter() - start, expect_all_true=True
    )
