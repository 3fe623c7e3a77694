"""Acceptance criteria, each at exact (zero) tolerance.

Every test records one PASS/FAIL line; the lines are echoed in the pytest
terminal summary and printed as the test runs (visible with ``-s``).
Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import random
import time
from fractions import Fraction as F
from itertools import combinations

import pytest

from xci.checks import (
    check_eh_ci,
    check_inner_ci,
    check_inner_ci_bruteforce,
    check_outer_ci,
    recheck_certificate,
)
from xci.dist import BlockPartition, FiniteDistribution
from xci.generators import gen_pareto_axes
from xci.geometry import EHRegion, ExplicitSet
from xci.suites import run_cross_suite, run_eh_suite
from xci.witness import build_prop1_witness, build_prop2_witness, verify_witness

from conftest import ACCEPTANCE_LINES, U, make_i1, make_i3


def record(label: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture(scope="module")
def suite_b_empty():
    # 100 trials x (one product, one perturbation) = 200 instances
    return run_eh_suite(100, seed="acceptance-1", dim=2, sizes=(2, 4))


@pytest.fixture(scope="module")
def suite_general_b():
    return run_eh_suite(50, seed="acceptance-2", dim=3, sizes=(2, 3))


@pytest.fixture(scope="module")
def suite_cross():
    return run_cross_suite(100, seed="acceptance-3", dims=(2, 3), max_arm=5)


def _agreement(report):
    return [r for r in report.results if not r.agree]


def test_criterion_1_prop1_b_empty(suite_b_empty):
    rep = suite_b_empty
    bad = _agreement(rep)
    families = {f: sum(r.family == f for r in rep.results) for f in ("product-ci", "perturbed")}
    ok = (
        len(rep.results) == 200
        and families == {"product-ci": 100, "perturbed": 100}
        and not bad
        and rep.elapsed < 60
    )
    record(
        "criterion 1 (EH-grid equivalence, B empty)",
        ok,
        f"{len(rep.results) - len(bad)}/{len(rep.results)} agree, {families}, {rep.elapsed:.2f}s",
    )
    assert ok


def test_criterion_2_prop1_general_b(suite_general_b):
    rep = suite_general_b
    bad = _agreement(rep)
    ci_true = [r for r in rep.results if r.all_true]
    witness_ok = all(
        build_prop1_witness(r.dist, r.partition).verified for r in ci_true
    )
    ok = len(rep.results) == 100 and not bad and witness_ok and rep.elapsed < 120
    record(
        "criterion 2 (EH-grid equivalence, general B; agreement + witness)",
        ok,
        f"{len(rep.results) - len(bad)}/100 agree, {len(ci_true)} CI-true witnesses verified={witness_ok}, "
        f"{rep.elapsed:.2f}s",
    )
    assert ok


@pytest.mark.xfail(
    strict=True,
    reason="aggregated closed-form lambda differs from the normalising lambda when "
    "two or more L1 values of Y_B carry mass; see the decisions ledger",
)
def test_criterion_2_lambda_duality(suite_general_b):
    ci_true = [r for r in suite_general_b.results if r.all_true]
    mismatches = []
    for r in ci_true:
        w = build_prop1_witness(r.dist, r.partition)
        if w.lam != w.lambda_closed_form:
            mismatches.append((r.trial, w.lam, w.lambda_closed_form))
    ok = not mismatches
    detail = f"{len(ci_true) - len(mismatches)}/{len(ci_true)} closed-form lambda == normalised lambda"
    if mismatches:
        t, a, b = mismatches[0]
        detail += f"; first mismatch trial {t}: {a} vs {b}"
    record("criterion 2 (lambda closed form == normalisation)", ok, detail)
    assert ok


def _arm_masses(Y, partition):
    """Per-block arm mass read straight off the atoms."""
    out = {}
    for name, idx in zip("ABC", partition.blocks()):
        if idx:
            out[name] = sum(m for p, m in Y.items() if any(p[i] != 0 for i in idx))
    return out


def test_criterion_3_prop2(suite_cross):
    rep = suite_cross
    problems = []
    single_arm = 0
    dims = set()
    for r in rep.results:
        dims.add(r.dist.dimension)
        if not r.all_true:
            problems.append((r.trial, "checks"))
            continue
        w = build_prop2_witness(r.dist, r.partition)
        if not w.verified or not verify_witness(w.w, r.dist, r.partition).ok:
            problems.append((r.trial, "verify"))
        alpha = _arm_masses(r.dist, r.partition)
        single_arm += sum(a > 0 for a in alpha.values()) == 1
        pa, pb, pc = w.p_params
        if pb is None:
            expected = pa * (1 - pc) / (pa * (1 - pc) + (1 - pa) * pc)
            if expected != alpha["A"]:
                problems.append((r.trial, "alpha"))
        else:
            den = pa * (1 - pb) * (1 - pc) + (1 - pa) * pb * (1 - pc) + (1 - pa) * (1 - pb) * pc
            a1 = pa * (1 - pb) * (1 - pc) / den
            a2 = (1 - pa) * pb * (1 - pc) / den
            if (a1, a2) != (alpha["A"], alpha["B"]):
                problems.append((r.trial, "alpha1/alpha2"))
    ok = len(rep.results) == 100 and not problems and dims == {2, 3} and single_arm > 0 and rep.elapsed < 60
    record(
        "criterion 3 (cross supports: checks, witness, alpha conditions)",
        ok,
        f"{100 - len(problems)}/100 clean, d in {sorted(dims)}, {single_arm} single-arm, {rep.elapsed:.2f}s",
    )
    assert ok, problems[:5]


def _slab_oracle_instances():
    """Every support inside two 3x3 grid regions, each with random and rank-one masses."""
    part = BlockPartition((0,), (), (1,))
    eh_cells = [(a, c) for a in (0, 2, 3) for c in (0, 2, 3) if max(a, c) > 1]
    full = [(a, c) for a in (2, 3, 5) for c in (2, 3, 5)]
    regions = [(EHRegion(), eh_cells), (ExplicitSet(frozenset((F(a), F(c)) for a, c in full)), full)]
    for r_idx, (region, cells) in enumerate(regions):
        for size in range(1, len(cells) + 1):
            for support in combinations(cells, size):
                rng = random.Random(f"oracle-{r_idx}-{support}")
                noisy = {p: rng.randint(1, 9) for p in support}
                f = {v: rng.randint(1, 5) for v in (0, 2, 3, 5)}
                g = {v: rng.randint(1, 5) for v in (0, 2, 3, 5)}
                rank_one = {p: f[p[0]] * g[p[1]] for p in support}
                for weights in (noisy, rank_one):
                    yield FiniteDistribution(weights, normalize=True), part, region


def test_criterion_4_slab_reduction_oracle():
    start = time.perf_counter()
    n = mismatches = n_true = 0
    for dist, part, region in _slab_oracle_instances():
        n += 1
        a = check_inner_ci(dist, part, region).holds
        b = check_inner_ci_bruteforce(dist, part, region).holds
        n_true += a
        mismatches += a != b
    elapsed = time.perf_counter() - start
    ok = n >= 500 and mismatches == 0 and elapsed < 60
    record(
        "criterion 4 (slab reduction == brute force)",
        ok,
        f"{n - mismatches}/{n} identical ({n_true} true), {elapsed:.2f}s",
    )
    assert ok


def test_criterion_5_fixture_values():
    part = BlockPartition((0,), (), (1,))
    w1 = build_prop1_witness(make_i1(), part)
    # oracle: EH mass of the generating product, and u(0) * v(0)
    lam = sum(U[a] * U[c] for a in U for c in U if max(a, c) > 1)
    corner = U[0] * U[0]
    w3 = build_prop2_witness(make_i3(), part)
    pa, _, pc = w3.p_params
    alpha = pa * (1 - pc) / (pa * (1 - pc) + (1 - pa) * pc)
    ok = (
        w1.lam == lam == F(3, 4)
        and w1.w.mass((0, 0)) == corner == F(1, 4)
        and (pa, pc) == (F(1, 3), F(1, 3))
        and alpha == F(1, 2)
    )
    record(
        "criterion 5 (worked fixture values)",
        ok,
        f"lambda={w1.lam}, w(0,0)={w1.w.mass((0, 0))}, p_A={pa}, p_C={pc}, alpha={alpha}",
    )
    assert ok


def test_criterion_6_pareto_axes():
    start = time.perf_counter()
    part = BlockPartition((0,), (), (1,))
    pool = [F(3, 2), F(2), F(5, 2), F(3), F(4), F(6), F(10)]
    failures = []
    for i in range(20):
        rng = random.Random(f"pareto-{i}")
        tail = sorted(rng.sample(pool, rng.randint(1, 4)))
        n = rng.randint(2, 9)
        weight = F(rng.randint(1, n - 1), n)
        Y = gen_pareto_axes(tail, weight)
        on_axes = all((p[0] == 0) != (p[1] == 0) for p in Y)
        if not (on_axes and check_eh_ci(Y, part).holds):
            failures.append((tail, weight))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 5
    record("criterion 6 (Pareto-axes example is EH-independent)", ok, f"{20 - len(failures)}/20, {elapsed:.2f}s")
    assert ok


def test_criterion_7_certificate_soundness(suite_b_empty, suite_general_b, suite_cross):
    checked = genuine = 0
    for rep in (suite_b_empty, suite_general_b, suite_cross):
        for r in rep.results:
            for name, v in r.verdicts.items():
                if not v.holds:
                    checked += 1
                    genuine += recheck_certificate(v, r.dist, r.partition, r.region)
    # slab-oracle instances supply rectangle certificates as well
    for dist, part, region in _slab_oracle_instances():
        for v in (check_inner_ci(dist, part, region), check_inner_ci_bruteforce(dist, part, region)):
            if not v.holds:
                checked += 1
                genuine += recheck_certificate(v, dist, part, region)
    ok = checked > 0 and genuine == checked
    record("criterion 7 (certificate soundness)", ok, f"{genuine}/{checked} certificates genuine")
    assert ok


def test_criterion_8_witness_contract(suite_b_empty, suite_general_b, suite_cross):
    from xci.errors import OuterCheckFailed
    from xci.witness import build_outer_witness_generic

    n = good = n_true = 0
    for rep in (suite_b_empty, suite_general_b, suite_cross):
        for r in rep.results:
            n += 1
            outer = check_outer_ci(r.dist, r.partition)
            if outer.holds:
                n_true += 1
                good += build_outer_witness_generic(r.dist, r.partition).verified
            else:
                try:
                    build_outer_witness_generic(r.dist, r.partition)
                except OuterCheckFailed as exc:
                    good += exc.certificate == outer.certificate
    ok = good == n
    record("criterion 8 (generic witness contract)", ok, f"{good}/{n} instances ({n_true} outer-true)")
    assert ok
