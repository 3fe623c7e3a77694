import random
from fractions import Fraction as F
from itertools import product as cartesian

import pytest

from xci.checks import check_plain_ci
from xci.dist import FiniteDistribution, condition
from xci.errors import (
    CornerMassZero,
    IncompleteGridSupport,
    OuterCheckFailed,
    PreconditionEHFailed,
    SupportNotCross,
    SupportOutsideRegion,
)
from xci.witness import (
    Witness,
    blocks_independent,
    build_outer_witness_generic,
    build_prop1_witness,
    build_prop2_witness,
    prop1_closed_form_lambda,
    verify_witness,
)

from conftest import U, product_uv


def random_law(rng, values):
    w = [rng.randint(1, 7) for _ in values]
    return {v: F(x, sum(w)) for v, x in zip(values, w)}


class TestProp1:
    def test_i1(self, I1, P2):
        w = build_prop1_witness(I1, P2)
        # oracle: lambda is the EH-region mass of the generating product
        lam = sum(U[a] * U[c] for a in U for c in U if max(a, c) > 1)
        assert w.lam == lam == F(3, 4)
        assert w.lambda_closed_form == F(3, 4)
        assert w.w.mass((0, 0)) == U[0] * U[0] == F(1, 4)
        assert w.w == product_uv()
        assert w.verified

    def test_closed_form_aggregates(self, I1, P2):
        # each aggregate is 1/3: 1 / (1 + (1/3)(1/3)/(1/3))
        assert prop1_closed_form_lambda(I1, P2) == 1 / (1 + F(1, 3))

    def test_i2_precondition(self, I2, P2):
        with pytest.raises(PreconditionEHFailed) as info:
            build_prop1_witness(I2, P2)
        assert info.value.certificate is not None
        assert info.value.certificate.recheck(I2, P2)

    def test_nothing_to_add(self, P2):
        u = {2: F(1, 3), 3: F(2, 3)}
        Y = FiniteDistribution({(a, c): u[a] * u[c] for a in u for c in u})
        w = build_prop1_witness(Y, P2)
        assert w.lam == 1 and w.w == Y

    def test_outside_region(self, P2):
        with pytest.raises(SupportOutsideRegion):
            build_prop1_witness(product_uv(), P2)

    def test_incomplete_grid(self, P2):
        Y = FiniteDistribution({(0, 2): F(1, 2), (2, 0): F(1, 2)})
        with pytest.raises(IncompleteGridSupport):
            build_prop1_witness(Y, P2)

    def test_corner_mass_zero(self, P3):
        Y = FiniteDistribution({(0, 2, 0): F(1, 3), (0, 0, 2): F(1, 3), (0, 2, 2): F(1, 3)})
        with pytest.raises(CornerMassZero):
            build_prop1_witness(Y, P3)
        # documented fallback
        assert build_outer_witness_generic(Y, P3).verified

    @pytest.mark.parametrize("seed", range(15))
    def test_round_trip_b_empty(self, seed, P2):
        rng = random.Random(seed)
        # every coordinate needs a value on each side of the threshold
        xs = sorted(rng.sample([F(0), F(1, 2)], rng.randint(1, 2)) + [F(2), F(3)][: rng.randint(1, 2)])
        ys = [F(1), F(3, 2), F(4)][: rng.randint(2, 3)]
        f, g = random_law(rng, xs), random_law(rng, ys)
        full = FiniteDistribution({(a, c): f[a] * g[c] for a in xs for c in ys})
        Y = condition(full, lambda p: max(p) > 1)
        w = build_prop1_witness(Y, P2)
        assert w.w == full
        assert w.lam == Y.prob(lambda p: True) * full.prob(lambda p: max(p) > 1)
        assert 0 < w.lam <= 1

    @pytest.mark.parametrize("seed", range(10))
    def test_round_trip_general_b(self, seed, P3):
        rng = random.Random(seed)
        vals = [F(0), F(1, 2), F(2), F(3)]
        A, B, C = (rng.sample(vals[:2], 1) + rng.sample(vals[2:], 1) for _ in range(3))
        m = random_law(rng, B)
        atoms = {}
        for b in B:
            f, g = random_law(rng, A), random_law(rng, C)
            for a, c in cartesian(A, C):
                atoms[(a, b, c)] = m[b] * f[a] * g[c]
        full = FiniteDistribution(atoms)
        Y = condition(full, lambda p: max(p) > 1)
        w = build_prop1_witness(Y, P3)
        assert w.w == full and w.verified

    def test_exceedance_conditionings_are_ci(self, I1, P2):
        w = build_prop1_witness(I1, P2).w
        for k in range(2):
            assert check_plain_ci(condition(w, lambda p: p[k] > 1), P2).holds


class TestProp2:
    def test_i3(self, I3, P2):
        w = build_prop2_witness(I3, P2)
        assert w.p_params == (F(1, 3), None, F(1, 3))
        assert w.arm_masses == (F(1, 2),)
        pa, pc = w.p_params[0], w.p_params[2]
        assert pa * (1 - pc) / (pa * (1 - pc) + (1 - pa) * pc) == F(1, 2)
        # each arm atom: p_k * 1/2 * (1 - p_other) = 1/9
        assert all(w.w.mass(p) == F(1, 9) for p in I3)
        assert w.support_mass == F(4, 9)
        assert w.verified and blocks_independent(w.w, P2)

    def test_d3_equal_arms(self, P3):
        Y = FiniteDistribution({(2, 0, 0): F(1, 3), (0, 2, 0): F(1, 3), (0, 0, 2): F(1, 3)})
        w = build_prop2_witness(Y, P3)
        assert w.p_params == (F(1, 4),) * 3
        q = F(1, 4) * F(3, 4) ** 2
        assert w.arm_masses == (q / (3 * q), q / (3 * q)) == (F(1, 3), F(1, 3))

    def test_single_arm(self, P2):
        Y = FiniteDistribution({(2, 0): F(1, 2), (5, 0): F(1, 2)})
        w = build_prop2_witness(Y, P2)
        assert w.p_params == (F(1, 2), None, F(0))
        assert w.verified
        assert all(p[1] == 0 for p in w.w)

    def test_not_cross(self, I1, P2):
        with pytest.raises(SupportNotCross):
            build_prop2_witness(I1, P2)

    def test_json(self, I3, P2):
        data = build_prop2_witness(I3, P2).to_dict()
        assert data["method"] == "prop2"
        assert data["p"] == ["1/3", None, "1/3"]
        assert data["alpha"] == ["1/2"]


class TestGeneric:
    def test_i1(self, I1, P2):
        w = build_outer_witness_generic(I1, P2)
        assert w.verified
        assert len(w.w) == 9

    def test_i3(self, I3, P2):
        w = build_outer_witness_generic(I3, P2)
        assert w.verified
        assert w.support_mass == w.w.prob(I3.support.__contains__)

    def test_i2(self, I2, P2):
        with pytest.raises(OuterCheckFailed) as info:
            build_outer_witness_generic(I2, P2)
        assert info.value.certificate.recheck(I2, P2)


class TestVerify:
    def test_product_against_i1(self, I1, P2):
        r = verify_witness(product_uv(), I1, P2)
        assert r.product_support and r.conditional_law and r.ci and r.ok

    def test_i1_is_not_its_own_witness(self, I1, P2):
        r = verify_witness(I1, I1, P2)
        assert not r.product_support
        assert not r.ok

    def test_dimension_mismatch(self, I1, P3):
        Y = FiniteDistribution({(2, 0, 0): 1})
        r = verify_witness(I1, Y, P3)
        assert not r.dimension_ok and not r.ok

    def test_sets_flag(self, I1, P2):
        w = Witness(product_uv(), "manual")
        verify_witness(w, I1, P2)
        assert w.verified

    def test_rerun_independently(self, I1, I3, P2):
        for Y, build in ((I1, build_prop1_witness), (I3, build_prop2_witness)):
            w = build(Y, P2)
            assert verify_witness(w.w, Y, P2).ok
