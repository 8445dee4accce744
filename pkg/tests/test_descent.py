import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from emcurve.curve import INFINITY, add, point, scalar_mul
from emcurve.descent import (
    DescentContext,
    DescentPair,
    IDENTITY_CLASS,
    SquareClass,
    SquarefreePrecondition,
    UnsupportedClass,
    candidate_pairs,
    corollary_rank,
    lemma_exclusion_filter,
    local_solvable,
    necessary_conditions,
    phi_image,
    q_s_2,
    real_solvable,
    selmer_group,
    square_class,
    theorem_lower_bound,
)
from emcurve.family import build_curve
from emcurve.numtheory import legendre


@pytest.fixture(scope="module")
def c6():
    return build_curve(6)


@pytest.fixture(scope="module")
def sel6(c6):
    return selmer_group(c6)


def test_square_class_examples(c6):
    assert square_class(18).value == 2
    assert square_class(-1295, within=c6).value == -1295
    assert square_class(1).is_identity
    assert square_class(4 * 9).is_identity
    assert square_class(-50).value == -2


def test_square_class_support_restriction(c6):
    with pytest.raises(UnsupportedClass):
        square_class(11, within=c6)


@given(st.integers(min_value=-5000, max_value=5000).filter(lambda n: n != 0),
       st.integers(min_value=-5000, max_value=5000).filter(lambda n: n != 0))
@settings(max_examples=150, deadline=None)
def test_square_class_group_law(a, b):
    prod = square_class(a) * square_class(b)
    assert prod == square_class(a * b)
    assert (square_class(a) * square_class(a)).is_identity


def test_q_s_2_generators(c6):
    gens = q_s_2(c6)
    assert [g.value for g in gens] == [-1, 2, 5, 7, 37, 1151, 1439]
    # Group order 2^(2 + |P| + |Q| + |R|).
    assert 2 ** len(gens) == 2**7
    gens12 = q_s_2(build_curve(12))
    assert len(gens12) == 10
    assert IDENTITY_CLASS * gens[0] == gens[0]


def test_phi_image_examples(c6):
    assert phi_image(c6, INFINITY).b1.is_identity
    t1 = phi_image(c6, point(c6.e1, 0))
    assert t1.b1 == square_class(2 * 1295 * 1151)
    assert t1.b2 == square_class(2 * 1295)
    p1 = phi_image(c6, point(0, c6.t))
    assert p1.b1 == square_class(1 - 6**4)
    assert p1.b2 == square_class(6**4 - 1)
    # x = e3 goes through the generic formula.
    t3 = phi_image(c6, point(c6.e3, 0))
    assert t3.b1 == square_class(c6.e3 - c6.e1)
    assert t3.b2 == square_class(c6.e3 + c6.e1)


def test_phi_is_homomorphism_on_samples(c6):
    p1 = point(0, c6.t)
    p2 = point(c6.n1, c6.t)
    pool = [p1, p2, point(c6.e1, 0), point(c6.e3, 0), add(c6, p1, p2), INFINITY]
    for a, b in itertools.combinations(pool, 2):
        img_sum = phi_image(c6, add(c6, a, b))
        ia, ib = phi_image(c6, a), phi_image(c6, b)
        assert img_sum.b1 == ia.b1 * ib.b1
        assert img_sum.b2 == ia.b2 * ib.b2


def test_candidate_pairs_count_and_identity(c6):
    pairs = list(candidate_pairs(c6))
    assert len(pairs) == 4096  # 2^(2*(2+5)) / 4
    assert pairs[0].b1.is_identity and pairs[0].b2.is_identity
    # Normalization: b1 positive, b2 odd, so b1*b2 is never 0 mod 4.
    for p in pairs[:64]:
        assert p.b1.value > 0
        assert p.b2.value % 2 == 1


def test_candidate_pairs_cover_cosets_once(c6):
    ctx = DescentContext(c6)
    seen = set()
    for b1m, b2m in ctx.coset_reps():
        rep = ctx.canonical_rep(b1m, b2m)
        assert rep == (b1m, b2m)  # reps are already canonical
        seen.add(rep)
    assert len(seen) == ctx.coset_count()
    # Multiplying by each torsion image lands back in the same coset.
    for h in ctx.torsion_image_masks():
        assert ctx.canonical_rep(h[0] ^ 0, h[1] ^ 0) == (0, 0)


def test_lemma_exclusion_rules(c6):
    def pair(b1, b2):
        return DescentPair(square_class(b1, within=c6), square_class(b2, within=c6))

    assert lemma_exclusion_filter(c6, pair(1, -1)) == "(i) b2 < 0"
    assert lemma_exclusion_filter(c6, pair(1, 1151)) == "(ii) b2 = 0 mod q_i"
    assert lemma_exclusion_filter(c6, pair(1439, 1)) == "(iii) b1 = 0 mod r_i"
    assert lemma_exclusion_filter(c6, pair(5, 1)) == "(iv) v_p(b1*b2) = 1"
    assert lemma_exclusion_filter(c6, pair(2, 1)) == "(v) b1*b2 = 2 mod 4"
    assert lemma_exclusion_filter(c6, pair(5, 5)) is None
    # First matching rule wins when several apply.
    assert lemma_exclusion_filter(c6, pair(1439, -1151)) == "(i) b2 < 0"


def test_necessary_conditions_examples(c6):
    def pair(b1, b2):
        return DescentPair(square_class(b1, within=c6), square_class(b2, within=c6))

    ok, fails = necessary_conditions(c6, pair(5, 5))
    assert ok, fails
    assert legendre(-1, 5) == 1 and legendre(5, 1151) == 1 and legendre(5, 1439) == 1
    ok, fails = necessary_conditions(c6, pair(7, 7))
    assert not ok and any("(iv)" in f for f in fails)  # 7 = 3 mod 4
    # Torsion image (after normalization) passes: Sel contains it.
    ctx = DescentContext(c6)
    for b1m, b2m in ctx.torsion_image_masks():
        rep = ctx.canonical_rep(b1m, b2m)
        p = DescentPair(ctx.class_of_mask(rep[0]), ctx.class_of_mask(rep[1]))
        assert lemma_exclusion_filter(c6, p) is None
        ok, fails = necessary_conditions(c6, p)
        assert ok, fails


def test_real_solvable(c6):
    def pair(b1, b2):
        return DescentPair(square_class(b1), square_class(b2))

    assert real_solvable(c6, pair(1, 1)).is_solvable
    assert not real_solvable(c6, pair(1, -1)).is_solvable
    assert real_solvable(c6, pair(-1151, 5)).is_solvable


def test_difference_identity_per_curve():
    for m in (4, 6, 12, 462):
        c = build_curve(m)
        assert c.q_value + c.r_value == 2 * c.a_value


def test_selmer_m6(c6, sel6):
    assert sel6.s2 == 4
    assert sel6.size_log2 == 6
    assert len(sel6.members) == 16
    assert sel6.rank_upper_bound == 4
    assert sel6.theorem_w == 3
    assert sel6.corollary_value == 4
    assert sel6.theorem_w <= sel6.s2


def test_selmer_members_contain_images(c6, sel6):
    ctx = DescentContext(c6)
    member_keys = {
        ctx.canonical_rep(ctx.mask_of_class(p.b1), ctx.mask_of_class(p.b2))
        for p in sel6.members
    }
    p1 = point(0, c6.t)
    p2 = point(c6.n1, c6.t)
    check = [p1, p2, INFINITY, point(c6.e1, 0), point(c6.e2, 0), point(c6.e3, 0)]
    for pt in check:
        img = phi_image(c6, pt)
        key = ctx.canonical_rep(ctx.mask_of_class(img.b1), ctx.mask_of_class(img.b2))
        assert key in member_keys, f"phi image of {pt} missing"


def test_selmer_members_closed_under_multiplication(c6, sel6):
    ctx = DescentContext(c6)
    keys = {
        ctx.canonical_rep(ctx.mask_of_class(p.b1), ctx.mask_of_class(p.b2))
        for p in sel6.members
    }
    for a in keys:
        for b in keys:
            assert ctx.canonical_rep(a[0] ^ b[0], a[1] ^ b[1]) in keys


def test_member_witnesses_recorded(sel6):
    for p in sel6.members:
        assert p.status == "member"
        assert math.inf in p.local_evidence
        for place, verdict in p.local_evidence.items():
            assert verdict.is_solvable
            if place != math.inf:
                assert verdict.witness is not None


def test_theorem_lower_bound_values():
    assert theorem_lower_bound(build_curve(6)) == 3
    assert theorem_lower_bound(build_curve(462)) == 4


def test_corollary_rank_values():
    assert corollary_rank(build_curve(462)) == 5
    # Both cofactors are prime at m = 6 as well, so the hypothesis applies
    # mechanically and predicts 3 + 1 = 4.
    assert corollary_rank(build_curve(6)) == 4
    assert corollary_rank(build_curve(12)) is None


def test_selmer_refuses_non_squarefree_r(c6):
    import dataclasses
    broken = dataclasses.replace(c6, r_squarefree=False)
    with pytest.raises(SquarefreePrecondition):
        selmer_group(broken)


def test_selmer_jobs_parallel_matches_serial(c6, sel6):
    res = selmer_group(c6, jobs=2)
    assert res.s2 == sel6.s2
    assert [p.key() for p in res.members] == [p.key() for p in sel6.members]


def test_local_solvable_depth_validation(c6):
    from emcurve.localsolve import DepthExceeded
    pair = DescentPair(square_class(5), square_class(5))
    with pytest.raises(DepthExceeded):
        local_solvable(c6, pair, 5, depth=1)
    verdict = local_solvable(c6, pair, 5, depth=9)
    assert verdict.is_solvable
