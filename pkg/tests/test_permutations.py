from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from densets import sets as S
from densets.sets import EvaluationBudget
from densets.constructions import bernoulli_set
from densets.errors import BudgetExhausted, DomainError, FillExhausted, InjectivityViolation
from densets.permutations import (
    BlockShuffle,
    FunctionPermutation,
    PermSpec,
    apply,
    compose,
    identity,
    image_of,
    join_hat,
    nonfactorial,
    parse_family,
    patch_bijection,
    sample_permutation,
    sparse_subset,
    verify_bijection_prefix,
)

from oracles import distinct_factorials_below


def test_join_hat_identity_values():
    pi = join_hat(identity())
    assert [pi(n) for n in (1, 3, 5, 7)] == [1, 2, 6, 24]
    assert [pi(n) for n in (0, 2, 4, 6)] == [0, 3, 4, 5]


def test_nonfactorials_match_brute_force():
    facts = set(distinct_factorials_below(5000))
    g = [n for n in range(5000) if n not in facts]
    assert [nonfactorial(j) for j in range(len(g))] == g


def test_join_hat_odd_part_ignores_inner():
    a, b = join_hat(identity()), join_hat(BlockShuffle(8, 3))
    assert [a(2 * n + 1) for n in range(15)] == [b(2 * n + 1) for n in range(15)]


def test_join_hat_bijection_prefix():
    rep = verify_bijection_prefix(join_hat(identity()), 10)
    # images of 0..9: 0,1,3,2,4,6,5,24,7,120
    assert rep.deficit == (8, 9)


def test_broken_map_witness():
    with pytest.raises(InjectivityViolation) as info:
        verify_bijection_prefix(FunctionPermutation(lambda n: n // 2 * 2), 10)
    assert info.value.witness == (0, 1)


def test_identity_has_no_deficit():
    assert verify_bijection_prefix(identity(), 1000).deficit == ()


@pytest.mark.parametrize("width", [1, 2, 7, 64, 4096])
def test_block_shuffle_bijective(width):
    pi = sample_permutation(5, "blockshuffle", width)
    n = 10**4 - 10**4 % width if width <= 10**4 else width
    assert verify_bijection_prefix(pi, n).deficit == ()


def test_width_one_is_identity():
    pi = BlockShuffle(1, 9)
    assert pi.forward_range(0, 100) == list(range(100))


def test_block_shuffle_keeps_blocks_and_counts():
    pi = BlockShuffle(16, 4)
    values = np.array(pi.forward_range(0, 1600))
    assert (values // 16 == np.arange(1600) // 16).all()
    a = bernoulli_set(Fraction(1, 2), 8)
    image = apply(pi, a)
    for k in range(1, 100):
        assert S.count(image, 16 * k) == S.count(a, 16 * k)


def test_block_shuffle_is_uniform_within_blocks():
    # position of element 0 across 4000 blocks of width 4 should be uniform
    pi = BlockShuffle(4, 2)
    pos = np.array(pi.forward_range(0, 16000)).reshape(-1, 4)[:, 0] % 4
    freq = np.bincount(pos, minlength=4) / len(pos)
    assert np.abs(freq - 0.25).max() < 0.03


@given(st.integers(0, 2**32), st.integers(1, 50))
def test_inverse_round_trip(seed, width):
    pi = compose(BlockShuffle(width, seed), join_hat(BlockShuffle(3, seed + 1)))
    inv = pi.inverse_array(500)
    for m in range(0, 500, 17):
        assert pi(int(inv[m])) == m


def test_compose_order():
    p, q = BlockShuffle(5, 1), BlockShuffle(7, 2)
    pq = compose(p, q)
    assert [pq(n) for n in range(70)] == [p(q(n)) for n in range(70)]


def test_apply_identity_and_omega():
    a = bernoulli_set(Fraction(1, 3), 4)
    assert S.prefix(apply(identity(), a), 5000) == S.prefix(a, 5000)
    assert S.prefix(apply(join_hat(BlockShuffle(16, 1)), S.omega()), 5000) == list(range(5000))


def test_apply_membership_via_inverse():
    pi = join_hat(BlockShuffle(4, 7))
    a = bernoulli_set(Fraction(1, 2), 5)
    image = apply(pi, a)
    for m in range(300):
        assert image.member(m) == a.member(pi.inverse(m))


def test_join_hat_image_split():
    a, b = bernoulli_set(Fraction(1, 2), 1), bernoulli_set(Fraction(1, 2), 2)
    pi = join_hat(BlockShuffle(32, 5))
    f = S.factorials()
    lhs = S.diff(apply(pi, S.join(a, b)), f)
    rhs = S.diff(apply(pi, S.join(a, S.empty())), f)
    assert S.prefix_equal(lhs, rhs, 10**4)


def test_join_hat_counting_bound():
    a = bernoulli_set(Fraction(1, 2), 21)
    image = apply(join_hat(), S.join(a, S.empty()))
    for n in range(1, 5000):
        assert abs(S.count(image, n) - S.count(a, n)) <= S.count(S.factorials(), n) + 1


def test_join_hat_shift_is_factorial_count():
    # pi_hat(A join empty) is A with each element n moved up by |F|n|, read off by count
    a = bernoulli_set(Fraction(1, 2), 3)
    image = apply(join_hat(), S.join(a, S.empty()))
    for n in range(1, 3000, 11):
        assert S.count(image, n) == S.count(a, n - S.count(S.factorials(), n))


def test_patch_bijection_trace():
    pi = patch_bijection(S.evens(), S.arithmetic(0, 4))
    assert [pi(n) for n in range(8)] == [0, 2, 1, 4, 6, 8, 3, 10]
    assert pi.forward_range(0, 8) == [0, 2, 1, 4, 6, 8, 3, 10]
    assert verify_bijection_prefix(pi, 4000).deficit == tuple(v for v in range(4000) if pi.inverse(v) >= 4000)


def test_patch_bijection_identity_fill():
    pi = patch_bijection(S.omega(), S.omega())
    assert pi.forward_range(0, 200) == list(range(200))


def test_patch_image_off_patched_region():
    a = bernoulli_set(Fraction(1, 2), 17)
    c, h = S.evens(), S.arithmetic(0, 4)
    pi = patch_bijection(c, h)
    f_h = S.within(h, c)
    lhs = apply(pi, S.diff(S.intersect(a, c), h))
    rhs = S.diff(S.within(a, c), f_h)
    assert S.prefix_equal(lhs, rhs, 5000)


def test_patch_inverse_matches_forward():
    c = bernoulli_set(Fraction(1, 2), 4)
    h = S.into(S.arithmetic(0, 3), c)
    pi = patch_bijection(c, h)
    forward = pi.forward_range(0, 3000)
    inv = pi.inverse_array(max(forward) + 1)
    assert [int(inv[v]) for v in forward] == list(range(3000))


def test_patch_fill_exhausted_with_finite_h():
    pi = patch_bijection(S.evens(), S.explicit([0, 4]))
    with pytest.raises(FillExhausted):
        pi.forward_range(0, 20)


def test_patch_custom_f_needs_inverse_and_image():
    with pytest.raises(DomainError):
        patch_bijection(S.evens(), S.evens(), f=lambda v: v // 2)


def test_sparse_subset_examples():
    assert S.prefix(sparse_subset(S.omega(), [lambda x: x], 6), 10**4) == [0, 1, 2, 3, 6, 720]
    assert S.prefix(sparse_subset(S.evens(), [lambda x: x], 4), 10**4) == [0, 2, 4, 24]


def test_sparse_subset_budget_reports_index():
    with pytest.raises(BudgetExhausted, match="index 6"):
        sparse_subset(S.omega(), [lambda x: x], 7)


def test_sparse_subset_growth_condition():
    fs = [lambda x: x, lambda x: 3 * x + 1, lambda x: x // 2]
    h = sparse_subset(S.odds(), fs, 3)
    elems = list(h)
    assert elems == [1, 3, 13]
    import math

    for prev, cur in zip(elems, elems[1:]):
        assert cur > prev
        assert all(f(cur) >= math.factorial(prev) for f in fs)


def test_sparse_subset_factorial_count_bound_plus_two():
    # the tight finite bound; see test_acceptance for the +1 variant
    h = sparse_subset(S.omega(), [lambda x: x], 6)
    image = image_of(lambda x: x, h)
    for n in range(1, 10**4):
        assert S.count(image, n) <= S.count(S.factorials(), n) + 2


def test_perm_spec_round_trip():
    for text in ("identity", "joinhat", "blockshuffle:w=256,seed=7"):
        assert str(PermSpec.parse(text)) == text
    fam = parse_family("identity;blockshuffle:w=2,seed=1")
    assert [str(p) for p in fam] == ["identity", "blockshuffle:w=2,seed=1"]
    with pytest.raises(DomainError):
        PermSpec.parse("blockshuffle:w=0,seed=1")
    with pytest.raises(DomainError):
        PermSpec.parse("rotate")


def test_sparse_subset_scalar_only_map():
    import math

    assert list(sparse_subset(S.omega(), [math.factorial], 4)) == [0, 1, 2, 3]


def test_sparse_subset_overflowing_map_stays_exact():
    # x**5 wraps in int64 long before 10**6; a wrapped value must never count as a hit
    h = sparse_subset(S.omega(), [lambda x: x**5], 12)
    assert list(h) == list(range(10)) + [13, 91]
    with pytest.raises(BudgetExhausted, match="index 12"):
        sparse_subset(S.omega(), [lambda x: x**5], 13, EvaluationBudget(10**6, 10**6))
