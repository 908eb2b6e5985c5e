"""Exact prefix-level identity suites over seeded random sets.

Each check receives a :class:`Trial` (a bundle of seeded Bernoulli(1/2)
sets) and a prefix length, and returns ``None`` on success or a short
witness string naming the least offending number.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import sets as S
from .constructions import BitSource, ColumnOracle, PartitionFamily, RealSpec, bernoulli_set, build_xr, mix64
from .permutations import BlockShuffle, apply, join_hat, patch_bijection, verify_bijection_prefix
from .sets import SetHandle

HALF = Fraction(1, 2)


def trial_seed(seed: int, trial: int, slot: int) -> int:
    return mix64((seed << 32) ^ (trial << 8) ^ slot)


@dataclass
class Trial:
    index: int
    seed: int
    sets: dict = field(default_factory=dict)

    def __getitem__(self, key: str) -> SetHandle:
        if key not in self.sets:
            slot = "ABCX".index(key)
            self.sets[key] = bernoulli_set(HALF, trial_seed(self.seed, self.index, slot))
        return self.sets[key]


def _equal(left: SetHandle, right: SetHandle, n: int) -> Optional[str]:
    m = S.first_difference(left, right, n)
    return None if m is None else f"prefixes differ first at {m}"


def _disjoint(left: SetHandle, right: SetHandle, n: int) -> Optional[str]:
    common = np.intersect1d(left.below(n), right.below(n))
    return None if len(common) == 0 else f"both contain {int(common[0])}"


def _subset(left: SetHandle, right: SetHandle, n: int) -> Optional[str]:
    extra = np.setdiff1d(left.below(n), right.below(n))
    return None if len(extra) == 0 else f"{int(extra[0])} is not in the superset"


def _first_error(*results: Optional[str]) -> Optional[str]:
    return next((r for r in results if r is not None), None)


# -- core -------------------------------------------------------------------


def into_associative(t: Trial, n: int):
    a, b, c = t["A"], t["B"], t["C"]
    return _equal(S.into(b, S.into(a, c)), S.into(S.into(b, a), c), n)


def within_partitions_omega(t: Trial, n: int):
    a, b = t["A"], t["B"]
    left, right = S.within(b, a), S.within(S.compl(b), a)
    return _first_error(_equal(S.union(left, right), S.omega(), n), _disjoint(left, right, n))


def into_splits_a(t: Trial, n: int):
    a, x = t["A"], t["X"]
    left, right = S.into(x, a), S.into(S.compl(x), a)
    return _first_error(_equal(S.union(left, right), a, n), _disjoint(left, right, n))


def into_disjoint_images(t: Trial, n: int):
    a, b, c = t["A"], t["B"], t["C"]
    c_off_b = S.diff(c, b)
    return _disjoint(S.into(b, a), S.into(c_off_b, a), n)


def into_recovers_b(t: Trial, n: int):
    a, b = t["A"], t["B"]
    return _equal(S.into(b, S.within(a, S.into(b, a))), b, n)


def into_within_itself(t: Trial, n: int):
    a, b = t["A"], t["B"]
    ba = S.into(b, a)
    return _equal(S.within(ba, ba), S.omega(), n)


def within_of_into(t: Trial, n: int):
    a, b = t["A"], t["B"]
    return _equal(S.within(b, S.into(a, b)), S.omega(), n)


def within_into_subset(t: Trial, n: int):
    a, b = t["A"], t["B"]
    return _subset(S.into(S.within(b, a), b), b, n)


def within_into_is_intersection(t: Trial, n: int):
    a, b = t["A"], t["B"]
    return _equal(S.into(S.within(b, a), a), S.intersect(a, b), n)


def within_not_associative(t: Trial, n: int):
    e, o, quarter = S.evens(), S.odds(), S.arithmetic(2, 4)
    return _first_error(
        _equal(S.within(S.within(o, quarter), e), S.empty(), n),
        _equal(S.within(o, S.within(quarter, e)), S.omega(), n),
    )


def into_omega_is_neutral(t: Trial, n: int):
    a = t["A"]
    w = S.omega()
    return _first_error(_equal(S.into(a, w), a, n), _equal(S.into(w, a), a, n), _equal(S.within(a, w), a, n))


# -- weakening --------------------------------------------------------------


def evens_within_join_complement(t: Trial, n: int):
    a = t["A"]
    return _equal(S.within(S.evens(), S.join(a, S.compl(a))), a, n)


def a_into_join_complement(t: Trial, n: int):
    a = t["A"]
    return _equal(S.into(a, S.join(a, S.compl(a))), S.join(a, S.empty()), n)


def join_complement_one_per_pair(t: Trial, n: int):
    a = t["A"]
    members = S.join(a, S.compl(a)).contains(np.arange(2 * (n // 2)))
    pairs = members.reshape(-1, 2).sum(axis=1)
    bad = np.nonzero(pairs != 1)[0]
    return None if len(bad) == 0 else f"pair ({2 * bad[0]}, {2 * bad[0] + 1}) has {pairs[bad[0]]} members"


# -- partition ----------------------------------------------------------------

PARTITION_LEVELS = 6


def partition_algebra(t: Trial, n: int):
    part = PartitionFamily(BitSource(trial_seed(t.seed, t.index, 9)))
    pieces = [part.A(i) for i in range(PARTITION_LEVELS)]
    for i in range(PARTITION_LEVELS):
        err = _first_error(
            _subset(part.B(i + 1), part.B(i), n),
            _disjoint(part.A(i), part.B(i + 1), n),
            _equal(S.union(part.A(i), part.B(i + 1)), part.B(i), n),
        )
        if err:
            return f"level {i}: {err}"
        for j in range(i):
            err = _disjoint(pieces[j], pieces[i], n)
            if err:
                return f"A_{j} and A_{i}: {err}"
    total = part.B(PARTITION_LEVELS)
    for p in pieces:
        total = S.union(total, p)
    return _equal(total, S.omega(), n)


def ruler_partition(t: Trial, n: int):
    part = PartitionFamily(ColumnOracle("evens"))
    for i in range(PARTITION_LEVELS):
        expected = S.arithmetic(2**i, 2 ** (i + 1))
        err = _equal(part.A(i), expected, n)
        if err:
            return f"A_{i}: {err}"
    return None


def xr_splice(t: Trial, n: int):
    real = RealSpec(Fraction(1, 3))
    part = PartitionFamily(BitSource(trial_seed(t.seed, t.index, 10)))
    x = build_xr(real, part)
    for i in range(PARTITION_LEVELS):
        expected = part.A(i) if real.bit(i) else S.empty()
        err = _equal(S.intersect(x, part.A(i)), expected, n)
        if err:
            return f"A_{i}: {err}"
    return None


# -- permutation ------------------------------------------------------------


def join_hat_image_split(t: Trial, n: int):
    a, b = t["A"], t["B"]
    pi = join_hat(BlockShuffle(16, trial_seed(t.seed, t.index, 11)))
    f = S.factorials()
    return _equal(S.diff(apply(pi, S.join(a, b)), f), S.diff(apply(pi, S.join(a, S.empty())), f), n)


def join_hat_counting_bound(t: Trial, n: int):
    a = t["A"]
    image = apply(join_hat(), S.join(a, S.empty())).below(n)
    grid = np.arange(1, n + 1)
    gap = np.abs(np.searchsorted(image, grid) - np.searchsorted(a.below(n), grid))
    bound = np.searchsorted(S.Factorials.table, grid) + 1
    bad = np.nonzero(gap > bound)[0]
    return None if len(bad) == 0 else f"N={grid[bad[0]]}: gap {gap[bad[0]]} > {bound[bad[0]]}"


def patch_agrees_with_f(t: Trial, n: int):
    # H = F into C is infinite with f(H) = F, so pi_f is checked through its
    # inverse: forward values on the fill positions are astronomically large.
    c = t["A"]
    h = S.into(S.factorials(), c)
    pi = patch_bijection(c, h)
    inv = pi.inverse_array(n)
    values = np.arange(n)
    off_image = ~S.factorials().contains(values)
    expected = c.first(n)
    bad = np.nonzero(off_image & (inv != expected))[0]
    if len(bad):
        return f"pi_f^-1({bad[0]}) = {inv[bad[0]]}, expected c_{bad[0]} = {expected[bad[0]]}"
    in_h = h.contains(inv[off_image])
    return None if not in_h.any() else "an f-value was taken from H"


def block_shuffle_counts(t: Trial, n: int):
    a = t["A"]
    for width in (2, 16, 256):
        image = apply(BlockShuffle(width, trial_seed(t.seed, t.index, 12)), a)
        cuts = np.arange(width, n + 1, width)
        if not np.array_equal(np.searchsorted(image.below(n), cuts), np.searchsorted(a.below(n), cuts)):
            return f"width {width}: counts differ at a block boundary"
    return None


def sampled_bijective(t: Trial, n: int):
    pi = BlockShuffle(64, trial_seed(t.seed, t.index, 13))
    report = verify_bijection_prefix(pi, n - n % 64)
    return None if not report.deficit else f"values {report.deficit[:3]} not hit"


Check = Callable[[Trial, int], Optional[str]]

SUITES: dict[str, dict[str, Check]] = {
    "core": {
        "into is associative": into_associative,
        "(B within A) u (compl B within A) = omega": within_partitions_omega,
        "A = (X into A) u (compl X into A)": into_splits_a,
        "disjoint B, C give disjoint images in A": into_disjoint_images,
        "B into (A within (B into A)) = B": into_recovers_b,
        "(B into A) within (B into A) = omega": into_within_itself,
        "B within (A into B) = omega": within_of_into,
        "(B within A) into B is a subset of B": within_into_subset,
        "(B within A) into A = A n B": within_into_is_intersection,
        "within is not associative (E, O, N witness)": within_not_associative,
        "A into omega = omega into A = A within omega = A": into_omega_is_neutral,
    },
    "weakening": {
        "evens within (A join compl A) = A": evens_within_join_complement,
        "A into (A join compl A) = A join empty": a_into_join_complement,
        "A join compl A has one of 2k, 2k+1": join_complement_one_per_pair,
    },
    "partition": {
        "A_i, B_k partition omega": partition_algebra,
        "ruler columns give A_i = 2^i(2k+1)": ruler_partition,
        "X_r n A_i is A_i or empty by bit i": xr_splice,
    },
    "permutation": {
        "join_hat(pi)(A join B) minus F = join_hat(pi)(A join empty) minus F": join_hat_image_split,
        "|count(join_hat(A join empty)) - count(A)| <= |F|N| + 1": join_hat_counting_bound,
        "patched bijection agrees with f off H": patch_agrees_with_f,
        "block shuffles preserve counts at block boundaries": block_shuffle_counts,
        "sampled block shuffles are bijective on prefixes": sampled_bijective,
    },
}


@dataclass
class CheckResult:
    name: str
    trials: int
    failures: list[tuple[int, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def run_suite(suite: str, trials: int, seed: int, n: int, checks: Optional[dict[str, Check]] = None) -> list[CheckResult]:
    """Run every check of ``suite`` on ``trials`` seeded trials at prefix ``n``."""
    checks = checks if checks is not None else SUITES[suite]
    results = {name: CheckResult(name, trials) for name in checks}
    for index in range(trials):
        trial = Trial(index, seed)
        for name, check in checks.items():
            witness = check(trial, n)
            if witness is not None:
                results[name].failures.append((index, witness))
    return list(results.values())
