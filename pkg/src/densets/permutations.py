"""Computable permutations of omega and their action on sets.

A :class:`PermutationHandle` evaluates forward lazily (scalar calls are
memoised) and answers inverse queries on prefixes ``[0, n)`` as int64
arrays. Kinds with a closed-form inverse override ``_inverse_array``; the
fallback scans forward until every value below ``n`` has been hit.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import sets as S
from .constructions import GOLDEN_GAMMA, mix64, splitmix_draws
from .errors import BudgetExhausted, DomainError, FillExhausted, InjectivityViolation, SetExhausted
from .sets import EvaluationBudget, SetHandle

_FACTORIALS = S.Factorials.table


def distinct_factorial(k: int) -> int:
    """f_k, the k-th element of {1, 2, 6, 24, ...}; equals (k+1)!."""
    return math.factorial(k + 1)


def factorial_count(x: int) -> int:
    """|F|x|: number of distinct factorials below x."""
    if x <= VALUE_LIMIT:
        return int(np.searchsorted(_FACTORIALS, x))
    k = 0
    while math.factorial(k + 1) < x:
        k += 1
    return k


VALUE_LIMIT = int(_FACTORIALS[-1])


def nonfactorial(j: int) -> int:
    """g_j, the j-th element of omega minus the factorials."""
    x = j
    while True:
        nxt = j + factorial_count(x + 1)
        if nxt == x:
            return x
        x = nxt


class PermutationHandle:
    kind = "permutation"

    def __init__(self, budget: Optional[EvaluationBudget] = None):
        self.budget = budget if budget is not None else S.default_budget()
        self._forward_memo: dict[int, int] = {}
        self._inverse = np.zeros(0, dtype=np.int64)

    def _forward(self, n: int) -> int:
        raise NotImplementedError

    def __call__(self, n: int) -> int:
        n = int(n)
        if n < 0:
            raise DomainError("permutations act on naturals")
        if n not in self._forward_memo:
            self._forward_memo[n] = int(self._forward(n))
        return self._forward_memo[n]

    forward = __call__

    def forward_range(self, lo: int, hi: int) -> list[int]:
        """pi(lo), ..., pi(hi - 1) as Python ints (values may be huge)."""
        return [self(n) for n in range(lo, hi)]

    def inverse_array(self, n: int) -> np.ndarray:
        """inv[m] = pi^{-1}(m) for every m < n."""
        n = int(n)
        if n <= len(self._inverse):
            return self._inverse[:n]
        inv = np.asarray(self._inverse_array(n), dtype=np.int64)
        self._inverse = inv
        return inv

    def _inverse_array(self, n: int) -> np.ndarray:
        inv = np.full(n, -1, dtype=np.int64)
        missing = n
        lo, chunk = 0, max(n, 64)
        while missing:
            hi = lo + chunk
            if hi - 1 > self.budget.max_value:
                raise BudgetExhausted(
                    f"{self.kind}: preimages below {n} not found within max_value={self.budget.max_value}"
                )
            for i, v in enumerate(self.forward_range(lo, hi), start=lo):
                if v < n:
                    if inv[v] >= 0:
                        raise InjectivityViolation((int(inv[v]), i), v)
                    inv[v] = i
                    missing -= 1
            lo, chunk = hi, 2 * chunk
        return inv

    def inverse(self, m: int) -> int:
        return int(self.inverse_array(m + 1)[m])

    def __repr__(self):
        return f"<{self.kind}>"


class Identity(PermutationHandle):
    kind = "identity"

    def _forward(self, n):
        return n

    def forward_range(self, lo, hi):
        return list(range(lo, hi))

    def _inverse_array(self, n):
        return np.arange(n, dtype=np.int64)


class FunctionPermutation(PermutationHandle):
    """Wraps an arbitrary callable; nothing about it is assumed bijective."""

    kind = "custom"

    def __init__(self, fn: Callable[[int], int], inverse: Optional[Callable[[int], int]] = None, budget=None):
        super().__init__(budget)
        self.fn = fn
        self.inverse_fn = inverse

    def _forward(self, n):
        return self.fn(n)

    def _inverse_array(self, n):
        if self.inverse_fn is None:
            return super()._inverse_array(n)
        return np.array([self.inverse_fn(m) for m in range(n)], dtype=np.int64)


class BlockShuffle(PermutationHandle):
    """Independent seeded uniform shuffle of every block [kw, (k+1)w).

    Inside a block, the element with the t-th smallest SplitMix64 key moves to
    position t.
    """

    kind = "blockshuffle"

    def __init__(self, width: int, seed: int, budget=None):
        if width < 1:
            raise DomainError("block width must be at least 1")
        super().__init__(budget)
        self.width = width
        self.seed = seed
        self._state = mix64(seed ^ GOLDEN_GAMMA)
        self._table = np.zeros(0, dtype=np.int64)

    def _table_upto(self, n: int) -> np.ndarray:
        size = -(-n // self.width) * self.width
        if size > len(self._table):
            if self.width == 1:
                self._table = np.arange(size, dtype=np.int64)
            else:
                keys = splitmix_draws(self._state, np.arange(size))
                blocks = np.arange(size) // self.width
                order = np.lexsort((keys, blocks))
                table = np.empty(size, dtype=np.int64)
                table[order] = np.arange(size, dtype=np.int64)
                self._table = table
        return self._table

    def _forward(self, n):
        return int(self._table_upto(n + 1)[n])

    def forward_range(self, lo, hi):
        return [int(v) for v in self._table_upto(hi)[lo:hi]]

    def _inverse_array(self, n):
        table = self._table_upto(n)
        inv = np.empty(len(table), dtype=np.int64)
        inv[table] = np.arange(len(table), dtype=np.int64)
        return inv[:n]


class JoinHat(PermutationHandle):
    """Odds go onto the factorials in order, evens onto the non-factorials via pi.

    ``2n+1 -> f_n`` and ``2n -> g_{pi(n)}``.
    """

    kind = "join_hat"

    def __init__(self, inner: PermutationHandle, budget=None):
        super().__init__(budget)
        self.inner = inner

    def _forward(self, n):
        if n % 2:
            return distinct_factorial(n // 2)
        return nonfactorial(self.inner(n // 2))

    def _inverse_array(self, n):
        values = np.arange(n, dtype=np.int64)
        fact_rank = np.searchsorted(_FACTORIALS, values)
        is_fact = (fact_rank < len(_FACTORIALS)) & (_FACTORIALS[np.minimum(fact_rank, len(_FACTORIALS) - 1)] == values)
        inv = np.empty(n, dtype=np.int64)
        inv[is_fact] = 2 * fact_rank[is_fact] + 1
        g_rank = values[~is_fact] - fact_rank[~is_fact]
        inner_inv = self.inner.inverse_array(int(g_rank.max()) + 1 if len(g_rank) else 0)
        inv[~is_fact] = 2 * inner_inv[g_rank]
        return inv


class Patched(PermutationHandle):
    """pi_f: f on C minus H, and the remaining positions filled from f(H).

    Positions of compl(C) u H, taken in increasing order, receive the least
    unused element of f(H); since f is injective, the k-th such position gets
    the k-th element of f(H). With ``f=None`` the map is the indexing map of
    C (``c_n -> n``), whose image of H is ``H within C``.
    """

    kind = "patched"

    def __init__(
        self,
        c: SetHandle,
        h: SetHandle,
        f: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        f_inverse: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        image: Optional[SetHandle] = None,
        budget=None,
    ):
        super().__init__(budget)
        self.c, self.h = c, h
        if f is None:
            self.f = lambda v: np.searchsorted(c.below(int(np.max(v)) + 1), v)
            self.f_inverse = lambda m: c.first(int(np.max(m)) + 1)[m]
            self.image = S.within(h, c)
        else:
            if f_inverse is None or image is None:
                raise DomainError("a custom f needs its inverse and the image set f(H)")
            self.f, self.f_inverse, self.image = f, f_inverse, image
        self.fill_positions = S.union(S.compl(c), h)

    def _fill_values(self, k: int) -> np.ndarray:
        try:
            return self.image.first(k)
        except SetExhausted as exc:
            raise FillExhausted(f"f(H) has fewer than {k} elements; H is finite") from exc

    def _forward(self, n):
        if self.c.member(n) and not self.h.member(n):
            return int(np.asarray(self.f(np.array([n], dtype=np.int64)))[0])
        rank = self.fill_positions.count(n)
        return int(self._fill_values(rank + 1)[rank])

    def forward_range(self, lo, hi):
        values = np.arange(lo, hi, dtype=np.int64)
        out = np.empty(len(values), dtype=np.int64)
        direct = self.c.contains(values) & ~self.h.contains(values)
        if direct.any():
            out[direct] = self.f(values[direct])
        filled = ~direct
        if filled.any():
            fills = self.fill_positions.below(hi)
            ranks = np.searchsorted(fills, values[filled])
            out[filled] = self._fill_values(int(ranks.max()) + 1)[ranks]
        return [int(v) for v in out]

    def _inverse_array(self, n):
        values = np.arange(n, dtype=np.int64)
        img = self.image.below(n)
        in_img = S._sorted_member_mask(img, values)
        inv = np.empty(n, dtype=np.int64)
        if len(img):
            inv[in_img] = self.fill_positions.first(len(img))
        if (~in_img).any():
            inv[~in_img] = self.f_inverse(values[~in_img])
        return inv


class Composed(PermutationHandle):
    """compose(p, q)(n) = p(q(n)); the rightmost factor acts first."""

    kind = "composed"

    def __init__(self, factors: Sequence[PermutationHandle], budget=None):
        if not factors:
            raise DomainError("compose needs at least one permutation")
        super().__init__(budget)
        self.factors = tuple(factors)

    def _forward(self, n):
        for p in reversed(self.factors):
            n = p(n)
        return n

    def _inverse_array(self, n):
        inv = np.arange(n, dtype=np.int64)
        for p in self.factors:
            if len(inv) == 0:
                break
            inv = p.inverse_array(int(inv.max()) + 1)[inv]
        return inv


def identity(budget=None) -> PermutationHandle:
    return Identity(budget)


def join_hat(pi: Optional[PermutationHandle] = None, budget=None) -> PermutationHandle:
    return JoinHat(pi if pi is not None else Identity(budget), budget)


def patch_bijection(c: SetHandle, h: SetHandle, f=None, f_inverse=None, image=None, budget=None) -> PermutationHandle:
    return Patched(c, h, f, f_inverse, image, budget)


def compose(*perms: PermutationHandle) -> PermutationHandle:
    return Composed(perms)


def block_shuffle(width: int, seed: int, budget=None) -> PermutationHandle:
    return BlockShuffle(width, seed, budget)


def sample_permutation(seed: int, style: str = "blockshuffle", width: int = 16, factors=(), budget=None) -> PermutationHandle:
    if style == "blockshuffle":
        return BlockShuffle(width, seed, budget)
    if style == "composed":
        return Composed(factors, budget)
    raise DomainError(f"unknown permutation style {style!r}")


# ---------------------------------------------------------------------------
# Applying permutations to sets


class Image(SetHandle):
    """pi(A): m is a member iff pi^{-1}(m) is in A."""

    def __init__(self, pi: PermutationHandle, a: SetHandle, budget=None):
        super().__init__(budget if budget is not None else a.budget)
        self.pi, self.a = pi, a

    @property
    def name(self):
        return f"{self.pi.kind}({self.a.name})"

    def _below(self, n):
        pre = self.pi.inverse_array(n)
        return np.nonzero(self.a.contains(pre))[0].astype(np.int64)

    def _contains(self, values):
        pre = self.pi.inverse_array(int(values.max()) + 1)
        return self.a.contains(pre[values])


def apply(pi: PermutationHandle, a: SetHandle, budget=None) -> SetHandle:
    return Image(pi, a, budget)


# ---------------------------------------------------------------------------
# Finite checks


@dataclass(frozen=True)
class BijectionReport:
    n: int
    deficit: tuple[int, ...]


def verify_bijection_prefix(pi: PermutationHandle, n: int) -> BijectionReport:
    """Check injectivity on [0, n) and list the values below n not yet hit.

    Raises :class:`InjectivityViolation` with the first colliding pair.
    """
    seen: dict[int, int] = {}
    for i, v in enumerate(pi.forward_range(0, n)):
        if v in seen:
            raise InjectivityViolation((seen[v], i), v)
        seen[v] = i
    deficit = tuple(m for m in range(n) if m not in seen)
    return BijectionReport(n, deficit)


def image_of(f: Callable[[int], int], h: SetHandle, budget=None) -> SetHandle:
    """f(H) for a finite H, as an explicit set."""
    return S.explicit((f(int(x)) for x in h.all_elements()), budget=budget)


_INT64_SAFE = 2**62


def _apply_block(f: Callable[[int], int], cands: np.ndarray):
    """f over a block of candidates; numpy when f accepts arrays, exact ints otherwise."""
    try:
        vals = np.asarray(f(cands))
        approx = np.asarray(f(cands.astype(np.float64)))
    except Exception:
        vals = approx = None
    if vals is None or vals.shape != cands.shape or vals.dtype.kind not in "iu" or approx.shape != cands.shape:
        return np.array([f(int(x)) for x in cands], dtype=object)
    big = ~(np.abs(approx) < _INT64_SAFE)
    if big.any():
        # int64 may have wrapped: recompute those entries exactly
        vals = vals.astype(object)
        for i in np.nonzero(big)[0]:
            vals[i] = f(int(cands[i]))
    return vals


def _next_sparse(c: SetHandle, fs, prev: int, budget: EvaluationBudget) -> int:
    need = math.factorial(prev)
    bound = c.finite_bound()
    lo, width = prev + 1, 4096
    while lo <= budget.max_value:
        if bound is not None and lo >= bound:
            raise SetExhausted("C ran out")
        hi = min(lo + width, budget.max_value + 1)
        window = np.arange(lo, hi, dtype=np.int64)
        ok = window[c.contains(window)]
        for f in fs:
            if not len(ok):
                break
            vals = _apply_block(f, ok)
            if vals.dtype != object and need > np.iinfo(np.int64).max:
                ok = ok[:0]
            else:
                ok = ok[np.asarray(vals >= need, dtype=bool)]
        if len(ok):
            return int(ok[0])
        lo, width = hi, min(width * 2, 1 << 20)
    raise BudgetExhausted(f"search passed max_value={budget.max_value}")


def sparse_subset(
    c: SetHandle,
    fs: Sequence[Callable[[int], int]],
    k: int,
    budget: Optional[EvaluationBudget] = None,
) -> SetHandle:
    """H = {h_0 < ... < h_{k-1}} inside C making every f_i(H) factorially sparse.

    h_0 = c_0 and h_{n+1} is the least c in C with c > h_n and
    f_i(c) >= h_n! for every i.
    """
    budget = budget if budget is not None else c.budget
    h = []
    try:
        h.append(c.nth(0))
        while len(h) < k:
            h.append(_next_sparse(c, fs, h[-1], budget))
    except (BudgetExhausted, SetExhausted) as exc:
        raise BudgetExhausted(f"sparse_subset stopped at index {len(h)}: {exc}") from exc
    return S.explicit(h, budget=budget)


# ---------------------------------------------------------------------------
# Spec strings

_PERM_RE = re.compile(r"^(?P<kind>[a-z_]+)(?::(?P<params>.*))?$")


@dataclass(frozen=True)
class PermSpec:
    """Textual permutation: ``identity``, ``joinhat`` or ``blockshuffle:w=256,seed=7``."""

    kind: str
    width: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("identity", "joinhat", "blockshuffle"):
            raise DomainError(f"unknown permutation kind {self.kind!r}")
        if self.kind == "blockshuffle" and (self.width is None or self.seed is None or self.width < 1):
            raise DomainError("blockshuffle needs w >= 1 and seed")

    @classmethod
    def parse(cls, text: str) -> "PermSpec":
        m = _PERM_RE.match(text.strip())
        if not m:
            raise DomainError(f"cannot read a permutation from {text!r}")
        params = {}
        if m.group("params"):
            for item in m.group("params").split(","):
                key, _, value = item.partition("=")
                if not value.isdigit():
                    raise DomainError(f"bad permutation parameter {item!r}")
                params[key.strip()] = int(value)
        unknown = set(params) - {"w", "seed"}
        if unknown:
            raise DomainError(f"unknown permutation parameters {sorted(unknown)}")
        return cls(m.group("kind"), params.get("w"), params.get("seed"))

    def __str__(self):
        if self.kind == "blockshuffle":
            return f"blockshuffle:w={self.width},seed={self.seed}"
        return self.kind

    def build(self, budget=None) -> PermutationHandle:
        if self.kind == "identity":
            return Identity(budget)
        if self.kind == "joinhat":
            return join_hat(Identity(budget), budget)
        return BlockShuffle(self.width, self.seed, budget)


DEFAULT_WIDTHS = (2, 16, 256, 4096)
DEFAULT_SEEDS = (1, 2, 3, 4)


def default_family() -> list[PermSpec]:
    """16 block shuffles (widths x seeds), then join_hat(identity) and identity."""
    family = [PermSpec("blockshuffle", w, s) for w in DEFAULT_WIDTHS for s in DEFAULT_SEEDS]
    return family + [PermSpec("joinhat"), PermSpec("identity")]


def parse_family(text: str) -> list[PermSpec]:
    """``default`` or ``;``-separated permutation specs."""
    if text.strip() == "default":
        return default_family()
    return [PermSpec.parse(part) for part in text.split(";") if part.strip()]
