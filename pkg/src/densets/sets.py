"""Lazy, memoizing subsets of the natural numbers.

Every set is a :class:`SetHandle` with two views: a membership oracle and a
strictly increasing enumeration ``a_0 < a_1 < ...``. Handles are conceptually
infinite, so every query is checked against an :class:`EvaluationBudget` and
fails loudly instead of returning a truncated answer.

Prefixes are materialised as sorted ``int64`` numpy arrays and cached per
handle; the cache only ever grows, so repeated queries return identical
answers.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import BudgetExhausted, DomainError, SetExhausted

__all__ = [
    "EvaluationBudget",
    "default_budget",
    "SetHandle",
    "member",
    "nth",
    "prefix",
    "count",
    "omega",
    "empty",
    "evens",
    "odds",
    "factorials",
    "arithmetic",
    "explicit",
    "into",
    "within",
    "join",
    "compl",
    "union",
    "intersect",
    "diff",
    "column",
    "pair",
    "unpair",
    "prefix_equal",
    "first_difference",
]

# All materialised values must fit comfortably in int64.
VALUE_CEILING = 2**62

BUDGET_VALUE_ENV = "DENSETS_BUDGET_VALUE"
BUDGET_INDEX_ENV = "DENSETS_BUDGET_INDEX"
DEFAULT_MAX_VALUE = 10**8
DEFAULT_MAX_INDEX = 10**8

_EMPTY = np.zeros(0, dtype=np.int64)


@dataclass(frozen=True)
class EvaluationBudget:
    """Largest natural number and largest enumeration index a query may touch."""

    max_value: int = DEFAULT_MAX_VALUE
    max_index: int = DEFAULT_MAX_INDEX

    def __post_init__(self):
        if self.max_value < 0 or self.max_index < 0:
            raise DomainError("budget bounds must be non-negative")
        if self.max_value > VALUE_CEILING:
            raise DomainError(f"max_value may not exceed 2**62, got {self.max_value}")

    def meet(self, other: "EvaluationBudget") -> "EvaluationBudget":
        return EvaluationBudget(
            min(self.max_value, other.max_value), min(self.max_index, other.max_index)
        )


def default_budget() -> EvaluationBudget:
    """Budget from the environment, falling back to 10**8 for both bounds."""
    value = int(os.environ.get(BUDGET_VALUE_ENV, DEFAULT_MAX_VALUE))
    index = int(os.environ.get(BUDGET_INDEX_ENV, DEFAULT_MAX_INDEX))
    return EvaluationBudget(value, index)


def _as_values(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype == object:
        big = [int(v) for v in arr.ravel()]
        if big and max(big) > VALUE_CEILING:
            raise BudgetExhausted(f"value {max(big)} exceeds the representable range")
        arr = np.asarray(big, dtype=np.int64).reshape(arr.shape)
    return arr.astype(np.int64, copy=False)


def _sorted_member_mask(sorted_elements: np.ndarray, values: np.ndarray) -> np.ndarray:
    if len(sorted_elements) == 0:
        return np.zeros(values.shape, dtype=bool)
    pos = np.searchsorted(sorted_elements, values)
    pos = np.minimum(pos, len(sorted_elements) - 1)
    return sorted_elements[pos] == values


class SetHandle:
    """A lazily evaluated subset of omega.

    Subclasses override at least one of ``_below`` (sorted elements ``< n``)
    and ``_contains`` (vectorised membership); the other defaults to a
    derivation from it. ``_first`` may supply a closed-form enumeration and
    ``finite_bound`` a known strict upper bound for finite sets.
    """

    name = "set"

    def __init__(self, budget: Optional[EvaluationBudget] = None):
        self.budget = budget if budget is not None else default_budget()
        self._prefix = _EMPTY
        self._prefix_n = 0
        self._member_memo: dict[int, bool] = {}

    # -- hooks -------------------------------------------------------------

    def _below(self, n: int) -> np.ndarray:
        if n <= 0:
            return _EMPTY
        candidates = np.arange(n, dtype=np.int64)
        return candidates[self._contains(candidates)]

    def _contains(self, values: np.ndarray) -> np.ndarray:
        return _sorted_member_mask(self.below(int(values.max()) + 1), values)

    def _first(self, k: int) -> Optional[np.ndarray]:
        return None

    def finite_bound(self) -> Optional[int]:
        """A strict upper bound on the elements if the set is known finite."""
        return None

    # -- budget checks -----------------------------------------------------

    def _check_value(self, v: int):
        if v > self.budget.max_value:
            raise BudgetExhausted(
                f"{self!r}: value {v} exceeds budget max_value={self.budget.max_value}"
            )

    def _check_index(self, k: int):
        if k > self.budget.max_index:
            raise BudgetExhausted(
                f"{self!r}: index {k} exceeds budget max_index={self.budget.max_index}"
            )

    # -- public views ------------------------------------------------------

    def below(self, n: int) -> np.ndarray:
        """Sorted array of the elements smaller than ``n`` (the prefix A|n)."""
        n = int(n)
        if n <= 0:
            return _EMPTY
        if n <= self._prefix_n:
            return self._prefix[: np.searchsorted(self._prefix, n)]
        bound = self.finite_bound()
        if bound is not None and self._prefix_n >= bound:
            return self._prefix
        self._check_value(min(n, bound) - 1 if bound is not None else n - 1)
        arr = _as_values(self._below(n if bound is None else min(n, bound)))
        self._prefix = arr
        self._prefix_n = n
        return arr

    def prefix(self, n: int) -> list[int]:
        return [int(v) for v in self.below(n)]

    def count(self, n: int) -> int:
        return len(self.below(n))

    def contains(self, values) -> np.ndarray:
        """Vectorised membership test for an array of naturals."""
        values = _as_values(values)
        if values.size == 0:
            return np.zeros(values.shape, dtype=bool)
        if values.min() < 0:
            raise DomainError("membership is only defined on naturals")
        top = int(values.max())
        if top < self._prefix_n:
            return _sorted_member_mask(self._prefix, values)
        bound = self.finite_bound()
        if bound is not None and top >= bound:
            out = np.zeros(values.shape, dtype=bool)
            inside = values < bound
            if inside.any():
                out[inside] = self.contains(values[inside])
            return out
        self._check_value(top)
        return np.asarray(self._contains(values), dtype=bool)

    def member(self, n: int) -> bool:
        n = int(n)
        if n not in self._member_memo:
            self._member_memo[n] = bool(self.contains(np.array([n]))[0])
        return self._member_memo[n]

    __contains__ = member

    def first(self, k: int) -> np.ndarray:
        """The first ``k`` elements ``a_0 < ... < a_{k-1}``."""
        k = int(k)
        if k <= 0:
            return _EMPTY
        self._check_index(k - 1)
        if len(self._prefix) >= k:
            return self._prefix[:k]
        closed = self._first(k)
        if closed is not None:
            closed = _as_values(closed)
            if len(closed) and closed[-1] > self.budget.max_value:
                raise BudgetExhausted(
                    f"{self!r}: element a_{k - 1}={int(closed[-1])} exceeds "
                    f"budget max_value={self.budget.max_value}"
                )
            return closed
        return self._first_by_doubling(k)

    def _first_by_doubling(self, k: int) -> np.ndarray:
        limit = self.budget.max_value + 1
        bound = self.finite_bound()
        ceiling = limit if bound is None else min(limit, bound)
        n = max(2 * k, 2 * self._prefix_n, 16)
        while True:
            n = min(n, ceiling)
            elements = self.below(n)
            if len(elements) >= k:
                return elements[:k]
            if n >= ceiling:
                if bound is not None and bound <= limit:
                    raise SetExhausted(f"{self!r} has only {len(elements)} elements, asked for a_{k - 1}")
                raise BudgetExhausted(
                    f"{self!r}: a_{k - 1} not found below budget max_value={self.budget.max_value}"
                )
            n *= 2

    def nth(self, k: int) -> int:
        return int(self.first(k + 1)[k])

    def __iter__(self) -> Iterator[int]:
        k = 0
        chunk = 64
        while True:
            try:
                block = self.first(k + chunk)
            except SetExhausted:
                bound = self.finite_bound()
                yield from (int(v) for v in self.below(bound)[k:])
                return
            yield from (int(v) for v in block[k:])
            k += chunk
            chunk *= 2

    def all_elements(self) -> np.ndarray:
        """Every element of a finite set with a known bound."""
        bound = self.finite_bound()
        if bound is None:
            raise BudgetExhausted(f"{self!r} is not known to be finite")
        return self.below(bound)

    def __repr__(self):
        return f"<{self.name}>"


# ---------------------------------------------------------------------------
# Primitives


class Arithmetic(SetHandle):
    def __init__(self, a: int, m: int, name=None, budget=None):
        if m < 1 or not 0 <= a < m:
            raise DomainError(f"arithmetic progression needs m >= 1 and 0 <= a < m, got ({a}, {m})")
        super().__init__(budget)
        self.a, self.m = a, m
        self.name = name or f"arith({a},{m})"

    def _below(self, n):
        return np.arange(self.a, n, self.m, dtype=np.int64)

    def _contains(self, values):
        return values % self.m == self.a

    def _first(self, k):
        self._check_value(self.a + self.m * (k - 1))
        return self.a + self.m * np.arange(k, dtype=np.int64)


class Explicit(SetHandle):
    def __init__(self, elements: Iterable[int], name=None, budget=None):
        super().__init__(budget)
        elements = sorted(set(int(e) for e in elements))
        if elements and elements[0] < 0:
            raise DomainError("sets contain naturals only")
        self.elements = _as_values(elements) if elements else _EMPTY
        self.name = name or "{" + ",".join(str(e) for e in elements[:8]) + (",..." if len(elements) > 8 else "") + "}"

    def finite_bound(self):
        return int(self.elements[-1]) + 1 if len(self.elements) else 0

    def _below(self, n):
        return self.elements[: np.searchsorted(self.elements, n)]

    def _contains(self, values):
        return _sorted_member_mask(self.elements, values)


def _distinct_factorials() -> np.ndarray:
    out, k = [], 1
    while math.factorial(k) <= VALUE_CEILING:
        out.append(math.factorial(k))
        k += 1
    return np.asarray(out, dtype=np.int64)


class Factorials(SetHandle):
    """{n! : n in omega} = {1, 2, 6, 24, ...}; f_k = (k+1)!."""

    name = "factorials"
    table = _distinct_factorials()

    def _below(self, n):
        return self.table[: np.searchsorted(self.table, n)]

    def _contains(self, values):
        return _sorted_member_mask(self.table, values)

    def _first(self, k):
        if k > len(self.table):
            raise BudgetExhausted(f"factorial f_{k - 1} = {k}! exceeds the budget")
        return self.table[:k]


def omega(budget=None) -> SetHandle:
    return Arithmetic(0, 1, name="omega", budget=budget)


def empty(budget=None) -> SetHandle:
    return Explicit((), name="empty", budget=budget)


def evens(budget=None) -> SetHandle:
    return Arithmetic(0, 2, name="evens", budget=budget)


def odds(budget=None) -> SetHandle:
    return Arithmetic(1, 2, name="odds", budget=budget)


def factorials(budget=None) -> SetHandle:
    return Factorials(budget)


def arithmetic(a: int, m: int, budget=None) -> SetHandle:
    """{a + k*m : k in omega} for 0 <= a < m."""
    return Arithmetic(a, m, budget=budget)


def explicit(elements: Iterable[int], budget=None) -> SetHandle:
    return Explicit(elements, budget=budget)


# ---------------------------------------------------------------------------
# Combinators


def _inherit(budget, *sets) -> EvaluationBudget:
    if budget is not None:
        return budget
    out = sets[0].budget
    for s in sets[1:]:
        out = out.meet(s.budget)
    return out


class Into(SetHandle):
    """B into A: the elements of A whose indices lie in B."""

    def __init__(self, b: SetHandle, a: SetHandle, budget=None):
        super().__init__(_inherit(budget, b, a))
        self.b, self.a = b, a
        self._bound_cache = False

    @property
    def name(self):
        return f"into({self.b.name}, {self.a.name})"

    def finite_bound(self):
        if self._bound_cache is not False:
            return self._bound_cache
        bound = self.a.finite_bound()
        b_bound = self.b.finite_bound()
        if b_bound is not None:
            idx = self.b.below(b_bound)
            if len(idx) == 0:
                bound = 0
            else:
                try:
                    top = self.a.nth(int(idx[-1])) + 1
                    bound = top if bound is None else min(bound, top)
                except SetExhausted:
                    pass
        self._bound_cache = bound
        return bound

    def _below(self, n):
        elements = self.a.below(n)
        return elements[self.b.below(len(elements))]

    def _first(self, k):
        indices = self.b.first(k)
        try:
            return self.a.first(int(indices[-1]) + 1)[indices]
        except SetExhausted as exc:
            raise SetExhausted(f"{self!r} has fewer than {k} elements") from exc


class Within(SetHandle):
    """B within A: the indices n with a_n in B."""

    def __init__(self, b: SetHandle, a: SetHandle, budget=None):
        super().__init__(_inherit(budget, b, a))
        self.b, self.a = b, a

    @property
    def name(self):
        return f"within({self.b.name}, {self.a.name})"

    def finite_bound(self):
        bounds = [x for x in (self.a.finite_bound(), self.b.finite_bound()) if x is not None]
        return min(bounds) if bounds else None

    def _enumerate_a(self, k):
        try:
            return self.a.first(k)
        except SetExhausted:
            return self.a.all_elements()

    def _below(self, n):
        elements = self._enumerate_a(n)
        return np.nonzero(self.b.contains(elements))[0].astype(np.int64)

    def _contains(self, values):
        elements = self._enumerate_a(int(values.max()) + 1)
        out = np.zeros(values.shape, dtype=bool)
        ok = values < len(elements)
        out[ok] = self.b.contains(elements[values[ok]])
        return out


class Join(SetHandle):
    """A join B = {2a} u {2b+1}."""

    def __init__(self, a: SetHandle, b: SetHandle, budget=None):
        super().__init__(_inherit(budget, a, b))
        self.a, self.b = a, b

    @property
    def name(self):
        return f"join({self.a.name}, {self.b.name})"

    def finite_bound(self):
        ba, bb = self.a.finite_bound(), self.b.finite_bound()
        if ba is None or bb is None:
            return None
        return max(2 * ba, 2 * bb)

    def _below(self, n):
        left = 2 * self.a.below((n + 1) // 2)
        right = 2 * self.b.below(n // 2) + 1
        return np.sort(np.concatenate([left, right]))

    def _contains(self, values):
        half = values // 2
        out = np.empty(values.shape, dtype=bool)
        is_even = values % 2 == 0
        if is_even.any():
            out[is_even] = self.a.contains(half[is_even])
        if (~is_even).any():
            out[~is_even] = self.b.contains(half[~is_even])
        return out


class Complement(SetHandle):
    def __init__(self, a: SetHandle, budget=None):
        super().__init__(_inherit(budget, a))
        self.a = a

    @property
    def name(self):
        return f"compl({self.a.name})"

    def _below(self, n):
        keep = np.ones(n, dtype=bool)
        keep[self.a.below(n)] = False
        return np.nonzero(keep)[0].astype(np.int64)

    def _contains(self, values):
        return ~self.a.contains(values)


class _Boolean(SetHandle):
    op = ""

    def __init__(self, a: SetHandle, b: SetHandle, budget=None):
        super().__init__(_inherit(budget, a, b))
        self.a, self.b = a, b

    @property
    def name(self):
        return f"{self.op}({self.a.name}, {self.b.name})"


class Union(_Boolean):
    op = "union"

    def finite_bound(self):
        ba, bb = self.a.finite_bound(), self.b.finite_bound()
        return None if ba is None or bb is None else max(ba, bb)

    def _below(self, n):
        return np.union1d(self.a.below(n), self.b.below(n))

    def _contains(self, values):
        return self.a.contains(values) | self.b.contains(values)


class Intersect(_Boolean):
    op = "inter"

    def finite_bound(self):
        bounds = [x for x in (self.a.finite_bound(), self.b.finite_bound()) if x is not None]
        return min(bounds) if bounds else None

    def _below(self, n):
        return np.intersect1d(self.a.below(n), self.b.below(n), assume_unique=True)

    def _contains(self, values):
        return self.a.contains(values) & self.b.contains(values)


class Difference(_Boolean):
    op = "diff"

    def finite_bound(self):
        return self.a.finite_bound()

    def _below(self, n):
        return np.setdiff1d(self.a.below(n), self.b.below(n), assume_unique=True)

    def _contains(self, values):
        return self.a.contains(values) & ~self.b.contains(values)


def pair(i: int, n: int) -> int:
    """Pairing <i, n> = 2**i * (2n + 1) - 1, a bijection omega^2 -> omega."""
    return (1 << i) * (2 * n + 1) - 1


def unpair(v: int) -> tuple[int, int]:
    v += 1
    i = (v & -v).bit_length() - 1
    return i, ((v >> i) - 1) // 2


class Column(SetHandle):
    """The i-th column {n : <i, n> in X}."""

    def __init__(self, x: SetHandle, i: int, budget=None):
        if i < 0:
            raise DomainError("column index must be a natural")
        super().__init__(_inherit(budget, x))
        self.x, self.i = x, i

    @property
    def name(self):
        return f"column({self.x.name}, {self.i})"

    def finite_bound(self):
        return self.x.finite_bound()

    def _contains(self, values):
        self.x._check_value(pair(self.i, int(values.max())))
        return self.x.contains((np.int64(1) << self.i) * (2 * values + 1) - 1)


def member(a: SetHandle, n: int) -> bool:
    return a.member(n)


def nth(a: SetHandle, k: int) -> int:
    return a.nth(k)


def prefix(a: SetHandle, n: int) -> list[int]:
    return a.prefix(n)


def count(a: SetHandle, n: int) -> int:
    return a.count(n)


def into(b: SetHandle, a: SetHandle, budget=None) -> SetHandle:
    return Into(b, a, budget)


def within(b: SetHandle, a: SetHandle, budget=None) -> SetHandle:
    return Within(b, a, budget)


def join(a: SetHandle, b: SetHandle, budget=None) -> SetHandle:
    return Join(a, b, budget)


def compl(a: SetHandle, budget=None) -> SetHandle:
    return Complement(a, budget)


def union(a: SetHandle, b: SetHandle, budget=None) -> SetHandle:
    return Union(a, b, budget)


def intersect(a: SetHandle, b: SetHandle, budget=None) -> SetHandle:
    return Intersect(a, b, budget)


def diff(a: SetHandle, b: SetHandle, budget=None) -> SetHandle:
    return Difference(a, b, budget)


def column(x: SetHandle, i: int, budget=None) -> SetHandle:
    return Column(x, i, budget)


def first_difference(a: SetHandle, b: SetHandle, n: int) -> Optional[int]:
    """Least element below ``n`` in exactly one of the two sets, or None."""
    sym = np.setxor1d(a.below(n), b.below(n), assume_unique=True)
    return int(sym[0]) if len(sym) else None


def prefix_equal(a: SetHandle, b: SetHandle, n: int) -> bool:
    return np.array_equal(a.below(n), b.below(n))
