"""Seeded bit sources, Bernoulli sets, the partition family and X_r.

A seeded SplitMix64 stream stands in for a 1-random set. Nothing here claims
genuine randomness; the generator is only a reproducible, well-mixed bit
source for desk-scale experiments.

SplitMix64 constants (Steele, Lea, Flood 2014):

* ``GOLDEN_GAMMA = 0x9E3779B97F4A7C15``
* mix multipliers ``0xBF58476D1CE4E5B9`` and ``0x94D049BB133111EB``
  with shifts 30, 27, 31.

Draw ``n`` of a stream with state ``s`` is ``mix(s + (n + 1) * GOLDEN_GAMMA)``,
i.e. the ``n``-th output of the reference generator seeded with ``s``.
Column ``i`` of a :class:`BitSource` uses the child state
``mix(seed ^ ((i + 1) * GOLDEN_GAMMA))``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from . import sets as S
from .errors import DomainError, IndexCapExceeded
from .sets import EvaluationBudget, SetHandle

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1
DEFAULT_INDEX_CAP = 64


def mix64(z: int) -> int:
    """SplitMix64 output function on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_2)
    return z ^ (z >> np.uint64(31))


def splitmix_draws(state: int, positions) -> np.ndarray:
    """Outputs number ``positions`` of SplitMix64 seeded with ``state``."""
    pos = np.asarray(positions, dtype=np.int64).astype(np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(state & MASK64) + (pos + np.uint64(1)) * np.uint64(GOLDEN_GAMMA)
        return _mix64_array(z)


def child_state(seed: int, i: int) -> int:
    return mix64((seed & MASK64) ^ (((i + 1) * GOLDEN_GAMMA) & MASK64))


# ---------------------------------------------------------------------------
# Reals in (0, 1) via their binary expansions

_RATIONAL_RE = re.compile(r"^\s*(\d+)\s*/\s*(\d+)\s*$")
_DECIMAL_RE = re.compile(r"^\s*0?\.(\d+)\s*$")
_SEED_RE = re.compile(r"^\s*seed:(\d+)\s*$")


@dataclass(frozen=True)
class RealSpec:
    """A real r in (0, 1) given exactly (``value``) or by a seeded bit stream.

    Bit ``n`` is the coefficient of 2**-(n+1). Dyadic rationals use the
    terminating expansion.
    """

    value: Optional[Fraction] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if (self.value is None) == (self.seed is None):
            raise DomainError("RealSpec needs exactly one of value or seed")
        if self.value is not None and not 0 < self.value < 1:
            raise DomainError(f"r must lie strictly between 0 and 1, got {self.value}")

    @classmethod
    def parse(cls, text: str) -> "RealSpec":
        """Accepts ``p/q``, ``0.ddd`` and ``seed:<n>``."""
        if isinstance(text, Fraction):
            return cls(value=text)
        m = _RATIONAL_RE.match(text)
        if m:
            p, q = int(m.group(1)), int(m.group(2))
            if q == 0:
                raise DomainError("zero denominator")
            return cls(value=Fraction(p, q))
        m = _DECIMAL_RE.match(text)
        if m:
            try:
                return cls(value=Fraction(Decimal("0." + m.group(1))))
            except InvalidOperation as exc:  # pragma: no cover - regex guards this
                raise DomainError(f"bad decimal {text!r}") from exc
        m = _SEED_RE.match(text)
        if m:
            return cls(seed=int(m.group(1)))
        raise DomainError(f"cannot read a real from {text!r}")

    def __str__(self):
        if self.value is not None:
            return f"{self.value.numerator}/{self.value.denominator}"
        return f"seed:{self.seed}"

    @property
    def is_dyadic(self) -> bool:
        if self.value is None:
            return False
        q = self.value.denominator
        return q & (q - 1) == 0

    def bit(self, n: int) -> int:
        if self.value is not None:
            p, q = self.value.numerator, self.value.denominator
            return (p * pow(2, n + 1, 2 * q) % (2 * q)) // q
        return int(splitmix_draws(self.seed, [n])[0] >> np.uint64(63))

    def bits(self, k: int) -> np.ndarray:
        if k <= 0:
            return np.zeros(0, dtype=np.int64)
        if self.value is not None:
            p, q = self.value.numerator, self.value.denominator
            out = np.empty(k, dtype=np.int64)
            for n in range(k):
                p *= 2
                out[n] = p >= q
                if p >= q:
                    p -= q
            return out
        return (splitmix_draws(self.seed, np.arange(k)) >> np.uint64(63)).astype(np.int64)

    def last_one(self) -> Optional[int]:
        """Index of the final 1-bit for a dyadic rational, else None."""
        if not self.is_dyadic:
            return None
        return self.value.denominator.bit_length() - 2

    def threshold64(self) -> int:
        """ceil(r * 2**64); for a seeded real, its first 64 bits."""
        if self.value is not None:
            p, q = self.value.numerator, self.value.denominator
            return -((-p << 64) // q)
        out = 0
        for b in self.bits(64):
            out = (out << 1) | int(b)
        return out

    def partial_sum(self, j: int) -> Fraction:
        return sum((Fraction(1, 2 ** (n + 1)) for n in range(j) if self.bit(n)), Fraction(0))


def real_to_bits(spec: Union[str, Fraction, RealSpec]) -> RealSpec:
    if isinstance(spec, RealSpec):
        return spec
    if isinstance(spec, Fraction):
        return RealSpec(value=spec)
    return RealSpec.parse(spec)


class RealBits(SetHandle):
    """B_r: positions of the 1-bits of r."""

    def __init__(self, real: RealSpec, budget=None):
        super().__init__(budget)
        self.real = real
        self.name = f"bits({real})"

    def finite_bound(self):
        last = self.real.last_one()
        return None if last is None else last + 1

    def _below(self, n):
        return np.nonzero(self.real.bits(n))[0].astype(np.int64)


# ---------------------------------------------------------------------------
# Bernoulli sets


class Bernoulli(SetHandle):
    """n is a member iff draw n of the stream is below ceil(r * 2**64)."""

    def __init__(self, real: RealSpec, state: int, name=None, budget=None):
        super().__init__(budget)
        self.real = real
        self.state = state & MASK64
        self.threshold = real.threshold64()
        self.name = name or f"bern({real},{state})"

    def _contains(self, values):
        if self.threshold >= 1 << 64:
            return np.ones(values.shape, dtype=bool)
        return splitmix_draws(self.state, values) < np.uint64(self.threshold)


def bernoulli_set(r, seed: int, budget=None) -> SetHandle:
    """A seeded Bernoulli(r) sample; rational r is compared exactly."""
    real = real_to_bits(r)
    return Bernoulli(real, seed, name=f"bern({real},{seed})", budget=budget)


# ---------------------------------------------------------------------------
# Bit sources


@dataclass(frozen=True)
class BitSource:
    """Seeded stand-in for a 1-random X, viewed through its columns X^[i].

    ``mode="derived"`` gives column i its own child stream; ``mode="pairing"``
    slices one stream with the pairing 2**i(2n+1)-1, which costs 2**i more
    draws per element.
    """

    seed: int
    mode: str = "derived"

    def __post_init__(self):
        if self.mode not in ("derived", "pairing"):
            raise DomainError(f"unknown column mode {self.mode!r}")

    def stream(self, budget=None) -> SetHandle:
        return Bernoulli(RealSpec(Fraction(1, 2)), self.seed, name=f"X[seed:{self.seed}]", budget=budget)

    def column(self, i: int, budget=None) -> SetHandle:
        if self.mode == "pairing":
            return S.column(self.stream(budget), i, budget)
        return Bernoulli(
            RealSpec(Fraction(1, 2)),
            child_state(self.seed, i),
            name=f"X[seed:{self.seed}][{i}]",
            budget=budget,
        )

    def __str__(self):
        return f"seed:{self.seed}" + ("" if self.mode == "derived" else f",mode={self.mode}")


@dataclass(frozen=True)
class ColumnOracle:
    """Deterministic source whose every column is the same primitive set."""

    kind: str = "evens"

    def __post_init__(self):
        if self.kind not in _ORACLE_COLUMNS:
            raise DomainError(f"unknown column oracle {self.kind!r}")

    def column(self, i: int, budget=None) -> SetHandle:
        return _ORACLE_COLUMNS[self.kind](budget)

    def __str__(self):
        return f"column={self.kind}"


_ORACLE_COLUMNS = {"evens": S.evens, "odds": S.odds, "omega": S.omega, "empty": S.empty}


@dataclass(frozen=True)
class ExplicitColumns:
    """Columns supplied directly; the last one repeats past the end."""

    columns: tuple

    def column(self, i: int, budget=None) -> SetHandle:
        return self.columns[min(i, len(self.columns) - 1)]


Source = Union[BitSource, ColumnOracle, ExplicitColumns]

_SOURCE_RE = re.compile(r"^\s*seed:(\d+)\s*(?:,\s*mode=(derived|pairing)\s*)?$")
_ORACLE_RE = re.compile(r"^\s*column=(\w+)\s*$")


def parse_source(text: str) -> Source:
    """``seed:<n>[,mode=derived|pairing]`` or ``column=<primitive>``."""
    m = _SOURCE_RE.match(text)
    if m:
        return BitSource(int(m.group(1)), m.group(2) or "derived")
    m = _ORACLE_RE.match(text)
    if m:
        return ColumnOracle(m.group(1))
    raise DomainError(f"cannot read a bit source from {text!r}")


# ---------------------------------------------------------------------------
# Partition family


class PartitionFamily:
    """B_0 = omega, A_i = compl(X^[i]) into B_i, B_{i+1} = X^[i] into B_i.

    Levels are built lazily and memoised; ``cap`` bounds the search for the
    level containing a given number and can be raised with :meth:`extend`.
    """

    def __init__(self, source: Source, cap: int = DEFAULT_INDEX_CAP, budget: Optional[EvaluationBudget] = None):
        self.source = source
        self.cap = cap
        self.budget = budget if budget is not None else S.default_budget()
        self._a: list[SetHandle] = []
        self._b: list[SetHandle] = [S.omega(self.budget)]

    def extend(self, cap: int):
        self.cap = max(self.cap, cap)

    def _build(self, i: int):
        while len(self._a) <= i:
            level = len(self._a)
            col = self.source.column(level, self.budget)
            b = self._b[level]
            self._a.append(S.into(S.compl(col), b, self.budget))
            self._b.append(S.into(col, b, self.budget))

    def A(self, i: int) -> SetHandle:
        self._build(i)
        return self._a[i]

    def B(self, i: int) -> SetHandle:
        if i > 0:
            self._build(i - 1)
        return self._b[i]

    def partition_index(self, m: int) -> int:
        """The unique i < cap with m in A_i."""
        for i in range(self.cap):
            if self.A(i).member(m):
                return i
        raise IndexCapExceeded(f"{m} lies in no A_i with i < {self.cap}", value=m, cap=self.cap)

    def indices_below(self, n: int, stop_after: Optional[int] = None) -> np.ndarray:
        """Level index of every m < n, or -1 for numbers still in B_stop.

        Without ``stop_after`` every m must be placed below the cap.
        """
        out = np.full(n, -1, dtype=np.int64)
        limit = self.cap if stop_after is None else min(self.cap, stop_after + 1)
        for i in range(limit):
            if self.B(i).count(n) == 0:
                break
            out[self.A(i).below(n)] = i
        else:
            if stop_after is None and self.B(limit).count(n):
                m = int(self.B(limit).below(n)[0])
                raise IndexCapExceeded(f"{m} lies in no A_i with i < {self.cap}", value=m, cap=self.cap)
        return out


def build_partition(source: Union[Source, str, Sequence[SetHandle]], k: int = DEFAULT_INDEX_CAP, budget=None) -> PartitionFamily:
    if k < 1:
        raise DomainError("a partition needs at least one level")
    if isinstance(source, str):
        source = parse_source(source)
    elif isinstance(source, (list, tuple)):
        source = ExplicitColumns(tuple(source))
    family = PartitionFamily(source, cap=max(k, DEFAULT_INDEX_CAP), budget=budget)
    family.A(k - 1)
    return family


def partition_index(part: PartitionFamily, m: int) -> int:
    return part.partition_index(m)


class Xr(SetHandle):
    """X_r = disjoint union of A_n over n in B_r.

    m is decided by walking the levels until m lands in some A_i. For a
    dyadic r the walk may stop once m survives into B_j past the last 1-bit,
    since every later A_i is excluded anyway.
    """

    def __init__(self, real: RealSpec, part: PartitionFamily, budget=None):
        super().__init__(budget if budget is not None else part.budget)
        self.real = real
        self.part = part
        self.name = f"xr({real}, {part.source})"

    def _below(self, n):
        last = self.real.last_one()
        stop = None if last is None else last
        idx = self.part.indices_below(n, stop_after=stop)
        placed = idx >= 0
        bits = self.real.bits(int(idx.max()) + 1 if placed.any() else 0)
        keep = np.zeros(n, dtype=bool)
        keep[placed] = bits[idx[placed]] == 1
        return np.nonzero(keep)[0].astype(np.int64)


def build_xr(r, part: PartitionFamily, budget=None) -> SetHandle:
    return Xr(real_to_bits(r), part, budget)


def truncated_union(real: RealSpec, part: PartitionFamily, j: int) -> SetHandle:
    """Disjoint union of A_i over i in B_r with i < j."""
    pieces = [part.A(i) for i in range(j) if real.bit(i)]
    if not pieces:
        return S.empty(part.budget)
    out = pieces[0]
    for p in pieces[1:]:
        out = S.union(out, p)
    return out
