"""Exact prefix densities and finite evidence about upper/lower density.

All densities are :class:`fractions.Fraction`; floats appear only when a
report is rendered. ``tail_sup``/``tail_inf`` are estimates of limsup and
liminf over the last part of a checkpoint schedule, never certified limits.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .permutations import PermSpec, apply, default_family
from .sets import SetHandle

DEFAULT_N0 = 64
DEFAULT_RATIO = Fraction(13, 10)
DEFAULT_TAIL = Fraction(1, 4)
UNSTABLE_SPREAD = Fraction(1, 5)

CSV_COLUMNS = ("n", "count", "rho_num", "rho_den", "rho_float")


@dataclass(frozen=True)
class Checkpoint:
    n: int
    count: int

    @property
    def rho(self) -> Fraction:
        return Fraction(self.count, self.n)


@dataclass
class DensityReport:
    checkpoints: list[Checkpoint]
    tail_sup: Fraction
    tail_inf: Fraction
    estimator_kind: str = "counting"
    label: str = ""

    @property
    def final(self) -> Checkpoint:
        return self.checkpoints[-1]

    def rhos(self) -> list[Fraction]:
        return [c.rho for c in self.checkpoints]

    def to_dict(self, config: Optional[dict] = None) -> dict:
        out = {
            "estimator": self.estimator_kind,
            "label": self.label,
            "tail_sup": _frac_dict(self.tail_sup),
            "tail_inf": _frac_dict(self.tail_inf),
            "checkpoints": [
                {"n": c.n, "count": c.count, "rho_num": c.rho.numerator,
                 "rho_den": c.rho.denominator, "rho_float": render_float(c.rho)}
                for c in self.checkpoints
            ],
        }
        if config is not None:
            out = {"config": config, **out}
        return out

    def to_json(self, config: Optional[dict] = None) -> str:
        return json.dumps(self.to_dict(config), indent=2, sort_keys=False) + "\n"

    def to_csv(self, config: Optional[dict] = None) -> str:
        buf = io.StringIO()
        if config is not None:
            buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        buf.write(f"# estimator: {self.estimator_kind}\n")
        buf.write(f"# tail_sup: {self.tail_sup} ({render_float(self.tail_sup)})\n")
        buf.write(f"# tail_inf: {self.tail_inf} ({render_float(self.tail_inf)})\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for c in self.checkpoints:
            writer.writerow((c.n, c.count, c.rho.numerator, c.rho.denominator, render_float(c.rho)))
        return buf.getvalue()


def render_float(x: Fraction) -> str:
    return format(float(x), ".12g")


def _frac_dict(x: Fraction) -> dict:
    return {"num": x.numerator, "den": x.denominator, "float": render_float(x)}


def density_at(a: SetHandle, n: int) -> Fraction:
    """|A|n| / n."""
    if n < 1:
        raise DomainError("density is undefined at n = 0")
    return Fraction(a.count(n), n)


def geometric_grid(max_n: int, n0: int = DEFAULT_N0, ratio: Fraction = DEFAULT_RATIO) -> list[int]:
    """ceil(n0 * ratio**j) up to ``max_n``, which is always the last point."""
    if max_n < 1:
        raise DomainError("grid needs max_n >= 1")
    ratio = Fraction(ratio)
    points, j = [], 0
    while True:
        x = Fraction(n0) * ratio**j
        n = math.ceil(x)
        if n >= max_n:
            break
        if not points or n > points[-1]:
            points.append(n)
        j += 1
    points.append(max_n)
    return points


def linear_grid(max_n: int, step: int) -> list[int]:
    if step < 1:
        raise DomainError("grid step must be at least 1")
    points = list(range(step, max_n + 1, step))
    if not points or points[-1] != max_n:
        points.append(max_n)
    return points


def parse_grid(text: str, max_n: int) -> list[int]:
    """``geometric``, ``geometric:n0=64,g=1.3`` or ``linear:step=100``."""
    kind, _, params = text.partition(":")
    opts = dict(item.split("=", 1) for item in params.split(",") if item)
    if kind == "geometric":
        return geometric_grid(max_n, int(opts.get("n0", DEFAULT_N0)), Fraction(opts.get("g", DEFAULT_RATIO)))
    if kind == "linear":
        return linear_grid(max_n, int(opts.get("step", max(1, max_n // 100))))
    raise DomainError(f"unknown grid {text!r}")


def _tail(values: Sequence[Fraction], fraction: Fraction) -> Sequence[Fraction]:
    size = max(1, math.ceil(len(values) * fraction))
    return values[-size:]


def density_report(
    a: SetHandle,
    grid: Iterable[int],
    tail_fraction: Fraction = DEFAULT_TAIL,
    label: str = "",
) -> DensityReport:
    """Counting-estimator checkpoints on ``grid``."""
    grid = sorted(set(int(n) for n in grid))
    if not grid or grid[0] < 1:
        raise DomainError("grid points must be >= 1")
    elements = a.below(grid[-1])
    counts = np.searchsorted(elements, grid)
    checkpoints = [Checkpoint(n, int(c)) for n, c in zip(grid, counts)]
    tail = _tail([c.rho for c in checkpoints], tail_fraction)
    return DensityReport(checkpoints, max(tail), min(tail), "counting", label)


def principal_checkpoints(a: SetHandle, k: int, tail_fraction: Fraction = DEFAULT_TAIL) -> DensityReport:
    """Checkpoints read off the principal function.

    Upper subsequence: (a_j + 1, j + 1); lower subsequence: (a_j, j), skipped
    when a_j = 0. The tail sup is taken over the upper points and the tail
    inf over the lower ones.
    """
    elements = a.first(k)
    upper = [Checkpoint(int(v) + 1, j + 1) for j, v in enumerate(elements)]
    lower = [Checkpoint(int(v), j) for j, v in enumerate(elements) if v > 0]
    merged = sorted(set(upper) | set(lower), key=lambda c: (c.n, c.count))
    tail_sup = max(_tail([c.rho for c in upper], tail_fraction))
    tail_inf = min(_tail([c.rho for c in lower], tail_fraction)) if lower else tail_sup
    report = DensityReport(merged, tail_sup, tail_inf, "principal")
    report.upper = upper
    report.lower = lower
    return report


@dataclass
class ProbeResult:
    reports: list[tuple[str, DensityReport]]
    threshold: Fraction = UNSTABLE_SPREAD
    min_tail_inf: Fraction = field(init=False)
    max_tail_sup: Fraction = field(init=False)

    def __post_init__(self):
        self.min_tail_inf = min(r.tail_inf for _, r in self.reports)
        self.max_tail_sup = max(r.tail_sup for _, r in self.reports)

    @property
    def spread(self) -> Fraction:
        return self.max_tail_sup - self.min_tail_inf

    @property
    def unstable(self) -> bool:
        return self.spread > self.threshold

    def to_dict(self, config: Optional[dict] = None) -> dict:
        out = {
            "min_tail_inf": _frac_dict(self.min_tail_inf),
            "max_tail_sup": _frac_dict(self.max_tail_sup),
            "spread": _frac_dict(self.spread),
            "unstable": self.unstable,
            "permutations": [
                {"id": pid, "tail_inf": _frac_dict(r.tail_inf), "tail_sup": _frac_dict(r.tail_sup),
                 "final_rho": render_float(r.final.rho)}
                for pid, r in self.reports
            ],
        }
        if config is not None:
            out = {"config": config, **out}
        return out


def intrinsic_probe(
    a: SetHandle,
    family: Optional[Sequence[PermSpec]] = None,
    grid: Optional[Iterable[int]] = None,
    max_n: int = 10**5,
) -> ProbeResult:
    """Density reports of pi(A) for each pi in a finite permutation family.

    This is a probe: agreement across the family is evidence, not proof, of
    intrinsic density.
    """
    family = list(family) if family is not None else default_family()
    grid = list(grid) if grid is not None else geometric_grid(max_n)
    reports = []
    for spec in family:
        image = apply(spec.build(a.budget), a)
        reports.append((str(spec), density_report(image, grid, label=str(spec))))
    return ProbeResult(reports)
