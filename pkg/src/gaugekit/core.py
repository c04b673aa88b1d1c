"""Exact tagged partitions, gauges, Riemann sums and the partition builder.

Every coordinate in this module is a ``fractions.Fraction``; nothing here
rounds. Gauges are strictly positive radius functions together with a tag
suggestion hook: the hook is what makes subordinate partitions actually
constructible by bisection instead of merely existing.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence

from .errors import (
    DepthExhaustedError,
    InvalidGaugeError,
    PartitionMergeError,
)

Rat = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

# Bisection depth cap; exceeding it is an error, never a silent approximation.
MAX_DEPTH_DEFAULT = 64


def set_default_max_depth(n: int) -> None:
    """Override the process-wide bisection depth cap (CLI plumbing)."""
    global MAX_DEPTH_DEFAULT
    if n < 1:
        raise ValueError("depth cap must be positive")
    MAX_DEPTH_DEFAULT = int(n)


def rat(value, den=None) -> Fraction:
    """Build an exact rational from int, 'num/den' string or Fraction."""
    if den is not None:
        return Fraction(value, den)
    return Fraction(value)


def rat_str(q: Fraction) -> str:
    """Serialize a rational as 'num/den' (always with denominator)."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Iv:
    """Closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: {self.lo} > {self.hi}")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def interior_contains(self, x) -> bool:
        return self.lo < x < self.hi

    def contains_iv(self, other: "Iv") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def __str__(self):
        return f"[{self.lo},{self.hi}]"


@dataclass(frozen=True)
class ValueWithError:
    """A value plus a certified worst-case absolute error bound.

    ``err == 0`` means the value is exact. ``convention`` marks values that
    are 0 by the almost-everywhere convention rather than by evaluation.
    """

    value: Fraction
    err: Fraction = ZERO
    convention: bool = False

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        object.__setattr__(self, "err", Fraction(self.err))
        if self.err < 0:
            raise ValueError("error bound must be nonnegative")

    @property
    def exact(self) -> bool:
        return self.err == 0

    def __add__(self, other: "ValueWithError") -> "ValueWithError":
        return ValueWithError(self.value + other.value, self.err + other.err)

    def __neg__(self) -> "ValueWithError":
        return ValueWithError(-self.value, self.err)

    def scaled(self, c: Fraction) -> "ValueWithError":
        c = Fraction(c)
        return ValueWithError(self.value * c, self.err * abs(c))

    def abs(self) -> "ValueWithError":
        return ValueWithError(abs(self.value), self.err)

    def payload(self) -> dict:
        return {"value": rat_str(self.value), "err": rat_str(self.err)}


VWE = ValueWithError


class Item(NamedTuple):
    """One (tag, cell) pair of a tagged partition."""

    tag: Fraction
    cell: Iv


@dataclass(frozen=True)
class TaggedPartition:
    """A finite tagged cover of ``domain`` by closed cells, sorted by cell.

    Construction does not validate; use :func:`validate_partition`.
    """

    items: tuple
    domain: Iv

    @classmethod
    def of(cls, items: Sequence, domain: Iv) -> "TaggedPartition":
        norm = tuple(
            sorted(
                (Item(Fraction(t), c) for t, c in items),
                key=lambda it: (it.cell.lo, it.cell.hi, it.tag),
            )
        )
        return cls(norm, domain)

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)


class Violation(NamedTuple):
    index: Optional[int]
    rule: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple

    def payload(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"index": v.index, "rule": v.rule, "message": v.message}
                for v in self.violations
            ],
        }


def validate_partition(p: TaggedPartition) -> ValidationReport:
    """Check the tagged-partition invariants; violations are data, not errors.

    Rules checked: tags lie in their cells, cell interiors are pairwise
    disjoint, the union of the cells is exactly the domain.
    """
    issues = []
    if not p.items:
        issues.append(Violation(None, "empty", "partition has no items"))
        return ValidationReport(False, tuple(issues))

    for idx, (tag, cell) in enumerate(p.items):
        if tag not in cell:
            issues.append(
                Violation(idx, "tag-outside-cell", f"tag {tag} not in {cell}")
            )

    # Interior disjointness: among nondegenerate cells (sorted by lo) an
    # overlap shows up as a cell starting strictly before the running hi.
    run_hi = None
    for idx, (tag, cell) in enumerate(p.items):
        if cell.lo == cell.hi:
            continue
        if run_hi is not None and cell.lo < run_hi:
            issues.append(
                Violation(idx, "interiors-overlap", f"cell {cell} overlaps a predecessor")
            )
        run_hi = cell.hi if run_hi is None else max(run_hi, cell.hi)

    # Coverage: merged union of cells must be exactly the domain.
    cover = p.domain.lo
    for idx, (tag, cell) in enumerate(p.items):
        if cell.lo < p.domain.lo or cell.hi > p.domain.hi:
            issues.append(
                Violation(idx, "outside-domain", f"cell {cell} leaves domain {p.domain}")
            )
        if cell.lo > cover:
            issues.append(
                Violation(idx, "coverage-gap", f"uncovered gap ({cover},{cell.lo})")
            )
        cover = max(cover, cell.hi)
    if cover < p.domain.hi:
        issues.append(
            Violation(None, "coverage-gap", f"uncovered gap ({cover},{p.domain.hi})")
        )

    return ValidationReport(not issues, tuple(issues))


@dataclass(frozen=True)
class Gauge:
    """A strictly positive radius function with a tag suggestion oracle.

    ``radius`` maps a point to a positive rational. ``suggest_tag`` maps an
    interval to candidate tags inside it; it may be None. Suggestions come
    before the default candidates (endpoints, then midpoint) during
    partition construction.
    """

    radius: Callable[[Fraction], Fraction]
    suggest_tag: Optional[Callable[[Iv], Sequence[Fraction]]] = None
    name: str = "gauge"

    def radius_at(self, x: Fraction) -> Fraction:
        try:
            r = Fraction(self.radius(x))
        except Exception as exc:  # noqa: BLE001 - any failure is an invalid gauge
            raise InvalidGaugeError(f"gauge {self.name!r} failed at {x}: {exc}") from exc
        if r <= 0:
            raise InvalidGaugeError(f"gauge {self.name!r} non-positive at {x}: {r}")
        return r

    def suggestions(self, iv: Iv) -> tuple:
        if self.suggest_tag is None:
            return ()
        out = []
        for c in self.suggest_tag(iv):
            c = Fraction(c)
            if c in iv:
                out.append(c)
        return tuple(out)


def constant_gauge(r, name: Optional[str] = None) -> Gauge:
    r = Fraction(r)
    if r <= 0:
        raise InvalidGaugeError(f"constant gauge radius must be positive, got {r}")
    return Gauge(radius=lambda x: r, name=name or f"const({rat_str(r)})")


def min_gauge(a: Gauge, b: Gauge, name: Optional[str] = None) -> Gauge:
    """Pointwise minimum; suggestions of ``a`` are tried before ``b``'s."""

    def radius(x):
        return min(a.radius_at(x), b.radius_at(x))

    def suggest(iv):
        return a.suggestions(iv) + b.suggestions(iv)

    return Gauge(radius=radius, suggest_tag=suggest, name=name or f"min({a.name},{b.name})")


def is_subordinate(p: TaggedPartition, gauge: Gauge) -> bool:
    """True iff every cell fits strictly inside the open ball around its tag."""
    for tag, cell in p.items:
        r = gauge.radius_at(tag)
        if not (tag - r < cell.lo and cell.hi < tag + r):
            return False
    return True


def riemann_sum(f, p: TaggedPartition) -> ValueWithError:
    """Sum of f(tag) * |cell| with accumulated worst-case error bounds.

    ``f`` is anything callable as ``f(x) -> ValueWithError`` (e.g. FnSpec).
    Exact whenever every evaluation is exact.
    """
    total = ZERO
    err = ZERO
    for tag, cell in p.items:
        v = f(tag)
        w = cell.length
        total += v.value * w
        err += v.err * w
    return ValueWithError(total, err)


def _candidates(iv: Iv, gauge: Gauge, rng: Optional[random.Random]) -> list:
    cands = list(gauge.suggestions(iv))
    for d in (iv.lo, iv.hi, iv.midpoint):
        cands.append(d)
    # dedupe preserving order
    out = list(dict.fromkeys(cands))
    if rng is not None:
        rng.shuffle(out)
    return out


def cousin_partition(
    domain: Iv,
    gauge: Gauge,
    max_depth: Optional[int] = None,
    rng: Optional[random.Random] = None,
) -> TaggedPartition:
    """Build a partition of ``domain`` subordinate to ``gauge`` by bisection.

    For each interval the gauge's suggested tags are tried first, then the
    endpoints and the midpoint; the first candidate whose ball strictly
    contains the interval is accepted, otherwise the interval is bisected at
    its exact midpoint. A ``rng`` shuffles the candidate order, which is the
    only source of randomness; the split point never moves.

    Raises DepthExhaustedError carrying the smallest unaccepted interval if
    the cap is hit.
    """
    if max_depth is None:
        max_depth = MAX_DEPTH_DEFAULT
    items = []
    stack = [(domain, 0)]
    while stack:
        iv, depth = stack.pop()
        accepted = False
        for x in _candidates(iv, gauge, rng):
            r = gauge.radius_at(x)
            if x - r < iv.lo and iv.hi < x + r:
                items.append(Item(x, iv))
                accepted = True
                break
        if accepted:
            continue
        if depth >= max_depth:
            raise DepthExhaustedError(
                f"no acceptable tag for {iv} after {depth} bisections "
                f"under gauge {gauge.name!r}",
                interval=iv,
            )
        m = iv.midpoint
        stack.append((Iv(m, iv.hi), depth + 1))
        stack.append((Iv(iv.lo, m), depth + 1))
    return TaggedPartition.of(items, domain)


def merge_partitions(parts: Sequence[TaggedPartition]) -> TaggedPartition:
    """Concatenate partitions of abutting domains into one partition."""
    if not parts:
        raise PartitionMergeError("nothing to merge")
    ordered = sorted(parts, key=lambda p: (p.domain.lo, p.domain.hi))
    for a, b in zip(ordered, ordered[1:]):
        if a.domain.hi < b.domain.lo:
            raise PartitionMergeError(
                f"gap between {a.domain} and {b.domain}"
            )
        if a.domain.hi > b.domain.lo:
            raise PartitionMergeError(
                f"overlap between {a.domain} and {b.domain}"
            )
    items = [it for p in ordered for it in p.items]
    domain = Iv(ordered[0].domain.lo, ordered[-1].domain.hi)
    return TaggedPartition.of(items, domain)


@dataclass(frozen=True)
class HkRow:
    eps: Fraction
    sums: tuple  # of ValueWithError
    spread: Fraction

    def payload(self) -> dict:
        return {
            "eps": rat_str(self.eps),
            "sums": [s.payload() for s in self.sums],
            "spread": rat_str(self.spread),
        }


@dataclass(frozen=True)
class HkReport:
    """Sampled Riemann sums per epsilon. Evidence, never a proof: only
    finitely many subordinate partitions are ever examined."""

    fn_name: str
    a: Fraction
    b: Fraction
    rows: tuple
    reversed_orientation: bool
    tol: Optional[Fraction]
    converged: Optional[bool]

    @property
    def final_sums(self) -> tuple:
        return self.rows[-1].sums

    def payload(self) -> dict:
        return {
            "fn": self.fn_name,
            "from": rat_str(self.a),
            "to": rat_str(self.b),
            "reversed": self.reversed_orientation,
            "rows": [r.payload() for r in self.rows],
            "tol": None if self.tol is None else rat_str(self.tol),
            "converged": self.converged,
            "note": "sampled evidence only",
        }


def hk_estimate(
    f,
    a,
    b,
    family: Callable[[Fraction], Gauge],
    schedule: Sequence[Fraction],
    samples_per_eps: int = 3,
    seed: int = 0,
    tol: Optional[Fraction] = None,
    max_depth: Optional[int] = None,
) -> HkReport:
    """Sample Riemann sums of ``f`` over subordinate partitions of [a, b].

    ``family`` maps each epsilon of ``schedule`` to a gauge. For each
    epsilon, ``samples_per_eps`` partitions are built: the first with the
    deterministic candidate order, the rest with seeded shuffles. Reversed
    endpoints (a > b) negate every reported sum.
    """
    a = Fraction(a)
    b = Fraction(b)
    reverse = a > b
    lo, hi = (b, a) if reverse else (a, b)
    domain = Iv(lo, hi)
    master = random.Random(seed)
    rows = []
    for eps in schedule:
        eps = Fraction(eps)
        gauge = family(eps)
        sums = []
        for i in range(samples_per_eps):
            rng = None if i == 0 else random.Random(master.getrandbits(64))
            part = cousin_partition(domain, gauge, max_depth=max_depth, rng=rng)
            s = riemann_sum(f, part)
            if reverse:
                s = -s
            sums.append(s)
        values = [s.value for s in sums]
        rows.append(HkRow(eps, tuple(sums), max(values) - min(values)))
    converged = None
    if tol is not None:
        converged = rows[-1].spread <= Fraction(tol)
    return HkReport(
        fn_name=getattr(f, "name", "f"),
        a=a,
        b=b,
        rows=tuple(rows),
        reversed_orientation=reverse,
        tol=None if tol is None else Fraction(tol),
        converged=converged,
    )


def dump_partition_csv(path, p: TaggedPartition, gauge: Optional[Gauge] = None, f=None):
    """Write one row per item: tag, cell_lo, cell_hi, radius_at_tag, f_at_tag.

    All rationals are serialized as 'num/den'; missing gauge or function
    leaves the corresponding column empty.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tag", "cell_lo", "cell_hi", "radius_at_tag", "f_at_tag"])
        for tag, cell in p.items:
            radius = rat_str(gauge.radius_at(tag)) if gauge is not None else ""
            fval = rat_str(f(tag).value) if f is not None else ""
            w.writerow([rat_str(tag), rat_str(cell.lo), rat_str(cell.hi), radius, fval])
