"""Cantor-type generated sets with exact rational queries.

Three constructions are supported: the middle-thirds Cantor set on [0, 1],
its reflection C ∪ (−C) on [−1, 1], and the fat Cantor set on [0, 1] built
by removing a centered open interval of length 4^(−n) from each surviving
interval at step n (limit measure 1/2).

Membership for the middle-thirds constructions is decided exactly for every
rational input by ternary digit analysis (rational expansions are eventually
periodic, so the scan is finite). The fat-Cantor construction has no
depth-independent digit map, so its queries walk the construction tree:
realization endpoints are recognized as members immediately, points falling
into a removed gap are resolved at that gap's depth, and anything still
ambiguous at the depth cap raises UndecidedError with certified bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Tuple

from .core import Iv
from .errors import DomainError, UndecidedError

TERNARY_CANTOR = "ternary_cantor"
REFLECTED_CANTOR = "reflected_cantor"
SVC = "svc"

# Construction-walk depth cap; queries that would need to look deeper
# return certified bounds instead of an exact answer.
DEPTH_CAP_DEFAULT = 200

# realize() materializes 2^depth cells; refuse to allocate absurd amounts.
REALIZE_DEPTH_LIMIT = 24


def set_depth_cap(n: int) -> None:
    """Override the process-wide walk depth cap (CLI plumbing)."""
    global DEPTH_CAP_DEFAULT
    if n < 1:
        raise ValueError("depth cap must be positive")
    DEPTH_CAP_DEFAULT = int(n)


@dataclass(frozen=True)
class GeneratedSet:
    kind: str
    base: Iv

    def __str__(self):
        return self.kind


def ternary_cantor() -> GeneratedSet:
    return GeneratedSet(TERNARY_CANTOR, Iv(0, 1))


def reflected_cantor() -> GeneratedSet:
    return GeneratedSet(REFLECTED_CANTOR, Iv(-1, 1))


def svc() -> GeneratedSet:
    return GeneratedSet(SVC, Iv(0, 1))


@dataclass(frozen=True)
class ComponentRef:
    """A maximal open interval of the complement, with its creation depth."""

    interval: Iv
    depth_created: int


def _cantor_cells(depth: int) -> Tuple[Iv, ...]:
    cells = (Iv(0, 1),)
    for _ in range(depth):
        nxt = []
        for c in cells:
            w = c.length / 3
            nxt.append(Iv(c.lo, c.lo + w))
            nxt.append(Iv(c.hi - w, c.hi))
        cells = tuple(nxt)
    return cells


def _svc_cells(depth: int) -> Tuple[Iv, ...]:
    cells = (Iv(0, 1),)
    for step in range(1, depth + 1):
        half = Fraction(1, 4**step) / 2
        nxt = []
        for c in cells:
            m = c.midpoint
            nxt.append(Iv(c.lo, m - half))
            nxt.append(Iv(m + half, c.hi))
        cells = tuple(nxt)
    return cells


@lru_cache(maxsize=None)
def _realize_cached(kind: str, depth: int) -> Tuple[Iv, ...]:
    if kind == TERNARY_CANTOR:
        return _cantor_cells(depth)
    if kind == SVC:
        return _svc_cells(depth)
    if kind == REFLECTED_CANTOR:
        right = _cantor_cells(depth)
        left = tuple(Iv(-c.hi, -c.lo) for c in reversed(right))
        # the two cells meeting at 0 merge into one
        merged = Iv(left[-1].lo, right[0].hi)
        return left[:-1] + (merged,) + right[1:]
    raise ValueError(f"unknown set kind {kind!r}")


def realize(s: GeneratedSet, depth: int) -> Tuple[Iv, ...]:
    """The depth-n stage of the construction as sorted disjoint closed cells.

    For the one-sided kinds this is 2^depth cells; the reflected kind merges
    the pair meeting at 0 and yields 2^(depth+1) − 1 maximal cells.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if depth > REALIZE_DEPTH_LIMIT:
        raise ValueError(
            f"realize depth {depth} exceeds limit {REALIZE_DEPTH_LIMIT}"
        )
    return _realize_cached(s.kind, depth)


def measure_at(s: GeneratedSet, depth: int) -> Fraction:
    """Exact total length of the depth-n stage (computed in closed form)."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if s.kind == TERNARY_CANTOR:
        return Fraction(2, 3) ** depth
    if s.kind == REFLECTED_CANTOR:
        return 2 * Fraction(2, 3) ** depth
    if s.kind == SVC:
        # 1 − Σ_{k=1..n} 2^(k−1) 4^(−k)
        return Fraction(1, 2) + Fraction(1, 2 ** (depth + 1))
    raise ValueError(f"unknown set kind {s.kind!r}")


# ---------------------------------------------------------------------------
# middle-thirds locator: exact via ternary digits
# ---------------------------------------------------------------------------


def _cantor_locate(x: Fraction):
    """Classify x in [0,1] against the Cantor set.

    Returns ('member', None) or ('gap', (l, r, depth)) where (l, r) is the
    maximal removed middle third containing x. Terminates for every rational
    because remainders repeat within den(x) steps.
    """
    if x == 0 or x == 1:
        return ("member", None)
    seen = set()
    r = x
    prefix_thirds = Fraction(0)  # value of digits consumed so far
    place = Fraction(1)          # 3^(−digits consumed)
    depth = 0
    while True:
        if r == 0:
            return ("member", None)  # terminating expansion without a 1
        if r in seen:
            return ("member", None)  # periodic tail of 0s and 2s
        seen.add(r)
        t = 3 * r
        d = int(t)  # floor for t >= 0
        r = t - d
        depth += 1
        place /= 3
        if d == 1:
            if r == 0:
                # x = prefix + 3^(−depth) exactly; rewrite as 0(222...)
                return ("member", None)
            l = prefix_thirds + place
            return ("gap", (l, l + place, depth))
        prefix_thirds += d * place


# ---------------------------------------------------------------------------
# fat-Cantor locator: construction-tree walk
# ---------------------------------------------------------------------------


def _svc_locate(x: Fraction, depth_cap: int):
    """Classify x in [0,1] against the fat Cantor set.

    Returns ('member', None), ('gap', (l, r, depth)), or raises
    UndecidedError carrying certified distance bounds if the walk is still
    ambiguous at the cap.

    Dyadic rationals always resolve: at step s >= 2 every cell endpoint is
    an integer on the scale 2^(2s-1), the removed gap is centered on a
    half-integer with half-width 1/4 on that scale, so a point that is an
    integer on the scale can never fall into that gap or any later one.
    A surviving dyadic is therefore a member as soon as the scale catches
    up with its denominator.
    """
    den = x.denominator
    dyadic = den & (den - 1) == 0
    lo, hi = Fraction(0), Fraction(1)
    for step in range(1, depth_cap + 1):
        if x == lo or x == hi:
            return ("member", None)
        if dyadic and step >= 2 and den <= 1 << (2 * step - 1):
            return ("member", None)
        m = (lo + hi) / 2
        half = Fraction(1, 4**step) / 2
        g_lo, g_hi = m - half, m + half
        if g_lo < x < g_hi:
            return ("gap", (g_lo, g_hi, step))
        if x <= g_lo:
            hi = g_lo
        else:
            lo = g_hi
    raise UndecidedError(
        f"fat-Cantor query for {x} unresolved at depth {depth_cap}",
        bounds=(Fraction(0), min(x - lo, hi - x)),
    )


def _locate(s: GeneratedSet, x: Fraction, depth_cap: int):
    """Dispatch to the right locator; x must lie in the base interval."""
    if s.kind == TERNARY_CANTOR:
        return _cantor_locate(x)
    if s.kind == SVC:
        return _svc_locate(x, depth_cap)
    if s.kind == REFLECTED_CANTOR:
        kind, data = _cantor_locate(abs(x))
        if kind == "gap" and x < 0:
            l, r, depth = data
            data = (-r, -l, depth)
        return (kind, data)
    raise ValueError(f"unknown set kind {s.kind!r}")


@lru_cache(maxsize=200_000)
def _locate_default(kind: str, base: Iv, x: Fraction):
    return _locate(GeneratedSet(kind, base), x, DEPTH_CAP_DEFAULT)


def _locate_memo(s: GeneratedSet, x: Fraction, depth_cap=None):
    if depth_cap is None:
        return _locate_default(s.kind, s.base, x)
    return _locate(s, x, depth_cap)


def member(s: GeneratedSet, x, depth_cap=None) -> bool:
    """Exact membership in the limit set; x must lie in the base interval."""
    x = Fraction(x)
    if x not in s.base:
        raise DomainError(f"{x} outside base {s.base} of {s.kind}", witness=x)
    kind, _ = _locate_memo(s, x, depth_cap)
    return kind == "member"


def complement_component(s: GeneratedSet, x, depth_cap=None) -> ComponentRef:
    """The maximal open interval around x disjoint from the limit set."""
    x = Fraction(x)
    if not s.base.interior_contains(x):
        raise DomainError(
            f"{x} not interior to base {s.base} of {s.kind}", witness=x
        )
    kind, data = _locate_memo(s, x, depth_cap)
    if kind == "member":
        raise DomainError(f"{x} belongs to {s.kind}", witness=x)
    l, r, depth = data
    return ComponentRef(Iv(l, r), depth)


def distance(s: GeneratedSet, x, depth_cap=None) -> Fraction:
    """Exact distance from x to the limit set.

    Points outside the base interval are measured to the nearest hull
    endpoint (hull endpoints belong to all three constructions). Raises
    UndecidedError past the depth cap; use distance_bounds for the
    bounds-only variant.
    """
    x = Fraction(x)
    if x < s.base.lo:
        return s.base.lo - x
    if x > s.base.hi:
        return x - s.base.hi
    kind, data = _locate_memo(s, x, depth_cap)
    if kind == "member":
        return Fraction(0)
    l, r, _ = data
    return min(x - l, r - x)


def distance_bounds(s: GeneratedSet, x, depth_cap=None) -> Tuple[Fraction, Fraction]:
    """Certified (lower, upper) bounds on the distance; equal when exact."""
    try:
        d = distance(s, x, depth_cap)
        return (d, d)
    except UndecidedError as exc:
        return exc.bounds


def svc_stage_interval(x, depth: int) -> Iv:
    """The depth-n surviving interval of the fat Cantor construction
    containing the member point x. Raises DomainError if x falls into a
    removed gap on the way down."""
    x = Fraction(x)
    lo, hi = Fraction(0), Fraction(1)
    if not lo <= x <= hi:
        raise DomainError(f"{x} outside [0,1]", witness=x)
    for step in range(1, depth + 1):
        m = (lo + hi) / 2
        half = Fraction(1, 4**step) / 2
        if m - half < x < m + half:
            raise DomainError(
                f"{x} falls into the step-{step} gap; not a member", witness=x
            )
        if x <= m - half:
            hi = m - half
        else:
            lo = m + half
    return Iv(lo, hi)


def endpoint_sample(s: GeneratedSet, depth: int, count: int, seed: int = 0):
    """Seeded sample of realization-stage endpoints (all limit-set members)."""
    import random

    pool = sorted({pt for c in realize(s, depth) for pt in (c.lo, c.hi)})
    if count >= len(pool):
        return tuple(pool)
    rng = random.Random(seed)
    return tuple(sorted(rng.sample(pool, count)))


def dump_realization_csv(path, s: GeneratedSet, depth: int) -> None:
    """Write the depth-n stage as CSV rows: depth, lo, hi ('num/den')."""
    import csv

    from .core import rat_str

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["depth", "lo", "hi"])
        for cell in realize(s, depth):
            w.writerow([depth, rat_str(cell.lo), rat_str(cell.hi)])
