"""Catalog functions: exact evaluation, derivative metadata, certificates.

Each FnSpec bundles a pointwise evaluator with the analytic side data the
rest of the package consumes: where the derivative exists (and its value),
the declared failure set, a Taylor-increment modulus, monotonicity
breakpoints, and Dini-band certificates. All of that is declared per
function, never inferred numerically: the quantifiers involved are not
checkable by sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

from . import sets
from .core import Iv, ValueWithError, rat_str
from .errors import DomainError, UnsupportedInstanceError

ZERO = Fraction(0)
ONE = Fraction(1)

DEFAULT_ROOT_ERR = Fraction(1, 10**12)


# ---------------------------------------------------------------------------
# failure-set descriptors (decidable membership for every kind)
# ---------------------------------------------------------------------------


class FailureSet:
    """Base descriptor; subclasses implement exact membership."""

    kind = "abstract"

    def __contains__(self, x) -> bool:
        raise NotImplementedError

    def describe(self) -> str:
        return self.kind

    def suggestion_points(self, iv: Iv) -> Tuple[Fraction, ...]:
        """Candidate member points inside iv, for tag oracles. Best effort."""
        return ()


class EmptyFailureSet(FailureSet):
    kind = "empty"

    def __contains__(self, x) -> bool:
        return False


class FiniteFailureSet(FailureSet):
    kind = "finite"

    def __init__(self, points: Sequence):
        self.points = tuple(sorted(Fraction(p) for p in points))
        self._members = frozenset(self.points)

    def __contains__(self, x) -> bool:
        return Fraction(x) in self._members

    def describe(self) -> str:
        return "finite{" + ",".join(rat_str(p) for p in self.points) + "}"

    def suggestion_points(self, iv: Iv) -> Tuple[Fraction, ...]:
        return tuple(p for p in self.points if p in iv)


class GeneratedFailureSet(FailureSet):
    kind = "generated"

    def __init__(self, s: sets.GeneratedSet):
        self.set = s

    def __contains__(self, x) -> bool:
        x = Fraction(x)
        if x not in self.set.base:
            return False
        return sets.member(self.set, x)

    def describe(self) -> str:
        return f"generated({self.set.kind})"

    def suggestion_points(self, iv: Iv) -> Tuple[Fraction, ...]:
        return nearest_set_points(self.set, iv)


class PredicateFailureSet(FailureSet):
    kind = "predicate"

    def __init__(self, fn: Callable[[Fraction], bool], description: str,
                 suggest: Optional[Callable[[Iv], Tuple[Fraction, ...]]] = None):
        self.fn = fn
        self.description = description
        self._suggest = suggest

    def __contains__(self, x) -> bool:
        return bool(self.fn(Fraction(x)))

    def describe(self) -> str:
        return f"predicate({self.description})"

    def suggestion_points(self, iv: Iv) -> Tuple[Fraction, ...]:
        if self._suggest is None:
            return ()
        return self._suggest(iv)


class UnionFailureSet(FailureSet):
    kind = "union"

    def __init__(self, *parts: FailureSet):
        self.parts = parts

    def __contains__(self, x) -> bool:
        return any(x in p for p in self.parts)

    def describe(self) -> str:
        return "union(" + ",".join(p.describe() for p in self.parts) + ")"

    def suggestion_points(self, iv: Iv) -> Tuple[Fraction, ...]:
        out = []
        for p in self.parts:
            out.extend(p.suggestion_points(iv))
        return tuple(out)


EMPTY_FAILURE = EmptyFailureSet()


def nearest_set_points(s: sets.GeneratedSet, iv: Iv) -> Tuple[Fraction, ...]:
    """Member points of ``s`` inside ``iv``, nearest to its midpoint.

    Used by tag oracles: if the midpoint is a member it is itself returned;
    otherwise the endpoints of its complement component that fall inside the
    interval are (those are members). Outside the hull the nearest hull
    endpoint is proposed.
    """
    m = iv.midpoint
    if m < s.base.lo:
        return (s.base.lo,) if s.base.lo in iv else ()
    if m > s.base.hi:
        return (s.base.hi,) if s.base.hi in iv else ()
    if m == s.base.lo or m == s.base.hi:
        return (m,)
    if sets.member(s, m):
        return (m,)
    comp = sets.complement_component(s, m).interval
    return tuple(p for p in (comp.lo, comp.hi) if p in iv and p in s.base)


# ---------------------------------------------------------------------------
# FnSpec
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FnSpec:
    """A catalog function with exact/approximate evaluation and side data.

    eval returns a ValueWithError; err == 0 whenever the function is marked
    exact. deriv is defined exactly off failure_set. modulus(x, eps) is a
    radius eta such that |f(y) − f(x) − f'(x)(y − x)| <= eps·|y − x|/(b − a)
    whenever |y − x| <= eta; it is a declared certificate, valid off the
    failure set. err_modulus(d) bounds |f(u) − f(v)| by a function of
    |u − v| and is used to propagate inexact inner values through
    composition. dini_band/dini_eta1 certify the finite-Dini-derivative
    bands used by the null-set gauge constructor.
    """

    name: str
    domain: Iv
    eval: Callable[[Fraction], ValueWithError]
    deriv: Optional[Callable[[Fraction], ValueWithError]] = None
    failure_set: FailureSet = EMPTY_FAILURE
    modulus: Optional[Callable[[Fraction, Fraction], Fraction]] = None
    antideriv: Optional["FnSpec"] = None
    monotone_breakpoints: Optional[Tuple[Fraction, ...]] = None
    err_modulus: Optional[Callable[[Fraction], Fraction]] = None
    dini_band: Optional[Callable[[Fraction], int]] = None
    dini_eta1: Optional[Callable[[Fraction], Fraction]] = None
    range_hint: Optional[Iv] = None
    exact: bool = True

    def __call__(self, x) -> ValueWithError:
        x = Fraction(x)
        if x not in self.domain:
            raise DomainError(
                f"{self.name} evaluated at {x} outside {self.domain}", witness=x
            )
        return self.eval(x)

    def deriv_at(self, x) -> ValueWithError:
        """Derivative off the failure set; 0 flagged convention on it."""
        x = Fraction(x)
        if x in self.failure_set:
            return ValueWithError(ZERO, ZERO, convention=True)
        if self.deriv is None:
            raise UnsupportedInstanceError(f"{self.name} has no derivative data")
        return self.deriv(x)

    def descriptor(self) -> dict:
        return {
            "name": self.name,
            "domain": [rat_str(self.domain.lo), rat_str(self.domain.hi)],
            "exact": self.exact,
            "has_deriv": self.deriv is not None,
            "failure_set": self.failure_set.describe(),
            "has_modulus": self.modulus is not None,
            "has_antideriv": self.antideriv is not None,
        }


def deriv_spec(f: FnSpec, name: Optional[str] = None) -> FnSpec:
    """The derivative of f as a function, 0 by convention on the failure set."""
    if f.deriv is None:
        raise UnsupportedInstanceError(f"{f.name} has no derivative data")
    return FnSpec(
        name=name or f"{f.name}_deriv",
        domain=f.domain,
        eval=f.deriv_at,
        exact=f.exact,
    )


# ---------------------------------------------------------------------------
# concrete evaluators
# ---------------------------------------------------------------------------


@lru_cache(maxsize=200_000)
def cantor_fn(x) -> Fraction:
    """The Cantor-Lebesgue function, exactly, for any rational in [0, 1].

    Reads ternary digits until the first 1 (which contributes the final
    binary digit) or until the remainder repeats; a repeating block of 0/2
    digits sums as a geometric series. Runs at most den(x) + 1 steps.
    """
    x = Fraction(x)
    if not ZERO <= x <= ONE:
        raise DomainError(f"cantor_fn needs x in [0,1], got {x}", witness=x)
    if x == 1:
        return ONE
    seen = {}
    bits = 0  # binary digits accumulated so far, as an integer
    n = 0
    r = x
    while True:
        if r == 0:
            return Fraction(bits, 2**n) if n else ZERO
        if r in seen:
            k = seen[r]
            cyc_len = n - k
            cyc = bits & ((1 << cyc_len) - 1)
            head = bits >> cyc_len
            return Fraction(head, 2**k) + Fraction(cyc, (2**cyc_len - 1) * 2**k)
        seen[r] = n
        t = 3 * r
        d = int(t)
        r = t - d
        n += 1
        if d == 1:
            return Fraction(bits, 2 ** (n - 1)) + Fraction(1, 2**n)
        bits = (bits << 1) | (d // 2)


def cantor_abs(x) -> Fraction:
    """c(|x|) on [−1, 1]; constant on each complement component of C ∪ (−C)."""
    x = Fraction(x)
    if not -ONE <= x <= ONE:
        raise DomainError(f"cantor_abs needs x in [-1,1], got {x}", witness=x)
    return cantor_fn(abs(x))


def svc_dist_fn(x) -> Fraction:
    """Exact distance from x in [0, 1] to the fat Cantor set; 0 on it."""
    x = Fraction(x)
    if not ZERO <= x <= ONE:
        raise DomainError(f"svc_dist_fn needs x in [0,1], got {x}", witness=x)
    return sets.distance(sets.svc(), x)


def _iroot4(n: int) -> int:
    """floor(n ** (1/4)) for a nonnegative integer."""
    return math.isqrt(math.isqrt(n))


def quartic_root(x, max_err=None) -> ValueWithError:
    """Fourth root with a certified error bound; exact on fourth powers."""
    x = Fraction(x)
    if x < 0:
        raise DomainError(f"fourth root of negative {x}", witness=x)
    if x == 0:
        return ValueWithError(ZERO)
    p, q = x.numerator, x.denominator
    rp, rq = _iroot4(p), _iroot4(q)
    if rp**4 == p and rq**4 == q:
        return ValueWithError(Fraction(rp, rq))
    if max_err is None:
        max_err = DEFAULT_ROOT_ERR
    max_err = Fraction(max_err)
    if max_err <= 0:
        raise ValueError("max_err must be positive")
    inv = max_err.denominator // max_err.numerator + 1
    k = inv.bit_length()  # 2^k >= 1/max_err
    scaled = (p << (4 * k)) // q
    s = _iroot4(scaled)
    # true root lies in [s, s + 1) / 2^k
    return ValueWithError(Fraction(s, 2**k), Fraction(1, 2**k))


def _quartic_err_modulus(d: Fraction) -> Fraction:
    """Rational upper bound for d^(1/4): |u^(1/4) − v^(1/4)| <= |u − v|^(1/4)."""
    if d == 0:
        return ZERO
    r = quartic_root(d, Fraction(d, 4) if d < 1 else Fraction(1, 2**20))
    return r.value + r.err


# ---------------------------------------------------------------------------
# builders (each binds its own domain; moduli close over it)
# ---------------------------------------------------------------------------


def const_fn(c, domain: Iv, name: Optional[str] = None) -> FnSpec:
    c = Fraction(c)
    return FnSpec(
        name=name or (("one" if c == 1 else "zero") if c in (0, 1) else f"const({rat_str(c)})"),
        domain=domain,
        eval=lambda x: ValueWithError(c),
        deriv=lambda x: ValueWithError(ZERO),
        modulus=lambda x, eps: ONE,
        monotone_breakpoints=(),
        dini_band=lambda x: 0,
        dini_eta1=lambda x: ONE,
        range_hint=Iv(c, c),
    )


def identity_fn(domain: Iv, name: str = "identity") -> FnSpec:
    return FnSpec(
        name=name,
        domain=domain,
        eval=lambda x: ValueWithError(x),
        deriv=lambda x: ValueWithError(ONE),
        modulus=lambda x, eps: ONE,
        monotone_breakpoints=(),
        dini_band=lambda x: 1,
        dini_eta1=lambda x: ONE,
        range_hint=domain,
    )


def square_fn(domain: Iv, name: str = "square") -> FnSpec:
    width = domain.length

    def modulus(x, eps):
        # |y² − x² − 2x(y − x)| = (y − x)² <= eps|y − x|/width  iff  |y − x| <= eps/width
        return Fraction(eps) / width

    def band(x):
        return int(2 * abs(Fraction(x)))

    def eta1(x):
        # |y² − x²| <= (2|x| + eta)|y − x| <= (1 + floor(2|x|))|y − x|
        g = 1 + int(2 * abs(Fraction(x))) - 2 * abs(Fraction(x))
        return g if g > 0 else ONE

    hi = max(abs(domain.lo), abs(domain.hi))
    lo = ZERO if domain.lo <= 0 <= domain.hi else min(domain.lo**2, domain.hi**2)
    return FnSpec(
        name=name,
        domain=domain,
        eval=lambda x: ValueWithError(x * x),
        deriv=lambda x: ValueWithError(2 * x),
        modulus=modulus,
        monotone_breakpoints=(ZERO,) if domain.interior_contains(ZERO) else (),
        dini_band=band,
        dini_eta1=eta1,
        range_hint=Iv(lo, hi * hi),
    )


def _component_slack(s: sets.GeneratedSet, x: Fraction) -> Fraction:
    comp = sets.complement_component(s, x).interval
    return min(x - comp.lo, comp.hi - x)


def cantor_fn_spec() -> FnSpec:
    C = sets.ternary_cantor()

    def modulus(x, eps):
        # locally constant off C: any radius within the plateau certifies 0 error
        return _component_slack(C, Fraction(x))

    def eta1(x):
        return _component_slack(C, Fraction(x))

    return FnSpec(
        name="cantor",
        domain=Iv(0, 1),
        eval=lambda x: ValueWithError(cantor_fn(x)),
        deriv=lambda x: ValueWithError(ZERO),
        failure_set=GeneratedFailureSet(C),
        modulus=modulus,
        monotone_breakpoints=(),
        dini_band=lambda x: 0,
        dini_eta1=eta1,
        range_hint=Iv(0, 1),
    )


def cantor_abs_spec() -> FnSpec:
    D = sets.reflected_cantor()

    def modulus(x, eps):
        return _component_slack(D, Fraction(x))

    return FnSpec(
        name="cantor_abs",
        domain=Iv(-1, 1),
        eval=lambda x: ValueWithError(cantor_abs(x)),
        deriv=lambda x: ValueWithError(ZERO),
        failure_set=GeneratedFailureSet(D),
        modulus=modulus,
        monotone_breakpoints=(ZERO,),
        dini_band=lambda x: 0,
        dini_eta1=lambda x: _component_slack(D, Fraction(x)),
        range_hint=Iv(0, 1),
    )


def _svc_gap_center(x: Fraction) -> bool:
    S = sets.svc()
    if not S.base.interior_contains(x):
        return False
    if sets.member(S, x):
        return False
    return x == sets.complement_component(S, x).interval.midpoint


def svc_dist_spec() -> FnSpec:
    S = sets.svc()

    def deriv(x):
        # inside a removed gap the distance function is a tent with slope ±1
        comp = sets.complement_component(S, Fraction(x)).interval
        return ValueWithError(ONE if x < comp.midpoint else -ONE)

    failure = UnionFailureSet(
        GeneratedFailureSet(S),
        PredicateFailureSet(_svc_gap_center, "fat-Cantor gap centers"),
    )
    return FnSpec(
        name="svc_dist",
        domain=Iv(0, 1),
        eval=lambda x: ValueWithError(svc_dist_fn(x)),
        deriv=deriv,
        failure_set=failure,
        range_hint=Iv(0, Fraction(1, 8)),
    )


def quartic_root_spec(max_err=None, domain: Iv = Iv(0, 1)) -> FnSpec:
    err = DEFAULT_ROOT_ERR if max_err is None else Fraction(max_err)

    def deriv(x):
        x = Fraction(x)
        r = quartic_root(x, err * x if err * x > 0 else err)
        # d/dx x^(1/4) = x^(1/4) / (4x)
        return ValueWithError(r.value / (4 * x), r.err / (4 * x))

    return FnSpec(
        name="quartic_root",
        domain=domain,
        eval=lambda x: quartic_root(x, err),
        deriv=deriv,
        failure_set=FiniteFailureSet((ZERO,)),
        monotone_breakpoints=(),
        err_modulus=_quartic_err_modulus,
        range_hint=Iv(0, 1),
        exact=False,
    )


# ---------------------------------------------------------------------------
# combinators
# ---------------------------------------------------------------------------


def compose(outer: FnSpec, inner: FnSpec, name: Optional[str] = None) -> FnSpec:
    """outer ∘ inner with error propagation and chain-rule metadata."""

    def ev(x):
        u = inner(x)
        lo, hi = u.value - u.err, u.value + u.err
        if lo not in outer.domain or hi not in outer.domain:
            raise DomainError(
                f"{inner.name}({x}) = {u.value}±{u.err} outside domain of {outer.name}",
                witness=Fraction(x),
            )
        w = outer(u.value)
        extra = ZERO
        if u.err > 0:
            if outer.err_modulus is None:
                raise UnsupportedInstanceError(
                    f"{outer.name} cannot absorb inexact inner values"
                )
            extra = outer.err_modulus(u.err)
        return ValueWithError(w.value, w.err + extra)

    deriv = None
    if outer.deriv is not None and inner.deriv is not None:
        def deriv(x):  # chain rule, only invoked off the failure set
            u = inner(x)
            if u.err != 0:
                raise UnsupportedInstanceError(
                    f"chain rule through inexact {inner.name} value"
                )
            a = outer.deriv(u.value)
            b = inner.deriv(Fraction(x))
            return ValueWithError(
                a.value * b.value,
                abs(a.value) * b.err + abs(b.value) * a.err + a.err * b.err,
            )

    def fails(x):
        x = Fraction(x)
        if x in inner.failure_set:
            return True
        u = inner(x)
        if u.err != 0:
            return True  # cannot certify the chain rule through approximation
        return u.value in outer.failure_set

    failure = PredicateFailureSet(
        fails, f"chain-rule failures of {outer.name}∘{inner.name}",
        suggest=inner.failure_set.suggestion_points,
    )
    return FnSpec(
        name=name or f"{outer.name}∘{inner.name}",
        domain=inner.domain,
        eval=ev,
        deriv=deriv,
        failure_set=failure,
        range_hint=outer.range_hint,
        exact=outer.exact and inner.exact,
    )


def product(f: FnSpec, g: FnSpec, name: Optional[str] = None) -> FnSpec:
    lo = max(f.domain.lo, g.domain.lo)
    hi = min(f.domain.hi, g.domain.hi)
    if lo > hi:
        raise DomainError(f"domains of {f.name} and {g.name} do not meet")
    domain = Iv(lo, hi)

    def ev(x):
        a, b = f(x), g(x)
        return ValueWithError(
            a.value * b.value,
            abs(a.value) * b.err + abs(b.value) * a.err + a.err * b.err,
        )

    deriv = None
    if f.deriv is not None and g.deriv is not None:
        def deriv(x):
            a, b = f(x), g(x)
            da, db = f.deriv(x), g.deriv(x)
            v = da.value * b.value + a.value * db.value
            e = (abs(da.value) * b.err + abs(b.value) * da.err
                 + abs(a.value) * db.err + abs(db.value) * a.err
                 + da.err * b.err + a.err * db.err)
            return ValueWithError(v, e)

    return FnSpec(
        name=name or f"{f.name}·{g.name}",
        domain=domain,
        eval=ev,
        deriv=deriv,
        failure_set=UnionFailureSet(f.failure_set, g.failure_set),
        exact=f.exact and g.exact,
    )


def fn_linear_combination(terms, domain: Iv, name: str = "lincomb") -> FnSpec:
    """Sum of coeff · fn over (coeff, FnSpec) pairs, on a common domain."""
    terms = tuple((Fraction(c), f) for c, f in terms)

    def ev(x):
        total = ValueWithError(ZERO)
        for c, f in terms:
            total = total + f(x).scaled(c)
        return total

    return FnSpec(name=name, domain=domain, eval=ev,
                  exact=all(f.exact for _, f in terms))


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_ALIASES = {
    "linear": "identity",
    "x": "identity",
    "x^2": "square",
    "x2": "square",
    "cantor_fn": "cantor",
    "c": "cantor",
    "G": "svc_dist",
    "F": "quartic_root",
    "F∘G": "quartic_svc_dist",
    "FoG": "quartic_svc_dist",
}


@lru_cache(maxsize=1)
def catalog() -> dict:
    """The named function registry (canonical names only; see lookup)."""
    cantor = cantor_fn_spec()
    cantor_abs_f = cantor_abs_spec()
    identity = identity_fn(Iv(-2, 2))
    square = square_fn(Iv(-1, 1))
    one = const_fn(1, Iv(-2, 2))
    zero = const_fn(0, Iv(-2, 2))
    svc_d = svc_dist_spec()
    qroot = quartic_root_spec()
    entries = {
        "identity": identity,
        "one": one,
        "zero": zero,
        "square": square,
        "cantor": cantor,
        "cantor_deriv": deriv_spec(cantor),
        "cantor_abs": cantor_abs_f,
        "cantor_abs_deriv": deriv_spec(cantor_abs_f),
        "svc_dist": svc_d,
        "quartic_root": qroot,
        "quartic_svc_dist": compose(qroot, svc_d, name="quartic_svc_dist"),
    }
    return entries


def lookup(name: str) -> FnSpec:
    reg = catalog()
    key = _ALIASES.get(name, name)
    if key not in reg:
        raise KeyError(f"unknown catalog function {name!r}")
    return reg[key]


def catalog_names() -> tuple:
    return tuple(sorted(catalog().keys()))
