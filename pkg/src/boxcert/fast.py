"""Fast numeric tier: hardware floats with conservative outward widening.

Used only by the certificate search.  Nothing here is trusted; the rigorous
checker re-derives every bound with the software floats of
:mod:`boxcert.numeric`.  Results are widened by one unit in the last place
in each direction (two for the libm-backed functions) instead of switching
FPU rounding modes, which keeps the tier portable.

Widening is skipped when an operation provably did not round: additions are
checked with the TwoSum error term and multiplications/divisions by a power
of two are exact.  That matters for the boundary cases of the monotonicity
test: a gradient like -2x on [-1, 0] has the exact enclosure [0, 2], and
the search may only claim "increasing" if the computed lower endpoint is
exactly 0, not 0 minus an artificial ulp.

The operation surface mirrors :class:`boxcert.numeric.RigorousContext` so
the Taylor and search machinery is generic over the tier.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple, Sequence

from .expr import Expr
from .numeric import DomainError, _eval_generic

_INF = math.inf


def _dn(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _dn2(x: float) -> float:
    return math.nextafter(math.nextafter(x, -_INF), -_INF)


def _up2(x: float) -> float:
    return math.nextafter(math.nextafter(x, _INF), _INF)


def _add_down(a: float, b: float) -> float:
    s = a + b
    bb = s - a
    if (a - (s - bb)) + (b - bb) == 0.0:  # TwoSum error term: s is exact
        return s
    return _dn(s)


def _add_up(a: float, b: float) -> float:
    s = a + b
    bb = s - a
    if (a - (s - bb)) + (b - bb) == 0.0:
        return s
    return _up(s)


def _is_pow2(x: float) -> bool:
    if x == 0.0 or math.isinf(x) or math.isnan(x):
        return False
    return abs(math.frexp(x)[0]) == 0.5


class FloatInterval(NamedTuple):
    lo: float
    hi: float

    @property
    def tier(self) -> str:
        return "fast"


class FastContext:
    """Float intervals with ulp widening; same surface as RigorousContext."""

    tier = "fast"

    def __init__(self):
        self.ZERO = 0.0
        self._pi = FloatInterval(_dn(math.pi), _up(math.pi))
        self._const_cache: dict[Fraction, FloatInterval] = {}

    def const(self, q: Fraction) -> FloatInterval:
        hit = self._const_cache.get(q)
        if hit is None:
            f = float(q)
            if Fraction(f) == q:
                hit = FloatInterval(f, f)
            else:
                hit = FloatInterval(_dn(f), _up(f))
            self._const_cache[q] = hit
        return hit

    def pi(self) -> FloatInterval:
        return self._pi

    def point(self, x: float) -> FloatInterval:
        return FloatInterval(x, x)

    def interval(self, lo: float, hi: float) -> FloatInterval:
        return FloatInterval(lo, hi)

    def add(self, a: FloatInterval, b: FloatInterval) -> FloatInterval:
        return FloatInterval(_add_down(a.lo, b.lo), _add_up(a.hi, b.hi))

    def sub(self, a: FloatInterval, b: FloatInterval) -> FloatInterval:
        return FloatInterval(_add_down(a.lo, -b.hi), _add_up(a.hi, -b.lo))

    def neg(self, a: FloatInterval) -> FloatInterval:
        return FloatInterval(-a.hi, -a.lo)

    def mul(self, a: FloatInterval, b: FloatInterval) -> FloatInterval:
        if (a.lo == 0.0 == a.hi) or (b.lo == 0.0 == b.hi):
            return FloatInterval(0.0, 0.0)
        p1 = a.lo * b.lo
        p2 = a.lo * b.hi
        p3 = a.hi * b.lo
        p4 = a.hi * b.hi
        lo = min(p1, p2, p3, p4)
        hi = max(p1, p2, p3, p4)
        if (_is_pow2(a.lo) and a.lo == a.hi) or (_is_pow2(b.lo) and b.lo == b.hi):
            return FloatInterval(lo, hi)
        return FloatInterval(_dn(lo), _up(hi))

    def div(self, a: FloatInterval, b: FloatInterval) -> FloatInterval:
        if b.lo <= 0.0 <= b.hi:
            raise DomainError("division by an interval containing zero")
        p1 = a.lo / b.lo
        p2 = a.lo / b.hi
        p3 = a.hi / b.lo
        p4 = a.hi / b.hi
        lo = min(p1, p2, p3, p4)
        hi = max(p1, p2, p3, p4)
        if _is_pow2(b.lo) and b.lo == b.hi:
            return FloatInterval(lo, hi)
        return FloatInterval(_dn(lo), _up(hi))

    def pow(self, a: FloatInterval, k: int) -> FloatInterval:
        if k == 0:
            return FloatInterval(1.0, 1.0)
        if k == 1:
            return a
        if a.lo == 0.0 == a.hi:
            return FloatInterval(0.0, 0.0)
        if k == 2:
            if a.lo >= 0.0:
                lo, hi = a.lo * a.lo, a.hi * a.hi
            elif a.hi <= 0.0:
                lo, hi = a.hi * a.hi, a.lo * a.lo
            else:
                m = max(-a.lo, a.hi)
                lo, hi = 0.0, m * m
            return FloatInterval(lo if lo == 0.0 else _dn(lo), _up(hi))
        if k % 2 == 1:
            return FloatInterval(_dn2(a.lo ** k), _up2(a.hi ** k))
        if a.lo >= 0.0:
            return FloatInterval(_dn2(a.lo ** k), _up2(a.hi ** k))
        if a.hi <= 0.0:
            return FloatInterval(_dn2((-a.hi) ** k), _up2((-a.lo) ** k))
        return FloatInterval(0.0, _up2(max(-a.lo, a.hi) ** k))

    def sqrt(self, a: FloatInterval) -> FloatInterval:
        if a.lo < 0.0:
            raise DomainError("sqrt of an interval with a negative lower end")
        return FloatInterval(max(0.0, _dn(math.sqrt(a.lo))), _up(math.sqrt(a.hi)))

    def atan(self, a: FloatInterval) -> FloatInterval:
        lo = 0.0 if a.lo == 0.0 else _dn2(math.atan(a.lo))
        hi = 0.0 if a.hi == 0.0 else _up2(math.atan(a.hi))
        return FloatInterval(lo, hi)

    def acos(self, a: FloatInterval) -> FloatInterval:
        if a.lo < -1.0 or a.hi > 1.0:
            raise DomainError("acos of an interval outside [-1, 1]")
        lo = 0.0 if a.hi == 1.0 else _dn2(math.acos(a.hi))
        return FloatInterval(max(0.0, lo), _up2(math.acos(a.lo)))

    def abs_bound(self, a: FloatInterval) -> float:
        return max(-a.lo, a.hi)

    def eval(self, e: Expr, box: Sequence[FloatInterval]) -> FloatInterval:
        return _eval_generic(self, e, box)

    # directed scalar operations
    def s_add_up(self, x: float, y: float) -> float:
        return _add_up(x, y)

    def s_add_down(self, x: float, y: float) -> float:
        return _add_down(x, y)

    def s_sub_up(self, x: float, y: float) -> float:
        return _add_up(x, -y)

    def s_sub_down(self, x: float, y: float) -> float:
        return _add_down(x, -y)

    def s_mul_up(self, x: float, y: float) -> float:
        return _up(x * y)

    def s_half_up(self, x: float) -> float:
        return x / 2.0

    def s_max(self, x: float, y: float) -> float:
        return x if x >= y else y

    def s_neg(self, x: float) -> float:
        return -x

    def is_neg(self, x: float) -> bool:
        return x < 0.0

    def midpoint(self, lo: float, hi: float) -> float:
        m = 0.5 * (lo + hi)
        if m < lo:
            return lo
        if m > hi:
            return hi
        return m

    def split_point(self, lo: float, hi: float) -> float:
        return self.midpoint(lo, hi)

    def scalar_from(self, q: Fraction, direction: str) -> float:
        f = float(q)
        if Fraction(f) == q:
            return f
        return _dn(f) if direction == "down" else _up(f)

    def to_float(self, x: float) -> float:
        return x
