"""Rigorous numeric tier: software floats with directed rounding and
interval arithmetic over them.

A :class:`PreciseFloat` is a software floating-point number ``m * b**e``
with the mantissa ``m`` written in a fixed base ``b``.  A
:class:`Precision` fixes the base and the maximal mantissa length ``p``;
every rounding operation produces a value with at most ``p`` base-``b``
digits.  All interval operations round their lower endpoint down and their
upper endpoint up, so a result interval always contains the exact
real-valued image of the operand intervals.

Intermediate values (sums, products) are computed exactly on integers and
rounded once, which makes every basic operation as tight as the precision
allows.  Square roots use integer square roots; atan uses argument
reduction plus an alternating series with an explicit remainder bound; acos
is derived from atan; pi comes from a Machin formula.  The series work in
exact rational arithmetic, so the final outward rounding is the only
approximation.

The fast float tier used by the search lives in :mod:`boxcert.fast`; both
tiers expose the same operation surface through their context objects.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .expr import (Acos, Add, Atan, Const, Div, Expr, ExprError, Mul, Neg,
                   PiConst, Pow, Sqrt, Sub, Var)

DOWN = "down"
UP = "up"


class DomainError(ArithmeticError):
    """Evaluation left the domain of an operation (divide by an interval
    containing zero, sqrt of a negative, acos outside [-1, 1]).

    Signals "inconclusive" to callers, never falsity of the inequality.
    """


@dataclass(frozen=True, slots=True)
class Precision:
    """Base and mantissa length of the rigorous tier."""

    base: int = 200
    digits: int = 5

    def __post_init__(self):
        if self.base < 2:
            raise ValueError(f"base must be >= 2, got {self.base}")
        if self.digits < 1:
            raise ValueError(f"digits must be >= 1, got {self.digits}")


# ---------------------------------------------------------------------------
# base-b integer helpers
# ---------------------------------------------------------------------------

_POW_CACHE: dict[int, list[int]] = {}
_LOG2: dict[int, float] = {}


def _bpow(b: int, k: int) -> int:
    """b**k for k >= 0, memoised per base."""
    powers = _POW_CACHE.get(b)
    if powers is None:
        powers = [1]
        _POW_CACHE[b] = powers
    while len(powers) <= k:
        powers.append(powers[-1] * b)
    return powers[k]


def _ndigits(n: int, b: int) -> int:
    """Number of base-b digits of n > 0."""
    log2b = _LOG2.get(b)
    if log2b is None:
        log2b = _LOG2[b] = math.log2(b)
    d = max(1, int(n.bit_length() / log2b))
    while _bpow(b, d) <= n:
        d += 1
    while d > 1 and _bpow(b, d - 1) > n:
        d -= 1
    return d


# ---------------------------------------------------------------------------
# PreciseFloat
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class PreciseFloat:
    """Software float ``mantissa * base**exponent``, normalised so that the
    mantissa carries no trailing zero digits (and zero is (0, 0))."""

    mantissa: int
    exponent: int
    base: int = 200

    def __post_init__(self):
        m, e = self.mantissa, self.exponent
        if m == 0:
            if e != 0:
                object.__setattr__(self, "exponent", 0)
            return
        b = self.base
        while m % b == 0:
            m //= b
            e += 1
        if m != self.mantissa:
            object.__setattr__(self, "mantissa", m)
            object.__setattr__(self, "exponent", e)

    # -- value inspection ---------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    @property
    def sign(self) -> int:
        return (self.mantissa > 0) - (self.mantissa < 0)

    @property
    def ndigits(self) -> int:
        return 0 if self.mantissa == 0 else _ndigits(abs(self.mantissa), self.base)

    def to_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.mantissa * _bpow(self.base, self.exponent))
        return Fraction(self.mantissa, _bpow(self.base, -self.exponent))

    def __float__(self) -> float:
        try:
            return self.mantissa * float(self.base) ** self.exponent
        except OverflowError:
            return float(self.to_fraction())

    # -- ordering (exact, same base only) ------------------------------------

    def _cmp(self, other: "PreciseFloat") -> int:
        if self.base != other.base:
            raise ValueError("cannot compare PreciseFloats of different bases")
        sa, sb = self.sign, other.sign
        if sa != sb:
            return -1 if sa < sb else 1
        ea, eb = self.exponent, other.exponent
        ma, mb = self.mantissa, other.mantissa
        if ea >= eb:
            ma *= _bpow(self.base, ea - eb)
        else:
            mb *= _bpow(self.base, eb - ea)
        return (ma > mb) - (ma < mb)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __neg__(self) -> "PreciseFloat":
        return PreciseFloat(-self.mantissa, self.exponent, self.base)

    def __abs__(self) -> "PreciseFloat":
        return PreciseFloat(abs(self.mantissa), self.exponent, self.base)

    def __repr__(self) -> str:
        return (f"PreciseFloat({self.mantissa}*{self.base}^{self.exponent}"
                f" ~ {float(self):.17g})")

    @staticmethod
    def zero(base: int = 200) -> "PreciseFloat":
        return PreciseFloat(0, 0, base)

    @staticmethod
    def from_int(value: int, base: int = 200) -> "PreciseFloat":
        return PreciseFloat(value, 0, base)


def pf_max(x: PreciseFloat, y: PreciseFloat) -> PreciseFloat:
    return x if x >= y else y


def pf_min(x: PreciseFloat, y: PreciseFloat) -> PreciseFloat:
    return x if x <= y else y


# ---------------------------------------------------------------------------
# directed rounding
# ---------------------------------------------------------------------------

def _round_scaled(M: int, E: int, prec: Precision, direction: str) -> PreciseFloat:
    """Round the exact value M * base**E to at most `digits` mantissa digits."""
    if M == 0:
        return PreciseFloat.zero(prec.base)
    b, p = prec.base, prec.digits
    d = _ndigits(abs(M), b)
    if d <= p:
        return PreciseFloat(M, E, b)
    shift = _bpow(b, d - p)
    if direction == DOWN:
        m = M // shift
    elif direction == UP:
        m = -((-M) // shift)
    else:
        raise ValueError(f"bad rounding direction {direction!r}")
    return PreciseFloat(m, E + d - p, b)


def _cmp_scaled(a: int, den: int, b: int, E: int) -> int:
    """Compare a with den * b**E (all positive), exactly."""
    if E >= 0:
        rhs = den * _bpow(b, E)
        return (a > rhs) - (a < rhs)
    lhs = a * _bpow(b, -E)
    return (lhs > den) - (lhs < den)


def _round_ratio(num: int, den: int, prec: Precision, direction: str) -> PreciseFloat:
    """Round the exact rational num/den (den > 0) outward per direction."""
    if num == 0:
        return PreciseFloat.zero(prec.base)
    b, p = prec.base, prec.digits
    a = abs(num)
    # smallest E with a < den * b**E, so b**(E-1) <= |num/den| < b**E
    E = _ndigits(a, b) - _ndigits(den, b) + 1
    while _cmp_scaled(a, den, b, E) >= 0:
        E += 1
    while _cmp_scaled(a, den, b, E - 1) < 0:
        E -= 1
    s = E - p
    if s >= 0:
        den_s = den * _bpow(b, s)
        num_s = num
    else:
        den_s = den
        num_s = num * _bpow(b, -s)
    if direction == DOWN:
        m = num_s // den_s
    elif direction == UP:
        m = -((-num_s) // den_s)
    else:
        raise ValueError(f"bad rounding direction {direction!r}")
    return PreciseFloat(m, s, b)


def round_dir(x, prec: Precision, direction: str) -> PreciseFloat:
    """Round x (Fraction, int or PreciseFloat) to prec, toward the given
    direction; the result equals x whenever x is exactly representable."""
    if isinstance(x, PreciseFloat):
        if x.base != prec.base:
            x = x.to_fraction()
        else:
            return _round_scaled(x.mantissa, x.exponent, prec, direction)
    if isinstance(x, int):
        return _round_scaled(x, 0, prec, direction)
    q = Fraction(x)
    return _round_ratio(q.numerator, q.denominator, prec, direction)


def round_nearest(x, prec: Precision) -> PreciseFloat:
    """Round to the closer of the two directed roundings (ties go down)."""
    lo = round_dir(x, prec, DOWN)
    hi = round_dir(x, prec, UP)
    if lo == hi:
        return lo
    q = x.to_fraction() if isinstance(x, PreciseFloat) else Fraction(x)
    return lo if q - lo.to_fraction() <= hi.to_fraction() - q else hi


def exact_from_fraction(q: Fraction, base: int) -> PreciseFloat | None:
    """Exact PreciseFloat for q if its denominator divides a power of base."""
    den = q.denominator
    if den == 1:
        return PreciseFloat(q.numerator, 0, base)
    d = den
    while d > 1:
        g = math.gcd(d, base)
        if g == 1:
            return None
        while d % g == 0:
            d //= g
    k = 1
    while _bpow(base, k) % den != 0:
        k += 1
        if k > 512:
            return None
    return PreciseFloat(q.numerator * (_bpow(base, k) // den), -k, base)


# -- exact and directed scalar arithmetic ------------------------------------

def pf_add_exact(x: PreciseFloat, y: PreciseFloat) -> tuple[int, int]:
    e = min(x.exponent, y.exponent)
    M = (x.mantissa * _bpow(x.base, x.exponent - e)
         + y.mantissa * _bpow(y.base, y.exponent - e))
    return M, e


def pf_add(x: PreciseFloat, y: PreciseFloat, prec: Precision,
           direction: str) -> PreciseFloat:
    M, e = pf_add_exact(x, y)
    return _round_scaled(M, e, prec, direction)


def pf_sub(x: PreciseFloat, y: PreciseFloat, prec: Precision,
           direction: str) -> PreciseFloat:
    return pf_add(x, -y, prec, direction)


def pf_mul_exact(x: PreciseFloat, y: PreciseFloat) -> PreciseFloat:
    return PreciseFloat(x.mantissa * y.mantissa, x.exponent + y.exponent, x.base)


def pf_mul(x: PreciseFloat, y: PreciseFloat, prec: Precision,
           direction: str) -> PreciseFloat:
    return _round_scaled(x.mantissa * y.mantissa, x.exponent + y.exponent,
                         prec, direction)


def pf_div(x: PreciseFloat, y: PreciseFloat, prec: Precision,
           direction: str) -> PreciseFloat:
    if y.is_zero:
        raise DomainError("division by zero")
    num, den = x.mantissa, y.mantissa
    if den < 0:
        num, den = -num, -den
    shift = x.exponent - y.exponent
    if shift >= 0:
        num *= _bpow(x.base, shift)
    else:
        den *= _bpow(x.base, -shift)
    return _round_ratio(num, den, prec, direction)


def pf_pow_exact(x: PreciseFloat, k: int) -> PreciseFloat:
    return PreciseFloat(x.mantissa ** k, x.exponent * k, x.base)


def pf_half(x: PreciseFloat, prec: Precision, direction: str) -> PreciseFloat:
    b = x.base
    if b % 2 == 0:
        return _round_scaled(x.mantissa * (b // 2), x.exponent - 1, prec, direction)
    q = x.to_fraction() / 2
    return round_dir(q, prec, direction)


def ulp(x: PreciseFloat, prec: Precision) -> Fraction:
    """Representation granularity at |x| for the given precision."""
    if x.is_zero:
        return Fraction(0)
    scale = x.exponent + x.ndigits - prec.digits
    if scale >= 0:
        return Fraction(_bpow(x.base, scale))
    return Fraction(1, _bpow(x.base, -scale))


# ---------------------------------------------------------------------------
# intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Interval:
    """Rigorous-tier interval; lo <= hi always holds."""

    lo: PreciseFloat
    hi: PreciseFloat

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: {self}")

    @property
    def tier(self) -> str:
        return "rigorous"

    def to_fractions(self) -> tuple[Fraction, Fraction]:
        return self.lo.to_fraction(), self.hi.to_fraction()

    def contains(self, q: Fraction) -> bool:
        return self.lo.to_fraction() <= q <= self.hi.to_fraction()

    def width(self) -> Fraction:
        return self.hi.to_fraction() - self.lo.to_fraction()

    def __repr__(self) -> str:
        return f"Interval[{float(self.lo):.17g}, {float(self.hi):.17g}]"


def interval_from_fraction(q: Fraction, prec: Precision) -> Interval:
    return Interval(round_dir(q, prec, DOWN), round_dir(q, prec, UP))


def point_interval(x: PreciseFloat) -> Interval:
    return Interval(x, x)


# ---------------------------------------------------------------------------
# operation cache
# ---------------------------------------------------------------------------

class _LRU:
    def __init__(self, maxsize: int = 1 << 16):
        self.maxsize = maxsize
        self.data: OrderedDict = OrderedDict()
        self.lock = threading.Lock()
        self.enabled = True

    def get(self, key):
        if not self.enabled:
            return None
        with self.lock:
            val = self.data.get(key)
            if val is not None:
                self.data.move_to_end(key)
            return val

    def put(self, key, val):
        if not self.enabled:
            return
        with self.lock:
            self.data[key] = val
            self.data.move_to_end(key)
            if len(self.data) > self.maxsize:
                self.data.popitem(last=False)

    def clear(self):
        with self.lock:
            self.data.clear()


_CACHE = _LRU()


def set_cache_enabled(enabled: bool) -> None:
    """The cache is an optimization only; results are identical either way."""
    _CACHE.enabled = enabled
    if not enabled:
        _CACHE.clear()


def cache_enabled() -> bool:
    return _CACHE.enabled


def clear_cache() -> None:
    _CACHE.clear()


def _ikey(a: Interval) -> tuple:
    return (a.lo.mantissa, a.lo.exponent, a.hi.mantissa, a.hi.exponent)


# ---------------------------------------------------------------------------
# interval arithmetic
# ---------------------------------------------------------------------------

def ival_add(a: Interval, b: Interval, prec: Precision) -> Interval:
    return Interval(pf_add(a.lo, b.lo, prec, DOWN), pf_add(a.hi, b.hi, prec, UP))


def ival_sub(a: Interval, b: Interval, prec: Precision) -> Interval:
    return Interval(pf_sub(a.lo, b.hi, prec, DOWN), pf_sub(a.hi, b.lo, prec, UP))


def ival_neg(a: Interval, prec: Precision | None = None) -> Interval:
    return Interval(-a.hi, -a.lo)


def ival_mul(a: Interval, b: Interval, prec: Precision) -> Interval:
    key = ("mul", _ikey(a), _ikey(b), prec.base, prec.digits)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    candidates = (pf_mul_exact(a.lo, b.lo), pf_mul_exact(a.lo, b.hi),
                  pf_mul_exact(a.hi, b.lo), pf_mul_exact(a.hi, b.hi))
    lo = hi = candidates[0]
    for c in candidates[1:]:
        if c < lo:
            lo = c
        if c > hi:
            hi = c
    result = Interval(round_dir(lo, prec, DOWN), round_dir(hi, prec, UP))
    _CACHE.put(key, result)
    return result


def ival_div(a: Interval, b: Interval, prec: Precision) -> Interval:
    if b.lo.sign <= 0 <= b.hi.sign:
        raise DomainError("division by an interval containing zero")
    key = ("div", _ikey(a), _ikey(b), prec.base, prec.digits)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    qa, qb = a.to_fractions(), b.to_fractions()
    ratios = [qa[0] / qb[0], qa[0] / qb[1], qa[1] / qb[0], qa[1] / qb[1]]
    result = Interval(round_dir(min(ratios), prec, DOWN),
                      round_dir(max(ratios), prec, UP))
    _CACHE.put(key, result)
    return result


def ival_pow(a: Interval, k: int, prec: Precision) -> Interval:
    if k < 0:
        raise ExprError("integer power exponents must be >= 0")
    if k == 0:
        one = round_dir(1, prec, DOWN)
        return Interval(one, one)
    if k == 1:
        return a
    key = ("pow", _ikey(a), k, prec.base, prec.digits)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    if k % 2 == 1:
        lo, hi = pf_pow_exact(a.lo, k), pf_pow_exact(a.hi, k)
    else:
        if a.lo.sign >= 0:
            lo, hi = pf_pow_exact(a.lo, k), pf_pow_exact(a.hi, k)
        elif a.hi.sign <= 0:
            lo, hi = pf_pow_exact(a.hi, k), pf_pow_exact(a.lo, k)
        else:
            lo = PreciseFloat.zero(prec.base)
            hi = pf_pow_exact(pf_max(abs(a.lo), abs(a.hi)), k)
    result = Interval(round_dir(lo, prec, DOWN), round_dir(hi, prec, UP))
    _CACHE.put(key, result)
    return result


def ival_abs_bound(a: Interval) -> PreciseFloat:
    """max(-lo, hi); exact, hence a valid upper bound for |t|, t in a."""
    return pf_max(-a.lo, a.hi)


# ---------------------------------------------------------------------------
# sqrt
# ---------------------------------------------------------------------------

def _sqrt_ends(x: PreciseFloat, prec: Precision) -> tuple[PreciseFloat, PreciseFloat]:
    """Directed p-digit enclosure of sqrt(x) for x >= 0."""
    if x.sign < 0:
        raise DomainError("sqrt of a negative value")
    if x.is_zero:
        z = PreciseFloat.zero(prec.base)
        return z, z
    b, p = prec.base, prec.digits
    q = x.to_fraction()
    num, den = q.numerator, q.denominator
    # smallest E with q < b**(2E), so the root has magnitude in [b^(E-1), b^E)
    E = (_ndigits(num, b) - _ndigits(den, b)) // 2 + 1
    while _cmp_scaled(num, den, b, 2 * E) >= 0:
        E += 1
    while _cmp_scaled(num, den, b, 2 * (E - 1)) < 0:
        E -= 1
    s = p - E
    # z = q * b**(2s); m = isqrt(floor(z)) satisfies m <= sqrt(z) < m + 1
    if s >= 0:
        zn = num * _bpow(b, 2 * s)
        zd = den
    else:
        zn = num
        zd = den * _bpow(b, -2 * s)
    zq, zr = divmod(zn, zd)
    m = math.isqrt(zq)
    lo = PreciseFloat(m, -s, b)
    if zr == 0 and m * m == zq:
        return lo, lo
    hi = PreciseFloat(m + 1, -s, b)
    return round_dir(lo, prec, DOWN), round_dir(hi, prec, UP)


def ival_sqrt(a: Interval, prec: Precision) -> Interval:
    if a.lo.sign < 0:
        raise DomainError("sqrt of an interval with a negative lower end")
    key = ("sqrt", _ikey(a), prec.base, prec.digits)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    lo, _ = _sqrt_ends(a.lo, prec)
    _, hi = _sqrt_ends(a.hi, prec)
    result = Interval(lo, hi)
    _CACHE.put(key, result)
    return result


# ---------------------------------------------------------------------------
# atan, pi, acos (exact rational series with remainder bounds)
# ---------------------------------------------------------------------------

def _atan_series(q: Fraction, tol: Fraction) -> tuple[Fraction, Fraction]:
    """Enclosure of atan(q) for 0 <= q <= 1/2 by the alternating series."""
    total = Fraction(0)
    q2 = q * q
    power = q
    n = 1
    while True:
        term = power / n
        if n % 4 == 1:
            total += term
        else:
            total -= term
        power *= q2
        n += 2
        next_term = power / n
        if next_term <= tol:
            # remainder has the sign of the next term's slot
            if n % 4 == 1:
                return total, total + next_term
            return total - next_term, total


def _atan_frac(q: Fraction, tol: Fraction) -> tuple[Fraction, Fraction]:
    """Rational enclosure of atan(q), any q."""
    if q < 0:
        lo, hi = _atan_frac(-q, tol)
        return -hi, -lo
    if q > 1:
        # atan(q) = pi/2 - atan(1/q)
        pi_lo, pi_hi = _pi_frac(tol)
        lo, hi = _atan_frac(1 / q, tol)
        return pi_lo / 2 - hi, pi_hi / 2 - lo
    if q > Fraction(1, 2):
        # atan(q) = 2 atan(q / (1 + sqrt(1 + q^2)))
        s_lo, s_hi = _sqrt_frac(1 + q * q, tol)
        u_lo, u_hi = q / (1 + s_hi), q / (1 + s_lo)
        lo, _ = _atan_series(u_lo, tol)
        _, hi = _atan_series(u_hi, tol)
        return 2 * lo, 2 * hi
    return _atan_series(q, tol)


def _sqrt_frac(q: Fraction, tol: Fraction) -> tuple[Fraction, Fraction]:
    """Rational enclosure of sqrt(q) for q >= 0 with absolute error <= tol."""
    if q < 0:
        raise DomainError("sqrt of a negative value")
    if q == 0:
        return Fraction(0), Fraction(0)
    # scale so that the integer sqrt resolves tol: sqrt(q) = isqrt(q*k^2)/k
    k = 1
    while Fraction(1, k) > tol:
        k *= 2
    scaled = q * k * k
    root = math.isqrt(scaled.numerator // scaled.denominator)
    lo = Fraction(root, k)
    hi = Fraction(root + 1, k)
    return lo, hi


_PI_FRAC_CACHE: dict[Fraction, tuple[Fraction, Fraction]] = {}


def _pi_frac(tol: Fraction) -> tuple[Fraction, Fraction]:
    """Machin: pi = 16 atan(1/5) - 4 atan(1/239)."""
    hit = _PI_FRAC_CACHE.get(tol)
    if hit is not None:
        return hit
    t = tol / 32
    a5_lo, a5_hi = _atan_series(Fraction(1, 5), t)
    a239_lo, a239_hi = _atan_series(Fraction(1, 239), t)
    result = (16 * a5_lo - 4 * a239_hi, 16 * a5_hi - 4 * a239_lo)
    _PI_FRAC_CACHE[tol] = result
    return result


def _trans_tol(prec: Precision) -> Fraction:
    return Fraction(1, _bpow(prec.base, prec.digits + 2))


_PI_CACHE: dict[tuple[int, int], Interval] = {}


def pi_enclosure(prec: Precision) -> Interval:
    key = (prec.base, prec.digits)
    hit = _PI_CACHE.get(key)
    if hit is None:
        lo, hi = _pi_frac(_trans_tol(prec))
        hit = Interval(round_dir(lo, prec, DOWN), round_dir(hi, prec, UP))
        _PI_CACHE[key] = hit
    return hit


def _atan_ends(x: PreciseFloat, prec: Precision) -> tuple[PreciseFloat, PreciseFloat]:
    lo, hi = _atan_frac(x.to_fraction(), _trans_tol(prec))
    return round_dir(lo, prec, DOWN), round_dir(hi, prec, UP)


def ival_atan(a: Interval, prec: Precision) -> Interval:
    key = ("atan", _ikey(a), prec.base, prec.digits)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    lo, _ = _atan_ends(a.lo, prec)
    _, hi = _atan_ends(a.hi, prec)
    result = Interval(lo, hi)
    _CACHE.put(key, result)
    return result


def _acos_frac(q: Fraction, tol: Fraction) -> tuple[Fraction, Fraction]:
    if q < -1 or q > 1:
        raise DomainError("acos argument outside [-1, 1]")
    pi_lo, pi_hi = _pi_frac(tol)
    if q == 1:
        return Fraction(0), Fraction(0)
    if q == -1:
        return pi_lo, pi_hi
    if q == 0:
        return pi_lo / 2, pi_hi / 2
    # acos(q) = pi/2 - atan(q / sqrt(1 - q^2))
    s_lo, s_hi = _sqrt_frac(1 - q * q, min(tol, abs(q) * tol))
    if s_lo == 0:
        s_lo = s_hi / 2  # q very close to +-1; sqrt is still positive
    if q > 0:
        t_lo, t_hi = q / s_hi, q / s_lo
    else:
        t_lo, t_hi = q / s_lo, q / s_hi
    a_lo, _ = _atan_frac(t_lo, tol)
    _, a_hi = _atan_frac(t_hi, tol)
    return pi_lo / 2 - a_hi, pi_hi / 2 - a_lo


def _acos_ends(x: PreciseFloat, prec: Precision) -> tuple[PreciseFloat, PreciseFloat]:
    lo, hi = _acos_frac(x.to_fraction(), _trans_tol(prec))
    return round_dir(lo, prec, DOWN), round_dir(hi, prec, UP)


def ival_acos(a: Interval, prec: Precision) -> Interval:
    one = Fraction(1)
    if a.lo.to_fraction() < -one or a.hi.to_fraction() > one:
        raise DomainError("acos of an interval outside [-1, 1]")
    key = ("acos", _ikey(a), prec.base, prec.digits)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    lo, _ = _acos_ends(a.hi, prec)   # acos is decreasing
    _, hi = _acos_ends(a.lo, prec)
    result = Interval(lo, hi)
    _CACHE.put(key, result)
    return result


# ---------------------------------------------------------------------------
# expression evaluation
# ---------------------------------------------------------------------------

def _eval_generic(ctx, e: Expr, box: Sequence):
    match e:
        case Const(v):
            return ctx.const(v)
        case Var(i):
            if not 1 <= i <= len(box):
                raise ExprError(f"variable x{i} outside the {len(box)}-box")
            return box[i - 1]
        case PiConst():
            return ctx.pi()
        case Neg(u):
            return ctx.neg(_eval_generic(ctx, u, box))
        case Add(u, v):
            return ctx.add(_eval_generic(ctx, u, box), _eval_generic(ctx, v, box))
        case Sub(u, v):
            return ctx.sub(_eval_generic(ctx, u, box), _eval_generic(ctx, v, box))
        case Mul(u, v):
            return ctx.mul(_eval_generic(ctx, u, box), _eval_generic(ctx, v, box))
        case Div(u, v):
            return ctx.div(_eval_generic(ctx, u, box), _eval_generic(ctx, v, box))
        case Pow(u, k):
            return ctx.pow(_eval_generic(ctx, u, box), k)
        case Sqrt(u):
            return ctx.sqrt(_eval_generic(ctx, u, box))
        case Atan(u):
            return ctx.atan(_eval_generic(ctx, u, box))
        case Acos(u):
            return ctx.acos(_eval_generic(ctx, u, box))
    raise ExprError(f"unknown expression node {e!r}")


def eval_expr_interval(e: Expr, box: Sequence[Interval], prec: Precision) -> Interval:
    """Recursive interval evaluation at the rigorous tier.

    Domain violations raise :class:`DomainError`; they mean "inconclusive",
    never that the inequality is false.
    """
    return _eval_generic(RigorousContext(prec), e, box)


# ---------------------------------------------------------------------------
# numeric context (shared operation surface of the two tiers)
# ---------------------------------------------------------------------------

class RigorousContext:
    """Interval and scalar operations at a fixed Precision.

    Scalars are PreciseFloats; the s_* helpers are the directed scalar
    operations the Taylor bound assembly needs.
    """

    tier = "rigorous"

    def __init__(self, prec: Precision):
        self.prec = prec
        self.ZERO = PreciseFloat.zero(prec.base)
        self._const_cache: dict[Fraction, Interval] = {}

    # interval operations
    def const(self, q: Fraction) -> Interval:
        hit = self._const_cache.get(q)
        if hit is None:
            hit = interval_from_fraction(q, self.prec)
            self._const_cache[q] = hit
        return hit

    def pi(self) -> Interval:
        return pi_enclosure(self.prec)

    def point(self, x: PreciseFloat) -> Interval:
        return Interval(x, x)

    def interval(self, lo: PreciseFloat, hi: PreciseFloat) -> Interval:
        return Interval(lo, hi)

    def add(self, a, b):
        return ival_add(a, b, self.prec)

    def sub(self, a, b):
        return ival_sub(a, b, self.prec)

    def mul(self, a, b):
        return ival_mul(a, b, self.prec)

    def div(self, a, b):
        return ival_div(a, b, self.prec)

    def neg(self, a):
        return ival_neg(a)

    def pow(self, a, k):
        return ival_pow(a, k, self.prec)

    def sqrt(self, a):
        return ival_sqrt(a, self.prec)

    def atan(self, a):
        return ival_atan(a, self.prec)

    def acos(self, a):
        return ival_acos(a, self.prec)

    def abs_bound(self, a) -> PreciseFloat:
        return ival_abs_bound(a)

    def eval(self, e: Expr, box: Sequence[Interval]) -> Interval:
        return _eval_generic(self, e, box)

    # directed scalar operations
    def s_add_up(self, x, y):
        return pf_add(x, y, self.prec, UP)

    def s_add_down(self, x, y):
        return pf_add(x, y, self.prec, DOWN)

    def s_sub_up(self, x, y):
        return pf_sub(x, y, self.prec, UP)

    def s_sub_down(self, x, y):
        return pf_sub(x, y, self.prec, DOWN)

    def s_mul_up(self, x, y):
        return pf_mul(x, y, self.prec, UP)

    def s_half_up(self, x):
        return pf_half(x, self.prec, UP)

    def s_max(self, x, y):
        return pf_max(x, y)

    def s_neg(self, x):
        return -x

    def is_neg(self, x) -> bool:
        return x.sign < 0

    # domain geometry
    def midpoint(self, lo: PreciseFloat, hi: PreciseFloat) -> PreciseFloat:
        """Nearest representable midpoint, clamped into [lo, hi]."""
        q = (lo.to_fraction() + hi.to_fraction()) / 2
        m = round_nearest(q, self.prec)
        if m < lo:
            return lo
        if m > hi:
            return hi
        return m

    def split_point(self, lo: PreciseFloat, hi: PreciseFloat) -> PreciseFloat:
        """Midpoint for box splitting, exact whenever the base allows it so
        that replays at any precision derive identical sub-boxes."""
        q = (lo.to_fraction() + hi.to_fraction()) / 2
        exact = exact_from_fraction(q, self.prec.base)
        if exact is not None:
            return exact
        m = round_nearest(q, Precision(self.prec.base, self.prec.digits + 4))
        if m < lo:
            return lo
        if m > hi:
            return hi
        return m

    def scalar_from(self, q: Fraction, direction: str) -> PreciseFloat:
        return round_dir(q, self.prec, direction)

    def to_float(self, x) -> float:
        return float(x)


def as_context(num) -> "RigorousContext":
    """Accept either a Precision or an already-built context."""
    if isinstance(num, Precision):
        return RigorousContext(num)
    if hasattr(num, "eval") and hasattr(num, "tier"):
        return num
    raise TypeError(f"expected Precision or numeric context, got {num!r}")
