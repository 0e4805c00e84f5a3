"""Certified real interval and complex ball arithmetic.

Every value is an enclosure: a ``RealInterval`` is a pair of MPFR endpoints
``[lo, hi]`` such that the exact quantity being tracked lies between them,
and every operation rounds the low endpoint down and the high endpoint up.
Precision only affects how tight the enclosure is, never its soundness.

Conventions used throughout the package:

* operations take an optional working precision (bits); when omitted, the
  larger of the operand precisions is used,
* transcendental functions (exp, log, sqrt) rely on MPFR correct rounding
  under directed-rounding contexts,
* ``refine_to_radius`` wraps the retry-with-doubled-precision policy: a
  computation is re-run at increasing precision until its radius meets the
  caller's target, up to ``MAX_PRECISION`` (then ``PrecisionExhausted``).

All values are immutable after construction and safe to share across
threads; contexts are created per call and never mutated globally.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2
from gmpy2 import mpfr, mpq, mpz

DEFAULT_PRECISION = 64
MAX_PRECISION = 1 << 16

_CTX_CACHE: dict[int, tuple] = {}


class PrecisionExhausted(ArithmeticError):
    """Raised when the doubling-precision retry loop hits MAX_PRECISION."""


def _contexts(prec):
    try:
        return _CTX_CACHE[prec]
    except KeyError:
        pair = (
            gmpy2.context(precision=prec, round=gmpy2.RoundDown),
            gmpy2.context(precision=prec, round=gmpy2.RoundUp),
        )
        _CTX_CACHE[prec] = pair
        return pair


def _to_mpfr_pair(value, prec):
    """Directed conversion of an exact value to (lower, upper) mpfr bounds."""
    down, up = _contexts(prec)
    if isinstance(value, (int, mpz)):
        z = mpz(value)
        return down.add(z, mpfr(0)), up.add(z, mpfr(0))
    if isinstance(value, Fraction):
        q = mpq(value.numerator, value.denominator)
        return down.add(q, mpfr(0)), up.add(q, mpfr(0))
    if isinstance(value, mpq):
        return down.add(value, mpfr(0)), up.add(value, mpfr(0))
    if isinstance(value, mpfr):
        return value, value
    if isinstance(value, RealInterval):
        return value.lo, value.hi
    raise TypeError(f"cannot convert {type(value).__name__} to an enclosure")


class RealInterval:
    """Closed interval [lo, hi] with mpfr endpoints, lo <= hi."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        if not (lo <= hi):
            raise ValueError(f"invalid interval endpoints [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, *args):
        raise AttributeError("RealInterval is immutable")

    def __getstate__(self):
        return {name: getattr(self, name) for name in self.__slots__}

    def __setstate__(self, state):
        for name, value in state.items():
            object.__setattr__(self, name, value)

    # -- constructors ----------------------------------------------------

    @staticmethod
    def exact(value, prec=DEFAULT_PRECISION):
        lo, hi = _to_mpfr_pair(value, prec)
        return RealInterval(lo, hi)

    @staticmethod
    def zero():
        return RealInterval(mpfr(0), mpfr(0))

    @staticmethod
    def from_midrad(mid, rad, prec=DEFAULT_PRECISION):
        down, up = _contexts(prec)
        m_lo, m_hi = _to_mpfr_pair(mid, prec)
        r_lo, r_hi = _to_mpfr_pair(rad, prec)
        if r_lo < 0:
            raise ValueError("radius must be nonnegative")
        return RealInterval(down.sub(m_lo, r_hi), up.add(m_hi, r_hi))

    # -- views ------------------------------------------------------------

    @property
    def midpoint(self):
        down, up = _contexts(max(self.lo.precision, self.hi.precision) + 8)
        return down.div(down.add(self.lo, self.hi), mpfr(2))

    @property
    def radius(self):
        down, up = _contexts(max(self.lo.precision, self.hi.precision) + 8)
        half = up.div(up.sub(self.hi, self.lo), mpfr(2))
        # rounding of the midpoint can lose up to one ulp on each side
        return up.mul(half, mpfr("1.0000000001"))

    def mid_rad(self):
        return self.midpoint, self.radius

    def width(self):
        _, up = _contexts(max(self.lo.precision, self.hi.precision) + 8)
        return up.sub(self.hi, self.lo)

    def radius_leq(self, bound) -> bool:
        """True if the enclosure provably has radius <= bound (exact test)."""
        if not self.is_finite():
            return False
        b = bound if isinstance(bound, (Fraction, mpq)) else Fraction(bound)
        width = mpq(self.hi) - mpq(self.lo)
        return width <= 2 * mpq(b.numerator, b.denominator)

    def contains(self, value) -> bool:
        """Exact membership test for int/Fraction/mpfr values."""
        if isinstance(value, (int, mpz)):
            return self.lo <= value <= self.hi
        if isinstance(value, Fraction):
            q = mpq(value.numerator, value.denominator)
            return self.lo <= q and q <= self.hi
        if isinstance(value, (mpq, mpfr)):
            return self.lo <= value <= self.hi
        if isinstance(value, RealInterval):
            return self.lo <= value.lo and value.hi <= self.hi
        raise TypeError(f"cannot test containment of {type(value).__name__}")

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def overlaps(self, other) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def is_finite(self) -> bool:
        return gmpy2.is_finite(self.lo) and gmpy2.is_finite(self.hi)

    # -- certified comparisons -------------------------------------------

    def __lt__(self, other):
        other = other if isinstance(other, RealInterval) else RealInterval.exact(other)
        return self.hi < other.lo

    def __gt__(self, other):
        other = other if isinstance(other, RealInterval) else RealInterval.exact(other)
        return self.lo > other.hi

    def __le__(self, other):
        other = other if isinstance(other, RealInterval) else RealInterval.exact(other)
        return self.hi <= other.lo

    def __ge__(self, other):
        other = other if isinstance(other, RealInterval) else RealInterval.exact(other)
        return self.lo >= other.hi

    # -- arithmetic ---------------------------------------------------------

    def _prec(self, other=None):
        p = max(self.lo.precision, self.hi.precision)
        if isinstance(other, RealInterval):
            p = max(p, other.lo.precision, other.hi.precision)
        return p

    def add(self, other, prec=None):
        other = other if isinstance(other, RealInterval) else RealInterval.exact(other, prec or DEFAULT_PRECISION)
        prec = prec or self._prec(other)
        down, up = _contexts(prec)
        return RealInterval(down.add(self.lo, other.lo), up.add(self.hi, other.hi))

    def sub(self, other, prec=None):
        other = other if isinstance(other, RealInterval) else RealInterval.exact(other, prec or DEFAULT_PRECISION)
        prec = prec or self._prec(other)
        down, up = _contexts(prec)
        return RealInterval(down.sub(self.lo, other.hi), up.sub(self.hi, other.lo))

    def neg(self):
        return RealInterval(-self.hi, -self.lo)

    def mul(self, other, prec=None):
        other = other if isinstance(other, RealInterval) else RealInterval.exact(other, prec or DEFAULT_PRECISION)
        prec = prec or self._prec(other)
        down, up = _contexts(prec)
        pairs = ((self.lo, other.lo), (self.lo, other.hi), (self.hi, other.lo), (self.hi, other.hi))
        lo = min(down.mul(a, b) for a, b in pairs)
        hi = max(up.mul(a, b) for a, b in pairs)
        return RealInterval(lo, hi)

    def div(self, other, prec=None):
        other = other if isinstance(other, RealInterval) else RealInterval.exact(other, prec or DEFAULT_PRECISION)
        if other.contains_zero():
            raise ZeroDivisionError("interval divisor contains zero")
        prec = prec or self._prec(other)
        down, up = _contexts(prec)
        pairs = ((self.lo, other.lo), (self.lo, other.hi), (self.hi, other.lo), (self.hi, other.hi))
        lo = min(down.div(a, b) for a, b in pairs)
        hi = max(up.div(a, b) for a, b in pairs)
        return RealInterval(lo, hi)

    def __add__(self, other):
        return self.add(other)

    __radd__ = __add__

    def __sub__(self, other):
        return self.sub(other)

    def __rsub__(self, other):
        return RealInterval.exact(other, self._prec()).sub(self)

    def __mul__(self, other):
        return self.mul(other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self.div(other)

    def __rtruediv__(self, other):
        return RealInterval.exact(other, self._prec()).div(self)

    def __neg__(self):
        return self.neg()

    def sqr(self, prec=None):
        prec = prec or self._prec()
        down, up = _contexts(prec)
        if self.lo >= 0:
            return RealInterval(down.mul(self.lo, self.lo), up.mul(self.hi, self.hi))
        if self.hi <= 0:
            return RealInterval(down.mul(self.hi, self.hi), up.mul(self.lo, self.lo))
        hi = max(up.mul(self.lo, self.lo), up.mul(self.hi, self.hi))
        return RealInterval(mpfr(0), hi)

    def abs(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return self.neg()
        return RealInterval(mpfr(0), max(-self.lo, self.hi))

    def sqrt(self, prec=None):
        """Square root; operand must be provably >= 0 up to rounding slack.

        A slightly negative lower endpoint (a rounding artifact of a value
        known to be nonnegative) is clamped to zero; a provably negative
        operand raises.
        """
        if self.hi < 0:
            raise ValueError("sqrt of a provably negative interval")
        prec = prec or self._prec()
        down, up = _contexts(prec)
        lo = mpfr(0) if self.lo < 0 else down.sqrt(self.lo)
        return RealInterval(lo, up.sqrt(self.hi))

    def exp(self, prec=None):
        prec = prec or self._prec()
        down, up = _contexts(prec)
        return RealInterval(down.exp(self.lo), up.exp(self.hi))

    def log(self, prec=None):
        if self.lo <= 0:
            raise ValueError("log requires a provably positive interval")
        prec = prec or self._prec()
        down, up = _contexts(prec)
        return RealInterval(down.log(self.lo), up.log(self.hi))

    def pow_int(self, n: int, prec=None):
        """Integer power with correct monotonicity handling."""
        prec = prec or self._prec()
        if n == 0:
            return RealInterval.exact(1, prec)
        if n < 0:
            return RealInterval.exact(1, prec).div(self.pow_int(-n, prec), prec)
        down, up = _contexts(prec)
        if n % 2 == 1 or self.lo >= 0:
            return RealInterval(down.pow(self.lo, n), up.pow(self.hi, n))
        if self.hi <= 0:
            return RealInterval(down.pow(self.hi, n), up.pow(self.lo, n))
        return RealInterval(mpfr(0), max(up.pow(self.lo, n), up.pow(self.hi, n)))

    def mul_2exp(self, k: int):
        """Exact scaling by 2**k (precision preserved, no rounding)."""
        down, up = _contexts(self._prec())
        if k >= 0:
            return RealInterval(down.mul_2exp(self.lo, k), up.mul_2exp(self.hi, k))
        return RealInterval(down.div_2exp(self.lo, -k), up.div_2exp(self.hi, -k))

    def hull(self, other):
        return RealInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def widened(self, slack, prec=None):
        """Enclosure padded by `slack` (exact value) on both sides."""
        prec = prec or self._prec()
        down, up = _contexts(prec)
        s_lo, s_hi = _to_mpfr_pair(slack, prec)
        if s_lo < 0:
            raise ValueError("slack must be nonnegative")
        return RealInterval(down.sub(self.lo, s_hi), up.add(self.hi, s_hi))

    # -- rendering ----------------------------------------------------------

    def __repr__(self):
        return f"RealInterval[{self.lo}, {self.hi}]"

    def __str__(self):
        return format_midrad(self)

    def to_float_pair(self):
        return float(self.lo), float(self.hi)


def format_midrad(iv: RealInterval, digits: int = 15) -> str:
    """Render as `mid ± rad` with the given significant digits, '.' decimal."""
    mid, rad = iv.mid_rad()
    return f"{gmpy2.mpfr(mid):.{digits}g} ± {gmpy2.mpfr(rad):.3g}"


def fraction_of(x) -> Fraction:
    """Exact Fraction value of a finite mpfr."""
    q = mpq(x)
    return Fraction(int(q.numerator), int(q.denominator))


def log_interval(value, prec=DEFAULT_PRECISION) -> RealInterval:
    """Certified natural log of an exact positive int/Fraction."""
    return RealInterval.exact(value, prec).log(prec)


def exp_interval(value, prec=DEFAULT_PRECISION) -> RealInterval:
    return RealInterval.exact(value, prec).exp(prec)


def refine_to_radius(compute, target_radius, start_prec=DEFAULT_PRECISION,
                     max_prec=MAX_PRECISION):
    """Run `compute(prec)` at doubling precision until the radius target holds.

    `compute` must return an object with a `radius_leq` method (RealInterval
    or anything wrapping one).  Raises PrecisionExhausted past `max_prec`.
    """
    target = Fraction(target_radius)
    if target <= 0:
        raise ValueError("target radius must be positive")
    prec = start_prec
    while True:
        result = compute(prec)
        if result.radius_leq(target):
            return result
        if prec >= max_prec:
            raise PrecisionExhausted(
                f"radius target {target} unreachable at precision {prec}")
        prec *= 2


class ComplexBall:
    """Rectangular complex enclosure: independent real and imaginary intervals."""

    __slots__ = ("re", "im")

    def __init__(self, re: RealInterval, im: RealInterval):
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    def __setattr__(self, *args):
        raise AttributeError("ComplexBall is immutable")

    def __getstate__(self):
        return {name: getattr(self, name) for name in self.__slots__}

    def __setstate__(self, state):
        for name, value in state.items():
            object.__setattr__(self, name, value)

    @staticmethod
    def exact(re, im=0, prec=DEFAULT_PRECISION):
        return ComplexBall(RealInterval.exact(re, prec), RealInterval.exact(im, prec))

    @staticmethod
    def from_interval(re: RealInterval):
        return ComplexBall(re, RealInterval.zero())

    def add(self, other, prec=None):
        return ComplexBall(self.re.add(other.re, prec), self.im.add(other.im, prec))

    def sub(self, other, prec=None):
        return ComplexBall(self.re.sub(other.re, prec), self.im.sub(other.im, prec))

    def mul(self, other, prec=None):
        re = self.re.mul(other.re, prec).sub(self.im.mul(other.im, prec), prec)
        im = self.re.mul(other.im, prec).add(self.im.mul(other.re, prec), prec)
        return ComplexBall(re, im)

    def div(self, other, prec=None):
        d = other.abs_sq(prec)
        re = self.re.mul(other.re, prec).add(self.im.mul(other.im, prec), prec).div(d, prec)
        im = self.im.mul(other.re, prec).sub(self.re.mul(other.im, prec), prec).div(d, prec)
        return ComplexBall(re, im)

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return self.sub(other)

    def __mul__(self, other):
        return self.mul(other)

    def __truediv__(self, other):
        return self.div(other)

    def __neg__(self):
        return ComplexBall(self.re.neg(), self.im.neg())

    def scale_interval(self, iv: RealInterval, prec=None):
        return ComplexBall(self.re.mul(iv, prec), self.im.mul(iv, prec))

    def mul_2exp(self, k: int):
        return ComplexBall(self.re.mul_2exp(k), self.im.mul_2exp(k))

    def abs_sq(self, prec=None) -> RealInterval:
        return self.re.sqr(prec).add(self.im.sqr(prec), prec)

    def abs(self, prec=None) -> RealInterval:
        return self.abs_sq(prec).sqrt(prec)

    def log_abs(self, prec=None) -> RealInterval:
        """log |z|; the ball must provably exclude zero."""
        sq = self.abs_sq(prec)
        if sq.lo <= 0:
            raise ValueError("log_abs of a ball whose modulus may vanish")
        half = sq.log(prec)
        return half.mul(Fraction(1, 2), prec or DEFAULT_PRECISION)

    def contains_zero(self) -> bool:
        return self.re.contains_zero() and self.im.contains_zero()

    def contains(self, other) -> bool:
        if isinstance(other, ComplexBall):
            return self.re.contains(other.re) and self.im.contains(other.im)
        re, im = other
        return self.re.contains(re) and self.im.contains(im)

    def is_disjoint(self, other) -> bool:
        return (not self.re.overlaps(other.re)) or (not self.im.overlaps(other.im))

    def midpoint(self):
        return self.re.midpoint, self.im.midpoint

    def max_radius(self):
        return max(self.re.radius, self.im.radius)

    def __repr__(self):
        return f"ComplexBall({self.re!r}, {self.im!r})"
