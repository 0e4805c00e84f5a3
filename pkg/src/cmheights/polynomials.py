"""Dense univariate polynomials over Z and Q.

Coefficient lists run low to high degree.  ``IntPoly`` wraps an integer
coefficient tuple, ``RatPoly`` a Fraction tuple; both strip trailing zeros
so the zero polynomial is the empty tuple and has degree -1.

Resultant sign convention: ``resultant(p, q)`` is the determinant of the
Sylvester matrix whose first deg(p) rows carry the coefficients of q and
whose last deg(q) rows carry the coefficients of p, i.e.

    Res(p, q) = lead(q)^deg(p) * prod over roots b of q of p(b),

so that Res(x - a, x - b) = b - a.  Downstream code only ever consumes
|Res| or vanishing, so the convention is documented here once and never
relied on for sign.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .intervals import ComplexBall, RealInterval


def _strip(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


class ZeroPolynomialError(ValueError):
    pass


class IntPoly:
    """Dense polynomial over Z."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        object.__setattr__(self, "coeffs", _strip(int(c) for c in coeffs))

    def __setattr__(self, *a):
        raise AttributeError("IntPoly is immutable")

    def __getstate__(self):
        return {name: getattr(self, name) for name in self.__slots__}

    def __setstate__(self, state):
        for name, value in state.items():
            object.__setattr__(self, name, value)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def leading(self):
        if self.is_zero():
            raise ZeroPolynomialError("zero polynomial")
        return self.coeffs[-1]

    def __eq__(self, other):
        return isinstance(other, IntPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"IntPoly({list(self.coeffs)})"

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return IntPoly([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                        for i in range(n)])

    def __sub__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return IntPoly([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)
                        for i in range(n)])

    def __neg__(self):
        return IntPoly([-c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPoly([c * other for c in self.coeffs])
        if self.is_zero() or other.is_zero():
            return IntPoly([])
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPoly(out)

    __rmul__ = __mul__

    def content(self):
        if self.is_zero():
            return 0
        g = 0
        for c in self.coeffs:
            g = gcd(g, abs(c))
        return g

    def primitive(self):
        """Content-1 form with positive leading coefficient."""
        if self.is_zero():
            return self
        g = self.content()
        sign = 1 if self.coeffs[-1] > 0 else -1
        return IntPoly([c // (sign * g) for c in self.coeffs])

    def derivative(self):
        return IntPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def to_rat(self):
        return RatPoly([Fraction(c) for c in self.coeffs])

    def __call__(self, x):
        return eval_poly(self.coeffs, x)

    def shift_scale_2exp(self, k: int):
        """p(2^k x) as an IntPoly (k >= 0) -- used for root preconditioning."""
        return IntPoly([c << (k * i) for i, c in enumerate(self.coeffs)])


class RatPoly:
    """Dense polynomial over Q."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        object.__setattr__(self, "coeffs", _strip(Fraction(c) for c in coeffs))

    def __setattr__(self, *a):
        raise AttributeError("RatPoly is immutable")

    def __getstate__(self):
        return {name: getattr(self, name) for name in self.__slots__}

    def __setstate__(self, state):
        for name, value in state.items():
            object.__setattr__(self, name, value)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def leading(self):
        if self.is_zero():
            raise ZeroPolynomialError("zero polynomial")
        return self.coeffs[-1]

    def __eq__(self, other):
        return isinstance(other, RatPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"RatPoly({[str(c) for c in self.coeffs]})"

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return RatPoly([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                        for i in range(n)])

    def __sub__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return RatPoly([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)
                        for i in range(n)])

    def __neg__(self):
        return RatPoly([-c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RatPoly([c * other for c in self.coeffs])
        if self.is_zero() or other.is_zero():
            return RatPoly([])
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return RatPoly(out)

    __rmul__ = __mul__

    def monic(self):
        if self.is_zero():
            raise ZeroPolynomialError("zero polynomial")
        lead = self.leading()
        return RatPoly([c / lead for c in self.coeffs])

    def derivative(self):
        return RatPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def divmod(self, other):
        if other.is_zero():
            raise ZeroPolynomialError("division by zero polynomial")
        rem = list(self.coeffs)
        den = other.coeffs
        dq = len(rem) - len(den)
        if dq < 0:
            return RatPoly([]), self
        quot = [Fraction(0)] * (dq + 1)
        inv_lead = 1 / den[-1]
        for k in range(dq, -1, -1):
            c = rem[k + len(den) - 1] * inv_lead
            quot[k] = c
            if c:
                for j, d in enumerate(den):
                    rem[k + j] -= c * d
        return RatPoly(quot), RatPoly(rem)

    def __call__(self, x):
        return eval_poly(self.coeffs, x)

    def clear_denominators(self):
        """Primitive IntPoly with the same roots."""
        if self.is_zero():
            return IntPoly([])
        lcm = 1
        for c in self.coeffs:
            lcm = lcm * c.denominator // gcd(lcm, c.denominator)
        return IntPoly([int(c * lcm) for c in self.coeffs]).primitive()


def eval_poly(coeffs, x):
    """Horner evaluation; x may be Fraction, int, RealInterval, ComplexBall,
    NFElement, or anything supporting * and +."""
    if not coeffs:
        if isinstance(x, (RealInterval,)):
            return RealInterval.zero()
        if isinstance(x, ComplexBall):
            return ComplexBall.exact(0)
        return 0 * x if not isinstance(x, (int, Fraction)) else Fraction(0)
    acc = None
    for c in reversed(coeffs):
        if acc is None:
            acc = _promote_const(c, x)
        else:
            acc = acc * x + _promote_const(c, x)
    return acc


def _promote_const(c, x):
    if isinstance(x, RealInterval):
        return RealInterval.exact(c if not isinstance(c, Fraction) else c,
                                  max(x.lo.precision, x.hi.precision))
    if isinstance(x, ComplexBall):
        prec = max(x.re.lo.precision, x.re.hi.precision)
        return ComplexBall.exact(c, 0, prec)
    if isinstance(x, Fraction) or isinstance(x, int):
        return Fraction(c)
    return c


def rat_gcd(p: RatPoly, q: RatPoly) -> RatPoly:
    """Monic gcd over Q by the Euclidean algorithm."""
    a, b = p, q
    while not b.is_zero():
        _, r = a.divmod(b)
        a, b = b, r
    if a.is_zero():
        return a
    return a.monic()


def squarefree_part(p: IntPoly) -> IntPoly:
    """p / gcd(p, p') as a primitive IntPoly."""
    if p.is_zero():
        raise ZeroPolynomialError("zero polynomial")
    g = rat_gcd(p.to_rat(), p.derivative().to_rat())
    if g.degree <= 0:
        return p.primitive()
    q, r = p.to_rat().divmod(g)
    assert r.is_zero()
    return q.clear_denominators()


def is_squarefree(p: IntPoly) -> bool:
    if p.is_zero():
        return False
    if p.degree == 0:
        return True
    return rat_gcd(p.to_rat(), p.derivative().to_rat()).degree == 0


def _bareiss_det(m):
    """Fraction-free determinant of a square integer matrix (destructive)."""
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = pivot
    return sign * m[n - 1][n - 1]


def sylvester_matrix(p: IntPoly, q: IntPoly):
    """Sylvester matrix: deg(p) rows of q's coefficients, then deg(q) rows of p's."""
    m, n = p.degree, q.degree
    size = m + n
    rows = []
    pc = list(reversed(p.coeffs))
    qc = list(reversed(q.coeffs))
    for i in range(m):
        rows.append([0] * i + qc + [0] * (size - n - 1 - i))
    for i in range(n):
        rows.append([0] * i + pc + [0] * (size - m - 1 - i))
    return rows

def resultant(p: IntPoly, q: IntPoly) -> int:
    """Res(p, q) as the Sylvester determinant (see module docstring for sign)."""
    if p.is_zero() or q.is_zero():
        raise ZeroPolynomialError("zero polynomial")
    if p.degree == 0:
        return p.coeffs[0] ** q.degree
    if q.degree == 0:
        return q.coeffs[0] ** p.degree
    return _bareiss_det(sylvester_matrix(p, q))


def binary_form_resultant(f_coeffs, g_coeffs, deg: int) -> int:
    """Resultant of two binary forms of formal degree `deg`.

    Coefficient lists are in A-degree low-to-high, length deg+1 (trailing
    zeros allowed: the form may vanish at infinity, unlike the univariate
    resultant).  This is the Sylvester determinant of the dehomogenized
    polynomials padded to formal degree deg.
    """
    size = 2 * deg
    fc = list(reversed(list(f_coeffs)))
    gc = list(reversed(list(g_coeffs)))
    assert len(fc) == deg + 1 and len(gc) == deg + 1
    rows = []
    for i in range(deg):
        rows.append([0] * i + fc + [0] * (deg - 1 - i))
    for i in range(deg):
        rows.append([0] * i + gc + [0] * (deg - 1 - i))
    assert all(len(r) == size for r in rows)
    return _bareiss_det(rows)


def bezout_cofactors(p: RatPoly, q: RatPoly):
    """(u, v) with u*p + v*q = gcd-free constant Res-like combination.

    Solves u*p + v*q = 1 for coprime p, q over Q via the extended Euclidean
    algorithm; scaled by callers as needed.
    """
    r0, r1 = p, q
    s0, s1 = RatPoly([1]), RatPoly([])
    t0, t1 = RatPoly([]), RatPoly([1])
    while not r1.is_zero():
        qq, rr = r0.divmod(r1)
        r0, r1 = r1, rr
        s0, s1 = s1, s0 - qq * s1
        t0, t1 = t1, t0 - qq * t1
    if r0.degree != 0:
        raise ValueError("polynomials are not coprime")
    c = r0.coeffs[0]
    return s0 * (1 / c), t0 * (1 / c)
