"""Weierstrass curves over the supported number fields: exact group law,
division polynomials, a height-free torsion decision oracle, per-prime
reduction data over Q, and the dictionary of the 13 rational CM j-invariants.

Division polynomial normalization: psi_2 = 2y + a1*x + a3, so that
psi_2^2 = 4x^3 + b2 x^2 + 2 b4 x + b6 as a polynomial in x.  For odd n,
``division_polynomial`` returns the x-polynomial psi_n; for even n it
returns psi_2 * psi_n (again y-free), whose roots are exactly the
x-coordinates of the nonzero n-torsion.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from functools import lru_cache
from math import gcd

from .numberfields import (
    NFElement,
    NumberField,
    QQ,
    kronecker_symbol,
    prime_splitting,
)
from .polynomials import RatPoly


class SingularModelError(ValueError):
    pass


class CurveError(ValueError):
    pass


class EllipticCurve:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over a NumberField."""

    __slots__ = ("field", "a1", "a2", "a3", "a4", "a6",
                 "b2", "b4", "b6", "b8", "c4", "c6", "delta", "j",
                 "_psi_cache")

    def __init__(self, field: NumberField, a1, a2, a3, a4, a6):
        coeffs = [field.from_rational(a) if isinstance(a, (int, Fraction)) else a
                  for a in (a1, a2, a3, a4, a6)]
        a1, a2, a3, a4, a6 = coeffs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * (a3 * a3) - a4 * a4
        c4 = b2 * b2 - 24 * b4
        c6 = -(b2 * b2 * b2) + 36 * b2 * b4 - 216 * b6
        delta = -(b2 * b2) * b8 - 8 * (b4 * b4 * b4) - 27 * (b6 * b6) + 9 * b2 * b4 * b6
        if delta.is_zero():
            raise SingularModelError("singular model")
        assert (4 * b8) == (b2 * b6 - b4 * b4)
        assert (c4 * c4 * c4 - c6 * c6) == 1728 * delta
        j = (c4 * c4 * c4) / delta
        for name, val in zip(
                ("field", "a1", "a2", "a3", "a4", "a6", "b2", "b4", "b6", "b8",
                 "c4", "c6", "delta", "j"),
                (field, a1, a2, a3, a4, a6, b2, b4, b6, b8, c4, c6, delta, j)):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "_psi_cache", {})

    def __setattr__(self, *a):
        raise AttributeError("EllipticCurve is immutable")

    def __getstate__(self):
        return {name: getattr(self, name) for name in self.__slots__}

    def __setstate__(self, state):
        for name, value in state.items():
            object.__setattr__(self, name, value)

    def __eq__(self, other):
        return (isinstance(other, EllipticCurve) and self.field == other.field
                and all(getattr(self, n) == getattr(other, n)
                        for n in ("a1", "a2", "a3", "a4", "a6")))

    def __hash__(self):
        return hash((self.field,) + tuple(
            getattr(self, n).coords for n in ("a1", "a2", "a3", "a4", "a6")))

    def __repr__(self):
        ai = ";".join(_render_rat(getattr(self, n)) for n in ("a1", "a2", "a3", "a4", "a6"))
        return f"EllipticCurve[{ai} / {self.field.descriptor()}]"

    def a_invariants(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def is_over_Q(self) -> bool:
        return all(getattr(self, n).is_rational() for n in ("a1", "a2", "a3", "a4", "a6"))

    def rational_a_invariants(self) -> tuple[Fraction, ...]:
        if not self.is_over_Q():
            raise CurveError("curve is not defined over Q")
        return tuple(getattr(self, n).rational_value() for n in ("a1", "a2", "a3", "a4", "a6"))

    def base_change(self, field: NumberField) -> "EllipticCurve":
        ai = self.rational_a_invariants()
        return EllipticCurve(field, *ai)

    def infinity(self) -> "CurvePoint":
        return CurvePoint(self, None, None, _skip_check=True)

    def point(self, x, y) -> "CurvePoint":
        fld = self.field
        x = fld.from_rational(x) if isinstance(x, (int, Fraction)) else x
        y = fld.from_rational(y) if isinstance(y, (int, Fraction)) else y
        return CurvePoint(self, x, y)

    def rhs(self, x: NFElement) -> NFElement:
        return ((x + self.a2) * x + self.a4) * x + self.a6

    def on_curve(self, x: NFElement, y: NFElement) -> bool:
        return (y * y + self.a1 * x * y + self.a3 * y) == self.rhs(x)

    def two_torsion_cubic(self) -> RatPoly:
        """4x^3 + b2 x^2 + 2 b4 x + b6 = psi_2^2 as an x-polynomial (Q curves)."""
        b2, b4, b6 = (v.rational_value() for v in (self.b2, self.b4, self.b6))
        return RatPoly([b6, 2 * b4, b2, 4])


def _render_rat(v: NFElement) -> str:
    return str(v.rational_value()) if v.is_rational() else v.serialize()


def curve_from_a_invariants(field: NumberField, a1, a2, a3, a4, a6) -> EllipticCurve:
    return EllipticCurve(field, a1, a2, a3, a4, a6)


class CurvePoint:
    """Point on an EllipticCurve: infinity, or affine (x, y) verified exactly."""

    __slots__ = ("curve", "x", "y")

    def __init__(self, curve: EllipticCurve, x, y, _skip_check=False):
        object.__setattr__(self, "curve", curve)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if not _skip_check and x is not None:
            if not curve.on_curve(x, y):
                raise CurveError("point is not on the curve")

    def __setattr__(self, *a):
        raise AttributeError("CurvePoint is immutable")

    def __getstate__(self):
        return {name: getattr(self, name) for name in self.__slots__}

    def __setstate__(self, state):
        for name, value in state.items():
            object.__setattr__(self, name, value)

    @property
    def is_infinity(self):
        return self.x is None

    def __eq__(self, other):
        if not isinstance(other, CurvePoint) or self.curve != other.curve:
            return False
        if self.is_infinity or other.is_infinity:
            return self.is_infinity and other.is_infinity
        return self.x == other.x and self.y == other.y

    def __hash__(self):
        if self.is_infinity:
            return hash((self.curve, "inf"))
        return hash((self.curve, self.x.coords, self.y.coords))

    def __repr__(self):
        if self.is_infinity:
            return "Point(inf)"
        return f"Point({_render_rat(self.x)}, {_render_rat(self.y)})"

    def __neg__(self):
        if self.is_infinity:
            return self
        E = self.curve
        return CurvePoint(E, self.x, -self.y - E.a1 * self.x - E.a3, _skip_check=True)

    def __add__(self, other):
        return point_add(self, other)

    def __sub__(self, other):
        return point_add(self, -other)


def point_add(P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    if P.curve != Q.curve:
        raise CurveError("points on different curves")
    E = P.curve
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
    if x1 == x2:
        if y2 == -y1 - E.a1 * x1 - E.a3:
            return E.infinity()
        den = 2 * y1 + E.a1 * x1 + E.a3
        lam = (3 * x1 * x1 + 2 * E.a2 * x1 + E.a4 - E.a1 * y1) / den
    else:
        lam = (y2 - y1) / (x2 - x1)
    nu = y1 - lam * x1
    x3 = lam * lam + E.a1 * lam - E.a2 - x1 - x2
    y3 = -(lam + E.a1) * x3 - nu - E.a3
    return CurvePoint(E, x3, y3, _skip_check=True)


def scalar_mul(n: int, P: CurvePoint) -> CurvePoint:
    if n == 0 or P.is_infinity:
        return P.curve.infinity()
    if n < 0:
        return scalar_mul(-n, -P)
    result = P.curve.infinity()
    addend = P
    while n:
        if n & 1:
            result = point_add(result, addend)
        n >>= 1
        if n:
            addend = point_add(addend, addend)
    return result


# ---------------------------------------------------------------------------
# division polynomials
# ---------------------------------------------------------------------------

def _psi_polys(E: EllipticCurve, n: int) -> RatPoly:
    """P_n with psi_n = P_n(x) (n odd) or psi_2 * P_n(x) (n even)."""
    cache = E._psi_cache
    if n in cache:
        return cache[n]
    b2, b4, b6, b8 = (v.rational_value() for v in (E.b2, E.b4, E.b6, E.b8))
    D = RatPoly([b6, 2 * b4, b2, 4])
    base = {
        0: RatPoly([]),
        1: RatPoly([1]),
        2: RatPoly([1]),
        3: RatPoly([b8, 3 * b6, 3 * b4, b2, 3]),
        4: RatPoly([b4 * b8 - b6 * b6, b2 * b8 - b4 * b6, 10 * b8, 10 * b6,
                    5 * b4, b2, 2]),
    }
    if n in base:
        cache[n] = base[n]
        return base[n]

    def P(k):
        return _psi_polys(E, k)

    m = n // 2
    if n % 2 == 1:
        if m % 2 == 0:
            val = D * D * P(m + 2) * P(m) * P(m) * P(m) - P(m - 1) * P(m + 1) * P(m + 1) * P(m + 1)
        else:
            val = P(m + 2) * P(m) * P(m) * P(m) - D * D * P(m - 1) * P(m + 1) * P(m + 1) * P(m + 1)
    else:
        val = P(m) * (P(m + 2) * P(m - 1) * P(m - 1) - P(m - 2) * P(m + 1) * P(m + 1))
    cache[n] = val
    return val


def division_polynomial(E: EllipticCurve, n: int) -> RatPoly:
    """x-polynomial whose roots are the x-coordinates of nonzero n-torsion.

    Returns psi_n for odd n, psi_2 * psi_n for even n (both y-free); see the
    module docstring for the normalization.  Requires a curve over Q.
    """
    if n < 1:
        raise CurveError("n must be >= 1")
    if not E.is_over_Q():
        raise CurveError("division polynomials are computed for curves over Q")
    pn = _psi_polys(E, n)
    if n % 2 == 0:
        b2, b4, b6 = (v.rational_value() for v in (E.b2, E.b4, E.b6))
        return RatPoly([b6, 2 * b4, b2, 4]) * pn
    return pn


def psi_value(E: EllipticCurve, P: CurvePoint, n: int) -> NFElement:
    """Exact value psi_n(P) (including the y-part for even n)."""
    if P.is_infinity:
        raise CurveError("psi_n is evaluated at affine points")
    pn = _psi_polys(E, n)
    fld = E.field
    acc = fld.zero()
    for c in reversed(pn.coeffs):
        acc = acc * P.x + fld.from_rational(c)
    if n % 2 == 0:
        acc = acc * (2 * P.y + E.a1 * P.x + E.a3)
    return acc


def duplication_numerator_denominator(E: EllipticCurve):
    """x(2P) = N(x)/D(x): N = x^4 - b4 x^2 - 2 b6 x - b8, D = psi_2^2(x)."""
    b2, b4, b6, b8 = (v.rational_value() for v in (E.b2, E.b4, E.b6, E.b8))
    N = RatPoly([-b8, -2 * b6, -b4, 0, 1])
    D = RatPoly([b6, 2 * b4, b2, 4])
    return N, D


# ---------------------------------------------------------------------------
# reduction over Q
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelMap:
    """Substitution x = u^2 x' + r, y = u^3 y' + s u^2 x' + t (u, r, s, t in Q)."""

    u: Fraction
    r: Fraction
    s: Fraction
    t: Fraction

    def apply_to_curve(self, E: EllipticCurve) -> EllipticCurve:
        a1, a2, a3, a4, a6 = E.rational_a_invariants()
        u, r, s, t = self.u, self.r, self.s, self.t
        b1 = (a1 + 2 * s) / u
        b2_ = (a2 - s * a1 + 3 * r - s * s) / u ** 2
        b3 = (a3 + r * a1 + 2 * t) / u ** 3
        b4_ = (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t) / u ** 4
        b6_ = (a6 + r * a4 + r * r * a2 + r ** 3 - t * a3 - t * t - r * t * a1) / u ** 6
        return EllipticCurve(E.field, b1, b2_, b3, b4_, b6_)

    def apply_to_point(self, P: CurvePoint, new_curve: EllipticCurve) -> CurvePoint:
        if P.is_infinity:
            return new_curve.infinity()
        u, r, s, t = self.u, self.r, self.s, self.t
        x = (P.x - r) / Fraction(u * u)
        y = (P.y - s * (P.x - r) - t) / Fraction(u ** 3)
        return CurvePoint(new_curve, x, y)


@dataclass(frozen=True)
class ReductionData:
    p: int
    was_minimal: bool
    kind: str                      # "good" | "multiplicative" | "additive"
    v_delta_min: int
    minimal_curve: EllipticCurve = dataclass_field(repr=False, compare=False, default=None)
    maps: tuple = dataclass_field(repr=False, compare=False, default=())

    def map_point(self, P: CurvePoint) -> CurvePoint:
        Q = P
        for mp in self.maps:
            Q = mp.apply_to_point(Q, mp.apply_to_curve(Q.curve))
        if not self.maps:
            return CurvePoint(self.minimal_curve, P.x, P.y, _skip_check=True) \
                if not P.is_infinity else self.minimal_curve.infinity()
        return Q


def _vp(q: Fraction, p: int) -> int:
    q = Fraction(q)
    if q == 0:
        raise ZeroDivisionError("valuation of zero")
    v = 0
    n = q.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = q.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def integral_model_map(E: EllipticCurve) -> ModelMap:
    """u = 1/m substitution making all a-invariants integral."""
    ai = E.rational_a_invariants()
    m = 1
    for a in ai:
        m = m * a.denominator // gcd(m, a.denominator)
    return ModelMap(Fraction(1, m), Fraction(0), Fraction(0), Fraction(0))


def _try_shrink_at_p(E: EllipticCurve, p: int):
    """Find (r, s, t) making the u = p substitution integral, or None.

    For p >= 5 the candidate is unique mod (p^2, p, p^3) and solved directly;
    for p in {2, 3} the small box is enumerated.  Completeness of the box
    follows from factoring any u = p substitution through an integral one.
    """
    a1, a2, a3, a4, a6 = E.rational_a_invariants()
    if any(a.denominator != 1 for a in (a1, a2, a3, a4, a6)):
        raise CurveError("integral model required")

    def integral(rr, ss, tt):
        mp = ModelMap(Fraction(p), Fraction(rr), Fraction(ss), Fraction(tt))
        b1 = (a1 + 2 * ss) % p == 0
        if not b1:
            return None
        if (a2 - ss * a1 + 3 * rr - ss * ss) % p ** 2 != 0:
            return None
        if (a3 + rr * a1 + 2 * tt) % p ** 3 != 0:
            return None
        if (a4 - ss * a3 + 2 * rr * a2 - (tt + rr * ss) * a1 + 3 * rr * rr - 2 * ss * tt) % p ** 4 != 0:
            return None
        if (a6 + rr * a4 + rr * rr * a2 + rr ** 3 - tt * a3 - tt * tt - rr * tt * a1) % p ** 6 != 0:
            return None
        return mp

    if p >= 5:
        inv2 = pow(2, -1, p)
        s = (-a1 * inv2) % p
        inv3 = pow(3, -1, p ** 2)
        r = ((s * a1 - a2 + s * s) * inv3) % p ** 2
        invt = pow(2, -1, p ** 3)
        t = ((-a3 - r * a1) * invt) % p ** 3
        return integral(int(r), int(s), int(t))
    for s in range(p):
        for r in range(p ** 2):
            for t in range(p ** 3):
                mp = integral(r, s, t)
                if mp is not None:
                    return mp
    return None


def reduction_over_Q(E: EllipticCurve, p: int) -> ReductionData:
    """Reduction type of E/Q at p from a p-minimal model (Laska-style shrink)."""
    if not E.is_over_Q():
        raise CurveError("reduction data requires a curve over Q")
    maps = []
    current = E
    im = integral_model_map(E)
    if im.u != 1:
        maps.append(im)
        current = im.apply_to_curve(E)
    while True:
        delta = current.delta.rational_value()
        if _vp(delta, p) < 12:
            break
        mp = _try_shrink_at_p(current, p)
        if mp is None:
            break
        maps.append(mp)
        current = mp.apply_to_curve(current)
    vd = _vp(current.delta.rational_value(), p)
    if vd == 0:
        kind = "good"
    else:
        c4 = current.c4.rational_value()
        kind = "multiplicative" if (c4 != 0 and _vp(c4, p) == 0) else "additive"
    return ReductionData(p, not maps, kind, vd, current, tuple(maps))


# ---------------------------------------------------------------------------
# torsion oracle and point counts
# ---------------------------------------------------------------------------

def count_points_mod_p(E_min: EllipticCurve, p: int) -> int:
    """|E(F_p)| for a p-minimal good-reduction model, naive O(p) count."""
    a1, a2, a3, a4, a6 = (int(a) for a in E_min.rational_a_invariants())
    if p == 2:
        total = 1
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - (x ** 3 + a2 * x * x + a4 * x + a6)) % 2 == 0:
                    total += 1
        return total
    total = p + 1
    for x in range(p):
        b = (a1 * x + a3) % p
        c = (x ** 3 + a2 * x * x + a4 * x + a6) % p
        disc = (b * b + 4 * c) % p
        total += kronecker_symbol(disc, p)
    return total


def _trace_of_frobenius(E_min: EllipticCurve, p: int) -> int:
    return p + 1 - count_points_mod_p(E_min, p)


def count_points_residue(E_min: EllipticCurve, p: int, f: int) -> int:
    """|E(F_{p^f})| via the Frobenius recurrence a_{p^k} = a_p a_{p^(k-1)} - p a_{p^(k-2)}."""
    ap = _trace_of_frobenius(E_min, p)
    prev, cur = 2, ap            # a_{p^0} = 2, a_{p^1} = a_p
    for _ in range(f - 1):
        prev, cur = cur, ap * cur - p * prev
    return p ** f + 1 - cur


class NoGoodPrimesError(RuntimeError):
    pass


def _divisors(n: int) -> list[int]:
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def torsion_test(P: CurvePoint, prime_limit: int = 1000):
    """Height-free torsion decision: (is_torsion, order or None).

    Bounds the order by combining residue point counts at good, ordinary,
    unramified degree-1 places; the bound excludes each residue
    characteristic from its own count (reduction is only injective on
    prime-to-p torsion), then scalar multiples decide membership.
    """
    E = P.curve
    if P.is_infinity:
        return True, 1
    K = E.field
    if E.is_over_Q():
        E_q = E if K == QQ else EllipticCurve(QQ, *E.rational_a_invariants())
    else:
        raise CurveError("torsion test requires curve coefficients in Q")

    counts = []
    p = 2
    from .numberfields import is_prime as _isp

    while p <= prime_limit and len(counts) < 3:
        if _isp(p):
            red = reduction_over_Q(E_q, p)
            if red.kind == "good":
                ok_field = True
                f = 1
                if K.kind != "rational":
                    splits = prime_splitting(K, p)
                    pl = splits[0]
                    if pl.e != 1 or pl.f != 1:
                        ok_field = False
                if ok_field:
                    ap = _trace_of_frobenius(red.minimal_curve, p)
                    if ap % p != 0:  # ordinary
                        counts.append((p, count_points_residue(red.minimal_curve, p, f)))
        p += 1
    if len(counts) < 2:
        raise NoGoodPrimesError("no good primes")

    bound = 1
    primes_used = [p for p, _ in counts]
    all_ells = set()
    for _, m in counts:
        mm = m
        d = 2
        while d * d <= mm:
            if mm % d == 0:
                all_ells.add(d)
                while mm % d == 0:
                    mm //= d
            d += 1
        if mm > 1:
            all_ells.add(mm)
    for ell in sorted(all_ells):
        exps = []
        for p, m in counts:
            if p == ell:
                continue
            v = 0
            while m % ell == 0:
                m //= ell
                v += 1
            exps.append(v)
        if exps:
            bound *= ell ** min(exps)

    for n in _divisors(bound):
        if n > 1 and scalar_mul(n, P).is_infinity:
            return True, n
    return False, None


# ---------------------------------------------------------------------------
# the 13 rational CM j-invariants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CMDescriptor:
    j: Fraction
    field_discriminant: int
    order_discriminant: int


_CM_TABLE = {
    Fraction(0): (-3, -3),
    Fraction(1728): (-4, -4),
    Fraction(-3375): (-7, -7),
    Fraction(8000): (-8, -8),
    Fraction(-32768): (-11, -11),
    Fraction(54000): (-3, -12),
    Fraction(287496): (-4, -16),
    Fraction(-884736): (-19, -19),
    Fraction(-12288000): (-3, -27),
    Fraction(16581375): (-7, -28),
    Fraction(-884736000): (-43, -43),
    Fraction(-147197952000): (-67, -67),
    Fraction(-262537412640768000): (-163, -163),
}


def cm_lookup(j) -> CMDescriptor:
    j = Fraction(j)
    try:
        dk, dorder = _CM_TABLE[j]
    except KeyError:
        raise CurveError("not a rational CM j-invariant") from None
    return CMDescriptor(j, dk, dorder)


def rational_cm_j_invariants() -> list[Fraction]:
    return sorted(_CM_TABLE, key=lambda q: (q.denominator, q))


# one representative curve per rational CM j-invariant (a1, a2, a3, a4, a6)
_CM_CURVES = {
    Fraction(0): (0, 0, 0, 0, 1),
    Fraction(1728): (0, 0, 0, -1, 0),
    Fraction(-3375): (1, -1, 0, -2, -1),
    Fraction(8000): (0, 4, 0, 2, 0),
    Fraction(-32768): (0, -1, 1, -7, 10),
    Fraction(54000): (0, 0, 0, -15, 22),
    Fraction(287496): (0, 0, 0, -11, -14),
    Fraction(-884736): (0, 0, 1, -38, 90),
    Fraction(-12288000): (0, 0, 1, -270, -1708),
    Fraction(16581375): (0, 0, 0, -595, 5586),
    Fraction(-884736000): (0, 0, 1, -860, 9707),
    Fraction(-147197952000): (0, 0, 1, -7370, 243528),
    Fraction(-262537412640768000): (0, 0, 1, -2174420, 1234136692),
}


@lru_cache(maxsize=None)
def cm_curve(j) -> EllipticCurve:
    """The registry representative over Q for a rational CM j-invariant."""
    j = Fraction(j)
    if j not in _CM_CURVES:
        raise CurveError("not a rational CM j-invariant")
    E = EllipticCurve(QQ, *_CM_CURVES[j])
    assert E.j.rational_value() == j, f"registry curve has wrong j for {j}"
    return E


def cm_sample_curves() -> list[EllipticCurve]:
    return [cm_curve(j) for j in rational_cm_j_invariants()]
