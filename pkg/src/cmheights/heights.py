"""Public height API: Weil heights of algebraic numbers and the canonical
height by two independent methods.

* ``canonical_height_doubling`` evaluates the doubling limit
  lim 4^(-n) h_x(2^n P) / 2 through the certified projective machinery of
  `greens` (tails from explicit duplication-polynomial constants); points
  over cyclotomic fields fall back to exact coordinate doubling with Weil
  heights of minimal polynomials, which caps the reachable tolerance and
  raises on coordinate blow-up.

* ``canonical_height_local_sum`` sums Neron local heights (closed forms at
  finite places, certified archimedean iteration) with local-degree weights.

Both return certified enclosures intersected with [0, inf), which is sound
because the canonical height is nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .elliptic import CurveError, CurvePoint, EllipticCurve, point_add
from .greens import (
    doubling_orbit_is_torsion,
    duplication_dynamics,
    hhat_projective,
    minimalish_model,
    _map_point_to_model,
    _vp_capped,
)
from .intervals import MAX_PRECISION, PrecisionExhausted, RealInterval
from .localheights import archimedean_local_height, local_height_sum
from .numberfields import (
    AlgebraicNumber,
    NFElement,
    archimedean_places,
    minimal_polynomial,
)
from .polynomials import IntPoly
from .roots import isolate_complex_roots


@dataclass(frozen=True)
class HeightResult:
    value: RealInterval
    method: str                 # "doubling" | "local_sum"
    precision: int

    def __repr__(self):
        return f"HeightResult({self.value}, {self.method})"


class CoordinateBlowupError(ArithmeticError):
    """Exact doubling exceeded the size cap before reaching the tolerance."""


def _clamp_nonnegative(iv: RealInterval) -> RealInterval:
    if iv.lo < 0:
        from gmpy2 import mpfr

        return RealInterval(mpfr(0), iv.hi) if iv.hi >= 0 else iv
    return iv


# ---------------------------------------------------------------------------
# Weil height (Mahler measure form)
# ---------------------------------------------------------------------------

def weil_height(a, tolerance=Fraction(1, 10 ** 12)) -> RealInterval:
    """Absolute logarithmic Weil height from the minimal polynomial:
    h(a) = (1/deg) (log|lead| + sum log max(1, |root|))."""
    tolerance = Fraction(tolerance)
    if isinstance(a, AlgebraicNumber):
        poly = a.minpoly
    elif isinstance(a, NFElement):
        poly = minimal_polynomial(a)
    elif isinstance(a, (int, Fraction)):
        q = Fraction(a)
        poly = IntPoly([-q.numerator, q.denominator])
    else:
        raise TypeError("weil_height expects an algebraic number")
    deg = poly.degree
    prec = max(96, 16 + 2 * tolerance.denominator.bit_length())
    while True:
        radius = Fraction(1, 2 ** prec)
        balls = isolate_complex_roots(poly, radius)
        total = RealInterval.exact(abs(poly.leading()), prec).log(prec)
        ok = True
        for b in balls:
            mod = b.abs(prec)
            clipped = RealInterval(max(mod.lo, RealInterval.exact(1, prec).lo),
                                   max(mod.hi, RealInterval.exact(1, prec).hi))
            total = total.add(clipped.log(prec), prec)
        total = total.mul(Fraction(1, deg), prec)
        if total.radius_leq(tolerance):
            return _clamp_nonnegative(total)
        prec *= 2
        if prec > MAX_PRECISION:
            raise PrecisionExhausted("weil height did not reach tolerance")


# ---------------------------------------------------------------------------
# canonical height: doubling limit
# ---------------------------------------------------------------------------

def _exact_doubling_height(P: CurvePoint, tolerance: Fraction,
                           size_cap_bits: int = 600_000) -> tuple[RealInterval, int]:
    """Doubling limit with exact coordinates and Weil heights of x(2^n P).

    Used where the projective route does not apply (cyclotomic points).  The
    tail bound per step is C_E / (3 * 4^n) with C_E assembled from the
    duplication-polynomial constants; raises CoordinateBlowupError when the
    addition chain outgrows the size cap before the tolerance is met.
    """
    model, mp = minimalish_model(P.curve)
    Pm = _map_point_to_model(P, model, mp)
    if doubling_orbit_is_torsion(Pm):
        return RealInterval.zero(), 64
    from .numberfields import QQ

    model_q = model if model.field.kind == "rational" else \
        EllipticCurve(QQ, *model.rational_a_invariants())
    dyn = duplication_dynamics(model_q)
    prec = 128
    c_tail = RealInterval.exact(dyn.k_inf_upper, prec)
    for p in dyn.delta_primes:
        vp = max(_vp_capped(dyn.bezout_b[2], p), _vp_capped(dyn.bezout_a[2], p))
        c_tail = c_tail.add(RealInterval.exact(p, prec).log(prec).mul(vp + 4, prec), prec)
    from .intervals import fraction_of

    Q = Pm
    n = 0
    while True:
        tail = fraction_of(c_tail.mul(Fraction(1, 6 * 4 ** n), prec).hi)
        if tail <= tolerance / 2:
            break
        if Q.is_infinity:
            return RealInterval.zero(), prec
        bits = sum(c.numerator.bit_length() + c.denominator.bit_length()
                   for c in Q.x.coords)
        if bits > size_cap_bits:
            raise CoordinateBlowupError(
                f"coordinate blow-up beyond cap at step {n} ({bits} bits)")
        Q = point_add(Q, Q)
        n += 1
    if Q.is_infinity:
        return RealInterval.zero(), prec
    hx = weil_height(Q.x, tolerance / 4)
    est = hx.mul(Fraction(1, 2 * 4 ** n), prec)
    return est.widened(tail, prec), prec


def canonical_height_doubling(E: EllipticCurve, P: CurvePoint,
                              tolerance) -> HeightResult:
    """Canonical height hhat(P) = lim 4^(-n) h_x(2^n P) / 2, certified."""
    tolerance = Fraction(tolerance)
    if P.curve != E:
        raise CurveError("point is not on the given curve")
    if P.is_infinity:
        return HeightResult(RealInterval.zero(), "doubling", 64)
    if P.curve.field.kind == "cyclotomic":
        value, prec = _exact_doubling_height(P, tolerance)
        return HeightResult(_clamp_nonnegative(value), "doubling", prec)
    value = hhat_projective(P, tolerance)
    return HeightResult(_clamp_nonnegative(value),
                        "doubling", max(v.precision for v in (value.lo, value.hi)))


def canonical_height_local_sum(E: EllipticCurve, P: CurvePoint,
                               tolerance) -> HeightResult:
    """Canonical height as the d_v-weighted sum of Neron local heights."""
    tolerance = Fraction(tolerance)
    if P.curve != E:
        raise CurveError("point is not on the given curve")
    value = local_height_sum(P, tolerance)
    return HeightResult(_clamp_nonnegative(value), "local_sum",
                        max(v.precision for v in (value.lo, value.hi)))


def parallelogram_residual(E: EllipticCurve, P: CurvePoint, Q: CurvePoint,
                           tolerance) -> RealInterval:
    """Enclosure of hhat(P+Q) + hhat(P-Q) - 2 hhat(P) - 2 hhat(Q)."""
    tolerance = Fraction(tolerance)
    if P.curve != Q.curve:
        raise CurveError("points on different curves")
    per = tolerance / 6
    h_sum = canonical_height_doubling(E, point_add(P, Q), per).value
    h_diff = canonical_height_doubling(E, point_add(P, -Q), per).value
    h_p = canonical_height_doubling(E, P, per).value
    h_q = canonical_height_doubling(E, Q, per).value
    return h_sum.add(h_diff).sub(h_p.mul(2)).sub(h_q.mul(2))


@dataclass(frozen=True)
class FloorReport:
    samples: int
    min_lambda: float
    floor: float
    violations: tuple

    @property
    def passed(self):
        return not self.violations


def archimedean_floor_check(E: EllipticCurve, points, c1: RealInterval,
                            tolerance=Fraction(1, 10 ** 6)) -> FloorReport:
    """Check lambda_inf(R) >= -C1 for every sampled nonzero point.

    Violations are certified (lambda's upper bound below -C1's lower bound);
    failures are collected and reported, never raised.
    """
    violations = []
    observed = None
    count = 0
    for P in points:
        if P.is_infinity:
            continue
        for place in archimedean_places(P.curve.field):
            lam = archimedean_local_height(P, place, tolerance).value
            count += 1
            lo = float(lam.lo)
            observed = lo if observed is None else min(observed, lo)
            if lam.hi < c1.neg().lo:
                violations.append((P, place, lam))
    return FloorReport(count, observed if observed is not None else 0.0,
                       float(c1.neg().lo), tuple(violations))
