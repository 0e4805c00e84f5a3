"""Neron local heights, place by place, in the model-independent normalization.

Normalization.  Every local height returned here is the "absolute" Neron
function lambda_v: it does not depend on the chosen Weierstrass model, the
global decomposition  hhat(P) = sum_v d_v lambda_v(P)  holds exactly with
d_v = [L_v:Q_v]/[L:Q], it is nonnegative at finite places of curves with
potential good reduction, and its archimedean values obey the explicit
floor checked by `archimedean_floor_check`.  Concretely, writing
lambda_min for the model-bound function normalized by

    lambda_min(P) - (1/2) log |x(P)|_v  ->  0   as P -> O,
    lambda_min(2P) = 4 lambda_min(P) - (1/2) log |psi_2^2(x(P))|_v,

computed on a v-minimal model at finite places (and on a fixed integral
model at archimedean ones), the absolute function is

    lambda_v = lambda_min + (1/12) ord_v(Delta_min) log(p)/e_v    (finite)
    lambda_v = lambda_min - (1/12) log |Delta_model|_sigma        (archimedean)

and the two shifts cancel globally by the product formula.

Finite places are evaluated by closed forms (good reduction, the Bernoulli
form on multiplicative singular fibers, a 12-multiple pullback on additive
singular fibers) and return exact rational multiples of log p.  Torsion
points are solved exactly through the duplication relation along their
(finite) doubling orbit, anchored at the 2-torsion closed form
lambda_min(T) = (1/4) log |psi_2^2'(x_T)/4|_v.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .elliptic import (
    CurveError,
    CurvePoint,
    EllipticCurve,
    ReductionData,
    point_add,
    psi_value,
    reduction_over_Q,
    scalar_mul,
)
from .greens import (
    arch_green,
    doubling_orbit_is_torsion,
    duplication_dynamics,
    minimalish_model,
    _map_point_to_model,
    steps_for_tolerance,
)
from .intervals import ComplexBall, RealInterval
from .numberfields import (
    NFElement,
    PlaceData,
    archimedean_places,
    embed,
    finite_valuation,
    prime_splitting,
)


class DeskScopeError(ValueError):
    """Bad reduction under a ramified place of a quadratic field: out of scope."""


@dataclass(frozen=True)
class LocalHeightValue:
    place: PlaceData
    value: RealInterval
    logp_coefficient: Fraction | None = None   # exact multiple of log p, finite places

    def __repr__(self):
        return f"LocalHeight({self.place!r}: {self.value})"


@lru_cache(maxsize=None)
def _reduction(E: EllipticCurve, p: int) -> ReductionData:
    return reduction_over_Q(E, p)


def _curve_over_Q(E: EllipticCurve) -> EllipticCurve:
    from .numberfields import QQ

    if E.field.kind == "rational":
        return E
    return EllipticCurve(QQ, *E.rational_a_invariants())


def _ord(val: NFElement, place: PlaceData):
    """ord_v or None for the zero element (treated as +infinity by callers)."""
    if val.is_zero():
        return None
    return finite_valuation(val, place)


def _map_point_through(red: ReductionData, P: CurvePoint) -> CurvePoint:
    if not red.maps:
        return P
    Q = P
    for mp in red.maps:
        Q = mp.apply_to_point(Q, mp.apply_to_curve(Q.curve))
    return Q


def _is_singular_reducing(Em: EllipticCurve, P: CurvePoint, place: PlaceData) -> bool:
    """P integral at v on a v-minimal bad model: does it meet the singular point?"""
    x, y = P.x, P.y
    a1, a2, _, a4, _ = Em.a_invariants()
    tangent = 3 * x * x + 2 * a2 * x + a4 - a1 * y
    vertical = 2 * y + Em.a1 * x + Em.a3
    s1 = _ord(tangent, place)
    s2 = _ord(vertical, place)
    return (s1 is None or s1 > 0) and (s2 is None or s2 > 0)


def _smooth_coefficient(Em, P, place) -> Fraction:
    """lambda_min / log p for a point avoiding the singular locus."""
    if P.is_infinity:
        raise CurveError("local height of the identity is undefined")
    vx = _ord(P.x, place)
    if vx is not None and vx < 0:
        return Fraction(-vx, 2 * place.e)
    return Fraction(0)


def _two_torsion_coefficient(Em, T, place) -> Fraction:
    """lambda_min / log p at a 2-torsion point: (1/4) log |D'(x_T)/4|_v."""
    b2, b4 = Em.b2, Em.b4
    x = T.x
    dprime = 12 * x * x + 2 * b2 * x + 2 * b4
    ordv = _ord(dprime, place)
    assert ordv is not None, "D'(x_T) = 0 would force a singular model"
    v4 = place.e * (2 if place.p == 2 else 0)
    return Fraction(-(ordv - v4), 4 * place.e)


def _torsion_orbit_coefficient(Em, P, place) -> Fraction:
    """Exact lambda_min / log p for a torsion point via the duplication orbit."""
    orbit = []       # (x-coords key, point, d_k)
    index_of = {}
    Q = P
    while True:
        if Q.is_infinity:
            raise CurveError("identity has no local height")
        key = Q.x.coords
        if key in index_of:
            cycle_start = index_of[key]
            break
        twoQ = point_add(Q, Q)
        if twoQ.is_infinity:
            # Q is 2-torsion: closed form anchors the back-substitution
            index_of[key] = len(orbit)
            orbit.append((key, Q, None))
            anchor = _two_torsion_coefficient(Em, Q, place)
            return _back_solve(orbit, anchor, len(orbit) - 1)
        D_val = psi_value(Em, Q, 2) * psi_value(Em, Q, 2)
        ordD = _ord(D_val, place)
        d_k = Fraction(ordD, 2 * place.e)
        index_of[key] = len(orbit)
        orbit.append((key, Q, d_k))
        Q = twoQ
    # pure cycle: L_j = 4^len L_j + sum 4^(len-1-i) d_{j+i}
    length = len(orbit) - cycle_start
    acc = Fraction(0)
    for i in range(length):
        acc = 4 * acc + orbit[cycle_start + i][2]
    L_cycle = acc / (1 - Fraction(4) ** length)
    return _back_solve(orbit, L_cycle, cycle_start)


def _back_solve(orbit, L_anchor, anchor_index) -> Fraction:
    L = L_anchor
    for k in range(anchor_index - 1, -1, -1):
        L = (L - orbit[k][2]) / 4
    return L


def _additive_pullback_coefficient(Em, P, place) -> Fraction:
    """Non-torsion point meeting the singular locus of an additive fiber."""
    for m in (2, 3, 4, 6, 12):
        Q = scalar_mul(m, P)
        if Q.is_infinity:
            continue
        vxQ = _ord(Q.x, place)
        if (vxQ is not None and vxQ < 0) or not _is_singular_reducing(Em, Q, place):
            psi = psi_value(Em, P, m)
            ord_psi = _ord(psi, place)
            assert ord_psi is not None, "psi_m vanishes only on m-torsion"
            c_smooth = _smooth_coefficient(Em, Q, place)
            return (c_smooth - Fraction(ord_psi, place.e)) / (m * m)
    raise CurveError("no multiple escaped the singular locus (unexpected for non-torsion)")


def finite_local_height(P: CurvePoint, place: PlaceData,
                        prec: int = 64) -> LocalHeightValue:
    """Neron local height at a finite place, exact up to the log p enclosure.

    The point's field must be Q or quadratic; bad reduction under a ramified
    place raises DeskScopeError (out of desk scope), matching the declared
    restriction of the local-sum method.
    """
    if P.is_infinity:
        raise CurveError("local height of the identity is undefined")
    if place.archimedean:
        raise CurveError("finite_local_height expects a finite place")
    E = P.curve
    if E.field.kind == "cyclotomic":
        raise CurveError("local heights restricted to Q and quadratic fields")
    p = place.p
    red = _reduction(_curve_over_Q(E), p)
    if red.kind != "good" and place.e > 1:
        raise DeskScopeError("out of desk scope")
    Pm = _map_point_through(red, P)
    Em = Pm.curve
    n_delta = red.v_delta_min

    vx = _ord(Pm.x, place)
    if vx is not None and vx < 0:
        c_min = Fraction(-vx, 2 * place.e)
    elif red.kind == "good":
        c_min = Fraction(0)
    elif not _is_singular_reducing(Em, Pm, place):
        c_min = Fraction(0)
    elif red.kind == "multiplicative":
        vertical = 2 * Pm.y + Em.a1 * Pm.x + Em.a3
        ordv = _ord(vertical, place)
        N = Fraction(n_delta)
        m = N / 2 if ordv is None else min(Fraction(ordv, place.e), N / 2)
        c_min = -m * (N - m) / (2 * N)
    else:  # additive, singular-reducing
        if doubling_orbit_is_torsion(Pm):
            c_min = _torsion_orbit_coefficient(Em, Pm, place)
        else:
            c_min = _additive_pullback_coefficient(Em, Pm, place)

    c_abs = c_min + Fraction(n_delta, 12)
    logp = RealInterval.exact(p, prec).log(prec)
    return LocalHeightValue(place, logp.mul(c_abs, prec), c_abs)


def _arch_steps_for(E_int: EllipticCurve, tolerance: Fraction) -> int:
    return steps_for_tolerance(duplication_dynamics(E_int), tolerance)


def archimedean_local_height(P: CurvePoint, place: PlaceData, tolerance,
                             prec: int = 96) -> LocalHeightValue:
    """Neron local height at an archimedean place via the certified
    duplication iteration, truncation error below `tolerance`."""
    if P.is_infinity:
        raise CurveError("local height of the identity is undefined")
    if not place.archimedean:
        raise CurveError("archimedean_local_height expects an archimedean place")
    tolerance = Fraction(tolerance)
    E = P.curve
    model, mp = minimalish_model(E)
    Pm = _map_point_to_model(P, model, mp)
    model_q = _curve_over_Q(model)
    dyn = duplication_dynamics(model_q)
    steps = steps_for_tolerance(dyn, tolerance)
    from .intervals import MAX_PRECISION, PrecisionExhausted
    from .greens import HeightComputationError

    delta_abs = abs(model_q.delta.rational_value())
    while True:
        try:
            x_ball = embed(Pm.x, place, prec) if E.field.kind != "rational" \
                else ComplexBall.exact(Pm.x.rational_value(), 0, prec)
            one = ComplexBall.exact(1, 0, prec)
            g = arch_green(dyn, x_ball, one, steps, prec)
            lam_min = g.mul(Fraction(1, 2), prec)
            shift = RealInterval.exact(delta_abs, prec).log(prec).mul(Fraction(1, 12), prec)
            lam = lam_min.sub(shift, prec)
            if lam.radius_leq(tolerance):
                return LocalHeightValue(place, lam)
        except HeightComputationError:
            pass
        prec *= 2
        steps += 4
        if prec > MAX_PRECISION:
            raise PrecisionExhausted("archimedean local height did not converge")


def finite_support_primes(P: CurvePoint) -> list[int]:
    """Primes where a local term can be nonzero: bad primes and denominator primes."""
    from .elliptic import integral_model_map
    from .greens import _prime_divisors

    E = _curve_over_Q(P.curve)
    mp = integral_model_map(E)
    E_int = mp.apply_to_curve(E) if mp.u != 1 else E
    support = set(_prime_divisors(int(E_int.delta.rational_value())))
    den = P.x.denominator() * (mp.u.denominator if mp.u != 1 else 1)
    support.update(_prime_divisors(den))
    return sorted(support)


def local_height_sum(P: CurvePoint, tolerance) -> RealInterval:
    """hhat(P) as the d_v-weighted sum of Neron local heights."""
    tolerance = Fraction(tolerance)
    if P.is_infinity:
        return RealInterval.zero()
    field = P.curve.field
    if field.kind == "cyclotomic":
        raise CurveError("local-sum height restricted to Q and quadratic fields")
    arch_places = archimedean_places(field)
    fin_places = []
    for p in finite_support_primes(P):
        fin_places.extend(prime_splitting(field, p))
    n_terms = len(arch_places) + len(fin_places) + 1
    per_term = tolerance / n_terms
    prec = max(96, 32 + 2 * tolerance.denominator.bit_length())
    total = RealInterval.zero()
    for place in arch_places:
        lam = archimedean_local_height(P, place, per_term, prec)
        total = total.add(lam.value.mul(place.d_v, prec), prec)
    for place in fin_places:
        lam = finite_local_height(P, place, prec)
        total = total.add(lam.value.mul(place.d_v, prec), prec)
    return total
