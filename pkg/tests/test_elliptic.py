import random
from fractions import Fraction

import pytest

from cmheights.elliptic import (
    CurveError,
    EllipticCurve,
    SingularModelError,
    cm_curve,
    cm_lookup,
    cm_sample_curves,
    count_points_mod_p,
    curve_from_a_invariants,
    division_polynomial,
    point_add,
    psi_value,
    rational_cm_j_invariants,
    reduction_over_Q,
    scalar_mul,
    torsion_test,
)
from cmheights.numberfields import QQ, make_field
from cmheights.polynomials import RatPoly


def E_minus_x():
    return curve_from_a_invariants(QQ, 0, 0, 0, -1, 0)  # y^2 = x^3 - x


def E_25():
    return curve_from_a_invariants(QQ, 0, 0, 0, -25, 0)  # y^2 = x^3 - 25x


def E_j0():
    return curve_from_a_invariants(QQ, 0, 0, 0, 0, 1)    # y^2 = x^3 + 1


def test_curve_invariants():
    E = E_minus_x()
    assert E.delta.rational_value() == 64
    assert E.j.rational_value() == 1728
    assert E_j0().j.rational_value() == 0
    with pytest.raises(SingularModelError):
        curve_from_a_invariants(QQ, 0, 0, 0, 0, 0)


def test_two_torsion_addition():
    E = E_minus_x()
    T = E.point(0, 0)
    assert point_add(T, T).is_infinity
    P = E.point(1, 0)
    assert (T + P) == E.point(-1, 0)


def test_duplication_spec_value():
    E = E_25()
    P = E.point(-4, 6)
    twoP = scalar_mul(2, P)
    assert twoP.x.rational_value() == Fraction(1681, 144)
    assert twoP.y.rational_value() == Fraction(-62279, 1728)


def test_identity_and_negation():
    E = E_25()
    P = E.point(-4, 6)
    assert point_add(P, E.infinity()) == P
    assert point_add(P, -P).is_infinity
    assert scalar_mul(0, P).is_infinity
    assert scalar_mul(-3, P) == -scalar_mul(3, P)


def test_mixed_curve_rejected():
    with pytest.raises(CurveError):
        point_add(E_25().point(-4, 6), E_minus_x().point(0, 0))


def test_group_law_axioms_random():
    rng = random.Random(11)
    E = E_25()
    P = E.point(-4, 6)
    T = E.point(0, 0)
    pool_q = [point_add(scalar_mul(k, P), scalar_mul(t, T))
              for k in range(-4, 5) for t in (0, 1)]
    K = make_field("Q(sqrt,-1)")
    EK = curve_from_a_invariants(K, 0, 0, 0, -1, 0)
    i = K.generator()
    PK = EK.point(i, K.one() - i)
    QK = EK.point(K.from_rational(0), K.from_rational(0))
    pool_k = [point_add(scalar_mul(k, PK), scalar_mul(t, QK))
              for k in range(-3, 4) for t in (0, 1)]
    for pool in (pool_q, pool_k):
        for _ in range(500):
            A, B, C = (rng.choice(pool) for _ in range(3))
            assert point_add(A, B) == point_add(B, A)
            assert point_add(point_add(A, B), C) == point_add(A, point_add(B, C))
            assert point_add(A, -A).is_infinity


def test_group_law_over_gaussian_field():
    K = make_field("Q(sqrt,-1)")
    E = curve_from_a_invariants(K, 0, 0, 0, -1, 0)
    i = K.generator()
    one = K.one()
    P = E.point(i, one - i)  # (i)^3 - i = -2i = (1-i)^2
    Q = E.point(K.from_rational(0), K.from_rational(0))
    for m in range(1, 5):
        for n in range(1, 5):
            assert scalar_mul(m, scalar_mul(n, P)) == scalar_mul(m * n, P)
    assert point_add(P, Q) == point_add(Q, P)


def test_division_polynomial_examples():
    E = E_minus_x()
    assert division_polynomial(E, 2) == RatPoly([0, -4, 0, 4])
    assert division_polynomial(E, 1) == RatPoly([1])
    E1 = E_j0()
    assert division_polynomial(E1, 3) == RatPoly([0, 12, 0, 0, 3])


def test_division_polynomial_torsion_consistency():
    # points built from roots of psi_n satisfy [n]P = O, n <= 7
    for j in (Fraction(0), Fraction(1728), Fraction(8000)):
        E = cm_curve(j)
        for n in range(2, 8):
            poly = division_polynomial(E, n)
            for x0 in _rational_roots(poly):
                delta = _y_discriminant(E, x0)
                ys = _solve_y(E, x0)
                for y0 in ys:
                    P = E.point(x0, y0)
                    assert scalar_mul(n, P).is_infinity


def _y_discriminant(E, x0):
    a1, a2, a3, a4, a6 = (a.rational_value() for a in E.a_invariants())
    b = a1 * x0 + a3
    c = x0 ** 3 + a2 * x0 ** 2 + a4 * x0 + a6
    return b * b + 4 * c


def _solve_y(E, x0):
    a1, a2, a3, a4, a6 = (a.rational_value() for a in E.a_invariants())
    b = a1 * x0 + a3
    disc = _y_discriminant(E, x0)
    if disc < 0:
        return []
    root = _fraction_sqrt(disc)
    if root is None:
        return []
    return list({(-b + root) / 2, (-b - root) / 2})


def _fraction_sqrt(q):
    from math import isqrt

    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _rational_roots(poly):
    from math import isqrt

    out = []
    prim = poly.clear_denominators()
    c0 = prim.coeffs[0]
    lead = prim.coeffs[-1]
    if c0 == 0:
        out.append(Fraction(0))
        while prim.coeffs[0] == 0:
            prim = type(prim)(prim.coeffs[1:])
        c0 = prim.coeffs[0]
    num_divs = _divs(abs(c0))
    den_divs = _divs(abs(lead))
    for a in num_divs:
        for b in den_divs:
            for sign in (1, -1):
                cand = Fraction(sign * a, b)
                if prim.to_rat()(cand) == 0 and cand not in out:
                    out.append(cand)
    return out


def _divs(n):
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d * d != n:
                out.append(n // d)
        d += 1
    return sorted(out)


def test_scalar_mul_composition():
    # torsion points cycle, so the full |m|, |n| <= 20 grid stays cheap there;
    # a non-torsion point is checked on a smaller grid (coordinates blow up)
    E = E_j0()
    T = E.point(2, 3)
    for m in range(-20, 21):
        for n in range(-20, 21):
            assert scalar_mul(m, scalar_mul(n, T)) == scalar_mul(m * n, T)
    P = E_25().point(-4, 6)
    for m in range(-4, 5):
        for n in range(-4, 5):
            assert scalar_mul(m, scalar_mul(n, P)) == scalar_mul(m * n, P)


def test_torsion_oracle_agrees_with_heights():
    # cross-oracle: the height-free torsion decision matches hhat == 0
    from cmheights.heights import canonical_height_doubling

    E = E_25()
    samples = [E.point(0, 0), E.point(5, 0), E.point(-4, 6), E.point(45, 300)]
    for P in samples:
        is_tors, _ = torsion_test(P)
        h = canonical_height_doubling(E, P, Fraction(1, 10 ** 10)).value
        assert is_tors == (h.contains(0) and h.radius_leq(Fraction(1, 10 ** 10))
                           and float(h.hi) < 1e-9)


def test_torsion_test_examples():
    E = E_minus_x()
    assert torsion_test(E.point(0, 0)) == (True, 2)
    E2 = E_25()
    assert torsion_test(E2.point(-4, 6)) == (False, None)
    E3 = E_j0()
    assert torsion_test(E3.point(2, 3)) == (True, 6)


def test_torsion_test_quadratic_point():
    K = make_field("Q(sqrt,6)")
    E = curve_from_a_invariants(K, 0, 0, 0, -1, 0)
    s6 = K.generator()
    P = E.point(K.from_rational(2), s6)  # 2^3 - 2 = 6
    is_tors, order = torsion_test(P)
    assert not is_tors and order is None


def test_reduction_examples():
    E = E_minus_x()
    assert reduction_over_Q(E, 5).kind == "good"
    r2 = reduction_over_Q(E, 2)
    assert r2.kind == "additive" and r2.was_minimal
    r3 = reduction_over_Q(E_j0(), 3)
    assert r3.kind == "additive"


def test_reduction_minimizes_nonminimal_model():
    # y^2 = x^3 - 16*25 x scaled by u=2 from y^2 = x^3 - 25x: v_2(delta) >= 12
    E = curve_from_a_invariants(QQ, 0, 0, 0, -25 * 16, 0)
    red = reduction_over_Q(E, 2)
    assert not red.was_minimal
    assert red.v_delta_min == reduction_over_Q(E_25(), 2).v_delta_min
    P = E.point(-16, 48)  # image of (-4, 6) under u = 2
    Pm = red.map_point(P)
    assert not Pm.is_infinity
    assert Pm.curve.on_curve(Pm.x, Pm.y)


def test_reduction_multiplicative():
    # y^2 = x^3 + x^2 + 25 has v_5(delta) = 2, v_5(c4) = 0
    E = curve_from_a_invariants(QQ, 0, 1, 0, 0, 25)
    red = reduction_over_Q(E, 5)
    assert red.kind == "multiplicative"
    assert red.v_delta_min == 2


def test_point_count_agrees_with_traces():
    E = E_minus_x()
    # |E(F_5)| for y^2 = x^3 - x: CM curve, supersingular at 5? count directly
    n5 = count_points_mod_p(E, 5)
    brute = 1
    for x in range(5):
        for y in range(5):
            if (y * y - (x ** 3 - x)) % 5 == 0:
                brute += 1
    assert n5 == brute


def test_cm_lookup():
    assert cm_lookup(1728).field_discriminant == -4
    assert cm_lookup(0).field_discriminant == -3
    assert cm_lookup(287496).field_discriminant == -4
    assert cm_lookup(287496).order_discriminant == -16
    with pytest.raises(CurveError):
        cm_lookup(5)


def test_cm_registry():
    js = rational_cm_j_invariants()
    assert len(js) == 13
    for E in cm_sample_curves():
        desc = cm_lookup(E.j.rational_value())
        assert desc.field_discriminant < 0
        assert desc.field_discriminant % 4 in (0, 1)


def test_psi_value_matches_polynomial():
    E = E_25()
    P = E.point(-4, 6)
    val3 = psi_value(E, P, 3)
    poly3 = division_polynomial(E, 3)
    assert val3.rational_value() == poly3(Fraction(-4))
    val2 = psi_value(E, P, 2)
    assert val2.rational_value() == 2 * 6  # 2y + a1 x + a3
