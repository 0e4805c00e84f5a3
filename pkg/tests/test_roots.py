from fractions import Fraction

import pytest

from cmheights.intervals import ComplexBall, RealInterval
from cmheights.polynomials import IntPoly
from cmheights.roots import isolate_complex_roots


def _sqrt2_fraction(prec_digits=40):
    # integer-sqrt based enclosure-free rational approximation for oracles
    scale = 10 ** prec_digits
    from math import isqrt

    n = isqrt(2 * scale * scale)
    return Fraction(n, scale)


def test_sqrt2_roots():
    balls = isolate_complex_roots(IntPoly([-2, 0, 1]), Fraction(1, 10**10))
    assert len(balls) == 2
    approx = _sqrt2_fraction()
    found_pos = any(b.re.contains(approx) and b.im.contains(0) for b in balls)
    found_neg = any(b.re.contains(-approx) and b.im.contains(0) for b in balls)
    assert found_pos and found_neg


def test_linear_exact():
    balls = isolate_complex_roots(IntPoly([-1, 1]), Fraction(1, 10**6))
    assert len(balls) == 1
    assert balls[0].re.contains(1) and balls[0].im.contains(0)


def test_gaussian_roots():
    balls = isolate_complex_roots(IntPoly([1, 0, 1]), Fraction(1, 10**12))
    assert len(balls) == 2
    assert any(b.im.contains(1) and b.re.contains(0) for b in balls)
    assert any(b.im.contains(-1) and b.re.contains(0) for b in balls)


def test_repeated_roots_rejected():
    with pytest.raises(ValueError, match="repeated roots"):
        isolate_complex_roots(IntPoly([1, 2, 1]), Fraction(1, 100))


def test_nonpositive_radius_rejected():
    with pytest.raises(ValueError):
        isolate_complex_roots(IntPoly([-2, 0, 1]), Fraction(0))


def test_disjointness_and_count_degree6():
    # roots of x^6 - 1: the 6th roots of unity, all simple
    p = IntPoly([-1, 0, 0, 0, 0, 0, 1])
    balls = isolate_complex_roots(p, Fraction(1, 10**8))
    assert len(balls) == 6
    for i in range(6):
        for j in range(i + 1, 6):
            assert balls[i].is_disjoint(balls[j])
    assert any(b.re.contains(1) and b.im.contains(0) for b in balls)
    assert any(b.re.contains(-1) and b.im.contains(0) for b in balls)


def test_product_of_enclosures_reexpands():
    # the product of the root enclosures must re-expand over the coefficients
    p = IntPoly([-6, 11, -6, 1])  # (x-1)(x-2)(x-3)
    balls = isolate_complex_roots(p, Fraction(1, 10**10))
    prec = 80
    acc = [ComplexBall.exact(1, 0, prec)]
    for b in balls:
        new = [ComplexBall.exact(0, 0, prec)] * (len(acc) + 1)
        for i, c in enumerate(acc):
            new[i + 1] = new[i + 1].add(c, prec)
            new[i] = new[i].sub(c.mul(b, prec), prec)
        acc = new
    lead = Fraction(p.leading())
    for i, c in enumerate(p.coeffs):
        assert acc[i].re.contains(Fraction(c) / lead)
        assert acc[i].im.contains(0)


def test_large_coefficients():
    # roots near 10^12 and tiny root: exercises magnitude balancing
    p = IntPoly([-(10**12), 1]) * IntPoly([1, 10**12])
    balls = isolate_complex_roots(p, Fraction(1, 10**6))
    assert len(balls) == 2
    assert any(b.re.contains(10**12) for b in balls)
    assert any(b.re.contains(Fraction(-1, 10**12)) for b in balls)
