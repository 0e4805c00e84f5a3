import random
from fractions import Fraction

import pytest

from cmheights.intervals import RealInterval
from cmheights.numberfields import (
    FieldError,
    NumberField,
    archimedean_places,
    embed,
    finite_valuation,
    kronecker_symbol,
    log_abs_v,
    make_field,
    minimal_polynomial,
    nf_arith,
    prime_splitting,
    sqrt_mod_prime,
)
from cmheights.polynomials import IntPoly


def test_make_field_examples():
    gauss = make_field("Q(sqrt,-1)")
    assert gauss.degree == 2 and gauss.discriminant == -4
    rat = make_field("Q")
    assert rat.degree == 1 and rat.discriminant == 1
    z5 = make_field("Q(zeta,5)")
    assert z5.degree == 4 and z5.discriminant == 125


def test_make_field_rejects():
    with pytest.raises(FieldError):
        make_field("Q(sqrt,4)")
    with pytest.raises(FieldError):
        make_field("Q(sqrt,1)")
    with pytest.raises(FieldError):
        make_field("Q(zeta,100)")
    with pytest.raises(FieldError):
        make_field("Z")


def test_cyclotomic_discriminants_more():
    assert make_field("Q(zeta,3)").discriminant == -3
    assert make_field("Q(zeta,4)").discriminant == -4
    assert make_field("Q(zeta,8)").discriminant == 256
    assert make_field("Q(zeta,12)").discriminant == 144


def test_nf_arith_gaussian():
    K = make_field("Q(sqrt,-1)")
    i = K.generator()
    one = K.one()
    assert nf_arith(one + i, one - i, "mul") == K.from_rational(2)
    with pytest.raises(ZeroDivisionError):
        nf_arith(one, K.zero(), "div")


def test_nf_arith_golden_ratio():
    K = make_field("Q(sqrt,5)")
    phi = (K.one() + K.generator()) / 2
    sq = phi * phi
    assert sq == (K.from_rational(3) + K.generator()) / 2


def test_mixed_field_rejected():
    a = make_field("Q(sqrt,2)").one()
    b = make_field("Q(sqrt,3)").one()
    with pytest.raises(FieldError):
        a + b


def test_minimal_polynomials():
    K = make_field("Q(sqrt,2)")
    assert minimal_polynomial(K.generator()) == IntPoly([-2, 0, 1])
    assert minimal_polynomial(K.from_rational(3)) == IntPoly([-3, 1])
    K5 = make_field("Q(sqrt,5)")
    phi = (K5.one() + K5.generator()) / 2
    assert minimal_polynomial(phi) == IntPoly([-1, -1, 1])
    z = make_field("Q(zeta,5)")
    assert minimal_polynomial(z.generator()) == IntPoly([1, 1, 1, 1, 1])


def test_prime_splitting_gaussian():
    K = make_field("Q(sqrt,-1)")
    five = prime_splitting(K, 5)
    assert len(five) == 2 and all(p.e == 1 and p.f == 1 for p in five)
    assert all(p.residue_cardinality() == 5 for p in five)
    three = prime_splitting(K, 3)
    assert len(three) == 1 and three[0].f == 2 and three[0].residue_cardinality() == 9
    two = prime_splitting(K, 2)
    assert len(two) == 1 and two[0].e == 2 and two[0].f == 1


def test_prime_splitting_composite_rejected():
    with pytest.raises(FieldError):
        prime_splitting(make_field("Q"), 6)


def test_prime_splitting_cyclotomic():
    K = make_field("Q(zeta,5)")
    # 2 has order 4 mod 5: inert
    pl = prime_splitting(K, 2)
    assert len(pl) == 1 and pl[0].f == 4 and pl[0].e == 1
    # 11 = 1 mod 5 splits completely
    pl = prime_splitting(K, 11)
    assert len(pl) == 4 and all(p.f == 1 for p in pl)
    # 5 is totally ramified
    pl = prime_splitting(K, 5)
    assert len(pl) == 1 and pl[0].e == 4 and pl[0].f == 1


def test_place_weight_partition():
    primes = [p for p in range(2, 101)
              if all(p % d for d in range(2, int(p ** 0.5) + 1))]
    for desc in ["Q", "Q(sqrt,-1)", "Q(sqrt,5)", "Q(sqrt,-163)", "Q(zeta,5)",
                 "Q(zeta,8)", "Q(zeta,12)", "Q(zeta,15)"]:
        K = make_field(desc)
        assert sum(p.d_v for p in archimedean_places(K)) == 1
        for p in primes:
            places = prime_splitting(K, p)
            assert sum(pl.d_v for pl in places) == 1
            assert sum(pl.e * pl.f for pl in places) == K.degree


def test_finite_valuations_gaussian():
    K = make_field("Q(sqrt,-1)")
    i = K.generator()
    five = K.from_rational(5)
    for place in prime_splitting(K, 5):
        assert finite_valuation(five, place) == 1
    place2 = prime_splitting(K, 2)[0]
    assert finite_valuation(K.one() + i, place2) == 1
    assert finite_valuation(K.from_rational(2), place2) == 2
    place3 = prime_splitting(K, 3)[0]
    assert finite_valuation(K.from_rational(3), place3) == 1
    with pytest.raises(ZeroDivisionError):
        finite_valuation(K.zero(), place3)


def test_split_valuations_add_to_norm_valuation():
    rng = random.Random(7)
    K = make_field("Q(sqrt,-1)")
    places = prime_splitting(K, 5)
    for _ in range(50):
        a = K.element([Fraction(rng.randint(-40, 40), rng.randint(1, 9)),
                       Fraction(rng.randint(-40, 40), rng.randint(1, 9))])
        if a.is_zero():
            continue
        total = sum(finite_valuation(a, pl) for pl in places)
        nv = a.norm()
        v5 = 0
        num, den = nv.numerator, nv.denominator
        while num % 5 == 0:
            num //= 5
            v5 += 1
        while den % 5 == 0:
            den //= 5
            v5 -= 1
        assert total == v5


def test_embed_examples():
    K = make_field("Q(sqrt,2)")
    places = archimedean_places(K)
    balls = [embed(K.generator(), pl, 80) for pl in places]
    # the two embeddings send the generator to +sqrt(2) and -sqrt(2)
    assert all(b.re.sqr().contains(2) for b in balls)
    assert any(b.re.lo > 1 for b in balls)
    assert any(b.re.hi < -1 for b in balls)
    assert all(b.im.contains(0) for b in balls)
    one_img = embed(K.one(), places[0], 80)
    assert one_img.re.contains(1) and one_img.re.radius_leq(0)

    Ki = make_field("Q(sqrt,-1)")
    pl = archimedean_places(Ki)[0]
    ball = embed(Ki.generator(), pl, 80)
    assert ball.re.contains(0) and (ball.im.contains(1) or ball.im.contains(-1))


def test_product_formula_random_elements():
    rng = random.Random(20260808)
    for desc in ["Q(sqrt,-1)", "Q(sqrt,5)"]:
        K = make_field(desc)
        for _ in range(500):
            a = K.element([Fraction(rng.randint(-30, 30), rng.randint(1, 12)),
                           Fraction(rng.randint(-30, 30), rng.randint(1, 12))])
            if a.is_zero():
                continue
            total = RealInterval.zero()
            for pl in archimedean_places(K):
                total = total.add(log_abs_v(a, pl, 96).mul(pl.d_v, 96), 96)
            support = set()
            nrm = a.norm()
            for n in (nrm.numerator, nrm.denominator):
                n = abs(n)
                d = 2
                while d * d <= n:
                    if n % d == 0:
                        support.add(d)
                        while n % d == 0:
                            n //= d
                    d += 1
                if n > 1:
                    support.add(n)
            for p in sorted(support):
                for pl in prime_splitting(K, p):
                    total = total.add(log_abs_v(a, pl, 96).mul(pl.d_v, 96), 96)
            assert total.contains_zero(), (desc, a, total)


def test_minimal_polynomial_roots_contain_embeddings():
    K = make_field("Q(sqrt,5)")
    a = (K.one() + K.generator()) / 2
    mp = minimal_polynomial(a)
    from cmheights.polynomials import eval_poly

    for pl in archimedean_places(K):
        img = embed(a, pl, 96)
        val_re = eval_poly(mp.coeffs, img.re)
        assert val_re.contains_zero()


def test_kronecker_and_sqrt_mod():
    assert kronecker_symbol(-4, 5) == 1
    assert kronecker_symbol(-4, 3) == -1
    assert kronecker_symbol(-4, 2) == 0
    assert kronecker_symbol(5, 2) == -1   # 5 = 5 mod 8
    assert kronecker_symbol(17, 2) == 1   # 17 = 1 mod 8
    for p in [5, 13, 97]:
        for a in range(1, p):
            if kronecker_symbol(a, p) == 1:
                r = sqrt_mod_prime(a, p)
                assert r * r % p == a


def test_cyclotomic_galois_maps():
    K = make_field("Q(zeta,5)")
    z = K.generator()
    img = z.galois_map(2)
    assert img == z * z
    # norm of 1 - zeta_5 is 5 (the ramified prime)
    a = K.one() - z
    assert a.norm() == 5
    assert a.trace() == 5  # trace(1) = 4, trace(zeta) = -1
    conjs = z.galois_conjugates()
    assert len(conjs) == 4
    prod = K.one()
    for c in conjs:
        prod = prod * c
    assert prod == K.one()  # norm of zeta_5 is 1


def test_element_serialization_roundtrip():
    K = make_field("Q(sqrt,-7)")
    a = K.element([Fraction(3, 2), Fraction(-5, 11)])
    assert K.element_from_string(a.serialize()) == a
