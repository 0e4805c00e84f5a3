from fractions import Fraction

import pytest

from cmheights.bounds import (
    VERDICT_NONTORSION,
    VERDICT_TORSION,
    certify_point,
    compute_C1,
    construct_Q_check,
    inequality_chain_check,
    intermediate_bound,
    lemma_bound,
    main_bound,
    prime_window,
)
from cmheights.elliptic import (
    CurveError,
    cm_curve,
    curve_from_a_invariants,
    rational_cm_j_invariants,
    scalar_mul,
)
from cmheights.intervals import RealInterval
from cmheights.numberfields import QQ, make_field
from cmheights.sampling import rational_sqrt, squarefree_core


def test_c1_values():
    # frozen from independent big-float evaluation of the formula
    c1_flat = compute_C1(0)
    assert abs(float(c1_flat.midpoint) - 1.3377467523155464) < 1e-12
    c1_1728 = compute_C1(1728)
    assert abs(float(c1_1728.midpoint) - 2.5802000772095466) < 1e-12
    # max(1, .) clamps: C1(0) = C1(1)
    assert compute_C1(0).overlaps(compute_C1(1))
    with pytest.raises(ValueError):
        compute_C1(RealInterval.exact(-1))


def test_lemma_bound_values():
    c1 = compute_C1(1728)
    # a=b=q=p, f=1, rho=1, d=1 reduces to (1/(4p^2)) (log p - C1)
    lb = lemma_bound(29, 29, 29, 1, Fraction(1), 1, c1)
    direct = (RealInterval.exact(29, 96).log()
              .sub(c1).mul(Fraction(1, 4 * 29 * 29)))
    assert lb.overlaps(direct)
    assert abs(float(lb.midpoint) - 2.3398e-4) < 1e-7
    # vacuous negative output is returned, not clamped
    vac = lemma_bound(2, 2, 2, 1, Fraction(1), 1, c1)
    assert vac.hi < 0
    with pytest.raises(ValueError):
        lemma_bound(0, 1, 2, 1, Fraction(1), 1, c1)


def test_intermediate_bound_values():
    c1 = compute_C1(1728)
    ib = intermediate_bound(29, 1, c1)
    assert abs(float(ib.midpoint) - 2.782118e-7) < 1e-12
    # q = 2 with C1 >= log 2: vacuous
    assert intermediate_bound(2, 1, compute_C1(0)).hi < 0
    with pytest.raises(ValueError):
        intermediate_bound(1, 1, c1)


def test_intermediate_bound_eventually_decreasing():
    c1 = compute_C1(1728)
    values = []
    p = 2
    from cmheights.numberfields import is_prime

    for q in range(29, 1000):
        if is_prime(q):
            values.append((q, float(intermediate_bound(q, 1, c1).midpoint)))
    # beyond the maximizer the value decreases monotonically
    peak = max(range(len(values)), key=lambda i: values[i][1])
    tail = values[peak:]
    assert all(tail[i][1] > tail[i + 1][1] for i in range(len(tail) - 1))


def test_prime_window_spot_values():
    lo, hi, p = prime_window(1, j_abs=0)
    assert p == 11
    assert 7.62 < float(lo.midpoint) < 7.63 and 15.24 < float(hi.midpoint) < 15.25
    _, _, p2 = prime_window(1, j_abs=1728)
    assert p2 == 29
    _, _, p3 = prime_window(2, j_abs=0)
    assert p3 == 31


def test_prime_window_certified_containment():
    for d in (1, 2, 3):
        for j in (0, 1728, 287496):
            lo, hi, p = prime_window(d, j_abs=j)
            assert lo.hi <= p < hi.lo


def test_main_bound_values():
    mb0 = main_bound(1, 0)
    assert mb0.contains(Fraction(1, 2 ** 60))
    mb1728 = main_bound(1, 1728)
    expected = Fraction(1, 2 ** 60) / Fraction(1728) ** 4
    assert mb1728.contains(expected)
    assert abs(float(mb1728.midpoint) / 9.728039102094914e-32 - 1) < 1e-9
    mb2 = main_bound(2, 0)
    assert mb2.contains(Fraction(1, 2 ** 184))


def test_main_bound_monotonicity():
    js = [abs(j) for j in rational_cm_j_invariants()]
    for j in js:
        vals = [main_bound(d, j) for d in range(1, 9)]
        for a, b in zip(vals, vals[1:]):
            assert b.hi < a.lo or b.overlaps(a) is False or b.hi < a.lo
            assert b.hi < a.lo
    for d in (1, 2, 4):
        ordered = sorted(js)
        vals = [main_bound(d, j) for j in ordered]
        for a, b in zip(vals, vals[1:]):
            assert b.hi <= a.hi and b.lo <= a.lo


def test_chain_check_d1_links():
    rep = inequality_chain_check(1, 1728)
    assert rep.all_pass
    by_name = {l.link: l for l in rep.links}
    assert by_name["polynomial-vs-2^8d"].lhs == "194" and \
        by_name["polynomial-vs-2^8d"].rhs == "256"
    assert "e^4-vs-2^6" in by_name


def test_chain_check_sample_of_degrees():
    for d in (1, 2, 3, 5, 8, 16, 32):
        for j in (0, 287496):
            rep = inequality_chain_check(d, j)
            assert rep.all_pass, (d, j, [l for l in rep.links if not l.passed])


def test_certify_nontorsion():
    E = curve_from_a_invariants(QQ, 0, 0, 0, -25, 0)
    cert = certify_point(E, E.point(-4, 6), include_chain=True)
    assert cert.verdict == VERDICT_NONTORSION
    assert cert.p == 29 and cert.q == 29
    assert cert.chain.all_pass
    j = cert.to_json_dict()
    assert set(j) == {"curve", "field", "point", "d", "j_abs", "C1",
                      "prime_window", "q", "intermediate_bound", "main_bound",
                      "hhat", "verdict", "chain_report"}
    assert set(j["C1"]) == {"mid", "rad"}
    assert set(j["prime_window"]) == {"lo", "hi", "p"}
    assert set(j["hhat"]) == {"mid", "rad", "method"}


def test_certify_torsion_examples():
    E1 = curve_from_a_invariants(QQ, 0, 0, 0, -1, 0)
    assert certify_point(E1, E1.point(0, 0), include_chain=False).verdict == VERDICT_TORSION
    E2 = curve_from_a_invariants(QQ, 0, 0, 0, 0, 1)
    assert certify_point(E2, E2.point(2, 3), include_chain=False).verdict == VERDICT_TORSION


def test_certify_rejects_non_cm():
    E = curve_from_a_invariants(QQ, 0, 0, 1, -1, 0)   # j = 37-ish curve, not CM
    with pytest.raises(CurveError):
        certify_point(E, E.point(0, 0))


def test_certify_quadratic_point():
    E = curve_from_a_invariants(QQ, 0, 0, 0, -1, 0)
    x = Fraction(2)
    rhs = x ** 3 - x
    core = squarefree_core(rhs)
    K = make_field(f"Q(sqrt,{core})")
    EK = E.base_change(K)
    scale = rational_sqrt(rhs / core)
    P = EK.point(K.from_rational(x), K.generator() * scale)
    cert = certify_point(E, P, include_chain=False)
    assert cert.verdict == VERDICT_NONTORSION
    assert cert.field == K.descriptor()


def test_construct_q_check_identity_conjugates():
    E = curve_from_a_invariants(QQ, 0, 0, 0, -25, 0)
    P = E.point(-4, 6)
    rep = construct_Q_check(E, P, P, P, 0, 3)   # gap 3: Q = -3P
    assert rep.passed and not rep.torsion_flag
    assert rep.hhat_Q.value.overlaps(rep.hhat_P.value.mul(9))
    with pytest.raises(ValueError):
        construct_Q_check(E, P, P, P, 0, 2)     # gap must exceed 2


def test_construct_q_check_torsion_degenerate():
    E = curve_from_a_invariants(QQ, 0, 0, 0, -1, 0)
    T = E.point(0, 0)
    rep = construct_Q_check(E, T, T, T, 0, 3)
    assert rep.height_inequality_ok
    assert rep.q_is_torsion          # everything is torsion here
    assert not rep.torsion_flag      # and P itself is torsion: no violation


def test_construct_q_check_quadratic_conjugates():
    E = curve_from_a_invariants(QQ, 0, 0, 0, -1, 0)
    x = Fraction(2)
    core = squarefree_core(x ** 3 - x)
    K = make_field(f"Q(sqrt,{core})")
    EK = E.base_change(K)
    scale = rational_sqrt((x ** 3 - x) / core)
    P = EK.point(K.from_rational(x), K.generator() * scale)
    sigmaP = EK.point(P.x.conjugate(), P.y.conjugate())
    rep = construct_Q_check(EK, P, P, sigmaP, 1, 5)
    assert rep.height_inequality_ok
    assert rep.parallelogram_ok
