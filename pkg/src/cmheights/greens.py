"""Certified evaluation of the doubling-limit canonical height.

The height is the limit  hhat(P) = lim 4^(-n) h(x(2^n P)) / 2.  Evaluating
x(2^n P) in closed form is hopeless (coordinate sizes grow like 4^n), so the
limit is computed place by place on the projective duplication pair

    F1(A, B) = A^4 - b4 A^2 B^2 - 2 b6 A B^3 - b8 B^4
    F2(A, B) = 4 A^3 B + b2 A^2 B^2 + 2 b4 A B^3 + b6 B^4

with x(2P) = F1/F2 when x(P) = A/B.  Writing d = [L:Q] and c_n for the
content ideal of the n-th pair iterate,

    hhat(P) = (1 / 2d) * [ sum over embeddings of lim 4^(-n) log max(|A_n|, |B_n|)
                           - sum over finite places of f_v * gamma_v * log p ],

where gamma_v = lim 4^(-n) ord_v(c_n) >= 0.  Both limits carry explicit
geometric tails derived from Bezout cofactor identities

    U * F1 + V * F2 = Lconst * B^7     and     U* F1 + V* F2 = Lconst* * A^7,

which bound every per-step increment: archimedean steps satisfy
|log max|F(u)| - 4 log max|u|| <= K_inf, and finite-place content increments
are bounded by ord_v of the Bezout constants.  This realizes the stopping
rule "iterate until 4^(-n) * C / 3 <= tolerance" with C assembled from
explicit coefficient bounds of the duplication polynomials.

Supported point fields: Q and quadratic (real or imaginary).  Torsion is
short-circuited by an exact doubling shadow with cycle detection, which
certifies hhat = 0 exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

import gmpy2

from .elliptic import (
    CurveError,
    CurvePoint,
    EllipticCurve,
    integral_model_map,
    point_add,
)
from .intervals import ComplexBall, RealInterval
from .numberfields import NumberField, PlaceData, prime_splitting
from .polynomials import RatPoly, bezout_cofactors


class HeightComputationError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# duplication data per integral model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DuplicationDynamics:
    curve: EllipticCurve            # integral model over Q
    f1: tuple                       # A-coefficients of F1, low to high, ints
    f2: tuple
    bezout_b: tuple                 # (U coeffs, V coeffs, Lconst) for Lconst * B^7
    bezout_a: tuple                 # (U* coeffs, V* coeffs, Lconst*) for A^7
    k_inf_upper: Fraction           # upper bound for the archimedean step constant
    delta_primes: tuple             # primes dividing the Bezout constants


def _sum_abs(coeffs):
    return sum(abs(int(c)) for c in coeffs)


@lru_cache(maxsize=None)
def duplication_dynamics(E: EllipticCurve) -> DuplicationDynamics:
    """Precomputed pair map and certified step constants for an integral model."""
    b2, b4, b6, b8 = (int(v.rational_value()) for v in (E.b2, E.b4, E.b6, E.b8))
    f1 = (-b8, -2 * b6, -b4, 0, 1)
    f2 = (b6, 2 * b4, b2, 4, 0)

    # Bezout identity in t = A/B:  U(t) f(t) + V(t) g(t) = 1, cleared to Z
    f = RatPoly(f1)
    g = RatPoly(f2[:4])
    u, v = bezout_cofactors(f, g)
    # the K_inf bound homogenizes the cofactors as degree-3 forms
    assert u.degree <= 3 and v.degree <= 3
    lcm = 1
    for c in list(u.coeffs) + list(v.coeffs):
        lcm = lcm * c.denominator // gcd(lcm, c.denominator)
    Ub = [int(c * lcm) for c in u.coeffs]
    Vb = [int(c * lcm) for c in v.coeffs]
    bez_b = (tuple(Ub), tuple(Vb), lcm)

    # and in s = B/A for the A^7 identity
    fs = RatPoly(tuple(reversed(f1)))
    gs = RatPoly(tuple(reversed(f2)))
    us, vs = bezout_cofactors(fs, gs)
    assert us.degree <= 3 and vs.degree <= 3
    lcm2 = 1
    for c in list(us.coeffs) + list(vs.coeffs):
        lcm2 = lcm2 * c.denominator // gcd(lcm2, c.denominator)
    Ua = [int(c * lcm2) for c in us.coeffs]
    Va = [int(c * lcm2) for c in vs.coeffs]
    bez_a = (tuple(Ua), tuple(Va), lcm2)

    c_up = max(_sum_abs(f1), _sum_abs(f2))
    c_low_b = Fraction(abs(lcm), _sum_abs(Ub) + _sum_abs(Vb))
    c_low_a = Fraction(abs(lcm2), _sum_abs(Ua) + _sum_abs(Va))
    c_low = min(c_low_a, c_low_b)
    iv_up = RealInterval.exact(c_up, 64).log(64)
    iv_low = RealInterval.exact(c_low, 64).log(64)
    k_inf = max(Fraction(gmpy2.mpq(iv_up.hi).numerator, gmpy2.mpq(iv_up.hi).denominator),
                Fraction(gmpy2.mpq((-iv_low.lo)).numerator, gmpy2.mpq((-iv_low.lo)).denominator),
                Fraction(1))

    primes = set()
    for n in (lcm, lcm2):
        for q in _prime_divisors(abs(n)):
            primes.add(q)
    return DuplicationDynamics(E, f1, f2, bez_b, bez_a, k_inf, tuple(sorted(primes)))


def _prime_divisors(n: int) -> list[int]:
    """Prime divisors via trial division then Brent-Pollard rho (huge cofactors)."""
    n = abs(int(n))
    out = set()
    d = 2
    while d * d <= n and d < 100_000:
        if n % d == 0:
            out.add(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        stack = [n]
        while stack:
            m = stack.pop()
            if m == 1:
                continue
            if gmpy2.is_prime(m, 40):
                out.add(int(m))
                continue
            f = _pollard_brent(m)
            stack.append(f)
            stack.append(m // f)
    return sorted(out)


def _pollard_brent(n: int) -> int:
    import random

    if n % 2 == 0:
        return 2
    rng = random.Random(0xC0FFEE ^ n)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g, r, q = 1, 1, 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                from math import gcd as _gcd

                g = _gcd(q, n)
                k += m
            r *= 2
        if g == n:
            from math import gcd as _gcd

            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = _gcd(abs(x - ys), n)
        if g != n:
            return int(g)


# ---------------------------------------------------------------------------
# archimedean iteration
# ---------------------------------------------------------------------------

def _eval_pair_balls(dyn, a: ComplexBall, b: ComplexBall, prec):
    a2 = a.mul(a, prec)
    a3 = a2.mul(a, prec)
    a4 = a3.mul(a, prec)
    b2 = b.mul(b, prec)
    b3 = b2.mul(b, prec)
    b4 = b3.mul(b, prec)
    c = dyn.f1
    f1 = (a4.scale_interval(RealInterval.exact(c[4], prec), prec)
          .add(a2.mul(b2, prec).scale_interval(RealInterval.exact(c[2], prec), prec), prec)
          .add(a.mul(b3, prec).scale_interval(RealInterval.exact(c[1], prec), prec), prec)
          .add(b4.scale_interval(RealInterval.exact(c[0], prec), prec), prec))
    d = dyn.f2
    f2 = (a3.mul(b, prec).scale_interval(RealInterval.exact(d[3], prec), prec)
          .add(a2.mul(b2, prec).scale_interval(RealInterval.exact(d[2], prec), prec), prec)
          .add(a.mul(b3, prec).scale_interval(RealInterval.exact(d[1], prec), prec), prec)
          .add(b4.scale_interval(RealInterval.exact(d[0], prec), prec), prec))
    return f1, f2


def _interval_max(x: RealInterval, y: RealInterval) -> RealInterval:
    return RealInterval(max(x.lo, y.lo), max(x.hi, y.hi))


def arch_green(dyn: DuplicationDynamics, a0: ComplexBall, b0: ComplexBall,
               steps: int, prec: int) -> RealInterval:
    """Enclosure of G(A0, B0) = lim 4^(-n) log max(|A_n|, |B_n|), tail included."""
    a, b = a0, b0
    m = _interval_max(a.abs(prec), b.abs(prec))
    if m.lo <= 0:
        raise HeightComputationError("initial pair modulus not separated from zero")
    total = m.log(prec)
    weight = Fraction(1, 4)
    for _ in range(steps):
        f1, f2 = _eval_pair_balls(dyn, a, b, prec)
        m_new = _interval_max(f1.abs(prec), f2.abs(prec))
        m_old = _interval_max(a.abs(prec), b.abs(prec))
        if m_new.lo <= 0 or m_old.lo <= 0:
            raise HeightComputationError("pair modulus enclosure hit zero; raise precision")
        d_n = m_new.log(prec).sub(m_old.log(prec).mul(4, prec), prec)
        total = total.add(d_n.mul(weight, prec), prec)
        weight /= 4
        # renormalize to keep magnitudes near 1 (exact scaling)
        exp = gmpy2.get_exp(m_new.midpoint)
        a, b = f1.mul_2exp(-exp), f2.mul_2exp(-exp)
    tail = weight * Fraction(4, 3) * dyn.k_inf_upper
    return total.widened(tail, prec)


# ---------------------------------------------------------------------------
# finite-place content trackers
# ---------------------------------------------------------------------------

class _LocalRing:
    """Residue arithmetic for one place: scalars mod p^K, or rank-2
    quadratic-ring elements mod p^K with w^2 = trace*w - norm."""

    def __init__(self, p, K, kind, trace=0, norm=0):
        self.p = p
        self.K = K
        self.mod = p ** K
        self.kind = kind  # "scalar" | "ring"
        self.trace = trace
        self.norm = norm

    def scalar(self, n):
        if self.kind == "scalar":
            return n % self.mod
        return (n % self.mod, 0)

    def mul(self, x, y):
        if self.kind == "scalar":
            return x * y % self.mod
        x0, x1 = x
        y0, y1 = y
        cross = x0 * y1 + x1 * y0
        sq = x1 * y1
        return ((x0 * y0 - sq * self.norm) % self.mod,
                (cross + sq * self.trace) % self.mod)

    def add(self, x, y):
        if self.kind == "scalar":
            return (x + y) % self.mod
        return ((x[0] + y[0]) % self.mod, (x[1] + y[1]) % self.mod)

    def mul_int(self, x, n):
        if self.kind == "scalar":
            return x * n % self.mod
        return (x[0] * n % self.mod, x[1] * n % self.mod)

    def divide_p(self, x, times):
        q = self.p ** times
        if self.kind == "scalar":
            return x // q
        return (x[0] // q, x[1] // q)


class _ContentTracker:
    """Tracks gamma_v = lim 4^(-n) ord_v(content) at one finite place.

    Valuations are in uniformizer units.  `vp_state` must return the
    min-valuation of the current pair, capped at `cap`; states are kept with
    offset valuation < e_v by stripping rational powers of p.
    """

    def __init__(self, place: PlaceData, ring: _LocalRing, a0, b0, delta_cap: int):
        self.place = place
        self.ring = ring
        self.a = a0
        self.b = b0
        self.delta_cap = delta_cap          # bound on the per-step increment
        self.t = 0                          # ord_v of content at current step
        self.offset = 0                     # unstripped part (< e_v)
        self.n = 0
        self._strip_initial()

    # valuation helpers -----------------------------------------------------

    def _vp_int(self, n, cap):
        if n == 0:
            return cap
        v = 0
        p = self.ring.p
        while v < cap and n % p == 0:
            n //= p
            v += 1
        return v

    def _ord(self, x, cap):
        if self.place.e == 2:  # ramified: ord_v = v_p(Norm), in uniformizer units
            if self.ring.kind == "scalar":
                raise AssertionError("ramified tracker needs ring elements")
            x0, x1 = x
            # representatives are exact mod p^K, so the norm is exact mod p^K
            nrm = x0 * x0 + x0 * x1 * self.ring.trace + x1 * x1 * self.ring.norm
            return self._vp_int(nrm, min(cap, self.ring.K - 2))
        if self.ring.kind == "scalar":
            return self._vp_int(x, cap)
        return min(self._vp_int(x[0], cap), self._vp_int(x[1], cap))

    def _min_val(self, cap):
        return min(self._ord(self.a, cap), self._ord(self.b, cap))

    def _strip(self, amount):
        if amount:
            self.a = self.ring.divide_p(self.a, amount)
            self.b = self.ring.divide_p(self.b, amount)

    def _strip_initial(self):
        cap = self.ring.K - 4
        m = self._min_val(cap)
        if m >= cap:
            raise HeightComputationError("initial content exceeds tracker cap")
        e = self.place.e
        strip = m // e
        self._strip(strip)
        self.t = m
        self.offset = m - e * strip

    def step(self, dyn: DuplicationDynamics):
        ring = self.ring
        a, b = self.a, self.b
        a2 = ring.mul(a, a)
        a3 = ring.mul(a2, a)
        a4 = ring.mul(a3, a)
        b2 = ring.mul(b, b)
        b3 = ring.mul(b2, b)
        b4 = ring.mul(b3, b)
        c = dyn.f1
        f1 = ring.add(ring.add(ring.mul_int(a4, c[4]), ring.mul_int(ring.mul(a2, b2), c[2])),
                      ring.add(ring.mul_int(ring.mul(a, b3), c[1]), ring.mul_int(b4, c[0])))
        d = dyn.f2
        f2 = ring.add(ring.add(ring.mul_int(ring.mul(a3, b), d[3]),
                               ring.mul_int(ring.mul(a2, b2), d[2])),
                      ring.add(ring.mul_int(ring.mul(a, b3), d[1]), ring.mul_int(b4, d[0])))
        self.a, self.b = f1, f2
        cap = 4 * self.offset + self.delta_cap + 4
        m = self._min_val(cap)
        if m >= cap:
            raise HeightComputationError("content increment exceeded certified cap")
        e = self.place.e
        strip = m // e
        self._strip(strip)
        self.t = 4 * (self.t - self.offset) + m
        self.offset = m - e * strip
        self.n += 1

    def gamma_enclosure(self) -> tuple[Fraction, Fraction]:
        """[lower, upper] for gamma_v after the steps taken."""
        lower = Fraction(self.t, 4 ** self.n)
        tail = Fraction(self.delta_cap, 3 * 4 ** self.n)
        return lower, lower + tail


# ---------------------------------------------------------------------------
# pair seeds and tracker construction
# ---------------------------------------------------------------------------

def _pair_seed(x_elem):
    """(A0 coords, B0 int): A0 = den*x with integral coordinates, B0 = den,
    divided by their rational content."""
    den = x_elem.denominator()
    coords = [int(c * den) for c in x_elem.coords]
    g = den
    for c in coords:
        g = gcd(g, abs(c))
    return tuple(c // g for c in coords), den // g


def _content_support(dyn: DuplicationDynamics, field: NumberField, coords, den):
    """Primes where the pair's content ideal can be nonzero.

    Over Q the reduced pair is coprime, so only the Bezout-constant primes
    matter.  Over a quadratic field, leftover content at p requires p | den
    together with a nontrivial common divisor of Norm(A0) and den (split
    primes), or p ramified (p | disc).
    """
    support = set(dyn.delta_primes)
    if field.kind == "rational" or den == 1:
        return sorted(support)
    D = field.param
    u, v = coords
    norm_a = abs(u * u - D * v * v)
    candidates = gcd(norm_a, den ** 2)
    for q in _prime_divisors(candidates):
        support.add(q)
    for q in _prime_divisors(field.discriminant):
        if den % q == 0:
            support.add(q)
    return sorted(support)


def _make_trackers(dyn: DuplicationDynamics, field: NumberField,
                   coords, den, steps: int):
    """Content trackers for all finite places that can carry content."""
    support = _content_support(dyn, field, coords, den)
    trackers = []
    for p in support:
        vp_L = max(_vp_capped(dyn.bezout_b[2], p), _vp_capped(dyn.bezout_a[2], p))
        vp_den = _vp_capped(den, p)
        for place in prime_splitting(field, p):
            delta_cap = place.e * vp_L + 4
            K = 16 + (steps + 2) * (delta_cap + 6) + 4 * vp_den
            if field.kind == "rational":
                ring = _LocalRing(p, K, "scalar")
                a0, b0 = coords[0] % ring.mod, den % ring.mod
            elif place.e == 1 and place.f == 1:
                from .numberfields import _split_root

                root = _split_root(field, p, K, place.index)
                ring = _LocalRing(p, K, "scalar")
                a0 = (coords[0] + coords[1] * root) % ring.mod
                b0 = den % ring.mod
            else:
                D = field.param
                if p == 2 and field.discriminant % 2 == 1:
                    # omega basis, omega = (1+sqrt D)/2: trace 1, norm (1-D)/4
                    ring = _LocalRing(p, K, "ring", trace=1, norm=(1 - D) // 4)
                    a0 = ((coords[0] - coords[1]) % ring.mod,
                          (2 * coords[1]) % ring.mod)
                else:
                    # basis (1, sqrt D): trace 0, norm -D
                    ring = _LocalRing(p, K, "ring", trace=0, norm=-D)
                    a0 = (coords[0] % ring.mod, coords[1] % ring.mod)
                b0 = ring.scalar(den)
            trackers.append(_ContentTracker(place, ring, a0, b0, delta_cap))
    return trackers


def _vp_capped(n, p, cap=64):
    n = abs(int(n))
    if n == 0:
        return cap
    v = 0
    while v < cap and n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# torsion shadow
# ---------------------------------------------------------------------------

def doubling_orbit_is_torsion(P: CurvePoint, max_steps=40, size_cap=4000):
    """Exact doubling with cycle detection: returns True only on proof of torsion."""
    seen = {}
    Q = P
    for n in range(max_steps):
        if Q.is_infinity:
            return True
        key = Q.x.coords
        if key in seen:
            return True
        seen[key] = n
        if sum(c.numerator.bit_length() + c.denominator.bit_length()
               for c in Q.x.coords) > size_cap:
            return False
        Q = point_add(Q, Q)
    return False


# ---------------------------------------------------------------------------
# the doubling-limit height
# ---------------------------------------------------------------------------

def _embedding_balls(field: NumberField, coords, den, prec):
    """[(weight, A0 ball, B0 ball)] over archimedean places of the field."""
    out = []
    if field.kind == "rational":
        a = ComplexBall.exact(coords[0], 0, prec)
        b = ComplexBall.exact(den, 0, prec)
        return [(1, a, b)]
    if field.kind != "quadratic":
        raise CurveError("projective height restricted to Q and quadratic fields")
    D = field.param
    b_ball = ComplexBall.exact(den, 0, prec)
    if D > 0:
        rt = RealInterval.exact(D, prec).sqrt(prec)
        for sign in (1, -1):
            gen = ComplexBall(rt.mul(sign, prec), RealInterval.zero())
            a = ComplexBall.exact(coords[0], 0, prec).add(
                gen.scale_interval(RealInterval.exact(coords[1], prec), prec), prec)
            out.append((1, a, b_ball))
    else:
        rt = RealInterval.exact(-D, prec).sqrt(prec)
        gen = ComplexBall(RealInterval.zero(), rt)
        a = ComplexBall.exact(coords[0], 0, prec).add(
            gen.scale_interval(RealInterval.exact(coords[1], prec), prec), prec)
        out.append((2, a, b_ball))
    return out


def minimalish_model(E: EllipticCurve):
    """Integral model over Q plus the map from E's coordinates into it."""
    if not E.is_over_Q():
        raise CurveError("height machinery requires curve coefficients in Q")
    mp = integral_model_map(E)
    if mp.u == 1:
        return E, None
    from .numberfields import QQ as _QQ

    target = mp.apply_to_curve(E if E.field.kind == "rational"
                               else EllipticCurve(_QQ, *E.rational_a_invariants()))
    return target, mp


def _map_point_to_model(P: CurvePoint, model: EllipticCurve, mp):
    if mp is None:
        if P.curve is model or P.curve == model:
            return P
        return CurvePoint(model.base_change(P.curve.field) if P.curve.field.kind != "rational" else model,
                          P.x, P.y, _skip_check=True)
    u, r, s, t = mp.u, mp.r, mp.s, mp.t
    fld = P.curve.field
    target = model if fld.kind == "rational" else model.base_change(fld)
    if P.is_infinity:
        return target.infinity()
    x = (P.x - r) / Fraction(u * u)
    y = (P.y - s * (P.x - r) - t) / Fraction(u ** 3)
    return CurvePoint(target, x, y)


def steps_for_tolerance(dyn: DuplicationDynamics, tolerance: Fraction) -> int:
    """Step count putting the combined geometric tails below tolerance/2.

    A float proxy is fine here: soundness never depends on the step count
    (tails are re-added as certified intervals), only tightness does.
    """
    import math

    k = float(dyn.k_inf_upper)
    logL = 0.0
    for p in dyn.delta_primes:
        vp = max(_vp_capped(dyn.bezout_b[2], p), _vp_capped(dyn.bezout_a[2], p))
        logL += (2 * vp + 4) * math.log(p)
    c_total = (k + logL + 4.0) / 2
    target = max(float(tolerance) / 2, 1e-300)
    n = 4
    while c_total / 3 * 4.0 ** (-n) > target and n < 600:
        n += 1
    return n + 1


def hhat_projective(P: CurvePoint, tolerance) -> RealInterval:
    """Certified enclosure of the canonical height via the doubling limit.

    Handles points over Q and quadratic fields.  Torsion points return the
    exact zero interval (cycle-detected).  Raises HeightComputationError when
    the precision cap is hit.
    """
    tolerance = Fraction(tolerance)
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    E = P.curve
    if P.is_infinity:
        return RealInterval.zero()
    model, mp = minimalish_model(E)
    Pm = _map_point_to_model(P, model, mp)
    if doubling_orbit_is_torsion(Pm):
        return RealInterval.zero()
    dyn = duplication_dynamics(model)
    field = P.curve.field
    dL = field.degree
    coords, den = _pair_seed(Pm.x)
    steps = steps_for_tolerance(dyn, tolerance * dL)

    def attempt(prec, steps):
        trackers = _make_trackers(dyn, field, coords, den, steps)
        for _ in range(steps):
            for tr in trackers:
                tr.step(dyn)
        finite = RealInterval.zero()
        for tr in trackers:
            lo, hi = tr.gamma_enclosure()
            logp = RealInterval.exact(tr.place.p, prec).log(prec)
            gamma_iv = RealInterval.exact(lo, prec).hull(RealInterval.exact(hi, prec))
            finite = finite.add(logp.mul(gamma_iv.mul(tr.place.f, prec), prec), prec)
        arch = RealInterval.zero()
        for weight, a0, b0 in _embedding_balls(field, coords, den, prec):
            g = arch_green(dyn, a0, b0, steps, prec)
            arch = arch.add(g.mul(weight, prec), prec)
        return arch.sub(finite, prec).mul(Fraction(1, 2 * dL), prec)

    prec = max(64, 32 + 2 * tolerance.denominator.bit_length())
    from .intervals import MAX_PRECISION, PrecisionExhausted

    while True:
        try:
            result = attempt(prec, steps)
            if result.radius_leq(tolerance):
                return result
        except HeightComputationError:
            pass
        prec *= 2
        steps += 6
        if prec > MAX_PRECISION:
            raise PrecisionExhausted("height enclosure did not reach tolerance")


def arch_green_of_x(E: EllipticCurve, x_ball: ComplexBall, steps: int,
                    prec: int) -> RealInterval:
    """G((x : 1)) for one archimedean embedding of an integral model of E."""
    dyn = duplication_dynamics(E)
    one = ComplexBall.exact(1, 0, prec)
    return arch_green(dyn, x_ball, one, steps, prec)
