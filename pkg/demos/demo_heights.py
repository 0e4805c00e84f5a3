"""Walk through the two canonical-height routes on a rank-one CM curve.

The curve y^2 = x^3 - 25x (j = 1728, CM by Z[i]) has the well-known
generator (-4, 6).  We compute its height by the certified doubling limit
and by summing Neron local heights, then check the quadratic-form laws.
"""

from fractions import Fraction

from cmheights import (
    QQ,
    archimedean_places,
    canonical_height_doubling,
    canonical_height_local_sum,
    curve_from_a_invariants,
    format_midrad,
    parallelogram_residual,
    scalar_mul,
)
from cmheights.localheights import archimedean_local_height, finite_local_height
from cmheights.localheights import finite_support_primes
from cmheights.numberfields import prime_splitting

tol = Fraction(1, 10 ** 10)
E = curve_from_a_invariants(QQ, 0, 0, 0, -25, 0)
P = E.point(-4, 6)

print("curve: y^2 = x^3 - 25x   (j = 1728)")
hd = canonical_height_doubling(E, P, tol)
hl = canonical_height_local_sum(E, P, tol)
print(f"hhat(P) by doubling limit : {format_midrad(hd.value)}")
print(f"hhat(P) by local sum      : {format_midrad(hl.value)}")
print(f"enclosures intersect      : {hd.value.overlaps(hl.value)}")

print("\nlocal decomposition of hhat(P):")
place_inf = archimedean_places(QQ)[0]
lam = archimedean_local_height(P, place_inf, tol)
print(f"  lambda_inf      = {format_midrad(lam.value, 12)}")
for p in finite_support_primes(P):
    for place in prime_splitting(QQ, p):
        lv = finite_local_height(P, place)
        print(f"  lambda_{p:<3}     = {lv.logp_coefficient} * log {p}")

print("\nquadratic-form laws:")
h1 = hd.value
for n in (2, 3, 5):
    hn = canonical_height_doubling(E, scalar_mul(n, P), tol).value
    print(f"  hhat({n}P) == {n}^2 hhat(P): {hn.overlaps(h1.mul(n * n))}")
res = parallelogram_residual(E, P, scalar_mul(2, P), tol)
print(f"  parallelogram residual contains 0: {res.contains_zero()} "
      f"({format_midrad(res, 3)})")
