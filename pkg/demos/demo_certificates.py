"""Certify points against the explicit uniform lower bound.

For each of the 13 rational CM j-invariants we take the registry curve,
sample a few points over Q and quadratic extensions, and emit the verdict
of the bound certificate: non-torsion points sit (far) above the bound,
points below it must be confirmed torsion by the height-free oracle.
"""

from fractions import Fraction

from cmheights import certify_point, cm_sample_curves
from cmheights.sampling import ExperimentConfig, sample_points

config = ExperimentConfig(curves=("cm13",), num_bound=4, den_bound=1)

for E in cm_sample_curves():
    j = E.j.rational_value()
    pts = sample_points(E, config)[:4]
    print(f"j = {j}")
    for P in pts:
        cert = certify_point(E, P, tolerance=Fraction(1, 10 ** 6),
                             include_chain=False)
        hh = float(cert.hhat.value.midpoint)
        print(f"  x = {P.x.serialize():>8} over {cert.field:<12} "
              f"hhat = {hh:10.6f}  bound = {float(cert.main.midpoint):8.2e}  "
              f"-> {cert.verdict}")
