"""Residue unit groups of imaginary quadratic orders and the scalar gap.

For each class-number-one discriminant and a few prime powers q', we
enumerate C(q') = (O/q'O)^*, extract the homothety subgroup of a simulated
Galois image, and exhibit integer scalars g1 < g2 in it with a gap pinched
between 2 and 36 d + 6.
"""

from cmheights.galois import (
    CLASS_NUMBER_ONE_DISCRIMINANTS,
    CMOrder,
    galois_table_row,
    homothety_subgroup,
    residue_unit_group,
    scalar_gap_search,
    subgroup_from_generators,
)

print(f"{'D_K':>5} {'q_prime':>7} {'|C|':>6} {'split':>9}   scalar pair (gap)")
for disc in CLASS_NUMBER_ONE_DISCRIMINANTS[:6]:
    for q in (3, 5, 8, 13):
        row = galois_table_row(disc, q)
        print(f"{row.disc:>5} {row.qprime:>7} {row.unit_count:>6} "
              f"{row.splitting:>9}   ({row.pair.g1}, {row.pair.g2}) "
              f"(gap {row.pair.gap})")

print("\nproper image simulation: G = <omega> inside C(5) for D = -4")
order = CMOrder.from_discriminant(-4)
C = residue_unit_group(order, 5)
G = subgroup_from_generators(C, [(0, 1)])
H = homothety_subgroup(C, G)
pair = scalar_gap_search(H, 1)
print(f"|C| = {C.size}, |G| = {len(G)}, homothety part = {sorted(H.members)}, "
      f"index {H.index}; pair ({pair.g1}, {pair.g2})")
