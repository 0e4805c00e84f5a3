"""Residue rings of imaginary quadratic maximal orders and the scalar-gap
search.

For a class-number-one discriminant D < 0 the maximal order is Z[w] with

    w = (D + sqrt(D))/2          (D = 1 mod 4):  trace D,  norm (D^2 - D)/4
    w = sqrt(D)/2 = sqrt(D/4)    (D = 0 mod 4):  trace 0,  norm -D/4

The unit group C(q') of Z[w]/q' embeds into GL2(Z/q') through the regular
representation on the basis (1, w); scalars embed as g * Id.  Given a
subgroup G of C(q') (supplied by generators: it simulates a Galois image,
which this package deliberately does not compute), the homothety subgroup
H <= (Z/q')^* consists of the scalars landing in G, and the gap search
returns integer representatives g1 < g2 of classes in H with
2 < g2 - g1 < 36 d + 6, searching representatives in [1, q' + 36 d + 6).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .numberfields import euler_phi, kronecker_symbol


class GaloisError(ValueError):
    pass


@dataclass(frozen=True)
class CMOrder:
    disc: int          # field discriminant, < 0, = 0 or 1 mod 4
    trace: int         # trace of the basis generator w
    norm: int          # norm of w

    @staticmethod
    def from_discriminant(D: int) -> "CMOrder":
        if D >= 0 or D % 4 not in (0, 1):
            raise GaloisError(f"not an imaginary quadratic discriminant: {D}")
        if D % 4 == 1:
            order = CMOrder(D, D, (D * D - D) // 4)
        else:
            order = CMOrder(D, 0, -D // 4)
        # trace/norm identity: w^2 - trace*w + norm = 0 encodes the
        # multiplication table w^2 = trace*w - norm; sanity-check integrality
        assert order.norm > 0 and isinstance(order.norm, int)
        return order

    def splitting_type(self, p: int) -> str:
        sym = kronecker_symbol(self.disc, p)
        return {1: "split", -1: "inert", 0: "ramified"}[sym]


def _prime_power(q: int):
    if q < 2:
        return None
    p = 2
    n = q
    while p * p <= n:
        if n % p == 0:
            ell = 0
            while n % p == 0:
                n //= p
                ell += 1
            return (p, ell) if n == 1 else None
        p += 1
    return (n, 1)


def unit_count_formula(order: CMOrder, p: int, ell: int) -> int:
    """|(O/p^ell O)^*| by splitting type."""
    kind = order.splitting_type(p)
    if kind == "split":
        return (p ** (ell - 1) * (p - 1)) ** 2
    if kind == "inert":
        return p ** (2 * ell - 2) * (p * p - 1)
    return p ** (2 * ell - 1) * (p - 1)


@dataclass(frozen=True)
class ResidueUnitGroup:
    order: CMOrder
    modulus: int
    elements: frozenset          # pairs (a, b) with a + b*w invertible
    generators: tuple

    @property
    def size(self) -> int:
        return len(self.elements)

    def norm_form(self, a: int, b: int) -> int:
        return (a * a + a * b * self.order.trace + b * b * self.order.norm) % self.modulus

    def mul(self, x, y):
        a, b = x
        c, d = y
        q = self.modulus
        # (a + b w)(c + d w) with w^2 = trace*w - norm
        cross = a * d + b * c
        sq = b * d
        return ((a * c - sq * self.order.norm) % q,
                (cross + sq * self.order.trace) % q)

    def is_unit(self, a: int, b: int) -> bool:
        return gcd(self.norm_form(a, b), self.modulus) == 1

    def identity(self):
        return (1, 0)


def residue_unit_group(order: CMOrder, qprime: int) -> ResidueUnitGroup:
    """Enumerate C(q') = (O/q'O)^* and verify the closed-form count."""
    pp = _prime_power(qprime)
    if pp is None:
        raise GaloisError(f"{qprime} is not a prime power")
    if qprime > 2 ** 14:
        raise GaloisError(f"{qprime} exceeds the desk bound 2^14")
    p, ell = pp
    trace, norm = order.trace, order.norm
    elements = []
    for a in range(qprime):
        for b in range(qprime):
            if gcd((a * a + a * b * trace + b * b * norm) % qprime, qprime) == 1:
                elements.append((a, b))
    expected = unit_count_formula(order, p, ell)
    if len(elements) != expected:
        raise GaloisError(
            f"unit count {len(elements)} disagrees with the splitting formula {expected}")
    group = ResidueUnitGroup(order, qprime, frozenset(elements), ())
    gens = _greedy_generators(group, elements)
    return ResidueUnitGroup(order, qprime, frozenset(elements), tuple(gens))


def _greedy_generators(group: ResidueUnitGroup, elements):
    generated = {group.identity()}
    gens = []
    for el in elements:
        if el in generated:
            continue
        gens.append(el)
        generated = _extend_abelian(group, generated, el)
        if len(generated) == len(elements):
            break
    return gens


def _extend_abelian(group: ResidueUnitGroup, subgroup: set, g) -> set:
    """<subgroup, g> for abelian groups: union of cosets subgroup * g^k."""
    out = set(subgroup)
    power = g
    while power not in out:
        out.update(group.mul(x, power) for x in subgroup)
        power = group.mul(power, g)
    return out


def _closure(group: ResidueUnitGroup, seed):
    out = set(seed)
    out.add(group.identity())
    frontier = list(out)
    while frontier:
        nxt = []
        for x in frontier:
            for g in seed:
                y = group.mul(x, g)
                if y not in out:
                    out.add(y)
                    nxt.append(y)
        frontier = nxt
    return out


def subgroup_from_generators(group: ResidueUnitGroup, gens) -> frozenset:
    """Closure of the given unit elements (simulating a Galois image)."""
    for g in gens:
        if not group.is_unit(*g):
            raise GaloisError(f"{g} is not a unit in the residue ring")
    return frozenset(_closure(group, set(tuple(g) for g in gens)))


def gl2_embedding(order: CMOrder, qprime: int, element) -> tuple:
    """Regular-representation matrix of a + b*w on the basis (1, w), mod q'.

    Columns are the images of 1 and w: ((a, -b*norm), (b, a + b*trace)),
    returned row-major: ((a, -b norm), (b, a + b trace)).
    """
    a, b = element
    ring = CMOrder.from_discriminant(order.disc)
    nf = (a * a + a * b * ring.trace + b * b * ring.norm) % qprime
    if gcd(nf, qprime) != 1:
        raise GaloisError("element is not a unit")
    return ((a % qprime, (-b * ring.norm) % qprime),
            (b % qprime, (a + b * ring.trace) % qprime))


def matrix_det(m: tuple, qprime: int) -> int:
    return (m[0][0] * m[1][1] - m[0][1] * m[1][0]) % qprime


@dataclass(frozen=True)
class HomothetySubgroup:
    modulus: int
    members: frozenset           # subset of (Z/q')^*
    index: int

    def __contains__(self, g: int):
        return g % self.modulus in self.members


@dataclass(frozen=True)
class ScalarPair:
    g1: int
    g2: int

    @property
    def gap(self) -> int:
        return self.g2 - self.g1


def homothety_subgroup(group: ResidueUnitGroup, G: frozenset) -> HomothetySubgroup:
    """H = {g in (Z/q')^* : g * Id in G} for a verified subgroup G of C(q').

    Closedness is verified by regenerating G from greedily-chosen elements:
    the closure of any subset of a closed G stays inside G, and reaching all
    of G proves it is exactly the generated subgroup.
    """
    if group.identity() not in G:
        raise GaloisError("G is not closed under multiplication")
    generated = {group.identity()}
    for el in sorted(G):
        if el not in generated:
            generated = _extend_abelian(group, generated, el)
            if not generated <= G:
                raise GaloisError("G is not closed under multiplication")
    if len(generated) != len(G):
        raise GaloisError("G is not closed under multiplication")
    q = group.modulus
    members = frozenset(a for (a, b) in G if b == 0)
    phi = euler_phi(q)
    if phi % len(members) != 0:
        raise GaloisError("homothety part is not a subgroup")
    # closure of the scalar part is automatic: scalars multiply to scalars
    return HomothetySubgroup(q, members, phi // len(members))


def full_homothety_group(qprime: int) -> HomothetySubgroup:
    members = frozenset(a for a in range(1, qprime) if gcd(a, qprime) == 1)
    return HomothetySubgroup(qprime, members, 1)


def homothety_from_members(qprime: int, members) -> HomothetySubgroup:
    members = frozenset(m % qprime for m in members)
    for x in members:
        for y in members:
            if (x * y) % qprime not in members:
                raise GaloisError("member set is not multiplicatively closed")
    phi = euler_phi(qprime)
    return HomothetySubgroup(qprime, members, phi // len(members))


def scalar_gap_search(H: HomothetySubgroup, d: int) -> ScalarPair:
    """Integer representatives g1 < g2 of classes in H with 2 < gap < 36d + 6.

    Requires index(H) <= 6d; the search over representatives in
    [1, q' + 36d + 6) is exhaustive, so a miss is a hard error (it would
    falsify the bounded-gap property this module encodes).
    """
    if d < 1:
        raise GaloisError("d must be >= 1")
    if H.index > 6 * d:
        raise GaloisError(
            f"index {H.index} exceeds the admissible bound {6 * d}")
    limit = H.modulus + 36 * d + 6
    reps = [g for g in range(1, limit) if g % H.modulus in H.members]
    rep_set = set(reps)
    for g1 in reps:
        for g2 in range(g1 + 3, min(g1 + 36 * d + 6, limit)):
            if g2 in rep_set:
                return ScalarPair(g1, g2)
    raise GaloisError("no admissible scalar pair found (property violated)")


def index_bound_audit(C: ResidueUnitGroup, G: frozenset, dF: int) -> bool:
    """Whether [C : G] <= 3 * dF (the explicit image-index bound)."""
    if not G <= C.elements:
        raise GaloisError("G is not a subset of C")
    return C.size <= 3 * dF * len(G)


def all_unit_subgroups(qprime: int) -> list[frozenset]:
    """Every subgroup of (Z/q')^*, via closures of <= 2 generators.

    The unit group mod a prime power needs at most two generators, and every
    subgroup of a 2-generated finite abelian group is itself 2-generated.
    """
    units = [a for a in range(1, qprime) if gcd(a, qprime) == 1]
    seen = set()
    out = []

    def closure(gens):
        group = {1}
        frontier = [1]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = x * g % qprime
                    if y not in group:
                        group.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(group)

    for g in units:
        c = closure((g,))
        if c not in seen:
            seen.add(c)
            out.append(c)
    cyclics = list(out)
    for c in cyclics:
        for g in units:
            cc = closure(tuple(c) + (g,))
            if cc not in seen:
                seen.add(cc)
                out.append(cc)
    return out


CLASS_NUMBER_ONE_DISCRIMINANTS = (-3, -4, -7, -8, -11, -19, -43, -67, -163)


@dataclass(frozen=True)
class GaloisTableRow:
    disc: int
    qprime: int
    unit_count: int
    splitting: str
    pair: ScalarPair


def galois_table_row(disc: int, qprime: int, gens=None, d: int = 1) -> GaloisTableRow:
    """CLI-facing summary row for one (D_K, q')."""
    order = CMOrder.from_discriminant(disc)
    C = residue_unit_group(order, qprime)
    if gens:
        G = subgroup_from_generators(C, gens)
    else:
        G = C.elements
    H = homothety_subgroup(C, G)
    pair = scalar_gap_search(H, d)
    p = _prime_power(qprime)[0]
    return GaloisTableRow(disc, qprime, C.size, order.splitting_type(p), pair)
