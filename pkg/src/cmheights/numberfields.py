"""Exact arithmetic in Q, quadratic fields Q(sqrt D), and cyclotomic fields.

Scope is deliberately "desk scale": these three families realize every
abelian extension of Q we need (Kronecker-Weber), their prime splitting has
closed-form rules, and no ring-of-integers machinery is required.

Field descriptor grammar (External Interfaces):

    "Q"            the rationals
    "Q(sqrt,D)"    quadratic field, D squarefree, D not in {0, 1}
    "Q(zeta,n)"    cyclotomic field of conductor n, 3 <= n <= 64

Elements serialize as comma-separated rational coordinates in the power
basis of the defining polynomial (x, x^2 - D, or the n-th cyclotomic
polynomial respectively).

Valuation normalization (used consistently by the height modules):
``finite_valuation`` returns ord_v with ord_v(uniformizer) = 1, so
ord_v(p) = e(v/p).  The normalized absolute value at v is
|a|_v = p^(-ord_v(a)/e), and with the local-degree weights
d_v = [L_v:Q_v]/[L:Q] the product formula  sum_v d_v log|a|_v = 0  holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from .intervals import ComplexBall, RealInterval
from .polynomials import IntPoly, RatPoly
from .roots import isolate_complex_roots


# ---------------------------------------------------------------------------
# elementary number theory helpers
# ---------------------------------------------------------------------------

def is_squarefree_int(n: int) -> bool:
    n = abs(n)
    if n == 0:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        while n % d == 0:
            n //= d
        d += 1
    return True


def euler_phi(n: int) -> int:
    result = n
    m = n
    d = 2
    while d * d <= m:
        if m % d == 0:
            result -= result // d
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        result -= result // m
    return result


def prime_factors(n: int) -> list[int]:
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_prime(n: int) -> bool:
    import gmpy2

    return n >= 2 and gmpy2.is_prime(n, 40)


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for n >= 1."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def sqrt_mod_prime(a: int, p: int) -> int:
    """Tonelli-Shanks square root of a mod p; a must be a QR mod odd prime p."""
    a %= p
    if a == 0:
        return 0
    if p == 2:
        return a
    assert pow(a, (p - 1) // 2, p) == 1, "not a quadratic residue"
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2 = t
        i = 0
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


def hensel_lift_root(poly_coeffs, root: int, p: int, target_k: int) -> int:
    """Lift a simple root of an integer polynomial from mod p to mod p^target_k."""
    pk = p
    r = root % p
    dcoeffs = [i * c for i, c in enumerate(poly_coeffs)][1:]

    def ev(cs, x, mod):
        acc = 0
        for c in reversed(cs):
            acc = (acc * x + c) % mod
        return acc

    while pk < p ** target_k:
        pk = min(pk * pk, p ** target_k)
        f = ev(poly_coeffs, r, pk)
        fp = ev(dcoeffs, r, pk)
        inv = pow(fp, -1, pk)
        r = (r - f * inv) % pk
    return r


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> IntPoly:
    if n == 1:
        return IntPoly([-1, 1])
    num = IntPoly([-1] + [0] * (n - 1) + [1])  # x^n - 1
    den = RatPoly([1])
    for d in range(1, n):
        if n % d == 0:
            den = den * cyclotomic_polynomial(d).to_rat()
    q, r = num.to_rat().divmod(den)
    assert r.is_zero()
    return q.clear_denominators()


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

class FieldError(ValueError):
    pass


class NumberField:
    """One of Q, Q(sqrt D), Q(zeta_n), with verified invariants."""

    __slots__ = ("kind", "param", "poly", "degree", "discriminant", "_roots_cache")

    def __init__(self, kind: str, param: int | None):
        if kind == "rational":
            poly, degree, disc = IntPoly([0, 1]), 1, 1
        elif kind == "quadratic":
            D = param
            if D in (0, 1) or not is_squarefree_int(D):
                raise FieldError(f"quadratic parameter must be squarefree, not 0/1: {D}")
            poly, degree = IntPoly([-D, 0, 1]), 2
            disc = D if D % 4 == 1 else 4 * D
        elif kind == "cyclotomic":
            n = param
            if not (3 <= n <= 64):
                raise FieldError(f"cyclotomic conductor out of range [3, 64]: {n}")
            poly = cyclotomic_polynomial(n)
            degree = euler_phi(n)
            disc = self._cyclotomic_discriminant(n, degree)
        else:
            raise FieldError(f"unknown field kind: {kind}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "param", param)
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "discriminant", disc)
        object.__setattr__(self, "_roots_cache", {})

    @staticmethod
    def _cyclotomic_discriminant(n: int, deg: int) -> int:
        num = n ** deg
        den = 1
        for p in prime_factors(n):
            den *= p ** (deg // (p - 1))
        sign = -1 if deg % 4 == 2 else 1  # (-1)^(phi(n)/2), phi(n) even for n >= 3
        return sign * (num // den)

    def __setattr__(self, *a):
        raise AttributeError("NumberField is immutable")

    def __getstate__(self):
        return {name: getattr(self, name) for name in self.__slots__}

    def __setstate__(self, state):
        for name, value in state.items():
            object.__setattr__(self, name, value)

    def __eq__(self, other):
        return (isinstance(other, NumberField) and self.kind == other.kind
                and self.param == other.param)

    def __hash__(self):
        return hash((self.kind, self.param))

    def __repr__(self):
        return f"NumberField({self.descriptor()})"

    def descriptor(self) -> str:
        if self.kind == "rational":
            return "Q"
        if self.kind == "quadratic":
            return f"Q(sqrt,{self.param})"
        return f"Q(zeta,{self.param})"

    # -- elements ---------------------------------------------------------

    def zero(self):
        return NFElement(self, (Fraction(0),) * self.degree)

    def one(self):
        return self.from_rational(1)

    def from_rational(self, q) -> "NFElement":
        coords = [Fraction(q)] + [Fraction(0)] * (self.degree - 1)
        return NFElement(self, tuple(coords))

    def generator(self) -> "NFElement":
        if self.degree == 1:
            return self.from_rational(0)  # the root of x
        coords = [Fraction(0)] * self.degree
        coords[1] = Fraction(1)
        return NFElement(self, tuple(coords))

    def element(self, coords) -> "NFElement":
        coords = tuple(Fraction(c) for c in coords)
        if len(coords) != self.degree:
            raise FieldError(
                f"coordinate length {len(coords)} != degree {self.degree}")
        return NFElement(self, coords)

    def element_from_string(self, text: str) -> "NFElement":
        return self.element([Fraction(part.strip()) for part in text.split(",")])

    # -- embeddings ---------------------------------------------------------

    def defining_roots(self, prec: int) -> list[ComplexBall]:
        """Isolated roots of the defining polynomial, in a stable order.

        Embedding index i refers to the i-th entry of this list; the order
        sorts by (real part, imaginary part) of the ball midpoints, which is
        stable under refinement since the roots are simple and separated.
        """
        cached = self._roots_cache.get("roots")
        if cached is not None and cached[0] >= prec:
            return cached[1]
        radius = Fraction(1, 2 ** (prec + 8))
        balls = isolate_complex_roots(self.poly, radius)
        balls.sort(key=lambda b: (float(b.re.midpoint), float(b.im.midpoint)))
        self._roots_cache["roots"] = (prec, balls)
        return balls


@lru_cache(maxsize=None)
def make_field(spec: str) -> NumberField:
    """Parse a field descriptor ("Q" | "Q(sqrt,D)" | "Q(zeta,n)").

    Instances are cached (they are immutable and share their embedding-root
    caches), so repeated lookups of the same field are free.
    """
    text = spec.strip().replace(" ", "")
    if text == "Q":
        return NumberField("rational", None)
    if text.startswith("Q(") and text.endswith(")"):
        inner = text[2:-1]
        parts = inner.split(",")
        if len(parts) == 2 and parts[0] == "sqrt":
            return NumberField("quadratic", int(parts[1]))
        if len(parts) == 2 and parts[0] == "zeta":
            return NumberField("cyclotomic", int(parts[1]))
    raise FieldError(f"unparseable field descriptor: {spec!r}")


QQ = NumberField("rational", None)


class NFElement:
    """Element of a NumberField in power-basis coordinates."""

    __slots__ = ("field", "coords")

    def __init__(self, field: NumberField, coords):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "coords", tuple(Fraction(c) for c in coords))
        if len(self.coords) != field.degree:
            raise FieldError("coordinate length mismatch")

    def __setattr__(self, *a):
        raise AttributeError("NFElement is immutable")

    def __getstate__(self):
        return {name: getattr(self, name) for name in self.__slots__}

    def __setstate__(self, state):
        for name, value in state.items():
            object.__setattr__(self, name, value)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self == self.field.from_rational(other)
        return (isinstance(other, NFElement) and self.field == other.field
                and self.coords == other.coords)

    def __hash__(self):
        return hash((self.field, self.coords))

    def __repr__(self):
        return f"NF({self.field.descriptor()}; {self.serialize()})"

    def serialize(self) -> str:
        return ",".join(str(c) for c in self.coords)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coords[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise FieldError("element is not rational")
        return self.coords[0]

    def _coerce(self, other) -> "NFElement":
        if isinstance(other, NFElement):
            if other.field != self.field:
                raise FieldError("elements from different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.from_rational(other)
        raise TypeError(f"cannot coerce {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        return NFElement(self.field,
                         tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return NFElement(self.field,
                         tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return NFElement(self.field, tuple(-c for c in self.coords))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return NFElement(self.field, tuple(c * other for c in self.coords))
        other = self._coerce(other)
        prod = RatPoly(self.coords) * RatPoly(other.coords)
        _, rem = prod.divmod(self.field.poly.to_rat())
        coords = list(rem.coeffs) + [Fraction(0)] * (self.field.degree - len(rem.coeffs))
        return NFElement(self.field, tuple(coords[: self.field.degree]))

    __rmul__ = __mul__

    def inverse(self) -> "NFElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        # extended Euclid: u * self + v * defpoly = 1 in Q[x]
        r0, r1 = self.field.poly.to_rat(), RatPoly(self.coords)
        s0, s1 = RatPoly([]), RatPoly([1])
        while r1.degree > 0:
            q, r = r0.divmod(r1)
            r0, r1 = r1, r
            s0, s1 = s1, s0 - q * s1
        if r1.is_zero():
            raise FieldError("defining polynomial not irreducible?")
        inv = s1 * (1 / r1.coeffs[0])
        _, rem = inv.divmod(self.field.poly.to_rat())
        coords = list(rem.coeffs) + [Fraction(0)] * (self.field.degree - len(rem.coeffs))
        return NFElement(self.field, tuple(coords[: self.field.degree]))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self * (Fraction(1) / Fraction(other))
        other = self._coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def conjugate(self) -> "NFElement":
        """Nontrivial Galois conjugate (quadratic fields only)."""
        if self.field.kind == "rational":
            return self
        if self.field.kind != "quadratic":
            raise FieldError("conjugate implemented for degree <= 2 fields")
        a, b = self.coords
        return NFElement(self.field, (a, -b))

    def galois_conjugates(self) -> list["NFElement"]:
        """All Galois conjugates inside the same (abelian) field."""
        if self.field.kind == "rational":
            return [self]
        if self.field.kind == "quadratic":
            return [self, self.conjugate()]
        n = self.field.param
        out = []
        for k in range(1, n):
            if gcd(k, n) == 1:
                out.append(self.galois_map(k))
        return out

    def galois_map(self, k: int) -> "NFElement":
        """The automorphism zeta -> zeta^k of a cyclotomic field."""
        if self.field.kind != "cyclotomic":
            raise FieldError("galois_map is for cyclotomic fields")
        n = self.field.param
        if gcd(k, n) != 1:
            raise FieldError("k must be invertible mod the conductor")
        # zeta^j -> zeta^(k j) computed in Q[x]/(Phi_n) via x^(k j) mod Phi_n
        acc = RatPoly([])
        for j, c in enumerate(self.coords):
            if c:
                power = pow_x_mod(self.field.poly, k * j)
                acc = acc + power * c
        coords = list(acc.coeffs) + [Fraction(0)] * (self.field.degree - len(acc.coeffs))
        return NFElement(self.field, tuple(coords[: self.field.degree]))

    def norm(self) -> Fraction:
        if self.field.kind == "rational":
            return self.coords[0]
        if self.field.kind == "quadratic":
            a, b = self.coords
            return a * a - self.field.param * b * b
        prod = self.field.one()
        for conj in self.galois_conjugates():
            prod = prod * conj
        return prod.rational_value()

    def trace(self) -> Fraction:
        if self.field.kind == "rational":
            return self.coords[0]
        if self.field.kind == "quadratic":
            return 2 * self.coords[0]
        total = self.field.zero()
        for conj in self.galois_conjugates():
            total = total + conj
        return total.rational_value()

    def denominator(self) -> int:
        d = 1
        for c in self.coords:
            d = d * c.denominator // gcd(d, c.denominator)
        return d


@lru_cache(maxsize=None)
def _pow_x_mod_cached(poly: IntPoly, k: int) -> RatPoly:
    base = RatPoly([0, 1])
    result = RatPoly([1])
    e = k
    acc = base
    while e:
        if e & 1:
            result = (result * acc).divmod(poly.to_rat())[1]
        acc = (acc * acc).divmod(poly.to_rat())[1]
        e >>= 1
    return result


def pow_x_mod(poly: IntPoly, k: int) -> RatPoly:
    """x^k mod poly over Q."""
    return _pow_x_mod_cached(poly, k)


def nf_arith(a: NFElement, b: NFElement, op: str) -> NFElement:
    """Dispatch wrapper: op in {'add','sub','mul','div'}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# minimal polynomials and algebraic numbers
# ---------------------------------------------------------------------------

def minimal_polynomial(a: NFElement) -> IntPoly:
    """Primitive irreducible IntPoly vanishing at a (degree divides field degree).

    Found as the first linear dependency among 1, a, a^2, ...; for a field
    element this dependency is automatically irreducible, which realizes the
    resultant-then-irreducible-part contract directly.
    """
    d = a.field.degree
    # rows[k] = coordinates of a^k
    rows = [a.field.one().coords]
    power = a.field.one()
    for _ in range(d):
        power = power * a
        rows.append(power.coords)
        # test for dependency among rows via Gaussian elimination
        mat = [list(r) for r in rows]
        k = len(rows)
        # solve c_0 .. c_{k-1} with sum c_i a^i = 0, c_{k-1} = 1
        sol = _solve_dependency(mat)
        if sol is not None:
            return RatPoly(sol).clear_denominators()
    raise FieldError("no minimal polynomial found (broken field arithmetic)")


def _solve_dependency(rows):
    """If the last row is a rational combination of the previous rows, return
    the monic dependency coefficients (low-to-high); else None."""
    *prev, last = rows
    if not prev:
        return None
    n = len(last)
    m = len(prev)
    # solve prev^T * x = last
    aug = [[prev[j][i] for j in range(m)] + [last[i]] for i in range(n)]
    piv_cols = []
    r = 0
    for c in range(m):
        pivot = None
        for i in range(r, n):
            if aug[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        pv = aug[r][c]
        aug[r] = [x / pv for x in aug[r]]
        for i in range(n):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
    # check consistency
    for i in range(r, n):
        if aug[i][m] != 0:
            return None
    x = [Fraction(0)] * m
    for row_idx, c in enumerate(piv_cols):
        x[c] = aug[row_idx][m]
    # dependency: -x_0 - x_1 a - ... + a^m = 0
    return [-xi for xi in x] + [Fraction(1)]


class AlgebraicNumber:
    """Exact algebraic number: primitive integer minimal polynomial plus an
    isolating complex ball selecting one root."""

    __slots__ = ("minpoly", "ball")

    def __init__(self, minpoly: IntPoly, ball: ComplexBall, verify: bool = True):
        minpoly = minpoly.primitive()
        if verify:
            # refine root boxes until each is inside the ball or disjoint from it
            radius = _ball_radius_fraction(ball)
            ok = False
            for _ in range(4):
                boxes = isolate_complex_roots(minpoly, radius)
                contained = [b for b in boxes if ball.contains(b)]
                touching = [b for b in boxes
                            if ball.re.overlaps(b.re) and ball.im.overlaps(b.im)]
                if len(contained) == 1 and len(touching) == 1:
                    ok = True
                    break
                radius /= 2 ** 8
            if not ok:
                raise ValueError("isolating ball does not select exactly one root")
        object.__setattr__(self, "minpoly", minpoly)
        object.__setattr__(self, "ball", ball)

    def __setattr__(self, *a):
        raise AttributeError("AlgebraicNumber is immutable")

    def __getstate__(self):
        return {name: getattr(self, name) for name in self.__slots__}

    def __setstate__(self, state):
        for name, value in state.items():
            object.__setattr__(self, name, value)

    @property
    def degree(self):
        return self.minpoly.degree

    @staticmethod
    def from_nf_element(a: NFElement, embedding_index: int = 0,
                        prec: int = 128) -> "AlgebraicNumber":
        mp = minimal_polynomial(a)
        roots = a.field.defining_roots(prec)
        gen_ball = roots[embedding_index]
        image = eval_ball_coords(a.coords, gen_ball, prec)
        return AlgebraicNumber(mp, image, verify=True)

    def __repr__(self):
        return f"AlgebraicNumber(deg {self.degree})"


def _ball_radius_fraction(ball: ComplexBall) -> Fraction:
    import gmpy2

    r = max(ball.re.radius, ball.im.radius)
    q = gmpy2.mpq(r)
    frac = Fraction(int(q.numerator), int(q.denominator))
    return max(frac / 4, Fraction(1, 2 ** 256)) if frac > 0 else Fraction(1, 2 ** 256)


def eval_ball_coords(coords, gen_ball: ComplexBall, prec: int) -> ComplexBall:
    acc = ComplexBall.exact(0, 0, prec)
    for c in reversed(coords):
        acc = acc.mul(gen_ball, prec).add(ComplexBall.exact(c, 0, prec), prec)
    return acc


# ---------------------------------------------------------------------------
# places
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlaceData:
    """A place of a number field with its local-degree weight.

    archimedean places: `embedding_index` refers to NumberField.defining_roots
    order; `is_real` distinguishes real embeddings from conjugate pairs.
    finite places: residue characteristic p, ramification index e, residue
    degree f, plus an index separating places above the same p.
    """

    field: NumberField
    archimedean: bool
    d_v: Fraction
    embedding_index: int = 0
    is_real: bool = True
    p: int = 0
    e: int = 1
    f: int = 1
    index: int = 0

    def residue_cardinality(self) -> int:
        if self.archimedean:
            raise ValueError("archimedean place has no residue field")
        return self.p ** self.f

    def __repr__(self):
        if self.archimedean:
            tag = "real" if self.is_real else "complex"
            return f"Place(inf_{self.embedding_index}:{tag})"
        return f"Place({self.p}; e={self.e}, f={self.f}, #{self.index})"


def archimedean_places(K: NumberField) -> list[PlaceData]:
    if K.kind == "rational":
        return [PlaceData(K, True, Fraction(1), 0, True)]
    if K.kind == "quadratic":
        if K.param > 0:
            return [PlaceData(K, True, Fraction(1, 2), i, True) for i in range(2)]
        return [PlaceData(K, True, Fraction(1), 0, False)]
    deg = K.degree
    # roots come in conjugate pairs; pick the representatives with im > 0
    places = []
    roots = K.defining_roots(64)
    idx = 0
    for i, b in enumerate(roots):
        if float(b.im.midpoint) > 0:
            places.append(PlaceData(K, True, Fraction(2, deg), i, False, index=idx))
            idx += 1
    assert len(places) == deg // 2
    return places


def prime_splitting(K: NumberField, p: int) -> list[PlaceData]:
    """Closed-form splitting of a rational prime in the supported fields."""
    if not is_prime(p):
        raise FieldError(f"composite modulus {p}")
    if K.kind == "rational":
        return [PlaceData(K, False, Fraction(1), p=p, e=1, f=1, index=0)]
    if K.kind == "quadratic":
        symbol = kronecker_symbol(K.discriminant, p)
        if symbol == 0:
            return [PlaceData(K, False, Fraction(1), p=p, e=2, f=1, index=0)]
        if symbol == 1:
            return [PlaceData(K, False, Fraction(1, 2), p=p, e=1, f=1, index=i)
                    for i in range(2)]
        return [PlaceData(K, False, Fraction(1), p=p, e=1, f=2, index=0)]
    n = K.param
    deg = K.degree
    a = 0
    m = n
    while m % p == 0:
        m //= p
        a += 1
    e = euler_phi(p ** a) if a else 1
    f = 1
    if m > 1:
        f = 1
        pk = p % m
        while pk != 1:
            pk = pk * p % m
            f += 1
    g = euler_phi(m) // f
    d_v = Fraction(e * f, deg)
    return [PlaceData(K, False, d_v, p=p, e=e, f=f, index=i) for i in range(g)]


def finite_valuation(a: NFElement, place: PlaceData) -> Fraction:
    """ord_v(a), normalized with ord_v(uniformizer) = 1 (so ord_v(p) = e)."""
    if place.archimedean:
        raise FieldError("finite_valuation needs a finite place")
    if a.is_zero():
        raise ZeroDivisionError("valuation of zero")
    K = a.field
    p = place.p
    if K.kind == "rational":
        return Fraction(_vp_fraction(a.coords[0], p))
    if K.kind != "quadratic":
        raise FieldError("valuations implemented for degree <= 2 fields only")
    u, w = a.coords
    if place.e == 2:  # ramified: ord_v = v_p(Norm)
        return Fraction(_vp_fraction(a.norm(), p))
    if place.f == 2:  # inert: min of coordinate valuations in a local basis
        if p == 2 and K.discriminant % 2 == 1:
            # local basis (1, omega), omega = (1+sqrt D)/2: a+b sqrt D = (a-b) + 2b omega
            c0, c1 = u - w, 2 * w
        else:
            c0, c1 = u, w
        if c0 == 0:
            return Fraction(_vp_fraction(c1, p))
        if c1 == 0:
            return Fraction(_vp_fraction(c0, p))
        return Fraction(min(_vp_fraction(c0, p), _vp_fraction(c1, p)))
    # split place: image under the selected local root of the defining polynomial
    den = a.denominator()
    b0, b1 = int(u * den), int(w * den)  # integral coordinates of den * a
    shift = _vp_fraction(Fraction(den), p)
    nrm = b0 * b0 - K.param * b1 * b1
    # ord_v(den*a) <= v_p(Norm(den*a)) < bound, so the lifted root determines it
    bound = _vp_int(nrm, p) + 2
    root = _split_root(K, p, bound, place.index)
    val = b0 + b1 * root
    assert val != 0, "split-place image cannot vanish for squarefree D"
    return Fraction(min(_vp_int(val, p), bound - 1)) - shift


@lru_cache(maxsize=None)
def _split_root(K: NumberField, p: int, k: int, index: int) -> int:
    """Lift of a root of x^2 - D mod p^k; index 0/1 selects the place."""
    D = K.param
    if p == 2:
        # split at 2 requires D = 1 mod 8; lift a root of x^2 - x + (1-D)/4,
        # then convert: sqrt D = 2 omega - 1
        c = (1 - D) // 4
        r0 = 0 if c % 2 == 0 else 1
        om = hensel_lift_root([c, -1, 1], r0, 2, k + 2)
        root = (2 * om - 1) % 2 ** (k + 1)
        root %= 2 ** k
    else:
        r0 = sqrt_mod_prime(D % p, p)
        root = hensel_lift_root([-D, 0, 1], r0, p, k)
    return root if index == 0 else (-root) % p ** k


def _vp_int(n: int, p: int) -> int:
    if n == 0:
        raise ZeroDivisionError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _vp_fraction(q: Fraction, p: int) -> int:
    q = Fraction(q)
    return _vp_int(q.numerator, p) - _vp_int(q.denominator, p)


def quadratic_sqrt(a: NFElement):
    """A square root of `a` inside its own (rational or quadratic) field,
    or None when no such element exists.  Exact."""
    from math import isqrt

    def _rat_sqrt(q: Fraction):
        if q < 0:
            return None
        rn, rd = isqrt(q.numerator), isqrt(q.denominator)
        if rn * rn == q.numerator and rd * rd == q.denominator:
            return Fraction(rn, rd)
        return None

    K = a.field
    if K.kind == "rational":
        r = _rat_sqrt(a.coords[0])
        return None if r is None else K.from_rational(r)
    if K.kind != "quadratic":
        raise FieldError("quadratic_sqrt implemented for degree <= 2 fields")
    A, B = a.coords
    c = K.param
    if B == 0:
        r = _rat_sqrt(A)
        if r is not None:
            return K.from_rational(r)
        r = _rat_sqrt(A / c)
        if r is not None:
            return K.element([0, r])
        return None
    # (s + t sqrt c)^2 = A + B sqrt c:  s^2 + c t^2 = A, 2 s t = B
    disc = A * A - c * B * B          # norm of a; must be a rational square
    root = _rat_sqrt(disc)
    if root is None:
        return None
    for sign in (1, -1):
        t_sq = (A + sign * root) / (2 * c)
        t = _rat_sqrt(t_sq)
        if t is not None and t != 0:
            s = B / (2 * t)
            cand = K.element([s, t])
            if cand * cand == a:
                return cand
    return None


def embed(a: NFElement, place: PlaceData, prec: int = 64) -> ComplexBall:
    """Certified enclosure of the image of `a` under the place's embedding."""
    if not place.archimedean:
        raise FieldError("embed needs an archimedean place")
    K = a.field
    if K.kind == "rational":
        return ComplexBall(RealInterval.exact(a.coords[0], prec), RealInterval.zero())
    roots = K.defining_roots(prec)
    gen = roots[place.embedding_index]
    return eval_ball_coords(a.coords, gen, prec)


def log_abs_v(a: NFElement, place: PlaceData, prec: int = 64) -> RealInterval:
    """log |a|_v in the normalization that satisfies the product formula."""
    if place.archimedean:
        ball = embed(a, place, prec)
        return ball.log_abs(prec)
    v = finite_valuation(a, place)
    logp = RealInterval.exact(place.p, prec).log(prec)
    return logp.mul(Fraction(-v, place.e), prec)
