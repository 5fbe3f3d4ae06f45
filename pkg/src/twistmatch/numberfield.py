"""Monogenic number fields Q[x]/(f), unramified prime splitting and field isomorphisms.

A prime over an unramified p is represented purely by the pair (p, g) with g a
monic irreducible factor of f mod p.  This is only valid when p does not divide
the polynomial discriminant, which is the only regime supported here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import isqrt
from typing import Iterable, Sequence

from .algebra import ExtField, ExtFieldElem, PolyModP, factor_mod_p, is_prime
from .errors import DenominatorNotCoprime, ExcludedPrime, UnsupportedDegree


def _poly_to_str(coeffs: Sequence, var: str = "x") -> str:
    terms = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if c == 0:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if mono and c == 1:
            s = mono
        elif mono and c == -1:
            s = "-" + mono
        elif mono:
            s = f"{c}*{mono}" if not isinstance(c, Fraction) or c.denominator == 1 else f"({c})*{mono}"
        else:
            s = str(c)
        terms.append(s)
    if not terms:
        return "0"
    return "+".join(terms).replace("+-", "-")


def parse_expression(text: str, names: Sequence[str]):
    """sympy expression from text allowing ^ for powers, θ for t, and implicit products like 2θ."""
    import sympy
    from sympy.parsing.sympy_parser import (
        convert_xor,
        implicit_multiplication_application,
        parse_expr,
        standard_transformations,
    )

    symbols = {n: sympy.Symbol(n) for n in names}
    transformations = standard_transformations + (implicit_multiplication_application, convert_xor)
    return parse_expr(text.replace("θ", " t "), local_dict=symbols, transformations=transformations)


def parse_rational_poly(text: str, var: str = "x") -> list[Fraction]:
    """Parse a univariate polynomial with rational coefficients, low degree first."""
    import sympy

    if var != "t":
        text = text.replace("θ", var)
    expr = parse_expression(text, [var])
    sym = sympy.Symbol(var)
    poly = sympy.Poly(expr, sym, domain="QQ")
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


@dataclass(frozen=True)
class NumberField:
    minpoly: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.minpoly)
        object.__setattr__(self, "minpoly", coeffs)
        if len(coeffs) < 2 or coeffs[-1] != 1:
            raise ValueError("minimal polynomial must be monic of degree >= 1")
        if not self._is_irreducible():
            raise ValueError(f"{self} is reducible over Q")

    def _is_irreducible(self) -> bool:
        if self.degree == 1:
            return True
        import sympy

        x = sympy.Symbol("x")
        return sympy.Poly(list(reversed(self.minpoly)), x, domain="ZZ").is_irreducible

    @classmethod
    def parse(cls, text: str) -> NumberField:
        coeffs = parse_rational_poly(text)
        if any(c.denominator != 1 for c in coeffs):
            raise ValueError("minimal polynomial must have integer coefficients")
        return cls(tuple(int(c) for c in coeffs))

    @property
    def degree(self) -> int:
        return len(self.minpoly) - 1

    @cached_property
    def discriminant(self) -> int:
        if self.degree == 1:
            return 1
        import sympy

        x = sympy.Symbol("x")
        return int(sympy.discriminant(sympy.Poly(list(reversed(self.minpoly)), x)))

    def __str__(self) -> str:
        return _poly_to_str(self.minpoly)

    def __repr__(self) -> str:
        return f"NumberField({self})"

    # -- elements --------------------------------------------------------
    def __call__(self, value) -> FieldElem:
        if isinstance(value, FieldElem):
            return value
        if isinstance(value, (int, Fraction)):
            return FieldElem(self, (Fraction(value),))
        if isinstance(value, str):
            return FieldElem(self, parse_rational_poly(value))
        return FieldElem(self, tuple(Fraction(c) for c in value))

    @property
    def theta(self) -> FieldElem:
        return FieldElem(self, (Fraction(0), Fraction(1)))

    def minpoly_mod(self, p: int) -> PolyModP:
        return PolyModP(self.minpoly, p)


def _reduce_mod_minpoly(coeffs: list[Fraction], minpoly: tuple[int, ...]) -> list[Fraction]:
    n = len(minpoly) - 1
    c = list(coeffs)
    for i in range(len(c) - 1, n - 1, -1):
        top = c[i]
        if top:
            for j in range(n):
                c[i - n + j] -= top * minpoly[j]
        c[i] = Fraction(0)
    c = c[:n] + [Fraction(0)] * (n - len(c[:n]))
    return c


@dataclass(frozen=True)
class FieldElem:
    field: NumberField
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        reduced = _reduce_mod_minpoly([Fraction(c) for c in self.coords], self.field.minpoly)
        object.__setattr__(self, "coords", tuple(reduced))

    def _other(self, other) -> FieldElem:
        if isinstance(other, FieldElem):
            if other.field != self.field:
                raise ValueError("field mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return FieldElem(self.field, tuple(a + b for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElem(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        prod = [Fraction(0)] * (2 * len(self.coords) - 1)
        for i, a in enumerate(self.coords):
            if a:
                for j, b in enumerate(o.coords):
                    prod[i + j] += a * b
        return FieldElem(self.field, tuple(prod))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> FieldElem:
        if e < 0:
            raise ValueError("negative powers are not supported")
        result = self.field(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.field(other)
        if not isinstance(other, FieldElem):
            return NotImplemented
        return self.field == other.field and self.coords == other.coords

    def __hash__(self) -> int:
        return hash((self.field, self.coords))

    def __str__(self) -> str:
        return _poly_to_str(self.coords, "θ")

    def __repr__(self) -> str:
        return f"FieldElem({self})"

    def is_rational(self) -> bool:
        return not any(self.coords[1:])

    def denominator(self) -> int:
        from math import lcm

        return lcm(*(c.denominator for c in self.coords))


@dataclass(frozen=True, order=False)
class PrimeIdeal:
    """The prime (p, g(θ)) of a monogenic field, for p not dividing the discriminant."""

    residue_char: int
    local_factor_poly: PolyModP

    @property
    def p(self) -> int:
        return self.residue_char

    @property
    def inertia(self) -> int:
        return self.local_factor_poly.degree

    f = inertia

    @property
    def norm(self) -> int:
        return self.residue_char**self.inertia

    @cached_property
    def residue_field(self) -> ExtField:
        return ExtField(self.local_factor_poly)

    def sort_key(self) -> tuple:
        return (self.residue_char, self.inertia, self.local_factor_poly.coeffs)

    def __lt__(self, other: PrimeIdeal) -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return f"({self.residue_char}, {self.local_factor_poly})"

    def __repr__(self) -> str:
        return f"PrimeIdeal{self}"

    @classmethod
    def synthetic(cls, p: int, g: Sequence[int]) -> PrimeIdeal:
        return cls(p, PolyModP(g, p).monic())


def check_accepted(K: NumberField, p: int) -> None:
    if p % 2 == 0 or not is_prime(p):
        raise ExcludedPrime(f"{p} is not an odd prime")
    if K.discriminant % p == 0:
        raise ExcludedPrime(f"{p} divides disc({K}) = {K.discriminant}")


def is_accepted(K: NumberField, p: int) -> bool:
    try:
        check_accepted(K, p)
    except ExcludedPrime:
        return False
    return True


def split_prime(K: NumberField, p: int) -> list[PrimeIdeal]:
    """Primes of K over an odd unramified p, ordered by (inertia, g)."""
    check_accepted(K, p)
    factors = factor_mod_p(K.minpoly_mod(p))
    primes = []
    for g, m in factors:
        if m != 1:
            raise ExcludedPrime(f"{p} is not unramified in {K}")
        primes.append(PrimeIdeal(p, g))
    primes.sort()
    return primes


def residue_embed(P: PrimeIdeal, a: FieldElem) -> ExtFieldElem:
    p = P.residue_char
    if a.denominator() % p == 0:
        raise DenominatorNotCoprime(f"{a} is not integral at {P}")
    coeffs = [c.numerator * pow(c.denominator, -1, p) % p for c in a.coords]
    return P.residue_field(PolyModP(coeffs, p))


@dataclass(frozen=True)
class FieldIso:
    source: NumberField
    target: NumberField
    image_of_theta: FieldElem

    def __post_init__(self):
        if self.image_of_theta.field != self.target:
            raise ValueError("image of θ must live in the target field")
        if self.source.degree != self.target.degree:
            raise ValueError("fields of different degree are not isomorphic")
        if not self.apply_poly(self.source.minpoly).is_zero():
            raise ValueError(f"{self.image_of_theta} is not a root of {self.source}")

    @classmethod
    def identity(cls, K: NumberField) -> FieldIso:
        return cls(K, K, K.theta)

    def apply_poly(self, coeffs: Sequence) -> FieldElem:
        acc = self.target(0)
        for c in reversed(coeffs):
            acc = acc * self.image_of_theta + Fraction(c)
        return acc

    def __call__(self, a: FieldElem) -> FieldElem:
        return self.apply_poly(a.coords)

    def __str__(self) -> str:
        return f"θ ↦ {self.image_of_theta}"


def apply_iso_to_prime(sigma: FieldIso, P: PrimeIdeal) -> PrimeIdeal:
    """The prime σ(P) of the target: the Q over p with g_P(σθ) ≡ 0 mod Q."""
    p = P.residue_char
    for Q in split_prime(sigma.target, p):
        image = residue_embed(Q, sigma.image_of_theta)
        value = Q.residue_field(0)
        for c in reversed(P.local_factor_poly.coeffs):
            value = value * image + c
        if value.is_zero():
            return Q
    raise ValueError(f"no prime of {sigma.target} over {p} corresponds to {P}")


def _rational_sqrt(r: Fraction) -> Fraction | None:
    if r < 0:
        return None
    n, d = isqrt(r.numerator), isqrt(r.denominator)
    if n * n == r.numerator and d * d == r.denominator:
        return Fraction(n, d)
    return None


def find_isomorphisms(K: NumberField, K2: NumberField) -> list[FieldIso]:
    """All isomorphisms K -> K2 for fields of degree at most 2."""
    if K.degree > 2 or K2.degree > 2:
        raise UnsupportedDegree("isomorphism search is limited to degree <= 2")
    if K.degree != K2.degree:
        return []
    if K.degree == 1:
        return [FieldIso(K, K2, K2(-K.minpoly[0]))]
    c, b = Fraction(K.minpoly[0]), Fraction(K.minpoly[1])
    c2, b2 = Fraction(K2.minpoly[0]), Fraction(K2.minpoly[1])
    disc, disc2 = b * b - 4 * c, b2 * b2 - 4 * c2
    # θ = (-b ± √disc)/2 and √disc2 = 2θ' + b2, so √disc = r (2θ' + b2) with r² = disc/disc2
    r = _rational_sqrt(disc / disc2)
    if r is None:
        return []
    sqrt_disc2 = 2 * K2.theta + b2
    out = []
    for sign in (1, -1):
        image = (sign * r * sqrt_disc2 - b) * Fraction(1, 2)
        out.append(FieldIso(K, K2, image))
    return out


def rational_field() -> NumberField:
    """Q presented as Q[x]/(x), so θ = 0."""
    return NumberField((0, 1))
