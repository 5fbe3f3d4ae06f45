"""Short Weierstrass elliptic curves over number fields and their local data."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Sequence

import numpy as np

from .algebra import ExtField, ExtFieldElem, PolyModP
from .errors import BadReduction, BudgetExceeded
from .numberfield import FieldElem, FieldIso, NumberField, PrimeIdeal, parse_expression, parse_rational_poly, residue_embed

POINT_COUNT_BUDGET = 10**6


def hasse_bound(q: int) -> int:
    """Largest integer t with t^2 <= 4q."""
    return isqrt(4 * q)


@dataclass(frozen=True)
class EllipticCurveOverK:
    field: NumberField
    a: FieldElem
    b: FieldElem

    def __post_init__(self):
        if self.a.field != self.field or self.b.field != self.field:
            raise ValueError("coefficients must lie in the curve's field")
        if self.discriminant.is_zero():
            raise ValueError(f"{self} is singular")

    @classmethod
    def from_coeffs(cls, K: NumberField, a, b) -> EllipticCurveOverK:
        return cls(K, K(a), K(b))

    @classmethod
    def parse(cls, K: NumberField, text: str) -> EllipticCurveOverK:
        """Parse "y^2 = x^3 + (A)x + (B)" with A, B polynomials in θ."""
        import sympy

        if "=" not in text:
            raise ValueError(f"expected an equation, got {text!r}")
        lhs, rhs = text.split("=", 1)
        if lhs.replace(" ", "") != "y^2":
            raise ValueError("only y^2 = x^3 + A x + B is supported")
        x = sympy.Symbol("x")
        poly = sympy.Poly(parse_expression(rhs, ["x", "t"]), x)
        if poly.degree() != 3 or poly.coeff_monomial(x**3) != 1 or poly.coeff_monomial(x**2) != 0:
            raise ValueError("not a short Weierstrass cubic")

        def coeff(k: int) -> FieldElem:
            expr = sympy.expand(poly.coeff_monomial(x**k))
            return K([Fraction(c) for c in parse_rational_poly(str(expr), "t")])

        return cls(K, coeff(1), coeff(0))

    @property
    def discriminant(self) -> FieldElem:
        return -16 * (4 * self.a**3 + 27 * self.b**2)

    def __str__(self) -> str:
        return f"y^2 = x^3 + ({self.a})x + ({self.b})"

    def conjugate(self, sigma: FieldIso) -> EllipticCurveOverK:
        """E^σ over the target of σ."""
        if sigma.source != self.field:
            raise ValueError("isomorphism source differs from the curve's field")
        return EllipticCurveOverK(sigma.target, sigma(self.a), sigma(self.b))

    def quadratic_twist(self, d) -> EllipticCurveOverK:
        """The twist d y^2 = x^3 + a x + b, written as y^2 = x^3 + d^2 a x + d^3 b."""
        d = self.field(d)
        return EllipticCurveOverK(self.field, d * d * self.a, d * d * d * self.b)


@dataclass(frozen=True)
class CurveOverFq:
    a: ExtFieldElem
    b: ExtFieldElem

    def __post_init__(self):
        if self.a.field != self.b.field:
            raise ValueError("coefficients must lie in one field")
        if (4 * self.a**3 + 27 * self.b**2).is_zero():
            raise BadReduction(f"{self} is singular")

    @property
    def field(self) -> ExtField:
        return self.a.field

    @property
    def q(self) -> int:
        return self.field.q

    def __str__(self) -> str:
        return f"y^2 = x^3 + ({self.a})x + ({self.b}) over F_{self.q}"

    def twist(self, c: ExtFieldElem) -> CurveOverFq:
        return CurveOverFq(c * c * self.a, c * c * c * self.b)


def reduce_curve(E: EllipticCurveOverK, P: PrimeIdeal) -> CurveOverFq:
    a, b = residue_embed(P, E.a), residue_embed(P, E.b)
    if (4 * a**3 + 27 * b**2).is_zero():
        raise BadReduction(f"{E} has bad reduction at {P}")
    return CurveOverFq(a, b)


def _character_sum(C: CurveOverFq) -> int:
    F = C.field
    p = F.p
    if F.degree == 1:
        x = np.arange(p, dtype=np.int64)
        rhs = (x * x % p * x + C.a.coeffs[0] * x + C.b.coeffs[0]) % p
        table = np.full(p, -1, dtype=np.int64)
        table[x * x % p] = 1
        table[0] = 0
        return int(table[rhs].sum())
    xs = F.all_elements_array()
    a = np.broadcast_to(np.array(C.a.coeffs, dtype=np.int64), xs.shape)
    b = np.broadcast_to(np.array(C.b.coeffs, dtype=np.int64), xs.shape)
    rhs = (F.vec_mul(F.vec_mul(xs, xs), xs) + F.vec_mul(a, xs) + b) % p
    return int(F.vec_quadratic_character(rhs).sum())


def count_points(C: CurveOverFq) -> int:
    """#C(F_q) including the point at infinity, by enumerating x."""
    if C.q > POINT_COUNT_BUDGET:
        raise BudgetExceeded(f"q = {C.q} exceeds the point counting budget {POINT_COUNT_BUDGET}")
    return C.q + 1 + _character_sum(C)


def count_points_naive(C: CurveOverFq) -> int:
    """Reference count by enumerating all pairs (x, y); only for tiny q."""
    F = C.field
    squares: dict[ExtFieldElem, int] = {}
    for y in F.elements():
        s = y * y
        squares[s] = squares.get(s, 0) + 1
    n = 1
    for x in F.elements():
        n += squares.get(x * x * x + C.a * x + C.b, 0)
    return n


@dataclass(frozen=True)
class LocalData:
    """Local coefficients (a)_1..(a)_2d at one prime; the factor is 1 + sum_i (a)_i T^(i f)."""

    prime: PrimeIdeal
    dim: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if self.dim < 1 or len(coeffs) != 2 * self.dim:
            raise ValueError(f"expected {2 * self.dim} coefficients, got {len(coeffs)}")
        q = self.prime.norm
        if coeffs[-1] != q**self.dim:
            raise ValueError(f"top coefficient must be N(P)^d = {q**self.dim}")
        if self.dim == 1 and coeffs[0] ** 2 > 4 * q:
            raise ValueError(f"|a| = {abs(coeffs[0])} violates the Hasse bound for q = {q}")

    @property
    def inertia(self) -> int:
        return self.prime.inertia

    @property
    def a(self) -> int:
        return self.coeffs[0]

    def to_json(self) -> dict:
        return {"prime": str(self.prime), "f": self.inertia, "coeffs": list(self.coeffs)}


def local_data(E: EllipticCurveOverK, P: PrimeIdeal) -> LocalData:
    C = reduce_curve(E, P)
    q = P.norm
    N = count_points(C)
    return LocalData(P, 1, (N - q - 1, q))


def _poly_mul(u: Sequence[int], v: Sequence[int]) -> list[int]:
    out = [0] * (len(u) + len(v) - 1)
    for i, x in enumerate(u):
        for j, y in enumerate(v):
            out[i + j] += x * y
    return out


def synthetic_local_data(d: int, P: PrimeIdeal, seed: int | random.Random) -> LocalData:
    """A product of d Weil quadratics 1 + t_j U + q U^2 with U = T^f and |t_j| <= 2 sqrt(q)."""
    if d < 1:
        raise ValueError("dimension must be positive")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    q = P.norm
    bound = hasse_bound(q)
    poly = [1]
    for _ in range(d):
        poly = _poly_mul(poly, [1, rng.randint(-bound, bound), q])
    return LocalData(P, d, tuple(poly[1:]))


def local_data_from_traces(P: PrimeIdeal, traces: Sequence[int]) -> LocalData:
    poly = [1]
    for t in traces:
        poly = _poly_mul(poly, [1, t, P.norm])
    return LocalData(P, len(traces), tuple(poly[1:]))
