"""Prime fields F_p and extension fields F_p[t]/(g)."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .polys import PolyModP, check_odd_prime, is_irreducible

MAX_EXT_DEGREE = 12


@dataclass(frozen=True)
class PrimeFieldElem:
    value: int
    modulus: int

    def __post_init__(self):
        check_odd_prime(self.modulus)
        object.__setattr__(self, "value", self.value % self.modulus)

    def _other(self, other) -> int:
        if isinstance(other, PrimeFieldElem):
            if other.modulus != self.modulus:
                raise ValueError("modulus mismatch")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        return PrimeFieldElem(self.value + self._other(other), self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        return PrimeFieldElem(self.value - self._other(other), self.modulus)

    def __rsub__(self, other):
        return PrimeFieldElem(self._other(other) - self.value, self.modulus)

    def __neg__(self):
        return PrimeFieldElem(-self.value, self.modulus)

    def __mul__(self, other):
        return PrimeFieldElem(self.value * self._other(other), self.modulus)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * pow(self._other(other), -1, self.modulus)

    def __pow__(self, e: int):
        return PrimeFieldElem(pow(self.value, e, self.modulus), self.modulus)

    def __int__(self) -> int:
        return self.value

    def __str__(self) -> str:
        return str(self.value)


class ExtField:
    """The finite field F_p[t]/(g) for a monic irreducible g of degree f."""

    def __init__(self, minpoly: PolyModP):
        if not minpoly.is_monic():
            minpoly = minpoly.monic()
        if minpoly.degree > MAX_EXT_DEGREE:
            raise ValueError(f"extension degree {minpoly.degree} exceeds {MAX_EXT_DEGREE}")
        if not is_irreducible(minpoly):
            raise ValueError(f"{minpoly} is not irreducible mod {minpoly.p}")
        self.minpoly = minpoly
        self.p = minpoly.p
        self.degree = minpoly.degree
        self.q = self.p**self.degree

    @classmethod
    def prime(cls, p: int) -> ExtField:
        return cls(PolyModP((0, 1), p))

    def __eq__(self, other) -> bool:
        return isinstance(other, ExtField) and self.minpoly == other.minpoly

    def __hash__(self) -> int:
        return hash(self.minpoly)

    def __repr__(self) -> str:
        return f"ExtField(F_{self.p}[t]/({self.minpoly}))"

    def __call__(self, value) -> ExtFieldElem:
        if isinstance(value, ExtFieldElem):
            return value
        if isinstance(value, int):
            return ExtFieldElem(self, (value % self.p,))
        if isinstance(value, PolyModP):
            return ExtFieldElem(self, (value % self.minpoly).coeffs)
        return ExtFieldElem(self, (PolyModP(value, self.p) % self.minpoly).coeffs)

    @property
    def gen(self) -> ExtFieldElem:
        return self(PolyModP((0, 1), self.p))

    def zero(self) -> ExtFieldElem:
        return self(0)

    def one(self) -> ExtFieldElem:
        return self(1)

    def elements(self) -> Iterator[ExtFieldElem]:
        for n in range(self.q):
            digits = []
            for _ in range(self.degree):
                n, r = divmod(n, self.p)
                digits.append(r)
            yield self(digits)

    # -- vectorised arithmetic on arrays of shape (m, degree) ------------
    @cached_property
    def _reduction_rows(self) -> np.ndarray:
        """Row k gives t^(degree + k) reduced to the basis 1..t^(degree-1)."""
        f = self.degree
        rows = []
        for k in range(f - 1):
            rows.append((PolyModP.x(self.p) ** (f + k) % self.minpoly).coeffs)
        out = np.zeros((max(f - 1, 0), f), dtype=np.int64)
        for k, c in enumerate(rows):
            out[k, : len(c)] = c
        return out

    def vec_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        p, f = self.p, self.degree
        if f == 1:
            return (a * b) % p
        prod = np.zeros((a.shape[0], 2 * f - 1), dtype=np.int64)
        for i in range(f):
            for j in range(f):
                prod[:, i + j] += a[:, i] * b[:, j] % p
        prod %= p
        out = prod[:, :f].copy()
        red = self._reduction_rows
        for k in range(f - 1):
            out += (prod[:, f + k : f + k + 1] * red[k]) % p
        return out % p

    def vec_pow(self, a: np.ndarray, e: int) -> np.ndarray:
        result = np.zeros_like(a)
        result[:, 0] = 1
        base = a.copy()
        while e:
            if e & 1:
                result = self.vec_mul(result, base)
            base = self.vec_mul(base, base)
            e >>= 1
        return result

    def all_elements_array(self) -> np.ndarray:
        idx = np.arange(self.q, dtype=np.int64)
        out = np.empty((self.q, self.degree), dtype=np.int64)
        for i in range(self.degree):
            out[:, i] = idx % self.p
            idx //= self.p
        return out

    def vec_index(self, a: np.ndarray) -> np.ndarray:
        """Base-p integer encoding of each row, matching all_elements_array."""
        weights = self.p ** np.arange(self.degree, dtype=np.int64)
        return (a % self.p) @ weights

    @cached_property
    def _square_table(self) -> np.ndarray:
        xs = self.all_elements_array()
        table = np.full(self.q, -1, dtype=np.int8)
        table[self.vec_index(self.vec_mul(xs, xs))] = 1
        table[0] = 0
        return table

    def vec_quadratic_character(self, a: np.ndarray) -> np.ndarray:
        """Quadratic character (+1, -1, 0) of each row, read from a table of squares."""
        return self._square_table[self.vec_index(a)].astype(np.int64)


@dataclass(frozen=True)
class ExtFieldElem:
    field: ExtField
    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = list(self.coeffs) + [0] * (self.field.degree - len(self.coeffs))
        if len(c) != self.field.degree:
            raise ValueError("too many coordinates for this field")
        object.__setattr__(self, "coeffs", tuple(x % self.field.p for x in c))

    @property
    def poly(self) -> PolyModP:
        return PolyModP._make(self.coeffs, self.field.p)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def _other(self, other) -> ExtFieldElem:
        if isinstance(other, ExtFieldElem):
            if other.field != self.field:
                raise ValueError("field mismatch")
            return other
        if isinstance(other, (int, PrimeFieldElem)):
            return self.field(int(other))
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return ExtFieldElem(self.field, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return ExtFieldElem(self.field, tuple(-a for a in self.coeffs))

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
        return self.field(self.poly * o.poly)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> ExtFieldElem:
        if e < 0:
            return self.inverse() ** (-e)
        return self.field(self.poly.powmod(e, self.field.minpoly))

    def inverse(self) -> ExtFieldElem:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return self ** (self.field.q - 2)

    def __truediv__(self, other):
        return self * self._other(other).inverse()

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self == self.field(other)
        if isinstance(other, ExtFieldElem):
            return self.field == other.field and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.field, self.coeffs))

    def __str__(self) -> str:
        return str(self.poly).replace("x", "t")

    def index(self) -> int:
        n = 0
        for c in reversed(self.coeffs):
            n = n * self.field.p + c
        return n


def is_square(a: ExtFieldElem) -> bool:
    """Euler's criterion in F_q: a is a square iff a^((q-1)/2) = 1 (zero counts as a square)."""
    if a.is_zero():
        return True
    return a ** ((a.field.q - 1) // 2) == 1


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1
