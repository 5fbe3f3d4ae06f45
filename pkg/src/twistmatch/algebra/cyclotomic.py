"""Exact arithmetic in Z[zeta_l] for a prime l.

Elements are stored on the basis 1, zeta, ..., zeta^(l-2); a product is
computed cyclically mod zeta^l = 1 and then the zeta^(l-1) coordinate is
folded back using 1 + zeta + ... + zeta^(l-1) = 0.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable

import mpmath
from mpmath.ctx_iv import MPIntervalContext

from ..errors import PrecisionExhausted
from .polys import is_prime

COMPARE_PRECISIONS = (64, 128)


def _reduce_cyclic(vec: list[int], l: int) -> tuple[int, ...]:
    top = vec[l - 1] if l > 1 else 0
    return tuple(vec[k] - top for k in range(l - 1)) if l > 2 else (vec[0] - vec[1],)


class CyclotomicInt:
    __slots__ = ("order", "coords")

    def __init__(self, order: int, coords: Iterable[int]):
        coords = tuple(int(c) for c in coords)
        size = max(order - 1, 1)
        if len(coords) > size:
            # accept a length-l cyclic vector and fold it
            vec = list(coords) + [0] * (order - len(coords))
            if len(vec) != order:
                raise ValueError("too many coordinates")
            coords = _reduce_cyclic(vec, order)
        self.order = order
        self.coords = coords + (0,) * (size - len(coords))

    @classmethod
    def from_int(cls, order: int, n: int) -> CyclotomicInt:
        return cls(order, (n,))

    # -- comparisons -----------------------------------------------------
    def _coerce(self, other) -> CyclotomicInt:
        if isinstance(other, CyclotomicInt):
            if other.order != self.order:
                raise ValueError("cyclotomic order mismatch")
            return other
        if isinstance(other, int):
            return CyclotomicInt.from_int(self.order, other)
        return NotImplemented

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.coords == o.coords

    def __hash__(self) -> int:
        if not any(self.coords[1:]):
            return hash(self.coords[0])
        return hash((self.order, self.coords))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_integer(self) -> bool:
        return not any(self.coords[1:])

    def __int__(self) -> int:
        if not self.is_integer():
            raise ValueError(f"{self} is not a rational integer")
        return self.coords[0]

    # -- ring operations -------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CyclotomicInt(self.order, (a + b for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicInt(self.order, (-a for a in self.coords))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CyclotomicInt(self.order, (a - b for a, b in zip(self.coords, o.coords)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return CyclotomicInt(self.order, (a * other for a in self.coords))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        l = self.order
        if l == 2:
            return CyclotomicInt(2, (self.coords[0] * o.coords[0],))
        vec = [0] * l
        for i, a in enumerate(self.coords):
            if a:
                for j, b in enumerate(o.coords):
                    if b:
                        vec[(i + j) % l] += a * b
        return CyclotomicInt(l, _reduce_cyclic(vec, l))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> CyclotomicInt:
        if e < 0:
            # only units of the form zeta^k are inverted
            k = self.root_exponent()
            if k is None:
                raise ValueError("negative powers only for roots of unity")
            return root_of_unity(self.order, k * e)
        result = CyclotomicInt.from_int(self.order, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def conj(self) -> CyclotomicInt:
        """Complex conjugation zeta^k -> zeta^(l-k)."""
        l = self.order
        if l == 2:
            return self
        vec = [0] * l
        for k, a in enumerate(self.coords):
            vec[(-k) % l] += a
        return CyclotomicInt(l, _reduce_cyclic(vec, l))

    def root_exponent(self) -> int | None:
        """k if self == zeta^k, else None."""
        for k in range(self.order):
            if self == root_of_unity(self.order, k):
                return k
        return None

    def __repr__(self) -> str:
        return f"CyclotomicInt({self.order}, {list(self.coords)})"

    def __str__(self) -> str:
        if self.is_integer():
            return str(self.coords[0])
        terms = []
        for k, a in enumerate(self.coords):
            if a == 0:
                continue
            mono = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
            if not mono:
                terms.append(str(a))
            elif a == 1:
                terms.append(mono)
            elif a == -1:
                terms.append("-" + mono)
            else:
                terms.append(f"{a}*{mono}")
        return "+".join(terms).replace("+-", "-")

    def to_complex(self) -> complex:
        return complex(sum(a * mpmath.expjpi(2 * mpmath.mpf(k) / self.order) for k, a in enumerate(self.coords)))

    def to_json(self):
        if self.is_integer():
            return self.coords[0]
        return {"zeta_order": self.order, "coords": list(self.coords)}


@lru_cache(maxsize=None)
def root_of_unity(l: int, exp: int) -> CyclotomicInt:
    """zeta_l^exp, with zeta_l = exp(2 pi i / l)."""
    if not is_prime(l):
        raise ValueError(f"order {l} is not prime")
    exp %= l
    vec = [0] * l
    vec[exp] = 1
    return CyclotomicInt(l, _reduce_cyclic(vec, l))


def big_z(l: int) -> CyclotomicInt:
    """The root exp(2 pi i / l): largest real part among roots other than 1."""
    return root_of_unity(l, 1)


def small_zeta_exponent(l: int) -> int:
    """Exponent k with exp(pi i (l-1)/l) = zeta_l^k; the root of smallest real part."""
    return (l - 1) // 2


def small_zeta(l: int) -> CyclotomicInt:
    return root_of_unity(l, small_zeta_exponent(l))


@lru_cache(maxsize=None)
def _interval_context(prec: int) -> MPIntervalContext:
    ctx = MPIntervalContext()
    ctx.prec = prec + 16
    return ctx


@lru_cache(maxsize=None)
def _cos_table(l: int, prec: int):
    ctx = _interval_context(prec)
    return [ctx.cos(2 * ctx.pi * k / l) for k in range(l - 1)]


def real_part_interval(u: CyclotomicInt, prec: int):
    """Rigorous enclosure of Re(u) computed with `prec` fractional bits (plus guard bits)."""
    ctx = _interval_context(prec)
    table = _cos_table(u.order, prec)
    acc = ctx.mpf(0)
    for k, a in enumerate(u.coords):
        if a:
            acc += a * table[k]
    return acc


def real_part_is_zero(u: CyclotomicInt) -> bool:
    return (u + u.conj()).is_zero()


def cyc_real_compare(u: CyclotomicInt, v: CyclotomicInt) -> int:
    """Sign of Re(u) - Re(v) under zeta_l -> exp(2 pi i / l): -1, 0 or 1."""
    if u.order != v.order:
        raise ValueError("cyclotomic order mismatch")
    w = u - v
    if real_part_is_zero(w):
        return 0
    for prec in COMPARE_PRECISIONS:
        iv = real_part_interval(w, prec)
        if iv.a > 0:
            return 1
        if iv.b < 0:
            return -1
    raise PrecisionExhausted(f"could not separate Re({w}) from 0 at {COMPARE_PRECISIONS[-1]} bits")


def real_part_float(u: CyclotomicInt) -> float:
    return u.to_complex().real
