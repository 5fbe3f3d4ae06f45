"""Dense univariate polynomials over F_p and their factorization.

Coefficients are stored low degree first as a tuple of ints in [0, p).
The zero polynomial is the empty tuple.  Factorization follows the usual
squarefree / distinct-degree / equal-degree (Cantor-Zassenhaus) pipeline.
"""

from __future__ import annotations

import random
from functools import lru_cache
from typing import Iterable, Sequence

MAX_CHARACTERISTIC = 2**31


@lru_cache(maxsize=4096)
def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def check_odd_prime(p: int) -> None:
    if p == 2 or p % 2 == 0:
        raise ValueError(f"even characteristic {p} is not supported")
    if p > MAX_CHARACTERISTIC or not is_prime(p):
        raise ValueError(f"{p} is not an odd prime below 2^31")


def _trim(coeffs: Iterable[int], p: int) -> tuple[int, ...]:
    c = [x % p for x in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


class PolyModP:
    __slots__ = ("p", "coeffs")

    def __init__(self, coeffs: Iterable[int], p: int, *, _checked: bool = False):
        if not _checked:
            check_odd_prime(p)
        self.p = p
        self.coeffs = _trim(coeffs, p)

    @classmethod
    def _make(cls, coeffs, p) -> PolyModP:
        return cls(coeffs, p, _checked=True)

    @classmethod
    def x(cls, p: int) -> PolyModP:
        return cls((0, 1), p)

    @classmethod
    def constant(cls, c: int, p: int) -> PolyModP:
        return cls((c,), p)

    # -- basic structure -------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return self.lead == 1

    def monic(self) -> PolyModP:
        if not self.coeffs:
            return self
        inv = pow(self.lead, -1, self.p)
        return self._make([c * inv for c in self.coeffs], self.p)

    def sort_key(self) -> tuple:
        return (self.degree, self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, PolyModP):
            return self.p == other.p and self.coeffs == other.coeffs
        if isinstance(other, int):
            return self.coeffs == _trim((other,), self.p)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.p, self.coeffs))

    def __repr__(self) -> str:
        return f"PolyModP({list(self.coeffs)}, {self.p})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                mono = "x" if i == 1 else f"x^{i}"
                terms.append(mono if c == 1 else f"{c}*{mono}")
        return "+".join(terms)

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % self.p
        return acc

    # -- arithmetic ------------------------------------------------------
    def _coerce(self, other) -> PolyModP:
        if isinstance(other, PolyModP):
            if other.p != self.p:
                raise ValueError("characteristic mismatch")
            return other
        if isinstance(other, int):
            return self._make((other,), self.p)
        return NotImplemented

    def __add__(self, other) -> PolyModP:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return self._make(out, self.p)

    __radd__ = __add__

    def __neg__(self) -> PolyModP:
        return self._make([-c for c in self.coeffs], self.p)

    def __sub__(self, other) -> PolyModP:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> PolyModP:
        return (-self) + other

    def __mul__(self, other) -> PolyModP:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return self._make((), self.p)
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return self._make(out, self.p)

    __rmul__ = __mul__

    def __divmod__(self, other) -> tuple[PolyModP, PolyModP]:
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        p = self.p
        rem = list(self.coeffs)
        db = other.degree
        inv = pow(other.lead, -1, p)
        quot = [0] * max(len(rem) - db, 0)
        bc = other.coeffs
        for i in range(len(rem) - 1, db - 1, -1):
            c = rem[i] % p
            if c == 0:
                continue
            q = c * inv % p
            quot[i - db] = q
            for j in range(db + 1):
                rem[i - db + j] -= q * bc[j]
        return self._make(quot, p), self._make(rem[:db] if db > 0 else [], p)

    def __floordiv__(self, other) -> PolyModP:
        return divmod(self, other)[0]

    def __mod__(self, other) -> PolyModP:
        return divmod(self, other)[1]

    def __pow__(self, e: int) -> PolyModP:
        result = self._make((1,), self.p)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def powmod(self, e: int, modulus: PolyModP) -> PolyModP:
        result = self._make((1,), self.p)
        base = self % modulus
        while e:
            if e & 1:
                result = result * base % modulus
            base = base * base % modulus
            e >>= 1
        return result

    def derivative(self) -> PolyModP:
        return self._make([i * c for i, c in enumerate(self.coeffs)][1:], self.p)

    def compose_frobenius_root(self) -> PolyModP:
        """Given f(x) = g(x^p), return g."""
        return self._make(self.coeffs[:: self.p], self.p)


def poly_gcd(a: PolyModP, b: PolyModP) -> PolyModP:
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_product(factors: Sequence[PolyModP], p: int) -> PolyModP:
    out = PolyModP((1,), p)
    for f in factors:
        out = out * f
    return out


def squarefree_decomposition(f: PolyModP) -> list[tuple[PolyModP, int]]:
    """Return [(g_i, m_i)] with f = lead * prod g_i^m_i, each g_i squarefree and pairwise coprime."""
    p = f.p
    f = f.monic()
    if f.degree < 1:
        return []
    out: list[tuple[PolyModP, int]] = []
    fp = f.derivative()
    if fp.is_zero():
        for g, m in squarefree_decomposition(f.compose_frobenius_root()):
            out.append((g, m * p))
        return out
    c = poly_gcd(f, fp)
    w = f // c
    i = 1
    while w.degree > 0:
        y = poly_gcd(w, c)
        z = w // y
        if z.degree > 0:
            out.append((z.monic(), i))
        i += 1
        w = y
        c = c // y
    if c.degree > 0:
        for g, m in squarefree_decomposition(c.compose_frobenius_root()):
            out.append((g, m * p))
    return out


def distinct_degree(f: PolyModP) -> list[tuple[PolyModP, int]]:
    """Split a monic squarefree f into products of irreducibles of equal degree."""
    p = f.p
    x = PolyModP.x(p)
    out = []
    h = x
    d = 0
    rest = f
    while rest.degree >= 2 * (d + 1):
        d += 1
        h = h.powmod(p, rest)
        g = poly_gcd(h - x, rest)
        if g.degree > 0:
            out.append((g, d))
            rest = rest // g
            h = h % rest
    if rest.degree > 0:
        out.append((rest.monic(), rest.degree))
    return out


def equal_degree(f: PolyModP, d: int, rng: random.Random) -> list[PolyModP]:
    """Cantor-Zassenhaus split of monic squarefree f whose irreducible factors all have degree d."""
    p = f.p
    if f.degree == d:
        return [f]
    e = (p**d - 1) // 2
    while True:
        a = PolyModP([rng.randrange(p) for _ in range(f.degree)], p)
        if a.degree < 1:
            continue
        g = poly_gcd(a, f)
        if 0 < g.degree < f.degree:
            break
        b = a.powmod(e, f) - 1
        g = poly_gcd(b, f)
        if 0 < g.degree < f.degree:
            break
    return equal_degree(g, d, rng) + equal_degree(f // g, d, rng)


def factor_mod_p(f: PolyModP, seed: int = 0) -> list[tuple[PolyModP, int]]:
    """Factor a nonzero polynomial into monic irreducibles with multiplicities.

    The result is sorted by (degree, coefficients) so it does not depend on the
    random choices made by the equal-degree splitting.
    """
    if f.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    rng = random.Random(seed)
    out = []
    for g, m in squarefree_decomposition(f):
        for block, d in distinct_degree(g):
            for h in equal_degree(block, d, rng):
                out.append((h, m))
    out.sort(key=lambda t: (t[0].sort_key(), t[1]))
    return out


def is_irreducible(f: PolyModP) -> bool:
    """Rabin's test for a polynomial of positive degree."""
    n = f.degree
    if n < 1:
        return False
    if n == 1:
        return True
    p = f.p
    f = f.monic()
    x = PolyModP.x(p)
    if (x.powmod(p**n, f) - x) % f != PolyModP((), p):
        return False
    for q in {q for q in range(2, n + 1) if n % q == 0 and is_prime(q)}:
        h = x.powmod(p ** (n // q), f) - x
        if poly_gcd(h, f).degree != 0:
            return False
    return True
