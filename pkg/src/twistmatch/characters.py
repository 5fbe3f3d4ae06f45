"""Local models of characters of order 2 and of prime order l.

A character is recorded only through its behaviour at the primes over one
rational p: per prime a ramification exponent and a value exponent.  Order 2
uses bits composed by XOR, order l uses exponents in Z/l composed additively.
Prescribed-value constructors are total because any finite local assignment is
realised by a global character.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .algebra import CyclotomicInt, is_prime, is_square, legendre, root_of_unity
from .errors import AdmissibilityError
from .numberfield import FieldElem, NumberField, PrimeIdeal, residue_embed


def is_l_admissible(P: PrimeIdeal, l: int) -> bool:
    """Whether an order-l character may ramify at P in the local model."""
    return l == 2 or (P.residue_char % l == 1 and P.inertia == 1)


@dataclass(frozen=True)
class LocalChar:
    order: int
    primes: tuple[PrimeIdeal, ...]
    ram: tuple[int, ...]
    exps: tuple[int, ...]

    def __post_init__(self):
        if not is_prime(self.order):
            raise ValueError(f"character order {self.order} is not prime")
        n = len(self.primes)
        if len(self.ram) != n or len(self.exps) != n:
            raise ValueError("one ramification and one value exponent per prime")
        if len(set(self.primes)) != n:
            raise ValueError("duplicate prime in assignment")
        l = self.order
        object.__setattr__(self, "ram", tuple(int(r) % l for r in self.ram))
        object.__setattr__(self, "exps", tuple(int(e) % l for e in self.exps))
        for P, r in zip(self.primes, self.ram):
            if r and not is_l_admissible(P, l):
                raise AdmissibilityError(f"no ramified order-{l} character at {P} in the local model")

    # -- constructors ------------------------------------------------------
    @classmethod
    def trivial(cls, primes: Sequence[PrimeIdeal], order: int = 2) -> LocalChar:
        n = len(primes)
        return cls(order, tuple(primes), (0,) * n, (0,) * n)

    @classmethod
    def from_values(cls, order: int, values: Mapping[PrimeIdeal, int | None]) -> LocalChar:
        """Build from prime -> value exponent, with None meaning ramified (ramification exponent 1)."""
        primes = tuple(values)
        ram = tuple(1 if values[P] is None else 0 for P in primes)
        exps = tuple(0 if values[P] is None else values[P] for P in primes)
        return cls(order, primes, ram, exps)

    # -- queries -----------------------------------------------------------
    def _index(self, P: PrimeIdeal) -> int:
        try:
            return self.primes.index(P)
        except ValueError:
            raise KeyError(f"{P} is not covered by this assignment") from None

    def is_ramified(self, P: PrimeIdeal) -> bool:
        return self.ram[self._index(P)] != 0

    def exponent(self, P: PrimeIdeal) -> int | None:
        """Value exponent k with chi(P) = zeta_l^k, or None when ramified."""
        i = self._index(P)
        return None if self.ram[i] else self.exps[i]

    def value(self, P: PrimeIdeal) -> int | CyclotomicInt:
        """chi(P): 0, +1 or -1 for order 2, an element of Z[zeta_l] otherwise."""
        k = self.exponent(P)
        if k is None:
            return 0
        if self.order == 2:
            return -1 if k else 1
        return root_of_unity(self.order, k)

    def ramified_primes(self) -> list[PrimeIdeal]:
        return [P for P, r in zip(self.primes, self.ram) if r]

    def restrict(self, primes: Iterable[PrimeIdeal]) -> LocalChar:
        primes = tuple(primes)
        idx = [self._index(P) for P in primes]
        return LocalChar(self.order, primes, tuple(self.ram[i] for i in idx), tuple(self.exps[i] for i in idx))

    # -- group law ---------------------------------------------------------
    def __mul__(self, other: LocalChar) -> LocalChar:
        if other.order != self.order or set(other.primes) != set(self.primes):
            raise ValueError("characters must share order and primes")
        o = other.restrict(self.primes)
        if self.order == 2:
            ram = tuple(a ^ b for a, b in zip(self.ram, o.ram))
            exps = tuple(a ^ b for a, b in zip(self.exps, o.exps))
        else:
            ram = tuple(a + b for a, b in zip(self.ram, o.ram))
            exps = tuple(a + b for a, b in zip(self.exps, o.exps))
        return LocalChar(self.order, self.primes, ram, exps)

    def inverse(self) -> LocalChar:
        return LocalChar(self.order, self.primes, tuple(-r for r in self.ram), tuple(-e for e in self.exps))

    def __pow__(self, k: int) -> LocalChar:
        return LocalChar(self.order, self.primes, tuple(k * r for r in self.ram), tuple(k * e for e in self.exps))

    # -- rendering ---------------------------------------------------------
    def _render(self, i: int) -> str:
        if self.ram[i]:
            return "0"
        if self.order == 2:
            return "-1" if self.exps[i] else "+1"
        return f"zeta^{self.exps[i]}"

    def to_json(self) -> list[dict]:
        return [{"prime": str(P), "value": self._render(i)} for i, P in enumerate(self.primes)]

    @classmethod
    def parse_values(cls, order: int, primes: Sequence[PrimeIdeal], tokens: Sequence[str]) -> LocalChar:
        """Parse value tokens "0", "+1", "1", "-1", "zeta^k" in prime order."""
        if len(tokens) != len(primes):
            raise ValueError(f"expected {len(primes)} twist values, got {len(tokens)}")
        values: dict[PrimeIdeal, int | None] = {}
        for P, tok in zip(primes, tokens):
            tok = tok.strip()
            if tok == "0":
                values[P] = None
            elif tok in ("1", "+1"):
                values[P] = 0
            elif tok == "-1":
                if order != 2:
                    raise ValueError("-1 is not an l-th root of unity for odd l")
                values[P] = 1
            elif tok.startswith("zeta^"):
                values[P] = int(tok[5:])
            else:
                raise ValueError(f"cannot parse twist value {tok!r}")
        return cls.from_values(order, values)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{P}: {self._render(i)}" for i, P in enumerate(self.primes)) + "}"


LocalQuadChar = LocalChar
LocalCharL = LocalChar


def prescribe_order_l(primes: Sequence[PrimeIdeal], zetas: Sequence[int], l: int) -> LocalChar:
    """An unramified order-l assignment with chi(P_i) = zeta_l^(zetas[i])."""
    if len(primes) != len(zetas):
        raise ValueError("one exponent per prime")
    return LocalChar(l, tuple(primes), (0,) * len(primes), tuple(zetas))


def prescribe_order_2(primes: Sequence[PrimeIdeal], values: Sequence[int]) -> LocalChar:
    """A quadratic assignment with chi(P_i) = values[i] in {-1, 0, 1}; 0 means ramified."""
    if len(primes) != len(values):
        raise ValueError("one value per prime")
    ram, exps = [], []
    for v in values:
        if v not in (-1, 0, 1):
            raise ValueError(f"quadratic value {v} not in {{-1, 0, 1}}")
        ram.append(1 if v == 0 else 0)
        exps.append(1 if v == -1 else 0)
    return LocalChar(2, tuple(primes), tuple(ram), tuple(exps))


@dataclass(frozen=True)
class ConcreteQuadChar:
    """The character of K(sqrt d)/K."""

    field: NumberField
    d: FieldElem

    def __post_init__(self):
        if self.d.is_zero():
            raise ValueError("d must be nonzero")

    def __call__(self, P: PrimeIdeal) -> int:
        return eval_concrete_quad(self, P)

    def local(self, primes: Sequence[PrimeIdeal]) -> LocalChar:
        return prescribe_order_2(primes, [self(P) for P in primes])


def eval_concrete_quad(chi: ConcreteQuadChar, P: PrimeIdeal) -> int:
    x = residue_embed(P, chi.d)
    if x.is_zero():
        return 0
    return 1 if is_square(x) else -1


def p_free_part(d: int, p: int) -> int:
    """d * |d|_p, i.e. d with every factor p removed."""
    if d == 0:
        raise ValueError("d must be nonzero")
    while d % p == 0:
        d //= p
    return d


def extra_iso_psi(d: int, p: int) -> int:
    """The square-class map d -> d or -d according to the Legendre symbol of the p-free part of d."""
    if p % 4 != 1 or not is_prime(p):
        raise ValueError(f"{p} is not a prime congruent to 1 mod 4")
    return d if legendre(p_free_part(d, p), p) == 1 else -d
