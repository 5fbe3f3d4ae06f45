"""Oracles with hidden data, and random instance generators for the reconstruction tests.

A HiddenInstance holds both sides of a reconstruction problem: the known local
data, the hidden local data, the hidden bijection phi* and the character map
psi it induces.  Only the TwistOracle surface (hidden prime labels, the trivial
degree, forward and reverse queries) is meant for the reconstructor.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .algebra import PolyModP, is_irreducible, is_prime
from .characters import LocalChar, is_l_admissible
from .curves import EllipticCurveOverK, LocalData, hasse_bound, local_data, synthetic_local_data
from .lseries import FactorAtP, LocalFactor, Poly, char_items, twisted_product
from .numberfield import FieldIso, PrimeIdeal, apply_iso_to_prime, split_prime
from .reconstruct import PrimeMatch, find_split_prime


def _sorted(primes) -> tuple[PrimeIdeal, ...]:
    return tuple(sorted(primes, key=lambda P: (P.norm, P.sort_key())))


@dataclass
class HiddenInstance:
    p: int
    order: int
    known: tuple[LocalData, ...]
    hidden: tuple[LocalData, ...]
    phi: dict[PrimeIdeal, PrimeIdeal]  # known prime -> hidden prime
    # order 2 only: a known prime with a = 0 whose psi-value also picks up the value at a source prime
    scramble: dict[PrimeIdeal, PrimeIdeal] = field(default_factory=dict)
    split_companion: Optional[tuple[tuple[LocalData, ...], "HiddenInstance"]] = None
    calls: int = 0

    def __post_init__(self):
        self.known = tuple(sorted(self.known, key=lambda D: (D.prime.norm, D.prime.sort_key())))
        self.hidden = tuple(sorted(self.hidden, key=lambda D: (D.prime.norm, D.prime.sort_key())))
        kp = {D.prime for D in self.known}
        hp = {D.prime for D in self.hidden}
        if set(self.phi) != kp or set(self.phi.values()) != hp:
            raise ValueError("phi must be a bijection between the known and hidden primes")
        for P, src in self.scramble.items():
            if self.order != 2:
                raise ValueError("scrambling is only defined for quadratic characters")
            if src in self.scramble or src == P:
                raise ValueError("scramble sources must be unscrambled primes")
        self._inv = {q: P for P, q in self.phi.items()}

    # -- oracle surface --------------------------------------------------------
    @property
    def hidden_primes(self) -> tuple[PrimeIdeal, ...]:
        return tuple(D.prime for D in self.hidden)

    @property
    def known_primes(self) -> tuple[PrimeIdeal, ...]:
        return tuple(D.prime for D in self.known)

    @property
    def trivial_degree(self) -> int:
        return sum(len(D.coeffs) * D.inertia for D in self.hidden)

    def psi(self, chi: LocalChar) -> LocalChar:
        """psi on the local model: values move along phi*, scrambled primes add the source value."""
        ram, exps = [], []
        for q in self.hidden_primes:
            P = self._inv[q]
            ram.append(chi.ram[chi.primes.index(P)])
            e = chi.exps[chi.primes.index(P)]
            if P in self.scramble:
                e += chi.exps[chi.primes.index(self.scramble[P])]
            exps.append(e)
        return LocalChar(self.order, self.hidden_primes, tuple(ram), tuple(exps))

    def psi_inverse(self, chi: LocalChar) -> LocalChar:
        ram, exps = [], []
        for P in self.known_primes:
            q = self.phi[P]
            ram.append(chi.ram[chi.primes.index(q)])
            e = chi.exps[chi.primes.index(q)]
            if P in self.scramble:
                e -= chi.exps[chi.primes.index(self.phi[self.scramble[P]])]
            exps.append(e)
        return LocalChar(self.order, self.known_primes, tuple(ram), tuple(exps))

    def _factor(self, datas, chi: LocalChar) -> FactorAtP:
        poly = twisted_product(char_items(datas, chi), self.order)
        return FactorAtP(self.p, poly)

    def factor_query(self, chi: LocalChar) -> FactorAtP:
        self.calls += 1
        return self._factor(self.hidden, self.psi(chi))

    def reverse_factor_query(self, chi: LocalChar) -> FactorAtP:
        self.calls += 1
        return self._factor(self.known, self.psi_inverse(chi))

    # -- bookkeeping -----------------------------------------------------------------
    def hidden_data(self) -> dict[PrimeIdeal, LocalData]:
        return {D.prime: D for D in self.hidden}

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "order": self.order,
            "known": [D.to_json() for D in self.known],
            "hidden": [D.to_json() for D in self.hidden],
            "phi": {str(P): str(q) for P, q in self.phi.items()},
            "scramble": {str(P): str(s) for P, s in self.scramble.items()},
        }


@dataclass
class CallableOracle:
    """An oracle given by two response functions, for degree-mismatch experiments."""

    p: int
    order: int
    hidden_primes: tuple[PrimeIdeal, ...]
    trivial_degree: int
    forward: Callable[[LocalChar], Poly]
    reverse: Callable[[LocalChar], Poly]
    split_companion: Optional[tuple] = None

    def factor_query(self, chi: LocalChar) -> FactorAtP:
        return FactorAtP(self.p, self.forward(chi))

    def reverse_factor_query(self, chi: LocalChar) -> FactorAtP:
        return FactorAtP(self.p, self.reverse(chi))


# -- building instances from curves ------------------------------------------------------
def from_curves(
    E: EllipticCurveOverK,
    E2: EllipticCurveOverK,
    sigma: FieldIso,
    p: int,
    order: int = 2,
    split_bound: int = 10**5,
) -> HiddenInstance:
    """Known side E at the primes over p, hidden side E2 with phi* induced by sigma."""
    companion = None
    if order != 2:
        ps = find_split_prime(E.field, E2.field, order, split_bound, curves=(E, E2))
        comp = _curve_instance(E, E2, sigma, ps, order)
        companion = (comp.known, comp)
    return _curve_instance(E, E2, sigma, p, order, companion)


def _curve_instance(E, E2, sigma, p, order, companion=None) -> HiddenInstance:
    known = tuple(local_data(E, P) for P in split_prime(E.field, p))
    hidden = tuple(local_data(E2, Q) for Q in split_prime(E2.field, p))
    phi = {D.prime: apply_iso_to_prime(sigma, D.prime) for D in known}
    return HiddenInstance(p, order, known, hidden, phi, split_companion=companion)


# -- random synthetic instances --------------------------------------------------------
def _odd_primes(lo: int, hi: int) -> list[int]:
    return [p for p in range(max(lo, 3), hi + 1) if is_prime(p)]


def _count_irreducible(p: int, f: int) -> int:
    # necklace count of monic irreducibles of degree f over F_p
    from sympy import divisors, mobius

    return sum(int(mobius(d)) * p ** (f // d) for d in divisors(f)) // f


def random_primes(p: int, fs: Sequence[int], rng: random.Random) -> list[PrimeIdeal]:
    """Distinct synthetic primes (p, g) with deg g = f for each requested f."""
    seen: set = set()
    out = []
    for f in fs:
        while True:
            g = [rng.randrange(p) for _ in range(f)] + [1]
            poly = PolyModP(g, p)
            if poly.coeffs in seen or not is_irreducible(poly):
                continue
            seen.add(poly.coeffs)
            out.append(PrimeIdeal(p, poly))
            break
    return out


def _random_inertia(rng: random.Random, p: int, max_primes: int, max_total: int) -> list[int]:
    k = rng.randint(1, max_primes)
    fs = []
    budget = max_total
    for _ in range(k):
        if budget <= 0:
            break
        f = rng.choice([1, 1, 1, 2, 2, 3])
        f = min(f, budget)
        fs.append(f)
        budget -= f
    # keep only inertia degrees with enough irreducibles available
    while any(fs.count(f) > _count_irreducible(p, f) for f in set(fs)):
        fs.pop()
    return fs


def _permuted_partner(known_primes: Sequence[PrimeIdeal], rng: random.Random, p: int) -> dict[PrimeIdeal, PrimeIdeal]:
    hidden = random_primes(p, [P.inertia for P in known_primes], rng)
    by_f: dict[int, list[PrimeIdeal]] = {}
    for q in hidden:
        by_f.setdefault(q.inertia, []).append(q)
    for qs in by_f.values():
        rng.shuffle(qs)
    return {P: by_f[P.inertia].pop() for P in known_primes}


def random_quadratic_instance(
    rng: random.Random,
    max_primes: int = 5,
    max_total_degree: int = 6,
    p_range: tuple[int, int] = (3, 97),
    zero_rate: float = 0.2,
    collision_rate: float = 0.25,
    scramble_rate: float = 0.5,
) -> HiddenInstance:
    """Elliptic-curve style data (d = 1) with zeros, repeated a-values and scrambled zero primes."""
    p = rng.choice(_odd_primes(*p_range))
    fs = _random_inertia(rng, p, max_primes, max_total_degree)
    primes = random_primes(p, fs, rng)
    datas: list[LocalData] = []
    for P in primes:
        q = P.norm
        same_f = [D for D in datas if D.inertia == P.inertia]
        u = rng.random()
        if u < zero_rate:
            a = 0
        elif u < zero_rate + collision_rate and same_f:
            a = rng.choice(same_f).a
        else:
            b = hasse_bound(q)
            a = rng.randint(-b, b)
        datas.append(LocalData(P, 1, (a, q)))
    phi = _permuted_partner(primes, rng, p)
    hidden = tuple(LocalData(phi[D.prime], 1, D.coeffs) for D in datas)
    sources = [D.prime for D in datas if D.a != 0]
    scramble = {}
    for D in datas:
        if D.a == 0 and sources and rng.random() < scramble_rate:
            scramble[D.prime] = rng.choice(sources)
    return HiddenInstance(p, 2, tuple(datas), hidden, phi, scramble)


def _synthetic_companion(rng: random.Random, l: int, d: int, n: int, p_hi: int = 400) -> tuple:
    choices = [p for p in _odd_primes(l + 1, p_hi) if p % l == 1]
    p = rng.choice(choices)
    primes = random_primes(p, [1] * n, rng)
    datas = tuple(synthetic_local_data(d, P, rng) for P in primes)
    phi = _permuted_partner(primes, rng, p)
    hidden = tuple(LocalData(phi[D.prime], d, D.coeffs) for D in datas)
    return datas, HiddenInstance(p, l, datas, hidden, phi)


def random_order_l_instance(
    rng: random.Random,
    l: int | None = None,
    d: int | None = None,
    max_primes: int = 4,
    max_total_degree: int = 4,
    p_range: tuple[int, int] = (3, 60),
    collision_rate: float = 0.2,
) -> HiddenInstance:
    """Synthetic abelian-variety style data of dimension d with l > 2d, mixed inertia degrees."""
    d = d if d is not None else rng.choice([1, 2])
    if l is None:
        l = rng.choice([q for q in (5, 7) if q > 2 * d])
    if l <= 2 * d:
        raise ValueError("l must exceed 2d")
    p = rng.choice([q for q in _odd_primes(*p_range) if q != l])
    fs = _random_inertia(rng, p, max_primes, max_total_degree)
    primes = random_primes(p, fs, rng)
    datas: list[LocalData] = []
    for P in primes:
        same_f = [D for D in datas if D.inertia == P.inertia]
        if same_f and rng.random() < collision_rate:
            datas.append(LocalData(P, d, rng.choice(same_f).coeffs))
        else:
            datas.append(synthetic_local_data(d, P, rng))
    phi = _permuted_partner(primes, rng, p)
    hidden = tuple(LocalData(phi[D.prime], d, D.coeffs) for D in datas)
    companion = _synthetic_companion(rng, l, d, sum(fs))
    return HiddenInstance(p, l, tuple(datas), hidden, phi, split_companion=companion)


# -- observable equivalence ----------------------------------------------------------------
def _random_char(primes: Sequence[PrimeIdeal], order: int, rng: random.Random) -> LocalChar:
    ram = tuple(rng.randrange(2) if is_l_admissible(P, order) else 0 for P in primes)
    exps = tuple(rng.randrange(order) for _ in primes)
    return LocalChar(order, tuple(primes), ram, exps)


def rebuild_from_match(instance: HiddenInstance, match: PrimeMatch) -> HiddenInstance:
    """The instance the reconstruction claims: hidden data copied across the recovered pairing, no scrambling."""
    mapping = match.mapping()
    data = {D.prime: D for D in instance.known}
    hidden = tuple(LocalData(mapping[P], data[P].dim, data[P].coeffs) for P in instance.known_primes)
    return HiddenInstance(instance.p, instance.order, instance.known, hidden, dict(mapping))


def observably_equivalent(instance: HiddenInstance, match: PrimeMatch, rng: random.Random, trials: int = 50) -> bool:
    """Whether the rebuilt instance answers random forward and reverse queries identically.

    Scrambled zero primes are invisible to every query, so a reconstruction
    that leaves them undetermined is still observably equivalent.
    """
    rebuilt = rebuild_from_match(instance, match)
    if rebuilt.trivial_degree != instance.trivial_degree:
        return False
    for _ in range(trials):
        chi = _random_char(instance.known_primes, instance.order, rng)
        if instance.factor_query(chi) != rebuilt.factor_query(chi):
            return False
        chi_h = _random_char(instance.hidden_primes, instance.order, rng)
        if instance.reverse_factor_query(chi_h) != rebuilt.reverse_factor_query(chi_h):
            return False
    return True
