"""Twisted local factors, factors at p and truncated Dirichlet coefficients.

Polynomials in T are tuples of coefficients, low degree first.  Coefficients
are ints for twists with values in {0, 1, -1} and CyclotomicInt otherwise;
the two mix freely because CyclotomicInt coerces ints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Protocol, Sequence, Union

import numpy as np

from .algebra import CyclotomicInt, is_prime
from .characters import ConcreteQuadChar, LocalChar, extra_iso_psi
from .curves import EllipticCurveOverK, LocalData, count_points, local_data, reduce_curve
from .errors import BadReduction, ExcludedPrime, MissingPrime
from .numberfield import FieldIso, NumberField, PrimeIdeal, find_isomorphisms, is_accepted, rational_field, split_prime

Coeff = Union[int, CyclotomicInt]
Poly = tuple


# -- polynomial helpers -------------------------------------------------------
def poly_trim(c: Sequence[Coeff]) -> Poly:
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c) if c else (0,)


def poly_mul(u: Sequence[Coeff], v: Sequence[Coeff]) -> Poly:
    out: list[Coeff] = [0] * (len(u) + len(v) - 1)
    for i, x in enumerate(u):
        if x == 0:
            continue
        for j, y in enumerate(v):
            if y != 0:
                out[i + j] = out[i + j] + x * y
    return poly_trim(out)


def poly_product(polys: Sequence[Sequence[Coeff]]) -> Poly:
    out: Poly = (1,)
    for q in polys:
        out = poly_mul(out, q)
    return out


def poly_degree(c: Sequence[Coeff]) -> int:
    c = poly_trim(c)
    return 0 if c == (0,) else len(c) - 1


def poly_coeff(c: Sequence[Coeff], k: int) -> Coeff:
    return c[k] if 0 <= k < len(c) else 0


def poly_eq(u: Sequence[Coeff], v: Sequence[Coeff]) -> bool:
    u, v = poly_trim(u), poly_trim(v)
    return len(u) == len(v) and all(a == b for a, b in zip(u, v))


def coeff_to_json(c: Coeff):
    return c if isinstance(c, int) else c.to_json()


def render_poly(c: Sequence[Coeff], var: str = "T") -> str:
    """Human form such as "1 - 6T^2 + 25T^4"."""
    parts: list[str] = []
    for k, a in enumerate(poly_trim(c)):
        if a == 0:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if isinstance(a, CyclotomicInt) and not a.is_integer():
            body = f"({a}){mono}"
            sign = "+"
        else:
            n = int(a)
            sign = "-" if n < 0 else "+"
            body = str(abs(n)) if not mono or abs(n) != 1 else ""
            body += mono
        if not parts:
            parts.append(body if sign == "+" else "-" + body)
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts) if parts else "0"


# -- local factors ----------------------------------------------------------------
@dataclass(frozen=True)
class LocalFactor:
    prime: PrimeIdeal
    poly: Poly

    @property
    def degree(self) -> int:
        return poly_degree(self.poly)

    def to_json(self) -> dict:
        return {"prime": str(self.prime), "f": self.prime.inertia, "coeffs": [coeff_to_json(c) for c in self.poly]}


def local_factor_poly(data: LocalData, chi_value: Coeff) -> Poly:
    """1 + sum_i chi^i (a)_i T^(i f); the constant 1 when chi_value = 0."""
    if chi_value == 0:
        return (1,)
    f = data.inertia
    out: list[Coeff] = [0] * (2 * data.dim * f + 1)
    out[0] = 1
    power: Coeff = 1
    for i, a in enumerate(data.coeffs, start=1):
        power = power * chi_value
        out[i * f] = power * a
    return poly_trim(out)


def local_factor(data: LocalData, chi_value: Coeff) -> LocalFactor:
    return LocalFactor(data.prime, local_factor_poly(data, chi_value))


def char_value(chi: LocalChar | None, P: PrimeIdeal) -> Coeff:
    return 1 if chi is None else chi.value(P)


# -- families of local data -----------------------------------------------------
class LocalFamily(Protocol):
    """Anything that can list the primes over p and hand out their local data."""

    def primes_over(self, p: int) -> list[PrimeIdeal]: ...

    def data_at(self, P: PrimeIdeal) -> LocalData: ...


@dataclass(frozen=True)
class CurveFamily:
    curve: EllipticCurveOverK

    def primes_over(self, p: int) -> list[PrimeIdeal]:
        return split_prime(self.curve.field, p)

    def data_at(self, P: PrimeIdeal) -> LocalData:
        return local_data(self.curve, P)


@dataclass(frozen=True)
class SyntheticFamily:
    """Fixed local data at the primes over one or more rational primes."""

    data: Mapping[int, tuple[LocalData, ...]]

    @classmethod
    def from_list(cls, items: Sequence[LocalData]) -> SyntheticFamily:
        by_p: dict[int, list[LocalData]] = {}
        for D in items:
            by_p.setdefault(D.prime.residue_char, []).append(D)
        return cls({p: tuple(sorted(v, key=lambda D: D.prime.sort_key())) for p, v in by_p.items()})

    def primes_over(self, p: int) -> list[PrimeIdeal]:
        if p not in self.data:
            raise ExcludedPrime(f"no synthetic data over {p}")
        return [D.prime for D in self.data[p]]

    def data_at(self, P: PrimeIdeal) -> LocalData:
        for D in self.data.get(P.residue_char, ()):
            if D.prime == P:
                return D
        raise KeyError(f"no synthetic data at {P}")


def as_family(source) -> LocalFamily:
    if isinstance(source, EllipticCurveOverK):
        return CurveFamily(source)
    return source


@dataclass(frozen=True)
class FactorAtP:
    p: int
    poly: Poly
    per_prime: tuple[LocalFactor, ...] = field(default=())

    @property
    def degree(self) -> int:
        return poly_degree(self.poly)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FactorAtP):
            return NotImplemented
        return self.p == other.p and poly_eq(self.poly, other.poly)

    def __hash__(self) -> int:
        return hash((self.p, len(poly_trim(self.poly))))

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "factor": [coeff_to_json(c) for c in self.poly],
            "per_prime": [lf.to_json() for lf in self.per_prime],
        }

    def render(self) -> str:
        return render_poly(self.poly)


def factor_at_p(source, p: int, chi: LocalChar | None = None) -> FactorAtP:
    """prod over P | p of L_P(chi, T); chi = None means the trivial twist."""
    fam = as_family(source)
    locals_ = tuple(local_factor(fam.data_at(P), char_value(chi, P)) for P in fam.primes_over(p))
    return FactorAtP(p, poly_product([lf.poly for lf in locals_]), locals_)


# -- Dirichlet coefficients -----------------------------------------------------
def _primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(n**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, n + 1, i)))
    return [i for i in range(n + 1) if sieve[i]]


def invert_series(poly: Sequence[Coeff], terms: int) -> list[Coeff]:
    """First `terms` coefficients of 1 / poly for a polynomial with constant term 1."""
    if poly_coeff(poly, 0) != 1:
        raise ValueError("constant term must be 1")
    out: list[Coeff] = [1] + [0] * (terms - 1)
    for k in range(1, terms):
        acc: Coeff = 0
        for j in range(1, min(k, len(poly) - 1) + 1):
            if poly[j] != 0 and out[k - j] != 0:
                acc = acc + poly[j] * out[k - j]
        out[k] = -acc
    return out


def dirichlet_expand(factors: Mapping[int, FactorAtP | Sequence[Coeff]], N: int) -> list[Coeff]:
    """c_0..c_N of prod_p L_p(p^-s)^-1 (c_0 = 0 is a placeholder)."""
    primes = _primes_upto(N)
    missing = [p for p in primes if p not in factors]
    if missing:
        raise MissingPrime(f"no factor supplied for p = {missing[0]}")
    c: list[Coeff] = [0] * (N + 1)
    if N >= 1:
        c[1] = 1
    # prime power parts
    local: dict[int, list[Coeff]] = {}
    for p in primes:
        poly = factors[p]
        poly = poly.poly if isinstance(poly, FactorAtP) else tuple(poly)
        k = 0
        pk = 1
        while pk * p <= N:
            pk *= p
            k += 1
        local[p] = invert_series(poly, k + 1)
    # smallest prime factor sieve, then multiplicativity
    spf = list(range(N + 1))
    for p in primes:
        if p * p > N:
            break
        for m in range(p * p, N + 1, p):
            if spf[m] == m:
                spf[m] = p
    for n in range(2, N + 1):
        p = spf[n]
        m, k = n, 0
        while m % p == 0:
            m //= p
            k += 1
        c[n] = local[p][k] if m == 1 else local[p][k] * c[m]
    return c


def first_difference(c1: Sequence[Coeff], c2: Sequence[Coeff]) -> int | None:
    """Smallest n >= 1 with c1[n] != c2[n], or None."""
    for n in range(1, min(len(c1), len(c2))):
        if c1[n] != c2[n]:
            return n
    return None


# -- demos ------------------------------------------------------------------------
def gaussian_example() -> tuple[NumberField, EllipticCurveOverK, FieldIso]:
    """y^2 = x^3 + θx over Q[x]/(x^2+1) together with complex conjugation."""
    K = NumberField.parse("x^2+1")
    E = EllipticCurveOverK.from_coeffs(K, K.theta, 0)
    conj = next(s for s in find_isomorphisms(K, K) if s.image_of_theta != K.theta)
    return K, E, conj


def counterexample_report(p_max: int) -> dict:
    """Equal factors at every p, but different local factors at some prime."""
    K, E, sigma = gaussian_example()
    Es = E.conjugate(sigma)
    rows, witnesses = [], []
    for p in _primes_upto(p_max):
        if not is_accepted(K, p):
            continue
        try:
            FE, FS = factor_at_p(E, p), factor_at_p(Es, p)
        except BadReduction:
            continue
        rows.append({"p": p, "factor": render_poly(FE.poly), "equal": FE == FS})
        for lfE, lfS in zip(FE.per_prime, FS.per_prime):
            if not poly_eq(lfE.poly, lfS.poly):
                P = lfE.prime
                witnesses.append(
                    {
                        "p": p,
                        "prime": str(P),
                        "points_E": count_points(reduce_curve(E, P)),
                        "points_E_sigma": count_points(reduce_curve(Es, P)),
                        "factor_E": render_poly(lfE.poly),
                        "factor_E_sigma": render_poly(lfS.poly),
                    }
                )
    return {
        "field": str(K),
        "curve": str(E),
        "conjugate": str(Es),
        "p_max": p_max,
        "all_equal": all(r["equal"] for r in rows),
        "primes": rows,
        "witnesses": witnesses,
    }


def extra_iso_demo(p: int, q_max: int, d_list: Sequence[int]) -> dict:
    """Compare L_q(E, chi_d) with L_q(E, chi_psi(d)) for E: y^2 = x^3 - x over Q."""
    Q = rational_field()
    E = EllipticCurveOverK.from_coeffs(Q, -1, 0)
    fam = CurveFamily(E)
    traces: dict[int, LocalData] = {}
    checks, failures, zero_violations = 0, [], []
    for q in _primes_upto(q_max):
        if q == 2:
            continue
        (P,) = split_prime(Q, q)
        D = traces.setdefault(q, fam.data_at(P))
        if q % 4 == 3 and D.a != 0:
            zero_violations.append(q)
    per_d = []
    for d in d_list:
        dpsi = extra_iso_psi(d, p)
        chi, chi_psi = ConcreteQuadChar(Q, Q(d)), ConcreteQuadChar(Q, Q(dpsi))
        bad = []
        for q, D in traces.items():
            if d % q == 0:
                continue
            P = D.prime
            u, v = local_factor_poly(D, chi(P)), local_factor_poly(D, chi_psi(P))
            checks += 1
            if not poly_eq(u, v):
                bad.append(q)
        failures.extend((d, q) for q in bad)
        per_d.append({"d": d, "psi_d": dpsi, "failures": bad})
    return {
        "curve": str(E),
        "p": p,
        "q_max": q_max,
        "checks": checks,
        "all_equal": not failures,
        "zero_trace_ok": not zero_violations,
        "zero_trace_violations": zero_violations,
        "per_d": per_d,
    }


# -- fast twisted products ----------------------------------------------------------
# A polynomial in T over Z[zeta_l] is held as an int64 array of shape (deg + 1, l)
# in the cyclic basis 1, zeta, ..., zeta^(l-1).  Every local factor coefficient
# is a monomial a * zeta^k, so multiplying by a factor is a handful of shifted
# adds.  l = 2 works too, with zeta = -1.
TwistItem = tuple  # (f, coeffs (a)_1..(a)_2d, value exponent or None when ramified)


def twisted_product_array(items: Sequence[TwistItem], l: int, below: int | None = None) -> np.ndarray:
    """prod_P L_P(T) in cyclic form; with `below` set, each factor is truncated to degree < below."""
    deg = 0
    for f, coeffs, e in items:
        if e is not None:
            top = len(coeffs) * f
            if below is not None:
                top = min(top, below - 1)
            deg += max(top, 0)
    # the sum of absolute coefficients is submultiplicative; switch to Python ints past int64
    size = 1
    for f, coeffs, e in items:
        if e is not None:
            size *= 1 + sum(abs(a) for a in coeffs if a is not None)
    out = np.zeros((deg + 1, l), dtype=np.int64 if size < 2**62 else object)
    out[0, 0] = 1
    cur = 0
    for f, coeffs, e in items:
        if e is None:
            continue
        nxt = out.copy()
        top = 0
        for i, a in enumerate(coeffs, start=1):
            shift = i * f
            if below is not None and shift >= below:
                break
            if a == 0:
                continue
            top = max(top, shift)
            k = (i * e) % l
            nxt[shift : shift + cur + 1] += a * np.roll(out[: cur + 1], k, axis=1)
        out = nxt
        cur += top
    return out[: cur + 1]


def cyclic_array_to_poly(arr: np.ndarray, l: int) -> Poly:
    reduced = arr[:, : l - 1] - arr[:, l - 1 : l]
    if l == 2:
        return poly_trim([int(x) for x in reduced[:, 0]])
    reduced = reduced.astype(object)
    return poly_trim([CyclotomicInt(l, row) if any(row[1:]) else int(row[0]) for row in reduced.tolist()])


def twisted_product(items: Sequence[TwistItem], l: int, below: int | None = None) -> Poly:
    return cyclic_array_to_poly(twisted_product_array(items, l, below), l)


def char_items(datas: Sequence[LocalData], chi: LocalChar | None) -> list[TwistItem]:
    out = []
    for D in datas:
        e = 0 if chi is None else chi.exponent(D.prime)
        out.append((D.inertia, D.coeffs, e))
    return out
