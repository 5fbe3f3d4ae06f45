"""Recovering the prime bijection from oracle access to twisted factors.

The reconstructor knows the local data of its own side at the primes over p
and talks to a TwistOracle that hides the other side.  The oracle answers
forward queries (a character on the known primes, pushed through the hidden
character map) and reverse queries (a character on the hidden primes, pulled
back).  Hidden prime labels and their inertia degrees are public; hidden
coefficients, the bijection and the character map are not.

Every oracle call is checked against the degree bookkeeping implied by the
ramification pattern of the probe.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Mapping, Optional, Protocol, Sequence

from .algebra import CyclotomicInt, big_z, cyc_real_compare, is_prime, root_of_unity, small_zeta_exponent
from .characters import LocalChar
from .curves import EllipticCurveOverK, LocalData, local_data
from .errors import (
    BadReduction,
    DegreeMismatch,
    ExcludedPrime,
    InconsistentOracle,
    InductionDataMissing,
)
from .lseries import (
    FactorAtP,
    Poly,
    TwistItem,
    char_items,
    poly_coeff,
    poly_degree,
    poly_eq,
    poly_trim,
    render_poly,
    twisted_product,
    _primes_upto,
)
from .numberfield import FieldIso, NumberField, PrimeIdeal, apply_iso_to_prime, is_accepted, split_prime


class TwistOracle(Protocol):
    p: int
    order: int

    @property
    def hidden_primes(self) -> tuple[PrimeIdeal, ...]: ...

    @property
    def trivial_degree(self) -> int: ...

    def factor_query(self, chi: LocalChar) -> FactorAtP: ...

    def reverse_factor_query(self, chi: LocalChar) -> FactorAtP: ...


@dataclass(frozen=True)
class ReconConfig:
    transport_probes: int = 100
    seed: int = 0


# -- small utilities -------------------------------------------------------------------
def kuhn_matching(left: Sequence, adj: Mapping[object, Sequence]) -> dict:
    """Maximum bipartite matching by augmenting paths; candidates are tried in the given order."""
    match_right: dict = {}

    def augment(u, seen: set) -> bool:
        for v in adj.get(u, ()):
            if v in seen:
                continue
            seen.add(v)
            if v not in match_right or augment(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    for u in left:
        augment(u, set())
    return {u: v for v, u in match_right.items()}


def _sort_primes(primes) -> list[PrimeIdeal]:
    return sorted(primes, key=lambda P: (P.norm, P.sort_key()))


def _as_cyc(x, l: int) -> CyclotomicInt:
    return x if isinstance(x, CyclotomicInt) else CyclotomicInt.from_int(l, int(x))


def level_coeff(D: LocalData, f: int) -> int:
    """(a_P)_(f/f_P), zero when f_P does not divide f or the index exceeds 2d."""
    fp = D.inertia
    if f % fp:
        return 0
    i = f // fp
    return D.coeffs[i - 1] if i <= len(D.coeffs) else 0


class OracleSession:
    """Wraps an oracle with caching and per-call degree bookkeeping."""

    def __init__(self, oracle: TwistOracle, known: Sequence[LocalData], order: int):
        self.oracle = oracle
        self.order = order
        self.known = tuple(sorted(known, key=lambda D: (D.prime.norm, D.prime.sort_key())))
        if not self.known:
            raise ValueError("no known primes")
        self.p = self.known[0].prime.residue_char
        if any(D.prime.residue_char != self.p for D in self.known):
            raise ValueError("known data must lie over a single rational prime")
        self.data = {D.prime: D for D in self.known}
        self.known_primes = tuple(D.prime for D in self.known)
        self.hidden_primes = tuple(_sort_primes(oracle.hidden_primes))
        self.d = self.known[0].dim
        self.n = sum(P.inertia for P in self.known_primes)
        self.n_hidden = sum(q.inertia for q in self.hidden_primes)
        if oracle.trivial_degree % (2 * self.n_hidden):
            raise DegreeMismatch("hidden trivial degree is not a multiple of 2 * sum f")
        self.d_hidden = oracle.trivial_degree // (2 * self.n_hidden)
        self.queries = 0
        self._cache: dict = {}

    # characters
    def known_char(self, exps: Mapping[PrimeIdeal, Optional[int]] | None = None) -> LocalChar:
        exps = exps or {}
        return LocalChar.from_values(self.order, {P: exps.get(P, 0) for P in self.known_primes})

    def hidden_char(self, exps: Mapping[PrimeIdeal, Optional[int]] | None = None) -> LocalChar:
        exps = exps or {}
        return LocalChar.from_values(self.order, {q: exps.get(q, 0) for q in self.hidden_primes})

    # queries
    def _check_degree(self, poly: Poly, chi: LocalChar, d: int, what: str) -> None:
        ramified = sum(P.inertia for P in chi.ramified_primes())
        total = sum(P.inertia for P in chi.primes)
        expected = 2 * d * (total - ramified)
        if poly_degree(poly) != expected:
            raise InconsistentOracle(f"{what} response has degree {poly_degree(poly)}, expected {expected}")

    def forward(self, chi: LocalChar) -> Poly:
        key = ("f", chi.ram, chi.exps)
        if key not in self._cache:
            self.queries += 1
            poly = poly_trim(self.oracle.factor_query(chi).poly)
            self._check_degree(poly, chi, self.d, "forward")
            self._cache[key] = poly
        return self._cache[key]

    def reverse(self, chi: LocalChar) -> Poly:
        key = ("r", chi.ram, chi.exps)
        if key not in self._cache:
            self.queries += 1
            poly = poly_trim(self.oracle.reverse_factor_query(chi).poly)
            self._check_degree(poly, chi, self.d_hidden, "reverse")
            self._cache[key] = poly
        return self._cache[key]

    def known_product(self, chi: LocalChar) -> Poly:
        return twisted_product(char_items(self.known, chi), self.order)


# -- degrees ------------------------------------------------------------------------------
def _ramified_all_but(primes: Sequence[PrimeIdeal], keep: PrimeIdeal, order: int) -> LocalChar:
    return LocalChar.from_values(order, {P: (0 if P == keep else None) for P in primes})


def check_degrees(oracle: TwistOracle, known: Sequence[LocalData], l: int | None = None) -> tuple[int, int]:
    """Shared ([K:Q], d), checked through trivial and ramified-all-but-one probes."""
    n = sum(D.inertia for D in known)
    d = known[0].dim
    hidden = tuple(oracle.hidden_primes)
    n_h = sum(q.inertia for q in hidden)
    triv = LocalChar.trivial([D.prime for D in known], oracle.order)
    fwd = poly_degree(oracle.factor_query(triv).poly)
    if fwd != 2 * d * n or oracle.trivial_degree != 2 * d * n:
        raise DegreeMismatch(f"trivial twist degrees {2 * d * n} and {oracle.trivial_degree} differ")
    if oracle.trivial_degree % (2 * n_h):
        raise DegreeMismatch("hidden trivial degree is not a multiple of 2 * sum f")
    d_h = oracle.trivial_degree // (2 * n_h)

    if l is None or l == 2:
        probe_oracle, probe_known = oracle, tuple(known)
    else:
        companion = getattr(oracle, "split_companion", None)
        if companion is None:
            raise InductionDataMissing(f"no totally split prime p = 1 mod {l} supplied for the dimension check")
        probe_known, probe_oracle = companion
    order = probe_oracle.order
    kp = [D.prime for D in probe_known]
    hp = list(probe_oracle.hidden_primes)
    if l not in (None, 2) and not all(P.inertia == 1 and P.residue_char % l == 1 for P in kp + hp):
        raise ValueError("the dimension check needs a totally split prime congruent to 1 mod l")
    for P in kp:
        deg = poly_degree(probe_oracle.factor_query(_ramified_all_but(kp, P, order)).poly)
        if deg != 2 * d * P.inertia:
            raise DegreeMismatch(f"probe unramified only at {P} has degree {deg}, expected {2 * d * P.inertia}")
    for q in hp:
        deg = poly_degree(probe_oracle.reverse_factor_query(_ramified_all_but(hp, q, order)).poly)
        if deg != 2 * d_h * q.inertia:
            raise DegreeMismatch(f"reverse probe unramified only at {q} has degree {deg}, expected {2 * d_h * q.inertia}")
    if d != d_h:
        raise DegreeMismatch(f"dimensions {d} and {d_h} differ")
    return n, d


# -- result types ---------------------------------------------------------------------------
@dataclass
class MatchedPair:
    left: PrimeIdeal
    right: PrimeIdeal
    f: int
    coeffs: tuple[int, ...]
    collision: bool = False
    transport_verified: bool = False

    def to_json(self) -> dict:
        return {
            "left": str(self.left),
            "right": str(self.right),
            "f": self.f,
            "coeffs": list(self.coeffs),
            "collision": self.collision,
            "transport_verified": self.transport_verified,
        }


@dataclass
class PrimeMatch:
    p: int
    pairs: list[MatchedPair]
    undetermined: list[MatchedPair] = field(default_factory=list)
    queries: int = 0
    cross_level_checks: int = 0
    levels: list[int] = field(default_factory=list)

    def mapping(self, include_undetermined: bool = True) -> dict[PrimeIdeal, PrimeIdeal]:
        out = {m.left: m.right for m in self.pairs}
        if include_undetermined:
            out.update({m.left: m.right for m in self.undetermined})
        return out

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "pairs": [m.to_json() for m in self.pairs],
            "undetermined": [{"left": str(m.left), "right": str(m.right), "f": m.f} for m in self.undetermined],
        }


# -- quadratic case -------------------------------------------------------------------------
@dataclass
class RamificationMatch:
    relation: dict[PrimeIdeal, list[PrimeIdeal]]  # known prime -> compatible hidden primes
    pairing: dict[PrimeIdeal, PrimeIdeal]


def match_by_ramification_quadratic(session: OracleSession) -> RamificationMatch:
    """Norm pairing through probes ramified at a single prime.

    Forward probes ramified at P must drop the hidden degree by exactly 2 f_P,
    and reverse probes ramified at q drop the known degree by 2 f_q; both are
    enforced by the session.  The reverse response then equals the known
    product with the partner of q removed, up to signs, which ties q to the
    candidates P.
    """
    if session.n != session.n_hidden:
        raise InconsistentOracle(f"sum of inertia degrees differ: {session.n} vs {session.n_hidden}")
    known, hidden = session.known_primes, session.hidden_primes
    for P in known:
        session.forward(session.known_char({P: None}))
    others: dict[PrimeIdeal, list[Poly]] = {}
    for P in known:
        rest = [D for D in session.known if D.prime != P]
        polys = []
        for signs in product((0, 1), repeat=len(rest)):
            items = [(D.inertia, D.coeffs, e) for D, e in zip(rest, signs)]
            polys.append(twisted_product(items, 2))
        others[P] = polys
    relation: dict[PrimeIdeal, list[PrimeIdeal]] = {P: [] for P in known}
    for q in hidden:
        resp = session.reverse(session.hidden_char({q: None}))
        for P in known:
            if P.inertia == q.inertia and any(poly_eq(resp, r) for r in others[P]):
                relation[P].append(q)
    # sorted by norm; hidden primes keep their norm order inside each candidate list
    pairing = kuhn_matching(known, relation)
    if len(pairing) != len(known):
        raise InconsistentOracle("ramification data admits no norm-preserving bijection")
    return RamificationMatch(relation, pairing)


def chi_plus_quadratic(known: Sequence[LocalData]) -> LocalChar:
    """Sign of a_P at each prime (+1 where a_P = 0); maximises chi -> L_p(chi, 1)."""
    return LocalChar(2, tuple(D.prime for D in known), (0,) * len(known), tuple(1 if D.a < 0 else 0 for D in known))


def _value_at_one(poly: Poly) -> int:
    return sum(int(c) for c in poly)


def reconstruct_quadratic(known: Sequence[LocalData], oracle: TwistOracle, config: ReconConfig | None = None) -> PrimeMatch:
    cfg = config or ReconConfig()
    check_degrees(oracle, known)
    session = OracleSession(oracle, known, 2)
    if session.d != 1:
        raise ValueError("the quadratic reconstruction is for elliptic curve data (d = 1)")
    ram = match_by_ramification_quadratic(session)
    hidden = session.hidden_primes
    p = session.p

    # hidden a-values: reverse probe unramified only at q, value +1 there
    a_hidden: dict[PrimeIdeal, int] = {}
    for q in hidden:
        resp = session.reverse(session.hidden_char({r: (0 if r == q else None) for r in hidden}))
        fq, N = q.inertia, q.norm
        c = int(poly_coeff(resp, fq))
        shape = [0] * (2 * fq + 1)
        shape[0], shape[fq], shape[2 * fq] = 1, c, N
        if not poly_eq(resp, shape) or c * c > 4 * N:
            raise InconsistentOracle(f"reverse probe at {q} is not a Weil factor: {render_poly(resp)}")
        a_hidden[q] = c

    # chi+ attains the maximum of L_p(., 1) on both sides
    chi_plus = chi_plus_quadratic(session.known)
    best = _value_at_one(session.forward(chi_plus))
    top_known, top_hidden = 1, 1
    for D in session.known:
        top_known *= 1 + abs(D.a) + D.prime.norm
    for q in hidden:
        top_hidden *= 1 + abs(a_hidden[q]) + q.norm
    if not best == top_known == top_hidden:
        raise InconsistentOracle("the image of chi+ does not maximise L_p(., 1) on the hidden side")

    adj = {
        P: [q for q in ram.relation[P] if a_hidden[q] == session.data[P].a]
        for P in session.known_primes
    }
    pairing = kuhn_matching(session.known_primes, adj)
    if len(pairing) != len(session.known_primes):
        raise InconsistentOracle("no bijection matches both ramification and a-values")

    pairs, undetermined = [], []
    for P in session.known_primes:
        D = session.data[P]
        m = MatchedPair(P, pairing[P], P.inertia, D.coeffs, collision=len(adj[P]) > 1)
        (pairs if D.a != 0 else undetermined).append(m)
    match = PrimeMatch(p, pairs, undetermined)
    _verify_transport_quadratic(session, match, cfg)
    match.queries = session.queries
    return match


def _random_quad_char(primes: Sequence[PrimeIdeal], rng: random.Random) -> LocalChar:
    return LocalChar(2, tuple(primes), tuple(rng.randrange(2) for _ in primes), tuple(rng.randrange(2) for _ in primes))


def transport_char(chi: LocalChar, mapping: Mapping[PrimeIdeal, PrimeIdeal], hidden: Sequence[PrimeIdeal]) -> LocalChar:
    """chi carried along the pairing: value chi(P) at mapping[P]."""
    inv = {q: P for P, q in mapping.items()}
    return LocalChar(
        chi.order,
        tuple(hidden),
        tuple(chi.ram[chi.primes.index(inv[q])] for q in hidden),
        tuple(chi.exps[chi.primes.index(inv[q])] for q in hidden),
    )


def _flip(chi: LocalChar, P: PrimeIdeal, shift: int = 1) -> LocalChar:
    i = chi.primes.index(P)
    exps = list(chi.exps)
    exps[i] += shift
    return LocalChar(chi.order, chi.primes, chi.ram, tuple(exps))


def _unramify(chi: LocalChar, P: PrimeIdeal) -> LocalChar:
    i = chi.primes.index(P)
    ram = list(chi.ram)
    ram[i] = 0
    return LocalChar(chi.order, chi.primes, tuple(ram), chi.exps)


def _verify_transport_quadratic(session: OracleSession, match: PrimeMatch, cfg: ReconConfig) -> None:
    """Random probes: forward(chi) = reverse(transported chi), and the [T^f] differencing identity per pair."""
    rng = random.Random(cfg.seed)
    mapping = match.mapping()
    hidden = session.hidden_primes
    ok = {m.left: True for m in match.pairs}
    for _ in range(cfg.transport_probes):
        chi = _random_quad_char(session.known_primes, rng)
        ref = session.known_product(chi)
        if not poly_eq(session.forward(chi), ref):
            raise InconsistentOracle("forward response differs from the known factor")
        if not poly_eq(session.reverse(transport_char(chi, mapping, hidden)), ref):
            raise InconsistentOracle("transported character does not reproduce the factor")
        for m in match.pairs:
            base = _unramify(chi, m.left)
            flipped = _flip(base, m.left)
            f = m.f
            sign = -1 if base.exps[base.primes.index(m.left)] else 1
            target = 2 * sign * m.coeffs[0]
            fwd = poly_coeff(session.forward(base), f) - poly_coeff(session.forward(flipped), f)
            tb, tf = transport_char(base, mapping, hidden), transport_char(flipped, mapping, hidden)
            rev = poly_coeff(session.reverse(tb), f) - poly_coeff(session.reverse(tf), f)
            if not fwd == rev == target:
                ok[m.left] = False
    for m in match.pairs:
        m.transport_verified = ok[m.left]


# -- order l: level sets, the map c and coefficient extraction ------------------------------
@dataclass(frozen=True)
class QSets:
    level: int
    Q: tuple[PrimeIdeal, ...]
    plus: tuple[PrimeIdeal, ...]
    minus: tuple[PrimeIdeal, ...]
    lower: tuple[PrimeIdeal, ...]


def q_sets(datas: Sequence[LocalData], f: int) -> QSets:
    Q, plus, minus, lower = [], [], [], []
    for D in sorted(datas, key=lambda D: D.prime.sort_key()):
        a = level_coeff(D, f)
        if a:
            Q.append(D.prime)
            (plus if a > 0 else minus).append(D.prime)
        if any(D.coeffs[i - 1] for i in range(1, len(D.coeffs) + 1) if i * D.inertia < f):
            lower.append(D.prime)
    return QSets(f, tuple(Q), tuple(plus), tuple(minus), tuple(lower))


def c_map(datas: Sequence[LocalData], chi: LocalChar, f: int) -> CyclotomicInt:
    """sum over Q_f of (1 - chi(P)^(f/f_P)) (a_P)_(f/f_P), exactly in Z[zeta_l]."""
    l = chi.order
    total = CyclotomicInt.from_int(l, 0)
    for D in datas:
        a = level_coeff(D, f)
        if not a:
            continue
        e = chi.exponent(D.prime)
        if e is None:
            raise ValueError(f"c is only defined for characters unramified on Q_f; ramified at {D.prime}")
        total = total + (1 - root_of_unity(l, e * (f // D.inertia))) * a
    return total


def extract_level_f(response: Poly, lower: Optional[Sequence[TwistItem]], f: int, l: int) -> CyclotomicInt:
    """[T^f] response minus [T^f] of the product of the truncated lower-level factors.

    `lower` lists (f_P, coeffs, value exponent) for the matched primes below
    level f; coefficients that are not yet known may be None as long as they
    are not needed below level f.
    """
    if lower is None:
        raise InductionDataMissing(f"no induction data for level {f}")
    for fp, coeffs, e in lower:
        for i, a in enumerate(coeffs, start=1):
            if i * fp < f and a is None and e is not None:
                raise InductionDataMissing(f"coefficient {i} of a prime with f = {fp} is needed below level {f}")
    clean = [(fp, [0 if a is None else a for a in coeffs], e) for fp, coeffs, e in lower]
    below = twisted_product(clean, l, below=f)
    return _as_cyc(poly_coeff(response, f), l) - _as_cyc(poly_coeff(below, f), l)


def line_circle_solve(a: int, A: int, l: int) -> list[int]:
    """Exponents k in 1..l-1 with (1 - Z) a = (1 - zeta_l^k) A, found exactly."""
    lhs = (1 - big_z(l)) * a
    return [k for k in range(1, l) if lhs == (1 - root_of_unity(l, k)) * A]


def _divide_by_one_minus_z(c: CyclotomicInt, l: int) -> int:
    n = c.coords[0]
    if c != (1 - big_z(l)) * n:
        raise InconsistentOracle(f"{c} is not an integer multiple of 1 - Z")
    return n


def extreme_char(datas: Sequence[LocalData], f: int, l: int, sign: int) -> LocalChar:
    """zeta^(f/f_P)-th root on Q_f^sign, 1 elsewhere: chi+ for sign = +1, chi- for sign = -1."""
    k = small_zeta_exponent(l)
    exps = {}
    for D in datas:
        a = level_coeff(D, f)
        exps[D.prime] = k * pow(f // D.inertia, -1, l) % l if a * sign > 0 else 0
    return LocalChar.from_values(l, exps)


def maximizer_sets(datas: Sequence[LocalData], f: int, l: int) -> tuple[set, set]:
    """(argmax of Re c by exhaustive search, the characterised set) over unramified assignments."""
    primes = [D.prime for D in datas]
    best, argmax = None, set()
    characterised = set()
    k = small_zeta_exponent(l)
    for exps in product(range(l), repeat=len(primes)):
        chi = LocalChar(l, tuple(primes), (0,) * len(primes), exps)
        c = c_map(datas, chi, f)
        if best is None:
            best, argmax = c, {exps}
        else:
            s = cyc_real_compare(c, best)
            if s > 0:
                best, argmax = c, {exps}
            elif s == 0:
                argmax.add(exps)
        good = True
        for D, e in zip(datas, exps):
            a = level_coeff(D, f)
            power = e * (f // D.inertia) % l
            if a > 0 and power not in (k, l - k):
                good = False
            if a < 0 and power != 0:
                good = False
        if good:
            characterised.add(exps)
    return argmax, characterised


# -- order l reconstruction --------------------------------------------------------------------
class _LevelState:
    """Bookkeeping shared across levels of the order-l induction."""

    def __init__(self, session: OracleSession, l: int):
        self.s = session
        self.l = l
        self.hcoef: dict[PrimeIdeal, list[Optional[int]]] = {q: [None] * (2 * session.d_hidden) for q in session.hidden_primes}
        self.phi: dict[PrimeIdeal, PrimeIdeal] = {}
        self.phi_inv: dict[PrimeIdeal, PrimeIdeal] = {}
        self.collision: set[PrimeIdeal] = set()
        self.cross_checks = 0

    def probe_exp(self, P: PrimeIdeal, f: int) -> int:
        return pow(f // P.inertia, -1, self.l)

    def known_probe(self, P: PrimeIdeal, f: int) -> LocalChar:
        return self.s.known_char({P: self.probe_exp(P, f)})

    def hidden_probe(self, q: PrimeIdeal, f: int) -> LocalChar:
        return self.s.hidden_char({q: self.probe_exp(q, f)})

    def hidden_lower(self, chi: LocalChar) -> list[TwistItem]:
        return [(q.inertia, self.hcoef[q], chi.exponent(q)) for q in self.s.hidden_primes]

    def hidden_lower_set(self, f: int) -> set[PrimeIdeal]:
        return {q for q, c in self.hcoef.items() if any(c[i - 1] for i in range(1, len(c) + 1) if i * q.inertia < f)}

    def lower_fwd(self, chi: LocalChar, qs: QSets) -> list[TwistItem]:
        """Hidden truncated factors under psi(chi), read through phi_<f."""
        self._require(qs)
        return [(self.phi[P].inertia, self.hcoef[self.phi[P]], chi.exponent(P)) for P in qs.lower]

    def lower_rev(self, chi_h: LocalChar, qs: QSets) -> list[TwistItem]:
        """Known truncated factors under psi^-1(chi'), read through phi_<f."""
        self._require(qs)
        return [(P.inertia, self.s.data[P].coeffs, chi_h.exponent(self.phi[P])) for P in qs.lower]

    def _require(self, qs: QSets) -> None:
        missing = [P for P in qs.lower if P not in self.phi]
        if missing:
            raise InductionDataMissing(f"{missing[0]} lies in Q_<{qs.level} but is unmatched")
        if {self.phi[P] for P in qs.lower} != self.hidden_lower_set(qs.level):
            raise InconsistentOracle(f"phi_<{qs.level} is not a bijection of the lower-level sets")

    def probes_agree(self, P: PrimeIdeal, q: PrimeIdeal, f: int) -> bool:
        if P.inertia != q.inertia:
            return False
        return poly_eq(self.s.forward(self.known_probe(P, f)), self.s.reverse(self.hidden_probe(q, f)))

    def record(self, P: PrimeIdeal, q: PrimeIdeal) -> None:
        if P in self.phi:
            return
        self.phi[P] = q
        self.phi_inv[q] = P


def _resolve(state: _LevelState, P: PrimeIdeal | None, q: PrimeIdeal | None, cands: list, f: int) -> tuple[PrimeIdeal, PrimeIdeal]:
    """Pick the partner of P (or of q) among line-circle candidates, respecting lower levels."""
    from_known = P is not None
    me = P if from_known else q
    prev = (state.phi if from_known else state.phi_inv).get(me)
    taken = state.phi_inv if from_known else state.phi

    def agree(x):
        return state.probes_agree(me, x, f) if from_known else state.probes_agree(x, me, f)

    if prev is not None:
        if prev not in cands or not agree(prev):
            raise InconsistentOracle(f"level-{f} partner of {me} disagrees with the lower levels")
        state.cross_checks += 1
        choice = prev
    else:
        free = [x for x in cands if x not in taken and agree(x)]
        if not free:
            raise InconsistentOracle(f"no level-{f} partner for {me}")
        choice = free[0]
        if len(free) > 1:
            state.collision.add(me if from_known else choice)
    return (me, choice) if from_known else (choice, me)


def reconstruct_order_l(
    known: Sequence[LocalData], oracle: TwistOracle, l: int, config: ReconConfig | None = None
) -> PrimeMatch:
    cfg = config or ReconConfig()
    if l == 2 or not is_prime(l):
        raise ValueError(f"l = {l} must be an odd prime")
    n, d = check_degrees(oracle, known, l)
    if l <= 2 * d:
        raise ValueError(f"l = {l} must exceed 2d = {2 * d}")
    session = OracleSession(oracle, known, l)
    state = _LevelState(session, l)
    Z = big_z(l)
    zeta = root_of_unity(l, small_zeta_exponent(l))
    if zeta * Z != zeta**-1:
        raise InconsistentOracle("zeta Z != zeta^-1 for the chosen zeta")
    hidden = session.hidden_primes
    triv_k, triv_h = session.known_char(), session.hidden_char()
    fwd_triv, rev_triv = session.forward(triv_k), session.reverse(triv_h)
    max_f = max(P.inertia for P in session.known_primes + hidden)
    levels = []

    for f in range(1, 2 * d * max_f + 1):
        qs = q_sets(session.known, f)

        # hidden level-f coefficients from reverse probes (hypothesis reading, no pairing needed)
        S1 = extract_level_f(rev_triv, state.hidden_lower(triv_h), f, l)
        A: dict[PrimeIdeal, int] = {}
        for q in hidden:
            i = f // q.inertia
            if f % q.inertia or i > 2 * d:
                continue
            chi_q = state.hidden_probe(q, f)
            Sq = extract_level_f(session.reverse(chi_q), state.hidden_lower(chi_q), f, l)
            a_q = _divide_by_one_minus_z(S1 - Sq, l)
            state.hcoef[q][i - 1] = a_q
            if a_q:
                A[q] = a_q
        a = {P: level_coeff(session.data[P], f) for P in qs.Q}
        if sum(a.values()) != sum(A.values()):
            raise InconsistentOracle(f"level-{f} coefficient sums differ")
        if not qs.Q and not A:
            continue
        levels.append(f)

        S1_fwd = extract_level_f(fwd_triv, state.lower_fwd(triv_k, qs), f, l)
        S1_rev = extract_level_f(rev_triv, state.lower_rev(triv_h, qs), f, l)

        def c_forward(chi: LocalChar) -> CyclotomicInt:
            return S1_fwd - extract_level_f(session.forward(chi), state.lower_fwd(chi, qs), f, l)

        def c_reverse(chi_h: LocalChar) -> CyclotomicInt:
            return S1_rev - extract_level_f(session.reverse(chi_h), state.lower_rev(chi_h, qs), f, l)

        for sign in (1, -1):
            K_side = [P for P in qs.Q if a[P] * sign > 0]
            H_side = [q for q in A if A[q] * sign > 0]
            # psi(chi+-) is extremal for c' (maximiser lemma, negative side swapped)
            chi_x = extreme_char(session.known, f, l, sign)
            cx = c_forward(chi_x)
            if cx != c_map(session.known, chi_x, f):
                raise InconsistentOracle(f"c(chi) != c'(psi(chi)) for the level-{f} extremal character")
            zeta_term = 1 - root_of_unity(l, small_zeta_exponent(l))
            extreme_h = CyclotomicInt.from_int(l, 0)
            for q in H_side:
                extreme_h = extreme_h + zeta_term * A[q]
            if cyc_real_compare(cx, extreme_h) != 0:
                raise InconsistentOracle(f"psi(chi) is not extremal for c' at level {f}")

            K_list = sorted(K_side, key=lambda P: (abs(a[P]), P.sort_key()))
            H_list = sorted(H_side, key=lambda q: (abs(A[q]), q.sort_key()))
            while K_list or H_list:
                if not K_list or not H_list:
                    raise InconsistentOracle(f"Q_{f} sides of sign {sign} have different sizes")
                P0, q0 = K_list[0], H_list[0]
                if abs(a[P0]) <= abs(A[q0]):
                    expected = (1 - Z) * a[P0]
                    c = c_forward(state.known_probe(P0, f))
                    other = {q: A[q] for q in H_list}
                    mine = a[P0]
                else:
                    expected = (1 - Z) * A[q0]
                    c = c_reverse(state.hidden_probe(q0, f))
                    other = {P: a[P] for P in K_list}
                    mine = A[q0]
                if c != expected:
                    raise InconsistentOracle(f"c identity fails at level {f}")
                # exactly one prime moves: 2 (1 - P) |a| would exceed Re c
                if cyc_real_compare(c, 2 * expected) != -sign:
                    raise InconsistentOracle(f"more than one prime moves under a level-{f} probe")
                cands = []
                for x, ax in other.items():
                    sols = line_circle_solve(mine, ax, l)
                    if sols:
                        if sols != [1]:
                            raise InconsistentOracle("line-circle intersection is not at Z")
                        cands.append(x)
                if abs(a[P0]) <= abs(A[q0]):
                    Pm, qm = _resolve(state, P0, None, cands, f)
                else:
                    Pm, qm = _resolve(state, None, q0, cands, f)
                state.record(Pm, qm)
                K_list.remove(Pm)
                H_list.remove(qm)

    # every prime has (a)_2d != 0, so the levels exhaust both sides
    if len(state.phi) != len(session.known_primes) or set(state.phi.values()) != set(hidden):
        raise InconsistentOracle("levels did not produce a bijection")
    pairs = []
    for P in session.known_primes:
        q = state.phi[P]
        D = session.data[P]
        if P.inertia != q.inertia or tuple(state.hcoef[q]) != D.coeffs:
            raise InconsistentOracle(f"local factors at {P} and {q} differ")
        pairs.append(MatchedPair(P, q, P.inertia, D.coeffs, collision=P in state.collision or q in state.collision))
    # an ambiguous choice makes every pair carrying the same local factor ambiguous
    flagged = {(m.f, m.coeffs) for m in pairs if m.collision}
    for m in pairs:
        m.collision = (m.f, m.coeffs) in flagged
    match = PrimeMatch(session.p, pairs, [], cross_level_checks=state.cross_checks, levels=levels)
    _verify_transport_l(session, match, cfg)
    match.queries = session.queries
    return match


def _verify_transport_l(session: OracleSession, match: PrimeMatch, cfg: ReconConfig) -> None:
    rng = random.Random(cfg.seed)
    l = session.order
    mapping = match.mapping()
    hidden = session.hidden_primes
    ok = {m.left: True for m in match.pairs}
    primes = session.known_primes
    for _ in range(cfg.transport_probes):
        chi = LocalChar(l, primes, (0,) * len(primes), tuple(rng.randrange(l) for _ in primes))
        ref = session.known_product(chi)
        if not poly_eq(session.forward(chi), ref):
            raise InconsistentOracle("forward response differs from the known factor")
        if not poly_eq(session.reverse(transport_char(chi, mapping, hidden)), ref):
            raise InconsistentOracle("transported character does not reproduce the factor")
        m = rng.choice(match.pairs)
        moved = _flip(chi, m.left, rng.randrange(1, l))
        if not poly_eq(session.forward(moved), session.reverse(transport_char(moved, mapping, hidden))):
            ok[m.left] = False
    for m in match.pairs:
        m.transport_verified = ok[m.left]


# -- sigma and the isogeny proxy -----------------------------------------------------------
def verify_sigma(sigma: FieldIso, match: PrimeMatch | Sequence[PrimeMatch]) -> bool:
    matches = [match] if isinstance(match, PrimeMatch) else list(match)
    for M in matches:
        for m in M.pairs:
            if apply_iso_to_prime(sigma, m.left) != m.right:
                return False
    return True


def isogeny_proxy_report(E: EllipticCurveOverK, E2: EllipticCurveOverK, sigma: FieldIso, p_max: int) -> dict:
    """Compare L_P(E) with L_sigma(P)(E2) at every good accepted prime over p <= p_max.

    This is the same as comparing E^sigma with E2 prime by prime.  A pass means
    the curves are isogeny-consistent at the tested primes, never a proof of
    isogeny.
    """
    K, K2 = sigma.source, sigma.target
    if E.field != K or E2.field != K2:
        raise ValueError("curves must live in the source and target of sigma")
    rows, failures, skipped = [], [], []
    for p in _primes_upto(p_max):
        if not (is_accepted(K, p) and is_accepted(K2, p)):
            continue
        for P in split_prime(K, p):
            Q = apply_iso_to_prime(sigma, P)
            try:
                D1, D2 = local_data(E, P), local_data(E2, Q)
            except BadReduction:
                skipped.append(str(P))
                continue
            ok = D1.coeffs == D2.coeffs
            rows.append({"prime": str(P), "image": str(Q), "f": P.inertia, "a": D1.a, "a2": D2.a, "pass": ok})
            if not ok:
                failures.append(str(P))
    return {
        "sigma": str(sigma),
        "curve": str(E),
        "curve2": str(E2),
        "p_max": p_max,
        "tested": len(rows),
        "passed": len(rows) - len(failures),
        "failures": failures,
        "skipped_bad_reduction": skipped,
        "isogeny_consistent": not failures,
        "rows": rows,
    }


def find_split_prime(
    K: NumberField,
    K2: NumberField,
    l: int,
    bound: int = 10**5,
    curves: Sequence[EllipticCurveOverK] = (),
) -> int:
    """Smallest p = 1 mod l totally split in both fields with good reduction for the given curves."""
    for p in range(l + 1, bound + 1, l):
        # p = 1 mod l since we start at l + 1 and step by l
        if p % 2 == 0 or not is_prime(p):
            continue
        if not (is_accepted(K, p) and is_accepted(K2, p)):
            continue
        try:
            pr1, pr2 = split_prime(K, p), split_prime(K2, p)
        except ExcludedPrime:
            continue
        if any(P.inertia != 1 for P in pr1 + pr2):
            continue
        try:
            for E in curves:
                for P in split_prime(E.field, p):
                    local_data(E, P)
        except BadReduction:
            continue
        return p
    raise ExcludedPrime(f"no totally split prime p = 1 mod {l} below {bound}")
