"""Acceptance criteria, one test per criterion.  Each test prints a single PASS/FAIL line."""

import random
import time
from itertools import combinations

import pytest

from twistmatch.algebra import is_prime
from twistmatch.characters import LocalChar
from twistmatch.curves import EllipticCurveOverK, LocalData, count_points, local_data, reduce_curve
from twistmatch.errors import BadReduction, ExcludedPrime
from twistmatch.harness import observably_equivalent, random_order_l_instance, random_primes, random_quadratic_instance
from twistmatch.lseries import (
    counterexample_report,
    dirichlet_expand,
    extra_iso_demo,
    factor_at_p,
    first_difference,
    gaussian_example,
    poly_degree,
    render_poly,
    _primes_upto,
)
from twistmatch.numberfield import FieldIso, NumberField, find_isomorphisms, split_prime
from twistmatch.reconstruct import (
    ReconConfig,
    isogeny_proxy_report,
    maximizer_sets,
    reconstruct_order_l,
    reconstruct_quadratic,
)


def verdict(n: int, title: str, ok: bool, elapsed: float, limit: float, detail: str = "") -> None:
    status = "PASS" if ok and elapsed < limit else "FAIL"
    print(f"\ncriterion {n} {status}: {title} ({elapsed:.2f}s, limit {limit:.0f}s) {detail}")
    assert ok, detail
    assert elapsed < limit, f"took {elapsed:.2f}s"


def _random_field(rng: random.Random) -> NumberField:
    while True:
        deg = rng.choice([2, 3])
        coeffs = [rng.randint(-5, 5) for _ in range(deg)] + [1]
        try:
            return NumberField(tuple(coeffs))
        except ValueError:
            continue


def _random_curve(K: NumberField, rng: random.Random) -> EllipticCurveOverK:
    while True:
        a = [rng.randint(-4, 4) for _ in range(K.degree)]
        b = [rng.randint(-4, 4) for _ in range(K.degree)]
        try:
            return EllipticCurveOverK.from_coeffs(K, a, b)
        except ValueError:
            continue


def _good_prime(K, E, rng, p_max):
    for _ in range(200):
        p = rng.choice([q for q in range(3, p_max) if is_prime(q)])
        try:
            primes = split_prime(K, p)
            datas = [local_data(E, P) for P in primes]
        except (ExcludedPrime, BadReduction):
            continue
        return p, primes, datas
    raise RuntimeError("no good prime found")


def test_criterion_1_counterexample():
    t0 = time.perf_counter()
    K, E, sigma = gaussian_example()
    Es = E.conjugate(sigma)
    P1, P2 = split_prime(K, 5)
    counts = (count_points(reduce_curve(E, P1)), count_points(reduce_curve(E, P2)))
    F, Fs = factor_at_p(E, 5), factor_at_p(Es, 5)
    per_prime = [render_poly(lf.poly) for lf in F.per_prime]
    report = counterexample_report(200)
    elapsed = time.perf_counter() - t0
    ok = (
        counts == (10, 2)
        and per_prime == ["1 + 4T + 5T^2", "1 - 4T + 5T^2"]
        and F.render() == Fs.render() == "1 - 6T^2 + 25T^4"
        and report["all_equal"]
        and report["witnesses"][0]["p"] == 5
    )
    verdict(1, "counterexample over Q(i)", ok, elapsed, 1.0, f"counts={counts} factor={F.render()} primes={len(report['primes'])}")


def test_criterion_2_degree_formula():
    t0 = time.perf_counter()
    rng = random.Random(2024)
    bad = []
    for _ in range(50):
        K = _random_field(rng)
        E = _random_curve(K, rng)
        p, primes, _ = _good_prime(K, E, rng, 60)
        full = poly_degree(factor_at_p(E, p).poly)
        if full != 2 * K.degree:
            bad.append((str(K), str(E), p, "untwisted"))
        for r in range(1, len(primes) + 1):
            for S in combinations(primes, r):
                chi = LocalChar.from_values(2, {P: (None if P in S else rng.randrange(2)) for P in primes})
                drop = full - poly_degree(factor_at_p(E, p, chi).poly)
                if drop != 2 * sum(P.inertia for P in S):
                    bad.append((str(K), str(E), p, [str(P) for P in S]))
    elapsed = time.perf_counter() - t0
    verdict(2, "degree 2[K:Q] and ramified drop 2 f_P", not bad, elapsed, 10.0, f"failures={bad[:3]}")


def test_criterion_3_hasse_bound():
    t0 = time.perf_counter()
    rng = random.Random(3)
    checked, bad = 0, []
    while checked < 600:
        K = _random_field(rng)
        E = _random_curve(K, rng)
        p = rng.choice([q for q in range(3, 100) if is_prime(q)])
        try:
            primes = split_prime(K, p)
        except ExcludedPrime:
            continue
        for P in primes:
            if P.norm > 10**4:
                continue
            try:
                D = local_data(E, P)
            except BadReduction:
                continue
            checked += 1
            if D.a * D.a > 4 * P.norm:
                bad.append((str(E), str(P), D.a))
    elapsed = time.perf_counter() - t0
    verdict(3, "Hasse bound |a_P| <= 2 sqrt(N P)", checked >= 500 and not bad, elapsed, 60.0, f"instances={checked} failures={bad[:3]}")


def test_criterion_4_quadratic_round_trip():
    t0 = time.perf_counter()
    rng = random.Random(4)
    equivalent = exact_needed = exact_ok = zeros_ok = 0
    for _ in range(100):
        inst = random_quadratic_instance(rng)
        match = reconstruct_quadratic(inst.known, inst, ReconConfig(seed=rng.randrange(2**32)))
        equivalent += observably_equivalent(inst, match, rng)
        data = {D.prime: D for D in inst.known}
        zero = {P for P, D in data.items() if D.a == 0}
        zeros_ok += {m.left for m in match.undetermined} == zero
        coeffs = [D.coeffs for D in inst.known if D.a != 0]
        if len(set(coeffs)) == len(coeffs):
            exact_needed += 1
            exact_ok += all(inst.phi[m.left] == m.right and m.transport_verified for m in match.pairs)
    elapsed = time.perf_counter() - t0
    ok = equivalent == 100 and exact_ok == exact_needed and zeros_ok == 100
    verdict(
        4, "quadratic reconstruction round trip", ok, elapsed, 30.0,
        f"equivalent={equivalent}/100 exact={exact_ok}/{exact_needed} zeros_undetermined={zeros_ok}/100",
    )


def test_criterion_5_order_l_round_trip():
    t0 = time.perf_counter()
    rng = random.Random(5)
    combos = [(5, 1), (5, 2), (7, 1), (7, 2)]
    done = factor_ok = cross_ok = equivalent = 0
    mixed = 0
    for i in range(100):
        l, d = combos[i % 4]
        inst = random_order_l_instance(rng, l=l, d=d)
        mixed += len({P.inertia for P in inst.known_primes}) > 1
        match = reconstruct_order_l(inst.known, inst, l, ReconConfig(seed=rng.randrange(2**32)))
        hidden = inst.hidden_data()
        done += 1
        factor_ok += all(hidden[m.right].coeffs == m.coeffs and m.right.inertia == m.left.inertia for m in match.pairs)
        # each level after the first at which a prime appears re-checks its partner
        expected = sum(sum(1 for a in m.coeffs if a) - 1 for m in match.pairs)
        cross_ok += match.cross_level_checks == expected
        equivalent += observably_equivalent(inst, match, rng, trials=20)
    elapsed = time.perf_counter() - t0
    ok = factor_ok == cross_ok == equivalent == done == 100 and mixed > 0
    verdict(
        5, "order-l reconstruction round trip", ok, elapsed, 120.0,
        f"factors={factor_ok} cross_level={cross_ok} equivalent={equivalent} mixed_inertia={mixed}",
    )


def test_criterion_6_maximizer():
    t0 = time.perf_counter()
    rng = random.Random(6)
    mismatches, cases = [], 0
    for n in (1, 2, 3, 4):
        for _ in range(6):
            primes = random_primes(11, [1] * n, rng)
            datas = [LocalData(P, 1, (rng.choice([-5, -3, -1, 0, 1, 2, 4, 6]), 11)) for P in primes]
            argmax, characterised = maximizer_sets(datas, 1, 5)
            cases += 1
            if argmax != characterised:
                mismatches.append([D.a for D in datas])
    elapsed = time.perf_counter() - t0
    verdict(6, "maximiser set of Re c, l = 5", not mismatches, elapsed, 10.0, f"cases={cases} mismatches={mismatches[:3]}")


def test_criterion_7_dirichlet_equivalence():
    t0 = time.perf_counter()
    N = 10**4
    rng = random.Random(7)
    primes = _primes_upto(N)
    base = {}
    for p in primes:
        b = int(2 * p**0.5)
        base[p] = (1, rng.randint(-b, b), p)
    c = dirichlet_expand(base, N)
    # the same factors written with trailing zeros are the same family
    same = {p: f + (0,) for p, f in base.items()}
    checks = [first_difference(c, dirichlet_expand(same, N)) is None]
    results = []
    for p, k in [(3, 1), (3, 2), (97, 1), (97, 2), (2, 13), (9973, 1), (101, 2), (23, 3)]:
        fam = dict(base)
        poly = list(fam[p]) + [0] * (k + 1)
        poly[k] += 1
        fam[p] = tuple(poly)
        first = first_difference(c, dirichlet_expand(fam, N))
        affected = p**k if p**k <= N else None
        results.append((p, k, first, affected))
        checks.append(first == affected)
    elapsed = time.perf_counter() - t0
    verdict(7, "Dirichlet coefficients detect factor changes", all(checks), elapsed, 10.0, f"(p, k, first, expected)={results}")


def test_criterion_8_extra_isomorphism():
    t0 = time.perf_counter()
    report = extra_iso_demo(5, 1000, [1, -1, 2, -2, 3, -3, 5, -5, 6, -6])
    moved = sum(r["psi_d"] != r["d"] for r in report["per_d"])
    elapsed = time.perf_counter() - t0
    ok = report["all_equal"] and report["zero_trace_ok"] and report["checks"] > 1500 and moved > 0
    verdict(8, "extra isomorphism for y^2 = x^3 - x", ok, elapsed, 60.0, f"checks={report['checks']} psi_moves={moved}")


def test_criterion_9_isogeny_proxy():
    t0 = time.perf_counter()
    K = NumberField.parse("x^2-2")
    sigma = next(s for s in find_isomorphisms(K, K) if s.image_of_theta != K.theta)
    E = EllipticCurveOverK.from_coeffs(K, K.theta, 0)
    good = isogeny_proxy_report(E, E.conjugate(sigma), sigma, 500)
    E1 = EllipticCurveOverK.from_coeffs(K, K.theta, 1)
    wrong = isogeny_proxy_report(E1, E1.conjugate(sigma), FieldIso.identity(K), 500)
    elapsed = time.perf_counter() - t0
    ok = good["isogeny_consistent"] and good["tested"] > 100 and len(wrong["failures"]) >= 1
    verdict(
        9, "isogeny proxy over Q(sqrt 2)", ok, elapsed, 30.0,
        f"sigma: {good['passed']}/{good['tested']} pass; identity: {len(wrong['failures'])} failures",
    )
